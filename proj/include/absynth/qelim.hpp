#pragma once

#include "absynth/dnf.hpp"

namespace absynth {

/// Quantifier elimination engine selector. Loos-Weispfenning virtual
/// substitution is the default; Ferrante-Rackoff and DNF+projection serve as
/// independent oracles for differential testing.
enum class QeMethod { LoosWeispfenning, FerranteRackoff, DnfProjection };

inline const char* qeMethodName(QeMethod m) {
  switch (m) {
    case QeMethod::LoosWeispfenning: return "loos-weispfenning";
    case QeMethod::FerranteRackoff: return "ferrante-rackoff";
    case QeMethod::DnfProjection: return "dnf-projection";
  }
  return "?";
}

namespace detail {

enum class PointKind { Finite, FinitePlusEpsilon, MinusInfinity, PlusInfinity };

struct TestPoint {
  PointKind kind;
  LinTerm base;  // unused for infinities

  bool operator<(const TestPoint& o) const {
    if (kind != o.kind) return kind < o.kind;
    return base.compare(o.base) < 0;
  }
};

/// Solves  c*x + r ⋈ 0  for x, returning the boundary point -r/c.
inline LinTerm solveBoundary(const Atom& a, const VarId& x) {
  Rational c = a.lhs().coeff(x);
  LinTerm r = a.lhs();
  r.addTerm(x, -c);
  r *= Rational(-1) / c;
  return r;
}

/// Virtual substitution of a test point into one atom containing x.
inline Formula substAtom(const Atom& a, const VarId& x, const TestPoint& p) {
  Rational c = a.lhs().coeff(x);
  switch (p.kind) {
    case PointKind::Finite: {
      LinTerm t = a.lhs();
      t.addTerm(x, -c);
      t += p.base * c;
      return Formula::atom(std::move(t), a.rel());
    }
    case PointKind::FinitePlusEpsilon: {
      if (a.rel() == Rel::Eq) return Formula::falseF();
      LinTerm t = a.lhs();
      t.addTerm(x, -c);
      t += p.base * c;
      // value + c*eps ⋈ 0: a positive slope needs strict room below zero,
      // a negative slope absorbs the infinitesimal.
      return Formula::atom(std::move(t), c > 0 ? Rel::Lt : Rel::Le);
    }
    case PointKind::MinusInfinity:
      if (a.rel() == Rel::Eq) return Formula::falseF();
      return Formula::boolean(c > 0);
    case PointKind::PlusInfinity:
      if (a.rel() == Rel::Eq) return Formula::falseF();
      return Formula::boolean(c < 0);
  }
  return Formula::falseF();
}

inline Formula virtualSubst(const Formula& f, const VarId& x, const TestPoint& p) {
  switch (f.kind()) {
    case FKind::True:
    case FKind::False: return f;
    case FKind::Atom:
      if (!f.theAtom().mentions(x)) return f;
      return substAtom(f.theAtom(), x, p);
    case FKind::Not: return Formula::notF(virtualSubst(f.child(0), x, p));
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> cs;
      cs.reserve(f.children().size());
      for (const auto& c : f.children()) cs.push_back(virtualSubst(c, x, p));
      return f.kind() == FKind::And ? Formula::andF(std::move(cs)) : Formula::orF(std::move(cs));
    }
    default: throw QuantifiedInput("virtual substitution on a quantified formula");
  }
}

inline void collectAtoms(const Formula& f, std::vector<Atom>& out) {
  switch (f.kind()) {
    case FKind::Atom: out.push_back(f.theAtom()); return;
    default:
      for (const auto& c : f.children()) collectAtoms(c, out);
  }
}

struct LinTermLess {
  bool operator()(const LinTerm& a, const LinTerm& b) const { return a.compare(b) < 0; }
};

/// Test points for Loos-Weispfenning virtual substitution: -infinity, the
/// boundary e for = and <= atoms, e + epsilon for < atoms. Infinitesimals are
/// erased during substitution and never appear in the output.
inline std::set<TestPoint> pointsLW(const std::vector<Atom>& atoms, const VarId& x) {
  std::set<TestPoint> points;
  points.insert(TestPoint{PointKind::MinusInfinity, LinTerm()});
  for (const auto& a : atoms) {
    if (!a.mentions(x)) continue;
    LinTerm e = solveBoundary(a, x);
    points.insert(TestPoint{a.rel() == Rel::Lt ? PointKind::FinitePlusEpsilon : PointKind::Finite,
                            std::move(e)});
  }
  return points;
}

/// Test points for Ferrante-Rackoff substitution: every boundary point e_i,
/// all midpoints (e_i+e_j)/2, and both infinities.
inline std::set<TestPoint> pointsFR(const std::vector<Atom>& atoms, const VarId& x) {
  std::set<LinTerm, LinTermLess> es;
  for (const auto& a : atoms)
    if (a.mentions(x)) es.insert(solveBoundary(a, x));
  std::set<TestPoint> points;
  points.insert(TestPoint{PointKind::MinusInfinity, LinTerm()});
  points.insert(TestPoint{PointKind::PlusInfinity, LinTerm()});
  for (auto i = es.begin(); i != es.end(); ++i) {
    points.insert(TestPoint{PointKind::Finite, *i});
    for (auto j = std::next(i); j != es.end(); ++j)
      points.insert(TestPoint{PointKind::Finite, (*i + *j) * Rational(1, 2)});
  }
  return points;
}

inline bool mentionsVar(const Formula& f, const VarId& x) {
  switch (f.kind()) {
    case FKind::Atom: return f.theAtom().mentions(x);
    default:
      for (const auto& c : f.children())
        if (mentionsVar(c, x)) return true;
      return false;
  }
}

/// Substitution over the whole test-point set of one subformula.
inline Formula substAllPoints(const Formula& f, const VarId& x, bool loosWeispfenning,
                              Budget& budget) {
  std::vector<Atom> atoms;
  collectAtoms(f, atoms);
  std::set<TestPoint> points = loosWeispfenning ? pointsLW(atoms, x) : pointsFR(atoms, x);
  budget.checkSize(f.nodeCount() * points.size());
  std::vector<Formula> branches;
  branches.reserve(points.size());
  for (const auto& p : points) branches.push_back(virtualSubst(f, x, p));
  return Formula::orF(std::move(branches));
}

/// One existential variable via substitution, distributing the quantifier
/// over disjunctions and factoring x-free conjuncts first so each piece only
/// sees its own atoms. Expects negation normal form.
inline Formula eliminateVarSubst(const Formula& f, const VarId& x, bool loosWeispfenning,
                                 Budget& budget) {
  budget.checkTime();
  if (!mentionsVar(f, x)) return f;
  if (f.kind() == FKind::Or) {
    std::vector<Formula> cs;
    cs.reserve(f.children().size());
    for (const auto& c : f.children())
      cs.push_back(eliminateVarSubst(c, x, loosWeispfenning, budget));
    return Formula::orF(std::move(cs));
  }
  if (f.kind() == FKind::And) {
    std::vector<Formula> free, bound;
    for (const auto& c : f.children())
      (mentionsVar(c, x) ? bound : free).push_back(c);
    if (!free.empty()) {
      Formula inner = eliminateVarSubst(Formula::andF(std::move(bound)), x, loosWeispfenning, budget);
      free.push_back(std::move(inner));
      return Formula::andF(std::move(free));
    }
  }
  return substAllPoints(f, x, loosWeispfenning, budget);
}

/// Existential block by conversion to DNF followed by per-disjunct
/// Fourier-Motzkin projection.
inline Formula eliminateBlockProjection(const Formula& f, const std::vector<VarId>& vars,
                                        Budget& budget) {
  DnfClauses clauses = dnfClauses(f, /*prune=*/true, budget);
  std::vector<Formula> out;
  out.reserve(clauses.size());
  for (const auto& c : clauses) {
    budget.checkTime();
    out.push_back(conjToFormula(projectConjunction(c, vars)));
  }
  return Formula::orF(std::move(out));
}

inline std::vector<VarId> byAscendingOccurrence(const Formula& f, std::vector<VarId> vars) {
  std::vector<Atom> atoms;
  collectAtoms(f, atoms);
  auto count = [&](const VarId& v) {
    size_t n = 0;
    for (const auto& a : atoms)
      if (a.mentions(v)) ++n;
    return n;
  };
  std::stable_sort(vars.begin(), vars.end(), [&](const VarId& a, const VarId& b) {
    size_t ca = count(a), cb = count(b);
    return ca != cb ? ca < cb : a < b;
  });
  return vars;
}

inline Formula eliminateExistsBlock(const Formula& body, std::vector<VarId> vars, QeMethod method,
                                    Budget& budget) {
  if (method == QeMethod::DnfProjection) return eliminateBlockProjection(body, vars, budget);
  Formula f = body;
  while (!vars.empty()) {
    // Recompute the order as elimination changes occurrence counts.
    vars = byAscendingOccurrence(f, std::move(vars));
    VarId x = vars.front();
    vars.erase(vars.begin());
    f = eliminateVarSubst(f.nnf(), x, method == QeMethod::LoosWeispfenning, budget);
    budget.checkSize(f.nodeCount());
  }
  return f;
}

inline Formula eliminateRec(const Formula& f, QeMethod method, Budget& budget) {
  switch (f.kind()) {
    case FKind::True:
    case FKind::False:
    case FKind::Atom: return f;
    case FKind::Not: return Formula::notF(eliminateRec(f.child(0), method, budget));
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> cs;
      cs.reserve(f.children().size());
      for (const auto& c : f.children()) cs.push_back(eliminateRec(c, method, budget));
      return f.kind() == FKind::And ? Formula::andF(std::move(cs)) : Formula::orF(std::move(cs));
    }
    case FKind::Exists: {
      Formula body = eliminateRec(f.child(0), method, budget);
      return eliminateExistsBlock(body, f.boundVars(), method, budget);
    }
    case FKind::Forall: {
      Formula body = eliminateRec(f.child(0), method, budget);
      Formula inner =
          eliminateExistsBlock(Formula::notF(body).nnf(), f.boundVars(), method, budget);
      return Formula::notF(inner).nnf();
    }
  }
  return f;
}

}  // namespace detail

/// Eliminates every quantifier, innermost first; universal blocks go through
/// the double negation. The result is equivalent over the rationals and its
/// free variables are contained in those of the input.
inline Formula eliminate(const Formula& f, QeMethod method, Budget& budget) {
  return detail::eliminateRec(f, method, budget);
}

inline Formula eliminate(const Formula& f, QeMethod method = QeMethod::LoosWeispfenning) {
  Budget b = Budget::unlimited();
  return eliminate(f, method, b);
}

/// Satisfiability of an arbitrary quantifier-free formula.
inline bool isSatFormula(const Formula& f, Budget& budget) {
  return !dnfClauses(f, /*prune=*/true, budget).empty();
}
inline bool isSatFormula(const Formula& f) {
  Budget b = Budget::unlimited();
  return isSatFormula(f, b);
}

/// true iff premise implies conclusion over the rationals (both
/// quantifier-free).
inline bool impliesFormula(const Formula& premise, const Formula& conclusion, Budget& budget) {
  return !isSatFormula(Formula::andF({premise, Formula::notF(conclusion)}), budget);
}

/// Elimination with simplification modulo an assumption. Returns F' in DNF
/// such that  F' && t  is equivalent to  (exists vars . f) && t, with no
/// literal implied by t alone and every disjunct jointly satisfiable with t.
inline Formula qelimDnfModulo(const std::vector<VarId>& vars, const Formula& f, const Formula& t,
                              QeMethod method, Budget& budget) {
  Formula g = f.isQuantifierFree() ? f : eliminate(f, method, budget);
  if (!vars.empty()) g = detail::eliminateExistsBlock(g, vars, method, budget);
  DnfClauses clauses = dnfClauses(g, /*prune=*/true, budget);
  DnfClauses tClauses = dnfClauses(t, /*prune=*/true, budget);

  auto satWithT = [&](const Conjunct& c) {
    for (const auto& tc : tClauses) {
      Conjunct both = c;
      both.insert(both.end(), tc.begin(), tc.end());
      if (isSatConj(both)) return true;
    }
    return false;
  };
  auto impliedByT = [&](const Atom& lit) {
    // t => lit  iff  t && !lit is unsatisfiable.
    std::vector<Conjunct> negs;
    if (lit.rel() == Rel::Eq) {
      negs.push_back({Atom(lit.lhs(), Rel::Lt)});
      negs.push_back({Atom(-lit.lhs(), Rel::Lt)});
    } else {
      negs.push_back({lit.negated()});
    }
    for (const auto& tc : tClauses)
      for (const auto& n : negs) {
        Conjunct both = tc;
        both.insert(both.end(), n.begin(), n.end());
        if (isSatConj(both)) return false;
      }
    return true;
  };

  DnfClauses out;
  for (const auto& c : clauses) {
    budget.checkTime();
    if (!satWithT(c)) continue;
    Conjunct kept;
    for (const auto& lit : c)
      if (!impliedByT(lit)) kept.push_back(lit);
    if (kept.empty()) return Formula::trueF();
    out.push_back(std::move(kept));
  }
  detail::sortClauses(out);
  detail::dropSubsumedClauses(out);
  return clausesToFormula(out);
}

inline Formula qelimDnfModulo(const std::vector<VarId>& vars, const Formula& f, const Formula& t,
                              QeMethod method = QeMethod::LoosWeispfenning) {
  Budget b = Budget::unlimited();
  return qelimDnfModulo(vars, f, t, method, b);
}

}  // namespace absynth
