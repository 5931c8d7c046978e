#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>

#include "absynth/oracle.hpp"

namespace absynth {

/// A synthesized output parameter: `defining` relates the input parameters to
/// the unique optimal value of `param`; `validityDomain` is the input region
/// where such a value exists.
struct SolvedParameter {
  VarId param;
  Formula defining;
  Formula validityDomain;
};

/// Result for one template row. With the infinities extension the flag
/// parameter is minimized first (finite bounds win), then the finite part on
/// the region where the flag is zero.
struct SolvedRow {
  TemplateRow row;
  SolvedParameter main;
  std::optional<SolvedParameter> infinityFlag;
};

namespace detail {

inline size_t workerLimit() {
  if (const char* env = std::getenv("ABSYNTH_THREADS")) {
    long n = std::atol(env);
    if (n >= 1) return static_cast<size_t>(n);
  }
  return 1;
}

/// Deterministic parallel map over row indices: results land by index, the
/// first (by index) captured exception is rethrown.
template <class Fn>
inline void forEachRow(size_t n, Fn fn) {
  size_t workers = std::min(workerLimit(), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline VarId freshParamCopy(const VarId& p) { return VarId(p.name + "#2", VarSort::Auxiliary); }

}  // namespace detail

/// Least-value extraction: given the quantifier-free admissibility formula H
/// over inputs and the primed parameters, computes the defining formula of
/// one parameter q per the componentwise minimum,
///   O = (exists siblings . H) && (forall copies . H[copies] => q <= copy_q),
/// plus its validity domain.
inline SolvedParameter solveRowMinimum(const Formula& hQf, const VarId& q,
                                       const std::vector<VarId>& primedParams, QeMethod method,
                                       Budget& budget) {
  std::vector<VarId> siblings;
  for (const auto& p : primedParams)
    if (p != q) siblings.push_back(p);
  Formula partA = eliminate(Formula::exists(siblings, hQf), method, budget);

  std::map<VarId, VarId> ren;
  std::vector<VarId> copies;
  for (const auto& p : primedParams) {
    VarId c = detail::freshParamCopy(p);
    ren.emplace(p, c);
    copies.push_back(c);
  }
  Formula hCopies = hQf.renamed(ren);
  Formula minimality = Formula::forall(
      copies, Formula::implies(hCopies, Formula::le(LinTerm::var(q), LinTerm::var(ren.at(q)))));
  Formula partB = eliminate(minimality, method, budget);

  SolvedParameter out;
  out.param = q;
  out.defining = qelimDnfModulo({}, Formula::andF({partA, partB}), Formula::trueF(), method, budget);
  out.validityDomain =
      qelimDnfModulo({}, eliminate(Formula::exists({q}, out.defining), method, budget),
                     Formula::trueF(), method, budget);
  return out;
}

/// Minimizes one template row against H: directly, or lexicographically
/// (flag, then finite part) under the infinities extension.
inline SolvedRow solveTemplateRow(const Formula& hQf, const TemplateRow& row,
                                  const ExtensionFlags& ext, const std::vector<VarId>& allParams,
                                  QeMethod method, Budget& budget) {
  SolvedRow out;
  out.row = row;
  if (!ext.infinities) {
    out.main = solveRowMinimum(hQf, row.param, allParams, method, budget);
    return out;
  }
  VarId flag = infinityFlagParam(row.param), fin = finitePartParam(row.param);
  out.infinityFlag = solveRowMinimum(hQf, flag, allParams, method, budget);
  Formula pinned = Formula::andF({hQf, out.infinityFlag->defining});
  out.main = solveRowMinimum(pinned, fin, allParams, method, budget);
  return out;
}

/// Unique model extraction for a defining formula with a single free
/// variable. Returns nothing when the formula does not pin one rational.
inline std::optional<Rational> pinUniqueValue(const Formula& defining, const VarId& p) {
  DnfClauses clauses = dnfClauses(defining, /*prune=*/true);
  std::optional<Rational> value;
  for (const auto& clause : clauses) {
    std::optional<Rational> lo, hi, pin;
    bool loStrict = false, hiStrict = false;
    for (const auto& a : clause) {
      Rational c = a.lhs().coeff(p);
      if (c == 0) {
        if (!a.lhs().isConstant()) return std::nullopt;  // another free variable
        continue;
      }
      Rational bound = -a.lhs().constant() / c;
      if (a.rel() == Rel::Eq) {
        if (pin && *pin != bound) return std::nullopt;
        pin = bound;
      } else if (c > 0) {
        if (!hi || bound < *hi) hi = bound, hiStrict = a.rel() == Rel::Lt;
      } else {
        if (!lo || bound > *lo) lo = bound, loStrict = a.rel() == Rel::Lt;
      }
    }
    std::optional<Rational> v;
    if (pin)
      v = pin;
    else if (lo && hi && *lo == *hi && !loStrict && !hiStrict)
      v = lo;
    else
      return std::nullopt;
    if (value && *value != *v) return std::nullopt;
    value = v;
  }
  return value;
}

// ---------------------------------------------------------------------------
// Problem descriptions

struct SynthesisProblem {
  enum class Kind { Transformer, Invariant, Cutset, Recursive, MinimalElements };

  Kind kind = Kind::Transformer;
  ProgramAst program;
  Template pre;    // precondition rows (may be empty)
  Template post;   // postcondition / invariant rows
  std::vector<Template> cutTemplates;  // per label, kind == Cutset
  std::vector<std::string> cutLabels;
  SemanticsMode mode;
  ExtensionFlags ext;
  bool includeInit = true;  // invariant kinds: require initial states inside
  Formula assumption = Formula::trueF();  // don't-care context for output
  QeMethod method = QeMethod::LoosWeispfenning;

  // Recursive problems: relation shape over (inputs, output) with free
  // parameter variables.
  std::vector<VarId> relationInputs;
  VarId relationOutput;
  Formula relationShape = Formula::trueF();
};

namespace detail {

/// Dynamic state variables: everything assigned plus everything a template
/// row mentions. Remaining program variables act as rigid symbolic
/// parameters and stay free in the synthesized formulas.
inline std::vector<VarId> dynamicStateVars(const ProgramAst& program,
                                           const std::vector<const Template*>& tpls) {
  std::set<VarId> dyn;
  collectAssigned(program.body, dyn);
  for (const Template* t : tpls)
    for (const auto& r : t->rows)
      for (const auto& [v, c] : r.form.coeffs()) dyn.insert(v);
  std::vector<VarId> out;
  for (const auto& v : program.vars)
    if (dyn.count(v)) out.push_back(v);
  return out;
}

/// forall (stateVars, primed, auxiliaries) . premiseWithExists => conclusion
inline Formula universalTransition(const Formula& premise, const Formula& conclusion,
                                   const std::vector<VarId>& stateVars, bool primedToo) {
  std::vector<VarId> aux;
  Formula matrix;
  prenexExists(premise, aux, matrix);
  std::vector<VarId> all = stateVars;
  if (primedToo)
    for (const auto& v : stateVars) all.push_back(primed(v));
  all.insert(all.end(), aux.begin(), aux.end());
  return Formula::forall(all, Formula::implies(matrix, conclusion));
}

inline Formula instantiateRowFormula(const TemplateRow& row, const ExtensionFlags& ext,
                                     bool primedState) {
  Template one;
  one.rows = {row};
  return templateFormula(one, ext, primedState);
}

}  // namespace detail

/// Optimal abstract postcondition of a loop-free block: for each post row the
/// least sound bound as a function of the precondition parameters.
inline std::vector<SolvedRow> optimalPostcondition(const SynthesisProblem& sp, Budget& budget) {
  if (containsWhile(sp.program.body)) throw LoopInLoopFreeContext();
  std::vector<VarId> stateVars = detail::dynamicStateVars(sp.program, {&sp.pre, &sp.post});
  SemanticsBuilder builder(stateVars, sp.mode);
  Formula rel = builder.relation(sp.program.body);
  Formula preF = templateFormula(sp.pre, ExtensionFlags{});
  Formula premise = Formula::andF({preF, rel});

  std::vector<SolvedRow> rows(sp.post.rows.size());
  detail::forEachRow(sp.post.rows.size(), [&](size_t i) {
    Budget local = budget;
    const TemplateRow& row = sp.post.rows[i];
    Formula conclusion = detail::instantiateRowFormula(row, sp.ext, /*primedState=*/true);
    Formula correctness =
        detail::universalTransition(premise, conclusion, stateVars, /*primedToo=*/true);
    Formula c = eliminate(correctness, sp.method, local);
    Template one;
    one.rows = {row};
    Formula side = extensionSideConditions(one, sp.ext);
    Formula h = Formula::andF({c, side});
    rows[i] = solveTemplateRow(h, row, sp.ext, templateParams(one, sp.ext), sp.method, local);
  });
  return rows;
}

namespace detail {

/// Splits an invariant-kind program into loop-free prefix and single loop.
inline std::pair<StmtPtr, StmtPtr> splitPrefixLoop(const ProgramAst& program) {
  std::vector<StmtPtr> prefix;
  StmtPtr loop;
  const Stmt& body = *program.body;
  const std::vector<StmtPtr>& seq =
      body.kind == Stmt::K::Seq ? body.seq : std::vector<StmtPtr>{program.body};
  for (const auto& s : seq) {
    if (loop) throw Error("statements after the loop are not supported");
    if (s->kind == Stmt::K::While) {
      loop = s;
      continue;
    }
    if (containsWhile(s)) throw Error("loops must appear at the top level");
    prefix.push_back(s);
  }
  if (!loop) throw Error("no loop found for invariant synthesis");
  auto pre = std::make_shared<Stmt>();
  pre->kind = Stmt::K::Seq;
  pre->seq = std::move(prefix);
  return {pre, loop};
}

struct InvariantSystem {
  Formula h;                        // quantifier-free admissibility formula
  std::vector<VarId> params;        // all primed parameters, row order
  std::vector<const Template*> templates;
};

}  // namespace detail

/// Admissibility formula of the least-invariant problem (Eq-style: initial
/// inclusion plus stability), already quantifier-free.
inline detail::InvariantSystem invariantSystem(const SynthesisProblem& sp, Budget& budget) {
  auto [prefix, loop] = detail::splitPrefixLoop(sp.program);
  std::vector<VarId> stateVars = detail::dynamicStateVars(sp.program, {&sp.pre, &sp.post});
  SemanticsBuilder builder(stateVars, sp.mode);

  Formula invUnprimed = templateFormula(sp.post, sp.ext, /*primedState=*/false);
  Formula invPrimed = templateFormula(sp.post, sp.ext, /*primedState=*/true);

  Formula guard = builder.condition(loop->cond, false);
  Formula bodyRel = builder.relation(loop->body);
  Formula stabilityPremise = Formula::andF({invUnprimed, guard, bodyRel});
  Formula stability =
      detail::universalTransition(stabilityPremise, invPrimed, stateVars, /*primedToo=*/true);

  std::vector<Formula> parts;
  if (sp.includeInit) {
    Formula initRel = builder.relation(prefix);
    Formula preF = templateFormula(sp.pre, ExtensionFlags{});
    Formula initPremise = Formula::andF({preF, initRel});
    parts.push_back(
        detail::universalTransition(initPremise, invPrimed, stateVars, /*primedToo=*/true));
  }
  parts.push_back(stability);

  detail::InvariantSystem sys;
  sys.h = Formula::andF(
      {eliminate(Formula::andF(std::move(parts)), sp.method, budget),
       extensionSideConditions(sp.post, sp.ext)});
  sys.params = templateParams(sp.post, sp.ext);
  sys.templates = {&sp.post};
  return sys;
}

/// Least inductive invariant of a single loop, per row of the invariant
/// template. Throws NoInvariantOfShape when no parameters are admissible.
inline std::vector<SolvedRow> leastInvariant(const SynthesisProblem& sp, Budget& budget) {
  detail::InvariantSystem sys = invariantSystem(sp, budget);
  if (!isSatFormula(sys.h, budget)) throw NoInvariantOfShape();
  std::vector<SolvedRow> rows(sp.post.rows.size());
  detail::forEachRow(sp.post.rows.size(), [&](size_t i) {
    Budget local = budget;
    rows[i] = solveTemplateRow(sys.h, sp.post.rows[i], sp.ext, sys.params, sp.method, local);
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Cut-set systems

namespace detail {

struct CfgEdge {
  size_t to;
  StmtPtr action;  // primitive statement or a (possibly negated) assume
};

struct CfgNode {
  int cutIndex = -1;  // >= 0 for loop heads in the cut set
  std::vector<CfgEdge> out;
};

class CfgBuilder {
 public:
  std::vector<CfgNode> nodes;
  size_t entry = 0, exit = 0;
  size_t loopsSeen = 0;

  static StmtPtr assumeStmt(const Cond& c, bool negate) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::K::Assume;
    s->cond = negate ? Cond::logical(Cond::K::Not, {c}) : c;
    return s;
  }
  static StmtPtr skipStmt() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::K::Skip;
    return s;
  }

  size_t fresh() {
    nodes.emplace_back();
    return nodes.size() - 1;
  }

  void edge(size_t from, size_t to, StmtPtr action) {
    nodes[from].out.push_back(CfgEdge{to, std::move(action)});
  }

  /// Lowers a statement between two nodes.
  void lower(const StmtPtr& s, size_t in, size_t out) {
    switch (s->kind) {
      case Stmt::K::Seq: {
        size_t cur = in;
        for (size_t i = 0; i < s->seq.size(); ++i) {
          size_t nxt = i + 1 == s->seq.size() ? out : fresh();
          lower(s->seq[i], cur, nxt);
          cur = nxt;
        }
        if (s->seq.empty()) edge(in, out, skipStmt());
        return;
      }
      case Stmt::K::If: {
        size_t t = fresh(), e = fresh();
        if (s->cond.isNondet()) {
          edge(in, t, skipStmt());
          edge(in, e, skipStmt());
        } else {
          edge(in, t, assumeStmt(s->cond, false));
          edge(in, e, assumeStmt(s->cond, true));
        }
        lower(s->thenS, t, out);
        lower(s->elseS, e, out);
        return;
      }
      case Stmt::K::While: {
        size_t head = fresh();
        nodes[head].cutIndex = static_cast<int>(loopsSeen++);
        edge(in, head, skipStmt());
        size_t bodyIn = fresh();
        if (s->cond.isNondet()) {
          edge(head, bodyIn, skipStmt());
          edge(head, out, skipStmt());
        } else {
          edge(head, bodyIn, assumeStmt(s->cond, false));
          edge(head, out, assumeStmt(s->cond, true));
        }
        lower(s->body, bodyIn, head);
        return;
      }
      case Stmt::K::Fail: return;  // no outgoing execution
      default: edge(in, out, s); return;
    }
  }
};

struct CutPath {
  int fromCut;  // -1 for entry
  int toCut;
  StmtPtr program;
};

/// Enumerates all cut-free paths between cut points (and from the entry).
/// A cycle avoiding every cut point raises UncutCycle.
inline std::vector<CutPath> enumerateCutPaths(const ProgramAst& program, size_t labelCount) {
  CfgBuilder b;
  b.entry = b.fresh();
  b.exit = b.fresh();
  b.lower(program.body, b.entry, b.exit);
  if (b.loopsSeen != labelCount)
    throw Error("cut-set label count (" + std::to_string(labelCount) +
                ") does not match the number of loops (" + std::to_string(b.loopsSeen) + ")");

  std::vector<CutPath> out;
  std::vector<StmtPtr> actions;
  std::vector<bool> onStack(b.nodes.size(), false);

  std::function<void(size_t, int)> dfs = [&](size_t node, int fromCut) {
    for (const auto& e : b.nodes[node].out) {
      const CfgNode& target = b.nodes[e.to];
      actions.push_back(e.action);
      if (target.cutIndex >= 0) {
        auto seq = std::make_shared<Stmt>();
        seq->kind = Stmt::K::Seq;
        seq->seq = actions;
        out.push_back(CutPath{fromCut, target.cutIndex, seq});
      } else if (e.to == b.exit) {
        // exit paths do not constrain invariants
      } else {
        if (onStack[e.to]) throw UncutCycle("a loop-free region repeats a program point");
        onStack[e.to] = true;
        dfs(e.to, fromCut);
        onStack[e.to] = false;
      }
      actions.pop_back();
    }
  };

  onStack[b.entry] = true;
  dfs(b.entry, -1);
  onStack[b.entry] = false;
  for (size_t n = 0; n < b.nodes.size(); ++n) {
    if (b.nodes[n].cutIndex < 0) continue;
    std::fill(onStack.begin(), onStack.end(), false);
    onStack[n] = true;
    dfs(n, b.nodes[n].cutIndex);
  }
  return out;
}

}  // namespace detail

/// Joint least invariant over a labeled cut set: one stability implication
/// per loop-free inter-label path plus initial-state inclusion, minimized
/// per row against the conjoined system.
inline std::vector<std::vector<SolvedRow>> cutsetInvariant(const SynthesisProblem& sp,
                                                           Budget& budget) {
  if (sp.cutTemplates.size() != sp.cutLabels.size())
    throw Error("one template per cut label required");
  std::vector<const Template*> tplPtrs{&sp.pre};
  for (const auto& t : sp.cutTemplates) tplPtrs.push_back(&t);
  std::vector<VarId> stateVars = detail::dynamicStateVars(sp.program, tplPtrs);
  SemanticsBuilder builder(stateVars, sp.mode);

  std::vector<detail::CutPath> paths = detail::enumerateCutPaths(sp.program, sp.cutLabels.size());

  std::vector<Formula> conjuncts;
  for (const auto& p : paths) {
    if (p.fromCut < 0 && !sp.includeInit) continue;
    Formula rel = builder.relation(p.program);
    std::vector<Formula> premiseParts;
    if (p.fromCut < 0) {
      premiseParts.push_back(templateFormula(sp.pre, ExtensionFlags{}));
    } else {
      premiseParts.push_back(
          templateFormula(sp.cutTemplates[p.fromCut], sp.ext, /*primedState=*/false));
    }
    premiseParts.push_back(rel);
    Formula conclusion =
        templateFormula(sp.cutTemplates[p.toCut], sp.ext, /*primedState=*/true);
    conjuncts.push_back(detail::universalTransition(Formula::andF(std::move(premiseParts)),
                                                    conclusion, stateVars, /*primedToo=*/true));
  }

  std::vector<Formula> sides;
  std::vector<VarId> params;
  for (const auto& t : sp.cutTemplates) {
    sides.push_back(extensionSideConditions(t, sp.ext));
    for (const auto& p : templateParams(t, sp.ext)) params.push_back(p);
  }
  Formula h = Formula::andF(
      {eliminate(Formula::andF(std::move(conjuncts)), sp.method, budget),
       Formula::andF(std::move(sides))});
  if (!isSatFormula(h, budget)) throw NoInvariantOfShape();

  std::vector<std::vector<SolvedRow>> out(sp.cutTemplates.size());
  for (size_t t = 0; t < sp.cutTemplates.size(); ++t)
    out[t].resize(sp.cutTemplates[t].rows.size());
  std::vector<std::pair<size_t, size_t>> flat;
  for (size_t t = 0; t < sp.cutTemplates.size(); ++t)
    for (size_t r = 0; r < sp.cutTemplates[t].rows.size(); ++r) flat.emplace_back(t, r);
  detail::forEachRow(flat.size(), [&](size_t i) {
    Budget local = budget;
    auto [t, r] = flat[i];
    out[t][r] =
        solveTemplateRow(h, sp.cutTemplates[t].rows[r], sp.ext, params, sp.method, local);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Recursive procedures

struct RecursiveSolution {
  Formula admissible;  // over the relation-shape parameters
  std::map<VarId, Rational> pinned;  // values when uniquely determined
  bool unique = false;
};

/// Input-output relation synthesis for a self-recursive procedure: each call
/// site is replaced by an instance of the relation shape, the body inclusion
/// is universally quantified and eliminated, leaving the admissible
/// parameters; unique solutions are pinned.
inline RecursiveSolution recursiveInvariant(const SynthesisProblem& sp, Budget& budget) {
  if (containsWhile(sp.program.body)) throw LoopInLoopFreeContext();
  std::set<VarId> shapeParamSet = sp.relationShape.freeVars();
  for (const auto& v : sp.relationInputs) shapeParamSet.erase(v);
  shapeParamSet.erase(sp.relationOutput);
  std::vector<VarId> shapeParams(shapeParamSet.begin(), shapeParamSet.end());

  std::vector<VarId> stateVars = detail::dynamicStateVars(sp.program, {&sp.pre});
  for (const auto& v : sp.relationInputs)
    if (std::find(stateVars.begin(), stateVars.end(), v) == stateVars.end())
      stateVars.push_back(v);
  if (std::find(stateVars.begin(), stateVars.end(), sp.relationOutput) == stateVars.end())
    stateVars.push_back(sp.relationOutput);

  auto instantiate = [&](const LinTerm& arg, const LinTerm& result) {
    std::map<VarId, LinTerm> sigma;
    if (sp.relationInputs.size() != 1)
      throw Error("recursive relations take exactly one input variable");
    sigma.emplace(sp.relationInputs.front(), arg);
    sigma.emplace(sp.relationOutput, result);
    return sp.relationShape.substituted(sigma);
  };

  SemanticsBuilder builder(stateVars, sp.mode, [&](const LinTerm& arg, const VarId& resultPrimed) {
    return instantiate(arg, LinTerm::var(resultPrimed));
  });
  Formula bodyRel = builder.relation(sp.program.body);
  Formula preF = templateFormula(sp.pre, ExtensionFlags{});
  Formula conclusion =
      instantiate(LinTerm::var(sp.relationInputs.front()), LinTerm::var(primed(sp.relationOutput)));
  Formula inclusion = detail::universalTransition(Formula::andF({preF, bodyRel}), conclusion,
                                                  stateVars, /*primedToo=*/true);

  RecursiveSolution out;
  out.admissible =
      qelimDnfModulo({}, eliminate(inclusion, sp.method, budget), sp.assumption, sp.method, budget);
  if (out.admissible.isFalse()) throw NoInvariantOfShape();

  out.unique = true;
  for (const auto& p : shapeParams) {
    std::vector<VarId> others;
    for (const auto& q : shapeParams)
      if (q != p) others.push_back(q);
    Formula only = eliminate(Formula::exists(others, out.admissible), sp.method, budget);
    auto v = pinUniqueValue(only, p);
    if (v)
      out.pinned[p] = *v;
    else
      out.unique = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Non-convex minimal elements

/// Minimal elements of the admissible set described by P over its free
/// parameters:  P(p) && forall p' (P(p') && p' <= p  =>  p <= p'), as DNF.
inline Formula minimalElements(const Formula& admissible, QeMethod method, Budget& budget) {
  Formula p = admissible.isQuantifierFree() ? admissible : eliminate(admissible, method, budget);
  std::set<VarId> fv = p.freeVars();
  std::vector<VarId> params(fv.begin(), fv.end());
  std::map<VarId, VarId> ren;
  std::vector<VarId> copies;
  for (const auto& q : params) {
    VarId c = detail::freshParamCopy(q);
    ren.emplace(q, c);
    copies.push_back(c);
  }
  Formula pCopy = p.renamed(ren);
  std::vector<Formula> below, above;
  for (const auto& q : params) {
    below.push_back(Formula::le(LinTerm::var(ren.at(q)), LinTerm::var(q)));
    above.push_back(Formula::le(LinTerm::var(q), LinTerm::var(ren.at(q))));
  }
  Formula minimality = Formula::forall(
      copies, Formula::implies(Formula::andF({pCopy, Formula::andF(below)}),
                               Formula::andF(above)));
  Formula g = Formula::andF({p, eliminate(minimality, method, budget)});
  return qelimDnfModulo({}, g, Formula::trueF(), method, budget);
}

}  // namespace absynth
