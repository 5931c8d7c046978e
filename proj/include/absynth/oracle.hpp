#pragma once

#include <random>

#include "absynth/simplex.hpp"
#include "absynth/templates.hpp"

namespace absynth {

/// Path-wise optimum of a template row over a loop-free block: the exact
/// supremum, +infinity, or "empty" when no execution exists.
struct PathOptimum {
  enum class K { Empty, Unbounded, Value } kind;
  Rational value;

  static PathOptimum empty() { return {K::Empty, Rational(0)}; }
  static PathOptimum unbounded() { return {K::Unbounded, Rational(0)}; }
  static PathOptimum of(Rational v) { return {K::Value, std::move(v)}; }

  bool operator==(const PathOptimum& o) const {
    return kind == o.kind && (kind != K::Value || value == o.value);
  }
  std::string str() const {
    switch (kind) {
      case K::Empty: return "empty";
      case K::Unbounded: return "+oo";
      case K::Value: return toString(value);
    }
    return "?";
  }
};

/// Enumerates the control paths of a loop-free block as the satisfiable
/// disjuncts of its transition formula, then maximizes `row` over the primed
/// state of each path with the exact simplex.
inline PathOptimum pathOptimum(const StmtPtr& program, const std::vector<VarId>& stateVars,
                               const Template& pre, const Assignment& preVals, const LinTerm& row,
                               const SemanticsMode& mode = {}, size_t pathCap = 4096) {
  Formula rel = semanticsOf(program, stateVars, mode);
  std::vector<VarId> aux;
  Formula matrix;
  prenexExists(rel, aux, matrix);
  DnfClauses paths = dnfClauses(matrix, /*prune=*/true);
  if (paths.size() > pathCap) throw ResourceLimit("path enumeration cap");

  // Precondition rows instantiated at the given parameter values.
  std::vector<Atom> preAtoms;
  for (const auto& r : pre.rows) {
    auto it = preVals.find(r.param);
    if (it == preVals.end()) throw MissingAssignment(r.param.name);
    LinTerm t = r.form;
    t.addConstant(-it->second);
    preAtoms.emplace_back(std::move(t), Rel::Le);
  }

  // Objective over the primed state.
  std::map<VarId, LinTerm> toPrimed;
  for (const auto& v : stateVars) toPrimed.emplace(v, LinTerm::var(primed(v)));
  LinTerm objective = row.substituted(toPrimed);

  PathOptimum best = PathOptimum::empty();
  for (const auto& path : paths) {
    std::vector<Atom> rows = path;
    rows.insert(rows.end(), preAtoms.begin(), preAtoms.end());
    if (!isSatConj(rows)) continue;
    LpResult lp = lpMaximize(rows, objective);
    if (lp.kind == LpResult::K::Infeasible) continue;  // closure infeasible cannot happen here
    if (lp.kind == LpResult::K::Unbounded) return PathOptimum::unbounded();
    if (best.kind == PathOptimum::K::Empty || lp.value > best.value)
      best = PathOptimum::of(lp.value);
  }
  return best;
}

/// Result of a concrete simulation check.
struct SimulationOutcome {
  bool pass = true;
  bool vacuous = false;  // no completed execution
  Assignment start, final;  // first counterexample when !pass

  std::string str() const {
    if (pass) return vacuous ? "pass (vacuous)" : "pass";
    std::string s = "counterexample: start {";
    for (const auto& [v, q] : start) s += " " + v.name + "=" + toString(q);
    s += " } end {";
    for (const auto& [v, q] : final) s += " " + v.name + "=" + toString(q);
    return s + " }";
  }
};

namespace detail {

inline Rational sampleRational(std::mt19937_64& rng, const Rational& lo, const Rational& hi,
                               bool /*integral*/) {
  std::uniform_int_distribution<long> num(0, 1 << 20);
  Rational t(num(rng), (1 << 20));
  return lo + (hi - lo) * t;
}

inline Integer floorRat(const Rational& q) {
  Integer n = rationalNum(q), d = rationalDen(q);
  Integer f = n / d;
  if (n < 0 && f * d != n) --f;
  return f;
}

/// One concrete execution; returns false when a fail() aborted the run.
inline bool execute(const StmtPtr& s, Assignment& st, std::mt19937_64& rng, bool intMode,
                    const Rational& box) {
  auto evalCond = [&](const Cond& c) {
    struct Rec {
      Assignment& st;
      std::mt19937_64& rng;
      bool operator()(const Cond& c) {
        switch (c.kind) {
          case Cond::K::Nondet: return (rng() & 1) != 0;
          case Cond::K::Not: return !(*this)(c.kids[0]);
          case Cond::K::And:
            for (const auto& k : c.kids)
              if (!(*this)(k)) return false;
            return true;
          case Cond::K::Or:
            for (const auto& k : c.kids)
              if ((*this)(k)) return true;
            return false;
          case Cond::K::Cmp: {
            Rational l = c.lhs->linear().eval(st), r = c.rhs->linear().eval(st);
            switch (c.op) {
              case CmpOp::Lt: return l < r;
              case CmpOp::Le: return l <= r;
              case CmpOp::Gt: return l > r;
              case CmpOp::Ge: return l >= r;
              case CmpOp::Eq: return l == r;
              case CmpOp::Ne: return l != r;
            }
          }
        }
        return false;
      }
    } rec{st, rng};
    return rec(c);
  };
  switch (s->kind) {
    case Stmt::K::Skip: return true;
    case Stmt::K::Fail: return false;
    case Stmt::K::Assign: st[s->var] = s->expr->linear().eval(st); return true;
    case Stmt::K::NondetAssign: {
      Rational v = sampleRational(rng, -box, box, intMode);
      if (intMode) v = Rational(floorRat(v));
      st[s->var] = v;
      return true;
    }
    case Stmt::K::MulAssign: st[s->var] = st.at(s->mulX) * st.at(s->mulY); return true;
    case Stmt::K::CallAssign: throw Error("cannot simulate a recursive call");
    case Stmt::K::Assume: return evalCond(s->cond);
    case Stmt::K::If:
      return execute(evalCond(s->cond) ? s->thenS : s->elseS, st, rng, intMode, box);
    case Stmt::K::While: {
      int fuel = 10000;
      while (evalCond(s->cond)) {
        if (--fuel < 0) return false;
        if (!execute(s->body, st, rng, intMode, box)) return false;
      }
      return true;
    }
    case Stmt::K::Seq:
      for (const auto& c : s->seq)
        if (!execute(c, st, rng, intMode, box)) return false;
      return true;
  }
  return true;
}

}  // namespace detail

/// Samples start states satisfying the precondition, executes the block with
/// exact rationals, and checks the postcondition template at the given
/// parameter values. Loops run with a concrete iteration cap.
inline SimulationOutcome simulateCheck(const StmtPtr& program, const std::vector<VarId>& stateVars,
                                       const Template& pre, const Assignment& preVals,
                                       const Template& post, const Assignment& postVals,
                                       size_t samples, uint64_t seed, bool intMode = false) {
  std::mt19937_64 rng(seed);
  // Bounding box from single-variable rows, else a default span.
  Rational defaultLo(-16), defaultHi(16);
  std::map<VarId, std::pair<Rational, Rational>> box;
  for (const auto& v : stateVars) box[v] = {defaultLo, defaultHi};
  for (const auto& r : pre.rows) {
    if (r.form.coeffs().size() != 1 || r.form.constant() != 0) continue;
    auto [v, c] = *r.form.coeffs().begin();
    Rational bound = preVals.at(r.param) / c;
    if (c > 0)
      box[v].second = std::min(box[v].second, bound);
    else
      box[v].first = std::max(box[v].first, bound);
  }
  auto satisfiesPre = [&](const Assignment& st) {
    for (const auto& r : pre.rows)
      if (r.form.eval(st) > preVals.at(r.param)) return false;
    return true;
  };

  SimulationOutcome out;
  size_t completed = 0;
  size_t attempts = 0, maxAttempts = samples * 64 + 256;
  for (size_t i = 0; i < samples; ++i) {
    Assignment st;
    bool found = false;
    while (attempts++ < maxAttempts) {
      st.clear();
      for (const auto& v : stateVars) {
        Rational q = detail::sampleRational(rng, box[v].first, box[v].second, intMode);
        if (intMode) q = Rational(detail::floorRat(q));
        st[v] = q;
      }
      if (satisfiesPre(st)) {
        found = true;
        break;
      }
    }
    if (!found) {
      if (completed == 0 && !pre.rows.empty()) throw EmptyPrecondition();
      break;
    }
    Assignment start = st;
    if (!detail::execute(program, st, rng, intMode, Rational(64))) continue;  // failed path
    ++completed;
    for (const auto& r : post.rows) {
      if (r.form.eval(st) > postVals.at(r.param)) {
        out.pass = false;
        out.start = start;
        out.final = st;
        return out;
      }
    }
  }
  out.vacuous = completed == 0;
  return out;
}

/// Interval with optional infinite ends, for the reference iteration only.
struct IntervalBound {
  std::optional<Rational> lo, hi;  // nullopt = unbounded on that side

  static IntervalBound top() { return {}; }
  bool contains(const IntervalBound& o) const {
    bool loOk = !lo || (o.lo && *o.lo >= *lo);
    bool hiOk = !hi || (o.hi && *o.hi <= *hi);
    return loOk && hiOk;
  }
  bool operator==(const IntervalBound& o) const { return lo == o.lo && hi == o.hi; }
  std::string str() const {
    return "[" + (lo ? toString(*lo) : "-oo") + ", " + (hi ? toString(*hi) : "+oo") + "]";
  }
};

using IntervalBox = std::map<VarId, IntervalBound>;

namespace detail {

inline IntervalBound joinI(const IntervalBound& a, const IntervalBound& b) {
  IntervalBound r;
  if (a.lo && b.lo) r.lo = std::min(*a.lo, *b.lo);
  if (a.hi && b.hi) r.hi = std::max(*a.hi, *b.hi);
  return r;
}

inline IntervalBound evalInterval(const LinTerm& t, const IntervalBox& box) {
  IntervalBound r;
  r.lo = t.constant();
  r.hi = t.constant();
  for (const auto& [v, c] : t.coeffs()) {
    const IntervalBound& b = box.at(v);
    std::optional<Rational> lo = c > 0 ? b.lo : b.hi;
    std::optional<Rational> hi = c > 0 ? b.hi : b.lo;
    if (r.lo && lo)
      *r.lo += c * *lo;
    else
      r.lo.reset();
    if (r.hi && hi)
      *r.hi += c * *hi;
    else
      r.hi.reset();
  }
  return r;
}

/// Guard refinement for single-variable comparisons with constant sides.
inline void refine(IntervalBox& box, const Cond& c, bool negated, bool intMode) {
  switch (c.kind) {
    case Cond::K::Nondet: return;
    case Cond::K::Not: refine(box, c.kids[0], !negated, intMode); return;
    case Cond::K::And:
      if (!negated)
        for (const auto& k : c.kids) refine(box, k, false, intMode);
      return;
    case Cond::K::Or:
      if (negated)
        for (const auto& k : c.kids) refine(box, k, true, intMode);
      return;
    case Cond::K::Cmp: break;
  }
  LinTerm l = c.lhs->linear(), r = c.rhs->linear();
  LinTerm d = l - r;  // d ⋈ 0
  if (d.coeffs().size() != 1) return;
  auto [v, coef] = *d.coeffs().begin();
  CmpOp op = negated ? negateOp(c.op) : c.op;
  Rational bound = -d.constant() / coef;
  if (coef < 0) {
    // flip direction
    switch (op) {
      case CmpOp::Lt: op = CmpOp::Gt; break;
      case CmpOp::Le: op = CmpOp::Ge; break;
      case CmpOp::Gt: op = CmpOp::Lt; break;
      case CmpOp::Ge: op = CmpOp::Le; break;
      default: break;
    }
  }
  IntervalBound& b = box[v];
  Rational one(1);
  switch (op) {
    case CmpOp::Le: b.hi = b.hi ? std::min(*b.hi, bound) : bound; break;
    case CmpOp::Lt: {
      Rational h = intMode ? bound - one : bound;
      b.hi = b.hi ? std::min(*b.hi, h) : h;
      break;
    }
    case CmpOp::Ge: b.lo = b.lo ? std::max(*b.lo, bound) : bound; break;
    case CmpOp::Gt: {
      Rational g = intMode ? bound + one : bound;
      b.lo = b.lo ? std::max(*b.lo, g) : g;
      break;
    }
    case CmpOp::Eq:
      b.lo = b.lo ? std::max(*b.lo, bound) : bound;
      b.hi = b.hi ? std::min(*b.hi, bound) : bound;
      break;
    case CmpOp::Ne: break;
  }
}

inline std::optional<IntervalBox> transfer(const StmtPtr& s, IntervalBox box, bool intMode);

inline std::optional<IntervalBox> joinBox(std::optional<IntervalBox> a,
                                          std::optional<IntervalBox> b) {
  if (!a) return b;
  if (!b) return a;
  IntervalBox r = *a;
  for (auto& [v, iv] : r) iv = joinI(iv, b->at(v));
  return r;
}

inline std::optional<IntervalBox> transfer(const StmtPtr& s, IntervalBox box, bool intMode) {
  switch (s->kind) {
    case Stmt::K::Skip: return box;
    case Stmt::K::Fail: return std::nullopt;
    case Stmt::K::Assign: {
      IntervalBound v = evalInterval(s->expr->linear(), box);
      box[s->var] = v;
      return box;
    }
    case Stmt::K::NondetAssign: box[s->var] = IntervalBound::top(); return box;
    case Stmt::K::MulAssign: box[s->var] = IntervalBound::top(); return box;
    case Stmt::K::CallAssign: throw Error("call in interval iteration");
    case Stmt::K::Assume: {
      refine(box, s->cond, false, intMode);
      return box;
    }
    case Stmt::K::If: {
      IntervalBox thenBox = box, elseBox = box;
      if (!s->cond.isNondet()) {
        refine(thenBox, s->cond, false, intMode);
        refine(elseBox, s->cond, true, intMode);
      }
      return joinBox(transfer(s->thenS, thenBox, intMode), transfer(s->elseS, elseBox, intMode));
    }
    case Stmt::K::While: throw Error("nested loop in reference iteration");
    case Stmt::K::Seq: {
      std::optional<IntervalBox> cur = box;
      for (const auto& c : s->seq) {
        if (!cur) return std::nullopt;
        cur = transfer(c, *cur, intMode);
      }
      return cur;
    }
  }
  return box;
}

}  // namespace detail

/// Kleene iteration of a single loop on the interval domain, optionally with
/// the standard widening (unstable bounds jump to infinity after three
/// iterations). The result is the box at the loop head.
inline IntervalBox kleeneReference(const StmtPtr& loop, const IntervalBox& preBox, bool widen,
                                   size_t bound, bool intMode = false) {
  if (loop->kind != Stmt::K::While) throw Error("kleeneReference expects a while loop");
  IntervalBox cur = preBox;
  size_t iter = 0;
  for (;;) {
    IntervalBox guarded = cur;
    detail::refine(guarded, loop->cond, false, intMode);
    std::optional<IntervalBox> next = detail::transfer(loop->body, guarded, intMode);
    IntervalBox joined = cur;
    if (next)
      for (auto& [v, iv] : joined) iv = detail::joinI(iv, next->at(v));
    if (joined == cur) return cur;
    ++iter;
    if (widen && iter >= 3) {
      for (auto& [v, iv] : joined) {
        const IntervalBound& old = cur.at(v);
        if (old.lo && (!iv.lo || *iv.lo < *old.lo)) iv.lo.reset();
        if (old.hi && (!iv.hi || *iv.hi > *old.hi)) iv.hi.reset();
      }
    }
    if (!widen && iter > bound) throw NotStabilized();
    cur = joined;
  }
}

/// Best abstraction of a finite point set: the row-wise exact maximum.
inline Assignment bestAbstractionFinite(const Template& t, const std::vector<Assignment>& points) {
  if (points.empty()) throw Error("bestAbstractionFinite needs at least one point");
  Assignment out;
  for (const auto& r : t.rows) {
    Rational best = r.form.eval(points.front());
    for (size_t i = 1; i < points.size(); ++i) best = std::max(best, r.form.eval(points[i]));
    out[r.param] = best;
  }
  return out;
}

}  // namespace absynth
