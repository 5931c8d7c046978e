#pragma once

#include <functional>

#include "absynth/program.hpp"

namespace absynth {

enum class NumericMode { Real, Int, Float };

/// Parameters of the floating-point rounding axioms.
struct FloatParams {
  Rational epsRel;   // relative error of round-to-nearest, 2^-p
  Rational epsAbs;   // absolute error for multiply/divide, m_denormal / 2
  Rational mNormal;  // least positive normalized magnitude
  bool fma = false;
  bool gradualUnderflow = true;

  static FloatParams binary64() { return {pow2(-53), pow2(-1075), pow2(-1022)}; }
  static FloatParams binary32() { return {pow2(-24), pow2(-150), pow2(-126)}; }
};

struct SemanticsMode {
  NumericMode numeric = NumericMode::Real;
  FloatParams fp = FloatParams::binary64();
  /// Known intervals for mul linearization, keyed by variable.
  std::map<VarId, std::pair<Rational, Rational>> bounds;
};

inline VarId primed(const VarId& v) { return VarId(v.name + "'", VarSort::PrimedState); }

/// Rounding of an addition/subtraction result under gradual underflow:
/// denormal results are exact, others take a relative error.
inline Formula roundPlusMinus(const LinTerm& r, const LinTerm& x, const FloatParams& fp) {
  LinTerm m(fp.mNormal);
  Formula small = Formula::andF(
      {Formula::le(-m, x), Formula::le(x, m), Formula::eq(r, x)});
  Formula big = Formula::andF({Formula::gt(x, m), Formula::le(x * (1 - fp.epsRel), r),
                               Formula::le(r, x * (1 + fp.epsRel))});
  Formula neg = Formula::andF({Formula::lt(x, -m), Formula::le(x * (1 + fp.epsRel), r),
                               Formula::le(r, x * (1 - fp.epsRel))});
  return Formula::orF({small, big, neg});
}

/// Rounding of a positive multiply/divide result: absolute error below the
/// normalized range, relative error above.
inline Formula roundPositive(const LinTerm& r, const LinTerm& x, const FloatParams& fp) {
  LinTerm m(fp.mNormal), ea(fp.epsAbs);
  Formula small = Formula::andF({Formula::le(x, m), Formula::ge(r, LinTerm()),
                                 Formula::le(x - ea, r), Formula::le(r, x + ea)});
  Formula big = Formula::andF({Formula::gt(x, m), Formula::le(x * (1 - fp.epsRel), r),
                               Formula::le(r, x * (1 + fp.epsRel))});
  return Formula::orF({small, big});
}

/// Sign-split rounding for multiply/divide (and for +/- when gradual
/// underflow is off).
inline Formula roundAny(const LinTerm& r, const LinTerm& x, const FloatParams& fp) {
  Formula zero = Formula::andF({Formula::eq(x, LinTerm()), Formula::eq(r, LinTerm())});
  Formula pos = Formula::andF({Formula::gt(x, LinTerm()), roundPositive(r, x, fp)});
  Formula neg = Formula::andF({Formula::lt(x, LinTerm()), roundPositive(-r, -x, fp)});
  return Formula::orF({zero, pos, neg});
}

/// Sound linear abstraction of z' = x*y from interval bounds on x and/or y.
inline Formula linearizeMul(const VarId& zPrimed, const VarId& x, const VarId& y,
                            std::optional<std::pair<Rational, Rational>> xBounds,
                            std::optional<std::pair<Rational, Rational>> yBounds) {
  if (!xBounds && !yBounds) throw NoBoundsAvailable(x.name + "*" + y.name);
  LinTerm z = LinTerm::var(zPrimed);
  auto onePiece = [&](const VarId& free, const std::pair<Rational, Rational>& b) {
    LinTerm f = LinTerm::var(free);
    Formula posCase = Formula::andF({Formula::ge(f, LinTerm()), Formula::le(f * b.first, z),
                                     Formula::le(z, f * b.second)});
    Formula negCase = Formula::andF({Formula::lt(f, LinTerm()), Formula::le(f * b.second, z),
                                     Formula::le(z, f * b.first)});
    return Formula::orF({posCase, negCase});
  };
  std::vector<Formula> parts;
  if (yBounds) parts.push_back(onePiece(x, *yBounds));
  if (xBounds) parts.push_back(onePiece(y, *xBounds));
  return Formula::andF(std::move(parts));
}

namespace detail {

inline CmpOp negateOp(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
  }
  return op;
}

}  // namespace detail

/// Comparison under the integer relaxation: strict comparisons between
/// integers tighten by one, and a disequality splits in two.
inline Formula compareFormula(CmpOp op, const LinTerm& a, const LinTerm& b, NumericMode mode,
                              bool negated = false) {
  if (negated) op = detail::negateOp(op);
  const bool intMode = mode == NumericMode::Int;
  LinTerm one(Rational(1));
  switch (op) {
    case CmpOp::Le: return Formula::le(a, b);
    case CmpOp::Ge: return Formula::ge(a, b);
    case CmpOp::Eq: return Formula::eq(a, b);
    case CmpOp::Lt: return intMode ? Formula::le(a, b - one) : Formula::lt(a, b);
    case CmpOp::Gt: return intMode ? Formula::ge(a, b + one) : Formula::gt(a, b);
    case CmpOp::Ne:
      if (intMode)
        return Formula::orF({Formula::ge(a, b + one), Formula::le(a, b - one)});
      return Formula::ne(a, b);
  }
  return Formula::falseF();
}

/// Builds transition-relation formulas for loop-free blocks. State variables
/// get primed counterparts; sequential composition introduces existentially
/// quantified auxiliaries named with a deterministic counter.
class SemanticsBuilder {
 public:
  using CallHook = std::function<Formula(const LinTerm& argument, const VarId& resultPrimed)>;

  SemanticsBuilder(std::vector<VarId> stateVars, SemanticsMode mode, CallHook callHook = nullptr)
      : vars_(std::move(stateVars)), mode_(std::move(mode)), callHook_(std::move(callHook)) {}

  /// Relation of a loop-free statement over vars and primed(vars).
  Formula relation(const StmtPtr& s) {
    switch (s->kind) {
      case Stmt::K::Skip: return identity();
      case Stmt::K::Fail: return Formula::falseF();
      case Stmt::K::Assign: return assignRelation(s->var, s->expr);
      case Stmt::K::NondetAssign: return frameExcept(s->var);
      case Stmt::K::CallAssign: {
        if (!callHook_) throw Error("call statement outside a recursive analysis");
        Formula rel = callHook_(s->expr->linear(), primed(s->var));
        return Formula::andF({rel, frameExcept(s->var)});
      }
      case Stmt::K::MulAssign: {
        Formula rel = linearizeMul(primed(s->var), s->mulX, s->mulY, boundsOf(s->mulX),
                                   boundsOf(s->mulY));
        return Formula::andF({rel, frameExcept(s->var)});
      }
      case Stmt::K::Assume:
        return Formula::andF({condition(s->cond, false), identity()});
      case Stmt::K::If: {
        if (s->cond.isNondet())
          return Formula::orF({relation(s->thenS), relation(s->elseS)});
        Formula thenRel = Formula::andF({condition(s->cond, false), relation(s->thenS)});
        Formula elseRel = Formula::andF({condition(s->cond, true), relation(s->elseS)});
        return Formula::orF({thenRel, elseRel});
      }
      case Stmt::K::Seq: {
        if (s->seq.empty()) return identity();
        Formula acc = relation(s->seq.front());
        for (size_t i = 1; i < s->seq.size(); ++i) acc = compose(acc, relation(s->seq[i]));
        return acc;
      }
      case Stmt::K::While: throw LoopInLoopFreeContext();
    }
    return Formula::falseF();
  }

  /// Guard formula of a condition over the unprimed state, observing the
  /// integer recoding of negations and the float rounding of compound sides.
  Formula condition(const Cond& c, bool negated) {
    switch (c.kind) {
      case Cond::K::Nondet: return Formula::trueF();
      case Cond::K::Not: return condition(c.kids[0], !negated);
      case Cond::K::And:
      case Cond::K::Or: {
        bool isAnd = (c.kind == Cond::K::And) != negated;
        std::vector<Formula> ks;
        ks.reserve(c.kids.size());
        for (const auto& k : c.kids) ks.push_back(condition(k, negated));
        return isAnd ? Formula::andF(std::move(ks)) : Formula::orF(std::move(ks));
      }
      case Cond::K::Cmp: {
        if (mode_.numeric != NumericMode::Float)
          return compareFormula(c.op, c.lhs->linear(), c.rhs->linear(), mode_.numeric, negated);
        std::vector<Formula> constraints;
        std::vector<VarId> fresh;
        LinTerm l = floatValue(c.lhs, constraints, fresh);
        LinTerm r = floatValue(c.rhs, constraints, fresh);
        constraints.push_back(compareFormula(c.op, l, r, NumericMode::Real, negated));
        return Formula::exists(fresh, Formula::andF(std::move(constraints)));
      }
    }
    return Formula::trueF();
  }

  const std::vector<VarId>& stateVars() const { return vars_; }

 private:
  Formula identity() {
    std::vector<Formula> eqs;
    eqs.reserve(vars_.size());
    for (const auto& v : vars_)
      eqs.push_back(Formula::eq(LinTerm::var(primed(v)), LinTerm::var(v)));
    return Formula::andF(std::move(eqs));
  }

  Formula frameExcept(const VarId& changed) {
    std::vector<Formula> eqs;
    for (const auto& v : vars_) {
      if (v == changed) continue;
      eqs.push_back(Formula::eq(LinTerm::var(primed(v)), LinTerm::var(v)));
    }
    return Formula::andF(std::move(eqs));
  }

  Formula assignRelation(const VarId& target, const ExprPtr& e) {
    if (mode_.numeric != NumericMode::Float) {
      Formula eq = Formula::eq(LinTerm::var(primed(target)), e->linear());
      return Formula::andF({eq, frameExcept(target)});
    }
    std::vector<Formula> constraints;
    std::vector<VarId> fresh;
    LinTerm value = floatValue(e, constraints, fresh);
    constraints.push_back(Formula::eq(LinTerm::var(primed(target)), value));
    Formula eq = Formula::exists(fresh, Formula::andF(std::move(constraints)));
    return Formula::andF({eq, frameExcept(target)});
  }

  std::optional<std::pair<Rational, Rational>> boundsOf(const VarId& v) const {
    auto it = mode_.bounds.find(v);
    if (it == mode_.bounds.end()) return std::nullopt;
    return it->second;
  }

  VarId freshVar() {
    return VarId("r''" + std::to_string(freshCounter_++), VarSort::Auxiliary);
  }

  /// Value of an expression under floating-point semantics: one fresh rounded
  /// variable per addition, subtraction and non-trivial constant multiply.
  LinTerm floatValue(const ExprPtr& e, std::vector<Formula>& constraints,
                     std::vector<VarId>& fresh) {
    switch (e->kind) {
      case Expr::K::Const: return LinTerm(e->cst);
      case Expr::K::Var: return LinTerm::var(e->var);
      case Expr::K::Neg: return -floatValue(e->a, constraints, fresh);
      case Expr::K::MulConst: {
        LinTerm inner = floatValue(e->a, constraints, fresh);
        if (e->cst == 0 || e->cst == 1 || e->cst == -1) return inner * e->cst;
        VarId r = freshVar();
        fresh.push_back(r);
        constraints.push_back(roundAny(LinTerm::var(r), inner * e->cst, mode_.fp));
        return LinTerm::var(r);
      }
      case Expr::K::Add:
      case Expr::K::Sub: {
        // With a fused multiply-add, a scaled operand merges into one rounding.
        if (mode_.fp.fma && e->a->kind == Expr::K::MulConst && e->a->cst != 0 &&
            e->a->cst != 1 && e->a->cst != -1) {
          LinTerm product = floatValue(e->a->a, constraints, fresh) * e->a->cst;
          LinTerm other = floatValue(e->b, constraints, fresh);
          LinTerm sum = e->kind == Expr::K::Add ? product + other : product - other;
          VarId r = freshVar();
          fresh.push_back(r);
          constraints.push_back(roundAny(LinTerm::var(r), sum, mode_.fp));
          return LinTerm::var(r);
        }
        LinTerm l = floatValue(e->a, constraints, fresh);
        LinTerm r = floatValue(e->b, constraints, fresh);
        LinTerm sum = e->kind == Expr::K::Add ? l + r : l - r;
        VarId out = freshVar();
        fresh.push_back(out);
        constraints.push_back(mode_.fp.gradualUnderflow
                                  ? roundPlusMinus(LinTerm::var(out), sum, mode_.fp)
                                  : roundAny(LinTerm::var(out), sum, mode_.fp));
        return LinTerm::var(out);
      }
    }
    return LinTerm();
  }

  /// exists mid: f[primed -> mid] && g[unprimed -> mid]
  Formula compose(const Formula& f, const Formula& g) {
    std::map<VarId, LinTerm> renameF, renameG;
    std::vector<VarId> mids;
    for (const auto& v : vars_) {
      VarId mid(v.name + "''" + std::to_string(freshCounter_), VarSort::Auxiliary);
      mids.push_back(mid);
      renameF.emplace(primed(v), LinTerm::var(mid));
      renameG.emplace(v, LinTerm::var(mid));
    }
    ++freshCounter_;
    return Formula::exists(
        std::move(mids), Formula::andF({f.substituted(renameF), g.substituted(renameG)}));
  }

  std::vector<VarId> vars_;
  SemanticsMode mode_;
  CallHook callHook_;
  int freshCounter_ = 0;
};

/// Transition relation of a loop-free program block (the denotational
/// semantics as a formula over state and primed-state variables).
inline Formula semanticsOf(const StmtPtr& p, const std::vector<VarId>& stateVars,
                           const SemanticsMode& mode = {}) {
  return SemanticsBuilder(stateVars, mode).relation(p);
}

/// Hoists all existential quantifiers out of a positive and/or tree.
/// Auxiliaries are globally fresh by construction, so no renaming is needed.
inline void prenexExists(const Formula& f, std::vector<VarId>& vars, Formula& matrix);

namespace detail {

inline Formula prenexRec(const Formula& f, std::vector<VarId>& vars) {
  switch (f.kind()) {
    case FKind::Exists: {
      for (const auto& v : f.boundVars()) vars.push_back(v);
      return prenexRec(f.child(0), vars);
    }
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> cs;
      cs.reserve(f.children().size());
      for (const auto& c : f.children()) cs.push_back(prenexRec(c, vars));
      return f.kind() == FKind::And ? Formula::andF(std::move(cs)) : Formula::orF(std::move(cs));
    }
    default: return f;
  }
}

}  // namespace detail

inline void prenexExists(const Formula& f, std::vector<VarId>& vars, Formula& matrix) {
  matrix = detail::prenexRec(f, vars);
}

}  // namespace absynth
