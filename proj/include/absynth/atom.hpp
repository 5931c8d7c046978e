#pragma once

#include <optional>

#include "absynth/linterm.hpp"

namespace absynth {

enum class Rel { Le, Lt, Eq };

/// Linear atom in the normalized form  lhs <= 0, lhs < 0 or lhs = 0.
/// Canonical form: all coefficients and the constant are integers with
/// overall gcd 1; for equalities the first nonzero coefficient is positive.
/// Other relations (>=, >, !=) are rewritten at construction time, != at the
/// formula level since it needs a disjunction.
class Atom {
 public:
  Atom(LinTerm lhs, Rel rel) : lhs_(std::move(lhs)), rel_(rel) { canonicalize(); }

  const LinTerm& lhs() const { return lhs_; }
  Rel rel() const { return rel_; }
  bool isGround() const { return lhs_.isConstant(); }

  /// Truth value of a ground atom.
  bool groundTruth() const {
    const Rational& c = lhs_.constant();
    switch (rel_) {
      case Rel::Le: return c <= 0;
      case Rel::Lt: return c < 0;
      case Rel::Eq: return c == 0;
    }
    return false;
  }

  bool eval(const Assignment& a) const {
    Rational v = lhs_.eval(a);
    switch (rel_) {
      case Rel::Le: return v <= 0;
      case Rel::Lt: return v < 0;
      case Rel::Eq: return v == 0;
    }
    return false;
  }

  /// The complementary atom, for <= and < only (= needs a disjunction).
  Atom negated() const {
    switch (rel_) {
      case Rel::Le: return Atom(-lhs_, Rel::Lt);
      case Rel::Lt: return Atom(-lhs_, Rel::Le);
      default: throw Error("cannot negate an equality into a single atom");
    }
  }

  bool mentions(const VarId& v) const { return lhs_.mentions(v); }

  bool operator==(const Atom& o) const { return rel_ == o.rel_ && lhs_ == o.lhs_; }
  bool operator!=(const Atom& o) const { return !(*this == o); }

  int compare(const Atom& o) const {
    int c = lhs_.compare(o.lhs_);
    if (c != 0) return c;
    if (rel_ != o.rel_) return static_cast<int>(rel_) < static_cast<int>(o.rel_) ? -1 : 1;
    return 0;
  }
  bool operator<(const Atom& o) const { return compare(o) < 0; }

  std::string str() const {
    std::string op = rel_ == Rel::Le ? " <= 0" : rel_ == Rel::Lt ? " < 0" : " = 0";
    return lhs_.str() + op;
  }

 private:
  void canonicalize() {
    if (lhs_.isConstant()) {
      // Ground: keep only the sign of the constant.
      const Rational& c = lhs_.constant();
      lhs_ = LinTerm(Rational(c > 0 ? 1 : c < 0 ? -1 : 0));
      return;
    }
    // Scale so every coefficient and the constant are integers with gcd 1.
    Integer den(1), num(0);
    auto fold = [&](const Rational& q) {
      den = boost::multiprecision::lcm(den, rationalDen(q));
      num = boost::multiprecision::gcd(num, rationalNum(q));
    };
    for (const auto& [v, c] : lhs_.coeffs()) fold(c);
    if (lhs_.constant() != 0) fold(lhs_.constant());
    // gcd of numerators over the common denominator
    Rational scale = Rational(den) / Rational(num < 0 ? -num : num);
    lhs_ *= scale;
    if (rel_ == Rel::Eq && lhs_.coeffs().begin()->second < 0) lhs_ *= Rational(-1);
  }

  LinTerm lhs_;
  Rel rel_;
};

}  // namespace absynth
