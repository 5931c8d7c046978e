#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "absynth/errors.hpp"
#include "absynth/rational.hpp"

namespace absynth {

enum class VarSort { State, PrimedState, Parameter, PrimedParameter, Auxiliary };

/// A variable. Names are unique within a problem, so identity and ordering
/// are by name; the sort is a descriptive attribute.
struct VarId {
  std::string name;
  VarSort sort = VarSort::State;

  VarId() = default;
  VarId(std::string n, VarSort s = VarSort::State) : name(std::move(n)), sort(s) {}

  bool operator==(const VarId& o) const { return name == o.name; }
  bool operator!=(const VarId& o) const { return name != o.name; }
  bool operator<(const VarId& o) const { return name < o.name; }
};

using Assignment = std::map<VarId, Rational>;

/// Linear expression  sum(coeff_i * var_i) + constant  with exact rational
/// coefficients. Zero coefficients are never stored; iteration order is the
/// variable name order.
class LinTerm {
 public:
  LinTerm() = default;
  explicit LinTerm(Rational constant) : constant_(std::move(constant)) {}
  static LinTerm var(const VarId& v, Rational c = Rational(1)) {
    LinTerm t;
    t.addTerm(v, std::move(c));
    return t;
  }

  const std::map<VarId, Rational>& coeffs() const { return coeffs_; }
  const Rational& constant() const { return constant_; }
  bool isConstant() const { return coeffs_.empty(); }

  Rational coeff(const VarId& v) const {
    auto it = coeffs_.find(v);
    return it == coeffs_.end() ? Rational(0) : it->second;
  }
  bool mentions(const VarId& v) const { return coeffs_.count(v) != 0; }

  void addTerm(const VarId& v, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = coeffs_.emplace(v, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) coeffs_.erase(it);
    }
  }
  void addConstant(const Rational& c) { constant_ += c; }

  LinTerm& operator+=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) addTerm(v, c);
    constant_ += o.constant_;
    return *this;
  }
  LinTerm& operator-=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) addTerm(v, -c);
    constant_ -= o.constant_;
    return *this;
  }
  LinTerm& operator*=(const Rational& k) {
    if (k == 0) {
      coeffs_.clear();
      constant_ = 0;
      return *this;
    }
    for (auto& [v, c] : coeffs_) c *= k;
    constant_ *= k;
    return *this;
  }
  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
  friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a -= b; }
  friend LinTerm operator*(LinTerm a, const Rational& k) { return a *= k; }
  friend LinTerm operator-(LinTerm a) { return a *= Rational(-1); }

  bool operator==(const LinTerm& o) const {
    return constant_ == o.constant_ && coeffs_ == o.coeffs_;
  }
  bool operator!=(const LinTerm& o) const { return !(*this == o); }

  /// Total order: lexicographic over the sorted coefficient entries, then
  /// the constant. Used for deterministic atom ordering.
  int compare(const LinTerm& o) const {
    auto a = coeffs_.begin(), b = o.coeffs_.begin();
    for (; a != coeffs_.end() && b != o.coeffs_.end(); ++a, ++b) {
      if (a->first != b->first) return a->first < b->first ? -1 : 1;
      if (a->second != b->second) return a->second < b->second ? -1 : 1;
    }
    if (a != coeffs_.end()) return 1;
    if (b != o.coeffs_.end()) return -1;
    if (constant_ != o.constant_) return constant_ < o.constant_ ? -1 : 1;
    return 0;
  }

  Rational eval(const Assignment& a) const {
    Rational r = constant_;
    for (const auto& [v, c] : coeffs_) {
      auto it = a.find(v);
      if (it == a.end()) throw MissingAssignment(v.name);
      r += c * it->second;
    }
    return r;
  }

  /// Simultaneous substitution of variables by linear terms.
  LinTerm substituted(const std::map<VarId, LinTerm>& sigma) const {
    LinTerm r(constant_);
    for (const auto& [v, c] : coeffs_) {
      auto it = sigma.find(v);
      if (it == sigma.end()) {
        r.addTerm(v, c);
      } else {
        LinTerm img = it->second;
        img *= c;
        r += img;
      }
    }
    return r;
  }

  LinTerm renamed(const std::map<VarId, VarId>& ren) const {
    LinTerm r(constant_);
    for (const auto& [v, c] : coeffs_) {
      auto it = ren.find(v);
      r.addTerm(it == ren.end() ? v : it->second, c);
    }
    return r;
  }

  std::string str() const {
    if (coeffs_.empty()) return toString(constant_);
    std::string s;
    bool first = true;
    for (const auto& [v, c] : coeffs_) {
      if (first) {
        if (c == 1)
          s += v.name;
        else if (c == -1)
          s += "-" + v.name;
        else
          s += toString(c) + "*" + v.name;
        first = false;
      } else if (c > 0) {
        s += " + " + (c == 1 ? v.name : toString(c) + "*" + v.name);
      } else {
        s += " - " + (c == -1 ? v.name : toString(-c) + "*" + v.name);
      }
    }
    if (constant_ > 0)
      s += " + " + toString(constant_);
    else if (constant_ < 0)
      s += " - " + toString(-constant_);
    return s;
  }

 private:
  std::map<VarId, Rational> coeffs_;
  Rational constant_ = Rational(0);
};

}  // namespace absynth
