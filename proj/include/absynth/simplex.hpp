#pragma once

#include <numeric>
#include <vector>

#include "absynth/conjunction.hpp"

namespace absynth {

/// Outcome of exact linear programming over the closure of a constraint set.
struct LpResult {
  enum class K { Infeasible, Unbounded, Optimal } kind;
  Rational value;    // optimum of the closure (a supremum for strict inputs)
  Assignment point;  // witness for Optimal (a feasible point of the closure)
};

namespace detail {

/// Dense rational two-phase primal simplex with Bland's rule. Free variables
/// are split into differences of nonnegatives. Desk scale by design.
class Simplex {
 public:
  /// maximize objective over { x : rows hold, closed interpretation }.
  static LpResult maximize(const std::vector<Atom>& rows, const LinTerm& objective) {
    Simplex s;
    s.build(rows, objective);
    return s.run();
  }

 private:
  // Tableau in equational form  A y = b  with  y >= 0, basis per row.
  std::vector<std::vector<Rational>> a_;
  std::vector<Rational> b_;
  std::vector<Rational> cost_;  // phase-2 objective over columns
  std::vector<int> basis_;
  std::vector<VarId> vars_;  // original free variables
  size_t nStruct_ = 0;       // 2 * vars: plus/minus parts
  size_t nSlack_ = 0;
  Rational objConst_;

  void build(const std::vector<Atom>& atoms, const LinTerm& objective) {
    std::set<VarId> vs;
    for (const auto& at : atoms)
      for (const auto& [v, c] : at.lhs().coeffs()) vs.insert(v);
    for (const auto& [v, c] : objective.coeffs()) vs.insert(v);
    vars_.assign(vs.begin(), vs.end());
    auto colOf = [&](const VarId& v) {
      return 2 * (std::lower_bound(vars_.begin(), vars_.end(), v) - vars_.begin());
    };
    nStruct_ = 2 * vars_.size();

    // Constraint rows: l <= 0 (closure of <) and both directions of l = 0.
    std::vector<std::pair<std::vector<Rational>, Rational>> ineqs;  // a.y <= rhs
    auto addLe = [&](const LinTerm& l) {
      std::vector<Rational> row(nStruct_, Rational(0));
      for (const auto& [v, c] : l.coeffs()) {
        row[colOf(v)] += c;
        row[colOf(v) + 1] -= c;
      }
      ineqs.emplace_back(std::move(row), -l.constant());
    };
    for (const auto& at : atoms) {
      addLe(at.lhs());
      if (at.rel() == Rel::Eq) addLe(-at.lhs());
    }

    nSlack_ = ineqs.size();
    size_t m = ineqs.size();
    a_.assign(m, std::vector<Rational>(nStruct_ + nSlack_, Rational(0)));
    b_.assign(m, Rational(0));
    basis_.assign(m, -1);
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < nStruct_; ++j) a_[i][j] = ineqs[i].first[j];
      a_[i][nStruct_ + i] = Rational(1);
      b_[i] = ineqs[i].second;
      basis_[i] = static_cast<int>(nStruct_ + i);
    }

    cost_.assign(nStruct_ + nSlack_, Rational(0));
    for (const auto& [v, c] : objective.coeffs()) {
      cost_[colOf(v)] += c;
      cost_[colOf(v) + 1] -= c;
    }
    objConst_ = objective.constant();
  }

  LpResult run() {
    // Phase 1: make b nonnegative with artificial columns where needed.
    size_t m = a_.size();
    std::vector<size_t> artificialRows;
    for (size_t i = 0; i < m; ++i)
      if (b_[i] < 0) artificialRows.push_back(i);
    if (!artificialRows.empty()) {
      size_t base = a_[0].size();
      for (size_t k = 0; k < artificialRows.size(); ++k) {
        size_t i = artificialRows[k];
        for (auto& q : a_[i]) q = -q;
        b_[i] = -b_[i];
        for (size_t r = 0; r < m; ++r) a_[r].push_back(Rational(0));
        a_[i][base + k] = Rational(1);
        basis_[i] = static_cast<int>(base + k);
      }
      // minimize the artificial sum == maximize its negation
      std::vector<Rational> phase1(a_[0].size(), Rational(0));
      for (size_t k = 0; k < artificialRows.size(); ++k) phase1[base + k] = Rational(-1);
      if (!solve(phase1)) return {LpResult::K::Unbounded, Rational(0), {}};  // cannot happen
      Rational p1 = currentValue(phase1);
      if (p1 != 0) return {LpResult::K::Infeasible, Rational(0), {}};
      // Pivot artificials out of the basis where possible; drop their columns.
      for (size_t i = 0; i < m; ++i) {
        if (basis_[i] < static_cast<int>(base)) continue;
        size_t j = 0;
        for (; j < base; ++j)
          if (a_[i][j] != 0) break;
        if (j < base) pivot(i, j);
      }
      for (size_t r = 0; r < m; ++r) a_[r].resize(base);
      cost_.resize(base, Rational(0));
      // A degenerate artificial still in basis denotes a redundant zero row.
      for (size_t i = 0; i < m; ++i)
        if (basis_[i] >= static_cast<int>(base)) basis_[i] = -2;  // inert row
    }

    if (!solve(cost_)) return {LpResult::K::Unbounded, Rational(0), {}};
    LpResult res{LpResult::K::Optimal, currentValue(cost_) + objConst_, {}};
    std::vector<Rational> y(a_[0].size(), Rational(0));
    for (size_t i = 0; i < a_.size(); ++i)
      if (basis_[i] >= 0) y[basis_[i]] = b_[i];
    for (size_t k = 0; k < vars_.size(); ++k) res.point[vars_[k]] = y[2 * k] - y[2 * k + 1];
    return res;
  }

  Rational currentValue(const std::vector<Rational>& c) {
    Rational v(0);
    for (size_t i = 0; i < a_.size(); ++i)
      if (basis_[i] >= 0) v += c[basis_[i]] * b_[i];
    return v;
  }

  /// Primal simplex with Bland's rule; returns false on unboundedness.
  bool solve(const std::vector<Rational>& c) {
    size_t m = a_.size(), n = a_[0].size();
    for (;;) {
      // reduced costs: rc_j = c_j - c_B B^-1 A_j; tableau is kept reduced,
      // so compute against the current rows.
      std::vector<Rational> dual(m, Rational(0));
      int enter = -1;
      for (size_t j = 0; j < n; ++j) {
        bool inBasis = false;
        for (size_t i = 0; i < m; ++i)
          if (basis_[i] == static_cast<int>(j)) inBasis = true;
        if (inBasis) continue;
        Rational rc = c[j];
        for (size_t i = 0; i < m; ++i)
          if (basis_[i] >= 0) rc -= c[basis_[i]] * a_[i][j];
        if (rc > 0) {
          enter = static_cast<int>(j);
          break;  // Bland: smallest index
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      Rational bestRatio(0);
      for (size_t i = 0; i < m; ++i) {
        if (basis_[i] == -2) continue;
        if (a_[i][enter] <= 0) continue;
        Rational ratio = b_[i] / a_[i][enter];
        if (leave < 0 || ratio < bestRatio ||
            (ratio == bestRatio && basis_[i] < basis_[leave])) {
          leave = static_cast<int>(i);
          bestRatio = ratio;
        }
      }
      if (leave < 0) return false;  // unbounded direction
      pivot(static_cast<size_t>(leave), static_cast<size_t>(enter));
    }
  }

  void pivot(size_t row, size_t col) {
    Rational p = a_[row][col];
    for (auto& q : a_[row]) q /= p;
    b_[row] /= p;
    for (size_t i = 0; i < a_.size(); ++i) {
      if (i == row) continue;
      Rational f = a_[i][col];
      if (f == 0) continue;
      for (size_t j = 0; j < a_[i].size(); ++j) a_[i][j] -= f * a_[row][j];
      b_[i] -= f * b_[row];
    }
    basis_[row] = static_cast<int>(col);
  }
};

}  // namespace detail

/// Exact maximum of a linear objective over the closed relaxation of a
/// conjunction of atoms. Strict rows are optimized through their closure, so
/// the value is the supremum of the open set whenever that set is nonempty.
inline LpResult lpMaximize(const std::vector<Atom>& rows, const LinTerm& objective) {
  // The closure being feasible does not imply the strict set is; callers
  // decide feasibility of the strict set separately (isSatConj).
  return detail::Simplex::maximize(rows, objective);
}

}  // namespace absynth
