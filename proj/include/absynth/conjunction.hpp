#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "absynth/formula.hpp"

namespace absynth {

/// The ground atom 1 <= 0, used to signal an infeasible conjunction.
inline Atom falseAtom() { return Atom(LinTerm(Rational(1)), Rel::Le); }
inline bool isFalseMarker(const std::vector<Atom>& conj) {
  return conj.size() == 1 && conj[0].isGround() && !conj[0].groundTruth();
}

namespace detail {

/// Direction key of an atom: coefficients divided by their gcd (positive
/// scale, preserving orientation), plus the scaled offset b in  d*x ⋈ b.
struct Slope {
  std::map<VarId, Rational> dir;
  Rational bound;  // d*x ⋈ bound
  bool operator<(const Slope& o) const { return dir < o.dir; }
};

inline Slope slopeOf(const Atom& a) {
  Integer g(0);
  for (const auto& [v, c] : a.lhs().coeffs()) g = boost::multiprecision::gcd(g, rationalNum(c));
  if (g < 0) g = -g;
  Slope s;
  Rational scale = Rational(1) / Rational(g);
  for (const auto& [v, c] : a.lhs().coeffs()) s.dir.emplace(v, c * scale);
  s.bound = -a.lhs().constant() * scale;
  return s;
}

}  // namespace detail

/// Drops any row implied by another single row with the same normalized
/// slope but a weaker bound. Contradicting parallel equalities become infeasible.
inline std::vector<Atom> dropRedundantRows(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  std::map<detail::Slope, size_t> bestIneq;  // strongest <=/< per direction
  std::map<std::map<VarId, Rational>, std::pair<Rational, size_t>> eqs;
  std::vector<bool> keep(atoms.size(), true);
  for (size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (a.isGround()) continue;
    detail::Slope s = detail::slopeOf(a);
    if (a.rel() == Rel::Eq) {
      auto it = eqs.find(s.dir);
      if (it == eqs.end()) {
        eqs.emplace(s.dir, std::make_pair(s.bound, i));
      } else if (it->second.first != s.bound) {
        return {falseAtom()};
      } else {
        keep[i] = false;
      }
      continue;
    }
    detail::Slope key{s.dir, Rational(0)};
    auto it = bestIneq.find(key);
    if (it == bestIneq.end()) {
      bestIneq.emplace(key, i);
      continue;
    }
    const Atom& b = atoms[it->second];
    detail::Slope sb = detail::slopeOf(b);
    // d*x ⋈ bound: smaller bound is stronger; on ties strict wins.
    bool aStronger = s.bound < sb.bound ||
                     (s.bound == sb.bound && a.rel() == Rel::Lt && b.rel() == Rel::Le);
    if (aStronger) {
      keep[it->second] = false;
      it->second = i;
    } else {
      keep[i] = false;
    }
  }
  std::vector<Atom> out;
  for (size_t i = 0; i < atoms.size(); ++i)
    if (keep[i]) out.push_back(atoms[i]);
  return out;
}

/// Fourier-Motzkin projection of a conjunction of atoms along `vars`.
/// Equalities are used for Gaussian substitution first. The result is a
/// conjunction over the remaining variables equivalent to  exists vars . conj;
/// an empty result means true, {1 <= 0} means false.
inline std::vector<Atom> projectConjunction(std::vector<Atom> atoms, std::vector<VarId> vars) {
  auto clean = [](std::vector<Atom>& as) -> bool {
    std::vector<Atom> out;
    for (const auto& a : as) {
      if (a.isGround()) {
        if (!a.groundTruth()) return false;
        continue;
      }
      out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    as = std::move(out);
    return true;
  };
  if (!clean(atoms)) return {falseAtom()};

  // Gaussian phase: solve one equality per eliminable variable.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto vit = vars.begin(); vit != vars.end(); ++vit) {
      const VarId v = *vit;
      auto eit = std::find_if(atoms.begin(), atoms.end(), [&](const Atom& a) {
        return a.rel() == Rel::Eq && a.mentions(v);
      });
      if (eit == atoms.end()) continue;
      Rational c = eit->lhs().coeff(v);
      LinTerm rhs = eit->lhs();
      rhs.addTerm(v, -c);
      rhs *= Rational(-1) / c;  // v = rhs
      std::map<VarId, LinTerm> sigma{{v, rhs}};
      std::vector<Atom> next;
      for (auto it = atoms.begin(); it != atoms.end(); ++it) {
        if (it == eit) continue;
        next.emplace_back(it->lhs().substituted(sigma), it->rel());
      }
      atoms = std::move(next);
      if (!clean(atoms)) return {falseAtom()};
      vars.erase(vit);
      changed = true;
      break;
    }
  }

  // Fourier-Motzkin phase, fewest occurrences first.
  while (!vars.empty()) {
    auto count = [&](const VarId& v) {
      size_t n = 0;
      for (const auto& a : atoms)
        if (a.mentions(v)) ++n;
      return n;
    };
    auto vit = std::min_element(vars.begin(), vars.end(), [&](const VarId& a, const VarId& b) {
      size_t ca = count(a), cb = count(b);
      return ca != cb ? ca < cb : a < b;
    });
    VarId v = *vit;
    vars.erase(vit);

    std::vector<Atom> uppers, lowers, rest;
    for (const auto& a : atoms) {
      Rational c = a.lhs().coeff(v);
      if (c == 0)
        rest.push_back(a);
      else if (c > 0)
        uppers.push_back(a);
      else
        lowers.push_back(a);
    }
    std::vector<Atom> next = std::move(rest);
    for (const auto& u : uppers) {
      Rational a = u.lhs().coeff(v);
      for (const auto& l : lowers) {
        Rational b = -l.lhs().coeff(v);
        // a*v + p ⋈1 0 (a>0) and -b*v + q ⋈2 0 (b>0) give a*q + b*p ⋈ 0.
        LinTerm combined = l.lhs() * a + u.lhs() * b;
        combined.addTerm(v, -combined.coeff(v));  // cancel exactly
        Rel rel = (u.rel() == Rel::Lt || l.rel() == Rel::Lt) ? Rel::Lt : Rel::Le;
        next.emplace_back(std::move(combined), rel);
      }
    }
    atoms = std::move(next);
    if (!clean(atoms)) return {falseAtom()};
    atoms = dropRedundantRows(std::move(atoms));
    if (isFalseMarker(atoms)) return atoms;
  }
  return atoms;
}

/// Rational satisfiability of a conjunction, decided by projecting out every
/// variable and evaluating the ground residue.
inline bool isSatConj(const std::vector<Atom>& atoms) {
  std::set<VarId> vs;
  for (const auto& a : atoms)
    for (const auto& [v, c] : a.lhs().coeffs()) vs.insert(v);
  auto res = projectConjunction(atoms, std::vector<VarId>(vs.begin(), vs.end()));
  return !isFalseMarker(res);
}

inline Formula conjToFormula(const std::vector<Atom>& conj) {
  if (isFalseMarker(conj)) return Formula::falseF();
  std::vector<Formula> fs;
  fs.reserve(conj.size());
  for (const auto& a : conj) fs.push_back(Formula::atom(a));
  return Formula::andF(std::move(fs));
}

}  // namespace absynth
