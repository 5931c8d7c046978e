#pragma once

#include "absynth/budget.hpp"
#include "absynth/conjunction.hpp"

namespace absynth {

using Conjunct = std::vector<Atom>;  // sorted, deduplicated
using DnfClauses = std::vector<Conjunct>;

namespace detail {

/// Merge two conjuncts; nullopt when an exact complementary pair appears.
inline std::optional<Conjunct> mergeConjuncts(const Conjunct& a, const Conjunct& b) {
  Conjunct out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (const auto& at : out) {
    if (at.rel() == Rel::Eq) continue;
    if (std::binary_search(out.begin(), out.end(), at.negated())) return std::nullopt;
  }
  return out;
}

inline void sortClauses(DnfClauses& cs) {
  auto less = [](const Conjunct& x, const Conjunct& y) {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  };
  std::sort(cs.begin(), cs.end(), less);
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
}

/// Removes clauses subsumed by a smaller clause (A or A&B == A).
inline void dropSubsumedClauses(DnfClauses& cs) {
  std::vector<bool> keep(cs.size(), true);
  for (size_t i = 0; i < cs.size(); ++i) {
    if (!keep[i]) continue;
    for (size_t j = 0; j < cs.size(); ++j) {
      if (i == j || !keep[j] || cs[j].size() <= cs[i].size()) continue;
      if (std::includes(cs[j].begin(), cs[j].end(), cs[i].begin(), cs[i].end())) keep[j] = false;
    }
  }
  DnfClauses out;
  for (size_t i = 0; i < cs.size(); ++i)
    if (keep[i]) out.push_back(std::move(cs[i]));
  cs = std::move(out);
}

inline DnfClauses dnfRec(const Formula& f, Budget& budget) {
  switch (f.kind()) {
    case FKind::True: return {Conjunct{}};
    case FKind::False: return {};
    case FKind::Atom: return {Conjunct{f.theAtom()}};
    case FKind::Or: {
      DnfClauses out;
      for (const auto& c : f.children()) {
        DnfClauses part = dnfRec(c, budget);
        out.insert(out.end(), part.begin(), part.end());
      }
      sortClauses(out);
      return out;
    }
    case FKind::And: {
      DnfClauses acc{Conjunct{}};
      for (const auto& c : f.children()) {
        DnfClauses part = dnfRec(c, budget);
        DnfClauses next;
        budget.checkSize(acc.size() * part.size());
        for (const auto& x : acc)
          for (const auto& y : part) {
            auto m = mergeConjuncts(x, y);
            if (m) next.push_back(std::move(*m));
          }
        sortClauses(next);
        dropSubsumedClauses(next);
        acc = std::move(next);
        if (acc.empty()) break;
      }
      return acc;
    }
    default: throw QuantifiedInput("toDNF expects a quantifier-free formula");
  }
}

}  // namespace detail

/// DNF of a quantifier-free formula as clause lists. With `prune`, clauses
/// with no rational solution are removed.
inline DnfClauses dnfClauses(const Formula& f, bool prune, Budget& budget) {
  DnfClauses cs = detail::dnfRec(f.nnf(), budget);
  if (prune) {
    DnfClauses kept;
    for (auto& c : cs) {
      budget.checkTime();
      if (isSatConj(c)) kept.push_back(std::move(c));
    }
    cs = std::move(kept);
  }
  detail::sortClauses(cs);
  detail::dropSubsumedClauses(cs);
  return cs;
}

inline DnfClauses dnfClauses(const Formula& f, bool prune) {
  Budget b = Budget::unlimited();
  return dnfClauses(f, prune, b);
}

inline Formula clausesToFormula(const DnfClauses& cs) {
  std::vector<Formula> ds;
  ds.reserve(cs.size());
  for (const auto& c : cs) ds.push_back(conjToFormula(c));
  return Formula::orF(std::move(ds));
}

/// Disjunctive normal form with negations absorbed into the atoms.
inline Formula toDNF(const Formula& f, bool prune) {
  Budget b = Budget::unlimited();
  return clausesToFormula(dnfClauses(f, prune, b));
}

inline Formula toDNF(const Formula& f, bool prune, Budget& budget) {
  return clausesToFormula(dnfClauses(f, prune, budget));
}

}  // namespace absynth
