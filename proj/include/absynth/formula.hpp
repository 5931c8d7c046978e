#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <vector>

#include "absynth/atom.hpp"

namespace absynth {

enum class FKind { True, False, Atom, Not, And, Or, Exists, Forall };

/// Immutable formula tree over linear atoms, with and/or/not and both
/// quantifiers. Shared by value; all operations are pure.
class Formula {
 public:
  Formula() : Formula(trueF()) {}

  static Formula trueF() { return Formula(node(FKind::True)); }
  static Formula falseF() { return Formula(node(FKind::False)); }
  static Formula boolean(bool b) { return b ? trueF() : falseF(); }

  /// Ground atoms fold to true/false.
  static Formula atom(Atom a) {
    if (a.isGround()) return boolean(a.groundTruth());
    auto n = node(FKind::Atom);
    n->atom = std::move(a);
    return Formula(n);
  }
  static Formula atom(LinTerm lhs, Rel rel) { return atom(Atom(std::move(lhs), rel)); }

  /// a <= b, a < b, a = b, a >= b, a > b as atoms; a != b as a disjunction
  /// of two strict atoms.
  static Formula le(const LinTerm& a, const LinTerm& b) { return atom(a - b, Rel::Le); }
  static Formula lt(const LinTerm& a, const LinTerm& b) { return atom(a - b, Rel::Lt); }
  static Formula ge(const LinTerm& a, const LinTerm& b) { return atom(b - a, Rel::Le); }
  static Formula gt(const LinTerm& a, const LinTerm& b) { return atom(b - a, Rel::Lt); }
  static Formula eq(const LinTerm& a, const LinTerm& b) { return atom(a - b, Rel::Eq); }
  static Formula ne(const LinTerm& a, const LinTerm& b) {
    return orF({lt(a, b), lt(b, a)});
  }

  /// Negation. Constants and <=,< atoms fold; equality atoms expand into the
  /// disjunction of the two strict sides; double negation cancels.
  static Formula notF(const Formula& f) {
    switch (f.kind()) {
      case FKind::True: return falseF();
      case FKind::False: return trueF();
      case FKind::Atom:
        if (f.theAtom().rel() == Rel::Eq) {
          const LinTerm& l = f.theAtom().lhs();
          return orF({atom(l, Rel::Lt), atom(-l, Rel::Lt)});
        }
        return atom(f.theAtom().negated());
      case FKind::Not: return f.child(0);
      default: {
        auto n = node(FKind::Not);
        n->children = {f};
        return Formula(n);
      }
    }
  }

  /// Conjunction: flattens, deduplicates, sorts canonically. Empty list is
  /// true; any false child makes it false.
  static Formula andF(std::vector<Formula> fs) { return nary(FKind::And, std::move(fs)); }
  /// Disjunction, dual conventions.
  static Formula orF(std::vector<Formula> fs) { return nary(FKind::Or, std::move(fs)); }

  static Formula implies(const Formula& a, const Formula& b) { return orF({notF(a), b}); }
  static Formula iff(const Formula& a, const Formula& b) {
    return orF({andF({a, b}), andF({notF(a), notF(b)})});
  }

  static Formula exists(std::vector<VarId> vars, const Formula& body) {
    return quant(FKind::Exists, std::move(vars), body);
  }
  static Formula forall(std::vector<VarId> vars, const Formula& body) {
    return quant(FKind::Forall, std::move(vars), body);
  }

  FKind kind() const { return n_->kind; }
  bool isTrue() const { return kind() == FKind::True; }
  bool isFalse() const { return kind() == FKind::False; }
  const Atom& theAtom() const { return *n_->atom; }
  const std::vector<Formula>& children() const { return n_->children; }
  const Formula& child(size_t i) const { return n_->children[i]; }
  const std::vector<VarId>& boundVars() const { return n_->bound; }

  bool isQuantifierFree() const {
    if (kind() == FKind::Exists || kind() == FKind::Forall) return false;
    for (const auto& c : children())
      if (!c.isQuantifierFree()) return false;
    return true;
  }

  std::set<VarId> freeVars() const {
    std::set<VarId> out;
    collectFree(out, {});
    return out;
  }

  /// Number of tree nodes, as the size measure for resource budgets.
  size_t nodeCount() const {
    size_t n = 1;
    for (const auto& c : children()) n += c.nodeCount();
    return n;
  }

  /// Structural total order; equal formulas compare 0.
  int compare(const Formula& o) const {
    if (n_ == o.n_) return 0;
    if (kind() != o.kind()) return kind() < o.kind() ? -1 : 1;
    if (kind() == FKind::Atom) return theAtom().compare(o.theAtom());
    if (boundVars() != o.boundVars())
      return std::lexicographical_compare(boundVars().begin(), boundVars().end(),
                                          o.boundVars().begin(), o.boundVars().end())
                 ? -1
                 : 1;
    size_t k = std::min(children().size(), o.children().size());
    for (size_t i = 0; i < k; ++i) {
      int c = child(i).compare(o.child(i));
      if (c != 0) return c;
    }
    if (children().size() != o.children().size())
      return children().size() < o.children().size() ? -1 : 1;
    return 0;
  }
  bool operator==(const Formula& o) const { return compare(o) == 0; }
  bool operator!=(const Formula& o) const { return compare(o) != 0; }
  bool operator<(const Formula& o) const { return compare(o) < 0; }

  /// Truth of a quantifier-free formula under a full assignment, with exact
  /// arithmetic throughout.
  bool eval(const Assignment& a) const {
    switch (kind()) {
      case FKind::True: return true;
      case FKind::False: return false;
      case FKind::Atom: return theAtom().eval(a);
      case FKind::Not: return !child(0).eval(a);
      case FKind::And:
        for (const auto& c : children())
          if (!c.eval(a)) return false;
        return true;
      case FKind::Or:
        for (const auto& c : children())
          if (c.eval(a)) return true;
        return false;
      default: throw QuantifiedInput();
    }
  }

  /// Capture-avoiding simultaneous substitution of variables by linear terms;
  /// atoms are re-canonicalized, bound occurrences are untouched.
  Formula substituted(const std::map<VarId, LinTerm>& sigma) const {
    if (sigma.empty()) return *this;
    switch (kind()) {
      case FKind::True:
      case FKind::False: return *this;
      case FKind::Atom: return atom(theAtom().lhs().substituted(sigma), theAtom().rel());
      case FKind::Not: return notF(child(0).substituted(sigma));
      case FKind::And:
      case FKind::Or: {
        std::vector<Formula> cs;
        cs.reserve(children().size());
        for (const auto& c : children()) cs.push_back(c.substituted(sigma));
        return nary(kind(), std::move(cs));
      }
      case FKind::Exists:
      case FKind::Forall: {
        // Restrict sigma to variables not bound here.
        std::map<VarId, LinTerm> inner;
        for (const auto& [v, t] : sigma)
          if (std::find(boundVars().begin(), boundVars().end(), v) == boundVars().end())
            inner.emplace(v, t);
        if (inner.empty()) return *this;
        // Rename bound variables that would capture a substituted image.
        std::set<VarId> imageVars;
        for (const auto& [v, t] : inner)
          for (const auto& [w, c] : t.coeffs()) imageVars.insert(w);
        std::vector<VarId> bound = boundVars();
        Formula body = child(0);
        std::map<VarId, LinTerm> renaming;
        std::set<VarId> taken = body.freeVars();
        for (const auto& [v, t] : inner) taken.insert(v);
        taken.insert(imageVars.begin(), imageVars.end());
        for (auto& b : bound) {
          if (!imageVars.count(b)) continue;
          VarId fresh = b;
          do {
            fresh.name += "'";
          } while (taken.count(fresh));
          taken.insert(fresh);
          renaming.emplace(b, LinTerm::var(fresh));
          b = fresh;
        }
        if (!renaming.empty()) body = body.substituted(renaming);
        return quant(kind(), std::move(bound), body.substituted(inner));
      }
    }
    return *this;
  }

  Formula renamed(const std::map<VarId, VarId>& ren) const {
    std::map<VarId, LinTerm> sigma;
    for (const auto& [a, b] : ren) sigma.emplace(a, LinTerm::var(b));
    return substituted(sigma);
  }

  /// Negation normal form: negations pushed onto atoms and absorbed.
  Formula nnf() const { return nnfImpl(false); }

  std::string str() const {
    switch (kind()) {
      case FKind::True: return "true";
      case FKind::False: return "false";
      case FKind::Atom: return theAtom().str();
      case FKind::Not: return "!(" + child(0).str() + ")";
      case FKind::And:
      case FKind::Or: {
        std::string sep = kind() == FKind::And ? " && " : " || ";
        std::string s = "(";
        for (size_t i = 0; i < children().size(); ++i) {
          if (i) s += sep;
          s += child(i).str();
        }
        return s + ")";
      }
      case FKind::Exists:
      case FKind::Forall: {
        std::string s = kind() == FKind::Exists ? "exists " : "forall ";
        for (size_t i = 0; i < boundVars().size(); ++i) {
          if (i) s += ",";
          s += boundVars()[i].name;
        }
        return s + ". (" + child(0).str() + ")";
      }
    }
    return "?";
  }

 private:
  struct Node {
    FKind kind;
    std::optional<Atom> atom;
    std::vector<Formula> children;
    std::vector<VarId> bound;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Formula(NodePtr n) : n_(std::move(n)) {}

  static std::shared_ptr<Node> node(FKind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
  }

  static Formula nary(FKind k, std::vector<Formula> fs) {
    const bool isAnd = k == FKind::And;
    std::vector<Formula> flat;
    for (auto& f : fs) {
      if (f.kind() == k) {
        for (const auto& c : f.children()) flat.push_back(c);
      } else if (isAnd ? f.isFalse() : f.isTrue()) {
        return isAnd ? falseF() : trueF();
      } else if (isAnd ? f.isTrue() : f.isFalse()) {
        // dropped
      } else {
        flat.push_back(std::move(f));
      }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end(),
                           [](const Formula& a, const Formula& b) { return a == b; }),
               flat.end());
    if (flat.empty()) return isAnd ? trueF() : falseF();
    if (flat.size() == 1) return flat[0];
    // Complementary <=/< literals fold the whole connective.
    for (size_t i = 0; i + 1 < flat.size(); ++i) {
      if (flat[i].kind() != FKind::Atom) continue;
      const Atom& a = flat[i].theAtom();
      if (a.rel() == Rel::Eq) continue;
      Atom neg = a.negated();
      for (size_t j = i + 1; j < flat.size(); ++j) {
        if (flat[j].kind() == FKind::Atom && flat[j].theAtom() == neg)
          return isAnd ? falseF() : trueF();
      }
    }
    auto n = node(k);
    n->children = std::move(flat);
    return Formula(n);
  }

  static Formula quant(FKind k, std::vector<VarId> vars, const Formula& body) {
    if (body.isTrue() || body.isFalse()) return body;
    std::set<VarId> fv = body.freeVars();
    std::vector<VarId> used;
    for (auto& v : vars)
      if (fv.count(v)) used.push_back(v);
    if (used.empty()) return body;
    if (body.kind() == k) {
      // merge adjacent blocks of the same quantifier
      for (const auto& v : body.boundVars())
        if (std::find(used.begin(), used.end(), v) == used.end()) used.push_back(v);
      auto n = node(k);
      n->bound = std::move(used);
      n->children = {body.child(0)};
      return Formula(n);
    }
    auto n = node(k);
    n->bound = std::move(used);
    n->children = {body};
    return Formula(n);
  }

  Formula nnfImpl(bool neg) const {
    switch (kind()) {
      case FKind::True:
      case FKind::False:
      case FKind::Atom: return neg ? notF(*this) : *this;
      case FKind::Not: return child(0).nnfImpl(!neg);
      case FKind::And:
      case FKind::Or: {
        std::vector<Formula> cs;
        cs.reserve(children().size());
        for (const auto& c : children()) cs.push_back(c.nnfImpl(neg));
        FKind k = kind();
        if (neg) k = k == FKind::And ? FKind::Or : FKind::And;
        return nary(k, std::move(cs));
      }
      case FKind::Exists:
      case FKind::Forall: {
        FKind k = kind();
        if (neg) k = k == FKind::Exists ? FKind::Forall : FKind::Exists;
        return quant(k, boundVars(), child(0).nnfImpl(neg));
      }
    }
    return *this;
  }

  void collectFree(std::set<VarId>& out, std::set<VarId> bound) const {
    switch (kind()) {
      case FKind::Atom:
        for (const auto& [v, c] : theAtom().lhs().coeffs())
          if (!bound.count(v)) out.insert(v);
        return;
      case FKind::Exists:
      case FKind::Forall:
        for (const auto& v : boundVars()) bound.insert(v);
        child(0).collectFree(out, std::move(bound));
        return;
      default:
        for (const auto& c : children()) c.collectFree(out, bound);
        return;
    }
  }

  NodePtr n_;
};

/// evalFormula per the formula contract: total on quantifier-free formulas
/// with full assignments, exact.
inline bool evalFormula(const Formula& f, const Assignment& a) { return f.eval(a); }

inline Formula substitute(const Formula& f, const std::map<VarId, LinTerm>& sigma) {
  return f.substituted(sigma);
}

}  // namespace absynth
