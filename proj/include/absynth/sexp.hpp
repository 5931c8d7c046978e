#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "absynth/formula.hpp"

namespace absynth {

/// Generic S-expression node: either a token or a parenthesized list.
struct SExp {
  bool isList = false;
  std::string tok;
  std::vector<SExp> items;
  int line = 1, column = 1;

  const SExp& at(size_t i) const {
    if (!isList || i >= items.size())
      throw SyntaxError("malformed s-expression (missing argument)", line, column);
    return items[i];
  }
  const std::string& head() const {
    if (!isList || items.empty() || items[0].isList)
      throw SyntaxError("expected an operator symbol", line, column);
    return items[0].tok;
  }
};

namespace detail {

class SexpLexer {
 public:
  explicit SexpLexer(const std::string& text) : s_(text) {}

  SExp parse() {
    SExp e = parseOne();
    skipWs();
    if (pos_ < s_.size()) throw SyntaxError("trailing input after s-expression", line_, col_);
    return e;
  }

  SExp parseOne() {
    skipWs();
    if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", line_, col_);
    SExp e;
    e.line = line_;
    e.column = col_;
    if (s_[pos_] == '(') {
      advance();
      e.isList = true;
      skipWs();
      while (pos_ < s_.size() && s_[pos_] != ')') {
        e.items.push_back(parseOne());
        skipWs();
      }
      if (pos_ >= s_.size()) throw SyntaxError("missing ')'", line_, col_);
      advance();
      return e;
    }
    if (s_[pos_] == ')') throw SyntaxError("unexpected ')'", line_, col_);
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != ';')
      e.tok += s_[pos_], advance();
    return e;
  }

 private:
  void skipWs() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ';') {  // comment to end of line
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

inline bool looksNumeric(const std::string& t) {
  if (t.empty()) return false;
  size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  return i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]));
}

}  // namespace detail

inline SExp parseSExp(const std::string& text) { return detail::SexpLexer(text).parse(); }

inline LinTerm linTermOfSexp(const SExp& e) {
  if (!e.isList) {
    if (detail::looksNumeric(e.tok)) return LinTerm(parseRational(e.tok));
    return LinTerm::var(VarId(e.tok));
  }
  const std::string& op = e.head();
  if (op == "+") {
    LinTerm t;
    for (size_t i = 1; i < e.items.size(); ++i) t += linTermOfSexp(e.at(i));
    return t;
  }
  if (op == "-") {
    if (e.items.size() == 2) return -linTermOfSexp(e.at(1));
    LinTerm t = linTermOfSexp(e.at(1));
    for (size_t i = 2; i < e.items.size(); ++i) t -= linTermOfSexp(e.at(i));
    return t;
  }
  if (op == "*") {
    if (e.items.size() != 3)
      throw SyntaxError("'*' takes a constant and a term", e.line, e.column);
    LinTerm a = linTermOfSexp(e.at(1)), b = linTermOfSexp(e.at(2));
    if (a.isConstant()) return b * a.constant();
    if (b.isConstant()) return a * b.constant();
    throw SyntaxError("nonlinear product", e.line, e.column);
  }
  throw SyntaxError("unknown term operator '" + op + "'", e.line, e.column);
}

inline Formula formulaOfSexp(const SExp& e) {
  if (!e.isList) {
    if (e.tok == "true") return Formula::trueF();
    if (e.tok == "false") return Formula::falseF();
    throw SyntaxError("expected a formula, got '" + e.tok + "'", e.line, e.column);
  }
  const std::string& op = e.head();
  auto childList = [&](size_t from) {
    std::vector<Formula> fs;
    for (size_t i = from; i < e.items.size(); ++i) fs.push_back(formulaOfSexp(e.at(i)));
    return fs;
  };
  if (op == "and") return Formula::andF(childList(1));
  if (op == "or") return Formula::orF(childList(1));
  if (op == "not") return Formula::notF(formulaOfSexp(e.at(1)));
  if (op == "implies")
    return Formula::implies(formulaOfSexp(e.at(1)), formulaOfSexp(e.at(2)));
  if (op == "iff") return Formula::iff(formulaOfSexp(e.at(1)), formulaOfSexp(e.at(2)));
  if (op == "exists" || op == "forall") {
    const SExp& vl = e.at(1);
    if (!vl.isList) throw SyntaxError("expected a variable list", vl.line, vl.column);
    std::vector<VarId> vars;
    for (const auto& v : vl.items) {
      if (v.isList) throw SyntaxError("expected a variable name", v.line, v.column);
      vars.emplace_back(v.tok);
    }
    Formula body = formulaOfSexp(e.at(2));
    return op == "exists" ? Formula::exists(vars, body) : Formula::forall(vars, body);
  }
  if (op == "<=" || op == "<" || op == "=" || op == ">=" || op == ">" || op == "!=") {
    LinTerm a = linTermOfSexp(e.at(1)), b = linTermOfSexp(e.at(2));
    if (op == "<=") return Formula::le(a, b);
    if (op == "<") return Formula::lt(a, b);
    if (op == "=") return Formula::eq(a, b);
    if (op == ">=") return Formula::ge(a, b);
    if (op == ">") return Formula::gt(a, b);
    return Formula::ne(a, b);
  }
  throw SyntaxError("unknown formula operator '" + op + "'", e.line, e.column);
}

inline Formula parseFormulaSexp(const std::string& text) {
  return formulaOfSexp(parseSExp(text));
}

inline std::string sexpOfLinTerm(const LinTerm& t) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : t.coeffs()) {
    if (c == 1)
      parts.push_back(v.name);
    else
      parts.push_back("(* " + toString(c) + " " + v.name + ")");
  }
  if (t.constant() != 0 || parts.empty()) parts.push_back(toString(t.constant()));
  if (parts.size() == 1) return parts[0];
  std::string s = "(+";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

inline std::string sexpOfFormula(const Formula& f) {
  switch (f.kind()) {
    case FKind::True: return "true";
    case FKind::False: return "false";
    case FKind::Atom: {
      const Atom& a = f.theAtom();
      std::string rel = a.rel() == Rel::Le ? "<=" : a.rel() == Rel::Lt ? "<" : "=";
      return "(" + rel + " " + sexpOfLinTerm(a.lhs()) + " 0)";
    }
    case FKind::Not: return "(not " + sexpOfFormula(f.child(0)) + ")";
    case FKind::And:
    case FKind::Or: {
      std::string s = f.kind() == FKind::And ? "(and" : "(or";
      for (const auto& c : f.children()) s += " " + sexpOfFormula(c);
      return s + ")";
    }
    case FKind::Exists:
    case FKind::Forall: {
      std::string s = f.kind() == FKind::Exists ? "(exists (" : "(forall (";
      for (size_t i = 0; i < f.boundVars().size(); ++i) {
        if (i) s += " ";
        s += f.boundVars()[i].name;
      }
      return s + ") " + sexpOfFormula(f.child(0)) + ")";
    }
  }
  return "?";
}

}  // namespace absynth
