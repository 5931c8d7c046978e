#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absynth/formula.hpp"

namespace absynth {

/// Arithmetic expression tree. The shape is preserved (rather than flattened
/// into a LinTerm at parse time) because floating-point semantics rounds each
/// binary operation separately.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
struct Expr {
  enum class K { Const, Var, Add, Sub, Neg, MulConst };
  K kind;
  Rational cst;  // Const value or MulConst factor
  VarId var;
  ExprPtr a, b;

  static ExprPtr constant(Rational c) {
    auto e = std::make_shared<Expr>();
    e->kind = K::Const;
    e->cst = std::move(c);
    return e;
  }
  static ExprPtr variable(VarId v) {
    auto e = std::make_shared<Expr>();
    e->kind = K::Var;
    e->var = std::move(v);
    return e;
  }
  static ExprPtr binary(K k, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(l);
    e->b = std::move(r);
    return e;
  }
  static ExprPtr neg(ExprPtr x) {
    auto e = std::make_shared<Expr>();
    e->kind = K::Neg;
    e->a = std::move(x);
    return e;
  }
  static ExprPtr scale(Rational c, ExprPtr x) {
    auto e = std::make_shared<Expr>();
    e->kind = K::MulConst;
    e->cst = std::move(c);
    e->a = std::move(x);
    return e;
  }

  LinTerm linear() const {
    switch (kind) {
      case K::Const: return LinTerm(cst);
      case K::Var: return LinTerm::var(var);
      case K::Add: return a->linear() + b->linear();
      case K::Sub: return a->linear() - b->linear();
      case K::Neg: return -a->linear();
      case K::MulConst: return a->linear() * cst;
    }
    return LinTerm();
  }
};

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

/// Condition: the token nondet(), or a boolean combination of linear
/// comparisons.
struct Cond {
  enum class K { Nondet, Cmp, And, Or, Not };
  K kind = K::Nondet;
  CmpOp op = CmpOp::Le;
  ExprPtr lhs, rhs;
  std::vector<Cond> kids;

  static Cond nondet() { return Cond{}; }
  static Cond cmp(CmpOp o, ExprPtr l, ExprPtr r) {
    Cond c;
    c.kind = K::Cmp;
    c.op = o;
    c.lhs = std::move(l);
    c.rhs = std::move(r);
    return c;
  }
  static Cond logical(K k, std::vector<Cond> kids) {
    Cond c;
    c.kind = k;
    c.kids = std::move(kids);
    return c;
  }
  bool isNondet() const {
    if (kind == K::Nondet) return true;
    for (const auto& k : kids)
      if (k.isNondet()) return true;
    return false;
  }
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  enum class K { Assign, NondetAssign, If, While, Assume, Fail, Skip, Seq, MulAssign, CallAssign };
  K kind;
  int line = 0, column = 0;

  VarId var;      // Assign / NondetAssign / MulAssign / CallAssign target
  ExprPtr expr;   // Assign rhs, CallAssign argument
  VarId mulX, mulY;
  Cond cond;      // If / While / Assume
  StmtPtr thenS, elseS, body;
  std::vector<StmtPtr> seq;
};

struct ProgramAst {
  std::vector<VarId> vars;  // declared, in declaration order
  StmtPtr body;             // a Seq
};

namespace detail {

struct Token {
  enum class K { Ident, Number, Punct, End };
  K kind;
  std::string text;
  int line, column;
};

class MiniLexer {
 public:
  explicit MiniLexer(const std::string& s) : s_(s) { next(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    next();
    return t;
  }
  bool at(const std::string& p) const { return tok_.text == p && tok_.kind != Token::K::Number; }
  Token expect(const std::string& p) {
    if (!at(p)) fail("expected '" + p + "', got '" + tok_.text + "'");
    return take();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, tok_.line, tok_.column);
  }

 private:
  void next() {
    skip();
    tok_.line = line_;
    tok_.column = col_;
    if (pos_ >= s_.size()) {
      tok_ = Token{Token::K::End, "<eof>", line_, col_};
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string t;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        t += s_[pos_], advance();
      tok_ = Token{Token::K::Ident, t, tok_.line, tok_.column};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string t;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        t += s_[pos_], advance();
      // A '/' between digits is a rational literal; the grammar has no
      // division operator.
      if (pos_ + 1 < s_.size() && s_[pos_] == '/' &&
          std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
        t += '/';
        advance();
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
          t += s_[pos_], advance();
      }
      tok_ = Token{Token::K::Number, t, tok_.line, tok_.column};
      return;
    }
    static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||"};
    for (const char* p : two) {
      if (s_.compare(pos_, 2, p) == 0) {
        tok_ = Token{Token::K::Punct, p, tok_.line, tok_.column};
        advance();
        advance();
        return;
      }
    }
    tok_ = Token{Token::K::Punct, std::string(1, c), tok_.line, tok_.column};
    advance();
  }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
        advance();
        advance();
        while (pos_ + 1 < s_.size() && !(s_[pos_] == '*' && s_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= s_.size()) throw SyntaxError("unterminated comment", line_, col_);
        advance();
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
  Token tok_{Token::K::End, "", 1, 1};
};

class MiniParser {
 public:
  explicit MiniParser(const std::string& text) : lx_(text) {}

  ProgramAst parse() {
    ProgramAst p;
    while (lx_.at("var")) {
      lx_.take();
      for (;;) {
        Token t = ident();
        if (!declared_.insert(t.text).second)
          throw SyntaxError("variable '" + t.text + "' declared twice", t.line, t.column);
        p.vars.emplace_back(t.text);
        if (lx_.at(",")) {
          lx_.take();
          continue;
        }
        break;
      }
      lx_.expect(";");
    }
    std::vector<StmtPtr> stmts;
    while (lx_.peek().kind != Token::K::End) stmts.push_back(statement());
    p.body = mkSeq(std::move(stmts));
    return p;
  }

 private:
  Token ident() {
    if (lx_.peek().kind != Token::K::Ident) lx_.fail("expected an identifier");
    return lx_.take();
  }

  VarId declaredVar() {
    Token t = ident();
    if (!declared_.count(t.text)) throw UndeclaredVariable(t.text);
    return VarId(t.text);
  }

  std::shared_ptr<Stmt> mkStmt(Stmt::K k, const Token& at) {
    auto s = std::make_shared<Stmt>();
    s->kind = k;
    s->line = at.line;
    s->column = at.column;
    return s;
  }

  static StmtPtr mkSeq(std::vector<StmtPtr> ss) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::K::Seq;
    if (!ss.empty()) {
      s->line = ss.front()->line;
      s->column = ss.front()->column;
    }
    s->seq = std::move(ss);
    return s;
  }

  StmtPtr statement() {
    const Token t = lx_.peek();
    if (lx_.at("skip")) {
      lx_.take();
      lx_.expect(";");
      return mkStmt(Stmt::K::Skip, t);
    }
    if (lx_.at("fail")) {
      lx_.take();
      lx_.expect("(");
      lx_.expect(")");
      lx_.expect(";");
      return mkStmt(Stmt::K::Fail, t);
    }
    if (lx_.at("assume")) {
      lx_.take();
      lx_.expect("(");
      auto s = mkStmt(Stmt::K::Assume, t);
      s->cond = condition();
      lx_.expect(")");
      lx_.expect(";");
      return s;
    }
    if (lx_.at("mul")) {
      lx_.take();
      auto s = mkStmt(Stmt::K::MulAssign, t);
      s->var = declaredVar();
      s->mulX = declaredVar();
      s->mulY = declaredVar();
      lx_.expect(";");
      return s;
    }
    if (lx_.at("if")) {
      lx_.take();
      lx_.expect("(");
      Cond c = condition();
      lx_.expect(")");
      StmtPtr thenS = block();
      StmtPtr elseS;
      if (lx_.at("else")) {
        lx_.take();
        elseS = block();
      } else {
        elseS = mkSeq({});
      }
      auto s = mkStmt(Stmt::K::If, t);
      s->cond = std::move(c);
      s->thenS = std::move(thenS);
      s->elseS = std::move(elseS);
      return s;
    }
    if (lx_.at("while")) {
      lx_.take();
      lx_.expect("(");
      Cond c = condition();
      lx_.expect(")");
      StmtPtr body = block();
      auto s = mkStmt(Stmt::K::While, t);
      s->cond = std::move(c);
      s->body = std::move(body);
      return s;
    }
    // assignment forms
    VarId target = declaredVar();
    lx_.expect("=");
    if (lx_.at("nondet")) {
      lx_.take();
      lx_.expect("(");
      lx_.expect(")");
      lx_.expect(";");
      auto s = mkStmt(Stmt::K::NondetAssign, t);
      s->var = target;
      return s;
    }
    if (lx_.at("call")) {
      lx_.take();
      lx_.expect("(");
      ExprPtr arg = expression();
      lx_.expect(")");
      lx_.expect(";");
      auto s = mkStmt(Stmt::K::CallAssign, t);
      s->var = target;
      s->expr = std::move(arg);
      return s;
    }
    ExprPtr e = expression();
    lx_.expect(";");
    auto s = mkStmt(Stmt::K::Assign, t);
    s->var = target;
    s->expr = std::move(e);
    return s;
  }

  StmtPtr block() {
    lx_.expect("{");
    std::vector<StmtPtr> ss;
    while (!lx_.at("}")) {
      if (lx_.peek().kind == Token::K::End) lx_.fail("missing '}'");
      ss.push_back(statement());
    }
    lx_.take();
    return mkSeq(std::move(ss));
  }

  ExprPtr expression() {
    ExprPtr e = term();
    for (;;) {
      if (lx_.at("+")) {
        lx_.take();
        e = Expr::binary(Expr::K::Add, e, term());
      } else if (lx_.at("-")) {
        lx_.take();
        e = Expr::binary(Expr::K::Sub, e, term());
      } else {
        return e;
      }
    }
  }

  ExprPtr term() {
    if (lx_.at("-")) {
      lx_.take();
      return Expr::neg(term());
    }
    if (lx_.peek().kind == Token::K::Number) {
      Rational c = parseRational(lx_.take().text);
      if (lx_.at("*")) {
        lx_.take();
        return Expr::scale(c, Expr::variable(declaredVar()));
      }
      return Expr::constant(c);
    }
    if (lx_.peek().kind == Token::K::Ident) return Expr::variable(declaredVar());
    lx_.fail("expected an expression");
  }

  Cond condition() { return orCond(); }

  Cond orCond() {
    std::vector<Cond> kids{andCond()};
    while (lx_.at("||")) {
      lx_.take();
      kids.push_back(andCond());
    }
    return kids.size() == 1 ? kids[0] : Cond::logical(Cond::K::Or, std::move(kids));
  }

  Cond andCond() {
    std::vector<Cond> kids{unaryCond()};
    while (lx_.at("&&")) {
      lx_.take();
      kids.push_back(unaryCond());
    }
    return kids.size() == 1 ? kids[0] : Cond::logical(Cond::K::And, std::move(kids));
  }

  Cond unaryCond() {
    if (lx_.at("!")) {
      lx_.take();
      return Cond::logical(Cond::K::Not, {unaryCond()});
    }
    if (lx_.at("(")) {
      lx_.take();
      Cond c = condition();
      lx_.expect(")");
      return c;
    }
    if (lx_.at("nondet")) {
      lx_.take();
      lx_.expect("(");
      lx_.expect(")");
      return Cond::nondet();
    }
    if (lx_.at("true")) {
      lx_.take();
      return Cond::cmp(CmpOp::Le, Expr::constant(Rational(0)), Expr::constant(Rational(0)));
    }
    if (lx_.at("false")) {
      lx_.take();
      return Cond::cmp(CmpOp::Lt, Expr::constant(Rational(0)), Expr::constant(Rational(0)));
    }
    ExprPtr l = expression();
    CmpOp op;
    if (lx_.at("<=")) op = CmpOp::Le;
    else if (lx_.at(">=")) op = CmpOp::Ge;
    else if (lx_.at("==")) op = CmpOp::Eq;
    else if (lx_.at("!=")) op = CmpOp::Ne;
    else if (lx_.at("<")) op = CmpOp::Lt;
    else if (lx_.at(">")) op = CmpOp::Gt;
    else lx_.fail("expected a comparison operator");
    lx_.take();
    return Cond::cmp(op, std::move(l), expression());
  }

  MiniLexer lx_;
  std::set<std::string> declared_;
};

}  // namespace detail

inline ProgramAst parseProgram(const std::string& text) {
  return detail::MiniParser(text).parse();
}

/// Variables assigned anywhere in a statement (including loop bodies).
inline void collectAssigned(const StmtPtr& s, std::set<VarId>& out) {
  if (!s) return;
  switch (s->kind) {
    case Stmt::K::Assign:
    case Stmt::K::NondetAssign:
    case Stmt::K::MulAssign:
    case Stmt::K::CallAssign: out.insert(s->var); break;
    case Stmt::K::If:
      collectAssigned(s->thenS, out);
      collectAssigned(s->elseS, out);
      break;
    case Stmt::K::While: collectAssigned(s->body, out); break;
    case Stmt::K::Seq:
      for (const auto& c : s->seq) collectAssigned(c, out);
      break;
    default: break;
  }
}

inline bool containsWhile(const StmtPtr& s) {
  if (!s) return false;
  switch (s->kind) {
    case Stmt::K::While: return true;
    case Stmt::K::If: return containsWhile(s->thenS) || containsWhile(s->elseS);
    case Stmt::K::Seq:
      for (const auto& c : s->seq)
        if (containsWhile(c)) return true;
      return false;
    default: return false;
  }
}

inline bool containsCall(const StmtPtr& s) {
  if (!s) return false;
  switch (s->kind) {
    case Stmt::K::CallAssign: return true;
    case Stmt::K::If: return containsCall(s->thenS) || containsCall(s->elseS);
    case Stmt::K::While: return containsCall(s->body);
    case Stmt::K::Seq:
      for (const auto& c : s->seq)
        if (containsCall(c)) return true;
      return false;
    default: return false;
  }
}

}  // namespace absynth
