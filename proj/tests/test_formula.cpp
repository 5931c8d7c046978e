#include <gtest/gtest.h>

#include "absynth/dnf.hpp"
#include "absynth/formula.hpp"
#include "absynth/sexp.hpp"
#include "testutil.hpp"

using namespace absynth;

namespace {

const VarId x("x"), y("y"), z("z");

LinTerm lt1(const VarId& v) { return LinTerm::var(v); }

Formula eq35() {
  // (xmin + xmax >= 0 && ymax = xmax) || (xmin + xmax < 0 && ymax = -xmin)
  VarId xmin("xmin"), xmax("xmax"), ymax("ymax");
  LinTerm sum = lt1(xmin) + lt1(xmax);
  return Formula::orF({
      Formula::andF({Formula::ge(sum, LinTerm()), Formula::eq(lt1(ymax), lt1(xmax))}),
      Formula::andF({Formula::lt(sum, LinTerm()), Formula::eq(lt1(ymax), -lt1(xmin))}),
  });
}

Assignment point(std::initializer_list<std::pair<const char*, Rational>> vs) {
  Assignment a;
  for (const auto& [n, q] : vs) a[VarId(n)] = q;
  return a;
}

TEST(Rational, ParsePrint) {
  EXPECT_EQ(toString(parseRational("3/6")), "1/2");
  EXPECT_EQ(toString(parseRational("-4/2")), "-2");
  EXPECT_EQ(toString(Rational(0)), "0");
  EXPECT_THROW(parseRational("x"), std::invalid_argument);
  EXPECT_EQ(rationalOfDouble(0.5), Rational(1, 2));
  EXPECT_EQ(rationalOfDouble(-3.0), Rational(-3));
  EXPECT_EQ(rationalOfDouble(0.1) == Rational(1, 10), false);  // 0.1 is not exact in binary64
}

TEST(LinTermTest, Arithmetic) {
  LinTerm t = lt1(x) * Rational(2) + lt1(y) * Rational(-1);
  t.addConstant(Rational(5));
  EXPECT_EQ(t.coeff(x), Rational(2));
  LinTerm u = t - lt1(x) * Rational(2);
  EXPECT_FALSE(u.mentions(x));
  EXPECT_EQ(u.eval(point({{"y", Rational(3)}})), Rational(2));
  EXPECT_THROW(u.eval(Assignment{}), MissingAssignment);
}

TEST(AtomTest, CanonicalIntegersGcdOne) {
  // 2/3 x - 4/3 y + 2 <= 0  canonicalizes to  x - 2y + 3 <= 0
  LinTerm t = lt1(x) * Rational(2, 3) - lt1(y) * Rational(4, 3);
  t.addConstant(Rational(2));
  Atom a(t, Rel::Le);
  EXPECT_EQ(a.lhs().coeff(x), Rational(1));
  EXPECT_EQ(a.lhs().coeff(y), Rational(-2));
  EXPECT_EQ(a.lhs().constant(), Rational(3));
  // idempotent
  Atom b(a.lhs(), a.rel());
  EXPECT_EQ(a, b);
}

TEST(AtomTest, EqualityLeadingCoefficientPositive) {
  Atom a(-lt1(x) + lt1(y), Rel::Eq);
  EXPECT_EQ(a.lhs().coeff(x), Rational(1));
  EXPECT_EQ(a.lhs().coeff(y), Rational(-1));
}

TEST(AtomTest, CanonicalizationIdempotentRandom) {
  testutil::Rng rng(7);
  std::vector<VarId> vars{x, y, z};
  for (int i = 0; i < 200; ++i) {
    Atom a = testutil::randomAtom(rng, vars);
    Atom b(a.lhs(), a.rel());
    EXPECT_EQ(a, b);
    Integer g(0);
    for (const auto& [v, c] : a.lhs().coeffs()) {
      EXPECT_EQ(rationalDen(c), Integer(1));
      g = boost::multiprecision::gcd(g, rationalNum(c));
    }
    if (a.lhs().constant() != 0) {
      EXPECT_EQ(rationalDen(a.lhs().constant()), Integer(1));
      g = boost::multiprecision::gcd(g, rationalNum(a.lhs().constant()));
    }
    if (g < 0) g = -g;
    EXPECT_EQ(g, Integer(1)) << a.str();
  }
}

TEST(FormulaTest, EvalDirectComparison) {
  Formula f = Formula::le(lt1(x), LinTerm(Rational(3)));
  EXPECT_TRUE(evalFormula(f, point({{"x", Rational(2)}})));
  EXPECT_FALSE(evalFormula(f, point({{"x", Rational(4)}})));
}

TEST(FormulaTest, EvalEq35AtPaperPoints) {
  Formula f = eq35();
  EXPECT_TRUE(evalFormula(
      f, point({{"xmin", Rational(-1)}, {"xmax", Rational(2)}, {"ymax", Rational(2)}})));
  EXPECT_FALSE(evalFormula(
      f, point({{"xmin", Rational(-1)}, {"xmax", Rational(2)}, {"ymax", Rational(1)}})));
}

TEST(FormulaTest, EvalErrors) {
  Formula f = Formula::exists({x}, Formula::le(lt1(x), lt1(y)));
  EXPECT_THROW(evalFormula(f, point({{"y", Rational(0)}})), QuantifiedInput);
  Formula g = Formula::le(lt1(x), lt1(y));
  EXPECT_THROW(evalFormula(g, point({{"y", Rational(0)}})), MissingAssignment);
}

TEST(FormulaTest, EmptyConnectives) {
  EXPECT_TRUE(Formula::andF({}).isTrue());
  EXPECT_TRUE(Formula::orF({}).isFalse());
}

TEST(SubstituteTest, Rename) {
  VarId p("p"), pp("p'"), ppp("p''");
  Formula f = Formula::le(lt1(pp), lt1(p));
  Formula g = substitute(f, {{pp, lt1(ppp)}});
  EXPECT_EQ(g, Formula::le(lt1(ppp), lt1(p)));
}

TEST(SubstituteTest, IdentityIsStructurallyEqual) {
  testutil::Rng rng(3);
  std::vector<VarId> vars{x, y, z};
  for (int i = 0; i < 50; ++i) {
    Formula f = testutil::randomQf(rng, vars, 6);
    std::map<VarId, LinTerm> id;
    for (const auto& v : vars) id.emplace(v, lt1(v));
    EXPECT_EQ(substitute(f, id), f);
  }
}

TEST(SubstituteTest, CaptureAvoidance) {
  Formula f = Formula::exists({x}, Formula::le(lt1(x), lt1(y)));
  Formula g = substitute(f, {{y, lt1(x)}});
  ASSERT_EQ(g.kind(), FKind::Exists);
  VarId b = g.boundVars()[0];
  EXPECT_NE(b, x);
  EXPECT_EQ(g.child(0), Formula::le(lt1(b), lt1(x)));
}

TEST(SubstituteTest, BoundOccurrencesUntouched) {
  Formula f = Formula::exists({x}, Formula::le(lt1(x), lt1(y)));
  Formula g = substitute(f, {{x, LinTerm(Rational(7))}});
  EXPECT_EQ(g, f);
}

TEST(DnfTest, Distributivity) {
  Formula A = Formula::le(lt1(x), LinTerm());
  Formula B = Formula::le(lt1(y), LinTerm());
  Formula C = Formula::le(lt1(z), LinTerm());
  Formula f = Formula::andF({A, Formula::orF({B, C})});
  Formula d = toDNF(f, false);
  EXPECT_EQ(d, Formula::orF({Formula::andF({A, B}), Formula::andF({A, C})}));
}

TEST(DnfTest, AlreadyDnfIsFixpoint) {
  Formula A = Formula::le(lt1(x), LinTerm());
  Formula B = Formula::lt(lt1(y), LinTerm());
  Formula f = Formula::orF({Formula::andF({A, B}), Formula::andF({A, Formula::notF(B)})});
  EXPECT_EQ(toDNF(f, false), f);
}

TEST(DnfTest, PruneDropsInfeasibleDisjunct) {
  // (x <= 0 && x >= 1) || (y <= 0)  pruned to  y <= 0
  Formula f = Formula::orF({
      Formula::andF({Formula::le(lt1(x), LinTerm()), Formula::ge(lt1(x), LinTerm(Rational(1)))}),
      Formula::le(lt1(y), LinTerm()),
  });
  EXPECT_EQ(toDNF(f, true), Formula::le(lt1(y), LinTerm()));
}

TEST(DnfTest, AgreesWithEvalOnRandomFormulas) {
  testutil::Rng rng(11);
  std::vector<VarId> vars{x, y, z};
  for (int i = 0; i < 120; ++i) {
    Formula f = testutil::randomQf(rng, vars, 8);
    Formula d0 = toDNF(f, false);
    Formula d1 = toDNF(f, true);
    std::set<VarId> fv = f.freeVars();
    for (int k = 0; k < 40; ++k) {
      Assignment a = testutil::randomAssignment(rng, std::set<VarId>{vars.begin(), vars.end()});
      bool expect = evalFormula(f, a);
      EXPECT_EQ(evalFormula(d0, a), expect);
      EXPECT_EQ(evalFormula(d1, a), expect);
    }
  }
}

TEST(SexpTest, RoundTrip) {
  std::string text = "(forall (x) (implies (>= (- x y) 0) (>= (- x 3) 0)))";
  Formula f = parseFormulaSexp(text);
  EXPECT_EQ(f.kind(), FKind::Forall);
  Formula g = parseFormulaSexp(sexpOfFormula(f));
  EXPECT_EQ(f, g);
}

TEST(SexpTest, LinTermSyntax) {
  LinTerm t = linTermOfSexp(parseSExp("(+ (* 2 x) (* -1/3 y) 5)"));
  EXPECT_EQ(t.coeff(x), Rational(2));
  EXPECT_EQ(t.coeff(y), Rational(-1, 3));
  EXPECT_EQ(t.constant(), Rational(5));
}

TEST(SexpTest, Errors) {
  EXPECT_THROW(parseFormulaSexp("(and (<= x 0)"), SyntaxError);
  EXPECT_THROW(parseFormulaSexp("(frob x)"), SyntaxError);
  EXPECT_THROW(linTermOfSexp(parseSExp("(* x y)")), SyntaxError);
}

}  // namespace
