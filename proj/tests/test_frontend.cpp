#include <gtest/gtest.h>

#include "absynth/qelim.hpp"
#include "absynth/semantics.hpp"
#include "testutil.hpp"

using namespace absynth;

namespace {

LinTerm v(const char* n) { return LinTerm::var(VarId(n)); }
LinTerm k(int c) { return LinTerm(Rational(c)); }

Assignment pt(std::initializer_list<std::pair<const char*, Rational>> vs) {
  Assignment a;
  for (const auto& [n, q] : vs) a[VarId(n)] = q;
  return a;
}

std::vector<VarId> vars2{VarId("x"), VarId("y")};

/// Relation formulas carry existential auxiliaries; evaluate them by
/// projecting the auxiliaries out first (exact, via Fourier-Motzkin engine).
bool holdsAt(const Formula& rel, const Assignment& a) {
  Formula qf = eliminate(rel, QeMethod::DnfProjection);
  return evalFormula(qf, a);
}

TEST(Parser, SkipProgram) {
  ProgramAst p = parseProgram("var x; skip;");
  ASSERT_EQ(p.body->seq.size(), 1u);
  EXPECT_EQ(p.body->seq[0]->kind, Stmt::K::Skip);
}

TEST(Parser, AbsBody) {
  ProgramAst p = parseProgram("var x, y; if (x >= 0) { y = x; } else { y = 0 - x; }");
  ASSERT_EQ(p.body->seq.size(), 1u);
  EXPECT_EQ(p.body->seq[0]->kind, Stmt::K::If);
}

TEST(Parser, SyntaxErrorHasPosition) {
  try {
    parseProgram("var x;\nx = ;");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(Parser, UndeclaredVariable) {
  EXPECT_THROW(parseProgram("var x; y = 1;"), UndeclaredVariable);
}

TEST(Parser, CommentsAndRationals) {
  ProgramAst p = parseProgram(
      "var x; /* block\ncomment */ x = 1/2 * x + 3; // trailing\n");
  ASSERT_EQ(p.body->seq.size(), 1u);
  LinTerm t = p.body->seq[0]->expr->linear();
  EXPECT_EQ(t.coeff(VarId("x")), Rational(1, 2));
  EXPECT_EQ(t.constant(), Rational(3));
}

TEST(Semantics, SkipFramesEverything) {
  ProgramAst p = parseProgram("var x, y; skip;");
  Formula rel = semanticsOf(p.body, vars2);
  EXPECT_EQ(rel, Formula::andF({Formula::eq(v("x'"), v("x")), Formula::eq(v("y'"), v("y"))}));
}

TEST(Semantics, AssignFramesOthers) {
  ProgramAst p = parseProgram("var x, y, z; z = x + y;");
  std::vector<VarId> vars{VarId("x"), VarId("y"), VarId("z")};
  Formula rel = semanticsOf(p.body, vars);
  EXPECT_TRUE(holdsAt(rel, pt({{"x", Rational(1)},
                               {"y", Rational(2)},
                               {"z", Rational(9)},
                               {"x'", Rational(1)},
                               {"y'", Rational(2)},
                               {"z'", Rational(3)}})));
  EXPECT_FALSE(holdsAt(rel, pt({{"x", Rational(1)},
                                {"y", Rational(2)},
                                {"z", Rational(9)},
                                {"x'", Rational(1)},
                                {"y'", Rational(2)},
                                {"z'", Rational(4)}})));
}

TEST(Semantics, AbsBodyDisjunction) {
  ProgramAst p = parseProgram("var x, y; if (x >= 0) { y = x; } else { y = 0 - x; }");
  Formula rel = semanticsOf(p.body, vars2);
  auto at = [&](int x0, int y1) {
    return pt({{"x", Rational(x0)},
               {"y", Rational(7)},
               {"x'", Rational(x0)},
               {"y'", Rational(y1)}});
  };
  EXPECT_TRUE(holdsAt(rel, at(3, 3)));
  EXPECT_TRUE(holdsAt(rel, at(-3, 3)));
  EXPECT_FALSE(holdsAt(rel, at(3, -3)));
}

TEST(Semantics, FailIsFalse) {
  ProgramAst p = parseProgram("var x; if (x >= 0) { fail(); } else { fail(); }");
  Formula rel = semanticsOf(p.body, {VarId("x")});
  EXPECT_TRUE(eliminate(rel, QeMethod::DnfProjection).isFalse());
}

TEST(Semantics, SequencingAssociativity) {
  ProgramAst left = parseProgram("var x, y; x = x + 1; y = x; x = y + x;");
  Formula a = semanticsOf(left.body, vars2);
  // same statements nested the other way
  ProgramAst inner = parseProgram("var x, y; y = x; x = y + x;");
  auto seq = std::make_shared<Stmt>();
  seq->kind = Stmt::K::Seq;
  seq->seq = {parseProgram("var x, y; x = x + 1;").body->seq[0], inner.body};
  Formula b = semanticsOf(seq, vars2);
  testutil::Rng rng(13);
  Formula qa = eliminate(a, QeMethod::DnfProjection);
  Formula qb = eliminate(b, QeMethod::DnfProjection);
  std::set<VarId> all{VarId("x"), VarId("y"), VarId("x'"), VarId("y'")};
  for (int i = 0; i < 60; ++i) {
    Assignment s = testutil::randomAssignment(rng, all);
    EXPECT_EQ(evalFormula(qa, s), evalFormula(qb, s));
  }
}

TEST(Semantics, SkipNeutrality) {
  ProgramAst withSkip = parseProgram("var x, y; skip; y = x + 2; skip;");
  ProgramAst bare = parseProgram("var x, y; y = x + 2;");
  Formula a = eliminate(semanticsOf(withSkip.body, vars2), QeMethod::DnfProjection);
  Formula b = eliminate(semanticsOf(bare.body, vars2), QeMethod::DnfProjection);
  testutil::Rng rng(17);
  std::set<VarId> all{VarId("x"), VarId("y"), VarId("x'"), VarId("y'")};
  for (int i = 0; i < 60; ++i) {
    Assignment s = testutil::randomAssignment(rng, all);
    EXPECT_EQ(evalFormula(a, s), evalFormula(b, s));
  }
}

TEST(Semantics, WhileRejected) {
  ProgramAst p = parseProgram("var x; while (x <= 3) { x = x + 1; }");
  EXPECT_THROW(semanticsOf(p.body, {VarId("x")}), LoopInLoopFreeContext);
}

TEST(IntegerMode, StrictBecomesMinusOne) {
  Formula f = compareFormula(CmpOp::Lt, v("x"), v("y"), NumericMode::Int);
  EXPECT_EQ(f, Formula::le(v("x"), v("y") - k(1)));
}

TEST(IntegerMode, DisequalitySplits) {
  Formula f = compareFormula(CmpOp::Ne, v("i"), v("n"), NumericMode::Int);
  EXPECT_EQ(f, Formula::orF({Formula::ge(v("i"), v("n") + k(1)),
                             Formula::le(v("i"), v("n") - k(1))}));
}

TEST(IntegerMode, NegatedLeBecomesPlusOne) {
  Formula f = compareFormula(CmpOp::Le, v("x"), v("y"), NumericMode::Int, /*negated=*/true);
  EXPECT_EQ(f, Formula::ge(v("x"), v("y") + k(1)));
}

TEST(IntegerMode, FaithfulOnIntegerGrid) {
  // For integer points the recoded comparisons agree with the originals.
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) {
      Assignment s = pt({{"x", Rational(a)}, {"y", Rational(b)}});
      for (CmpOp op : {CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne}) {
        for (bool neg : {false, true}) {
          Formula fi = compareFormula(op, v("x"), v("y"), NumericMode::Int, neg);
          Formula fr = compareFormula(op, v("x"), v("y"), NumericMode::Real, neg);
          EXPECT_EQ(evalFormula(fi, s), evalFormula(fr, s))
              << "op " << static_cast<int>(op) << " neg " << neg << " at " << a << "," << b;
        }
      }
    }
}

TEST(FloatMode, DenormalSumIsExact) {
  FloatParams fp = FloatParams::binary64();
  VarId r("r");
  Formula round = roundPlusMinus(LinTerm::var(r), v("x"), fp);
  // inside [-m_normal, m_normal]: only r = x satisfies
  Rational tiny = fp.mNormal / 2;
  EXPECT_TRUE(evalFormula(round, pt({{"x", tiny}, {"r", tiny}})));
  EXPECT_FALSE(evalFormula(round, pt({{"x", tiny}, {"r", tiny + fp.epsAbs}})));
}

TEST(FloatMode, MultiplyAtZeroPinsZero) {
  FloatParams fp = FloatParams::binary64();
  VarId r("r");
  Formula round = roundAny(LinTerm::var(r), v("x"), fp);
  EXPECT_TRUE(evalFormula(round, pt({{"x", Rational(0)}, {"r", Rational(0)}})));
  EXPECT_FALSE(evalFormula(round, pt({{"x", Rational(0)}, {"r", fp.epsAbs}})));
}

TEST(FloatMode, CompoundExpressionRoundsTwice) {
  // product then sum: Round for the multiply, Round+- for the add
  ProgramAst p = parseProgram("var a, c, w; w = 3 * a + c;");
  SemanticsMode mode;
  mode.numeric = NumericMode::Float;
  Formula rel = semanticsOf(p.body, {VarId("a"), VarId("c"), VarId("w")}, mode);
  std::vector<VarId> aux;
  Formula matrix;
  prenexExists(rel, aux, matrix);
  EXPECT_EQ(aux.size(), 2u);  // one per operation
}

TEST(FloatMode, PresetsSatisfyDenormalRelation) {
  for (FloatParams fp : {FloatParams::binary64(), FloatParams::binary32()}) {
    EXPECT_GT(fp.epsRel, Rational(0));
    EXPECT_LT(fp.epsRel, Rational(1));
    // eps_abs = m_denormal / 2 with m_denormal = m_normal * eps_rel * 2
    EXPECT_EQ(fp.epsAbs, fp.mNormal * fp.epsRel);
  }
}

TEST(FloatMode, NativeSumsSatisfyRoundAxiom) {
  // 1e5 native binary64 additions all satisfy the Round+- relation.
  FloatParams fp = FloatParams::binary64();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mag(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-1080, 80);
  VarId xv("x"), rv("r");
  Formula round = roundPlusMinus(LinTerm::var(rv), LinTerm::var(xv), fp);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    double a = std::ldexp(mag(rng), expo(rng));
    double b = std::ldexp(mag(rng), expo(rng));
    double sum = a + b;
    if (!std::isfinite(sum)) continue;
    Assignment s;
    s[xv] = rationalOfDouble(a) + rationalOfDouble(b);
    s[rv] = rationalOfDouble(sum);
    ASSERT_TRUE(evalFormula(round, s)) << a << " + " << b;
    ++checked;
  }
  EXPECT_GT(checked, 90000);
}

TEST(LinearizeMul, OneSidedBounds) {
  VarId z("z'", VarSort::PrimedState), x("x"), y("y");
  Formula f = linearizeMul(z, x, y, std::nullopt, std::make_pair(Rational(2), Rational(3)));
  // x >= 0: 2x <= z' <= 3x ; x < 0: 3x <= z' <= 2x
  EXPECT_TRUE(evalFormula(f, pt({{"x", Rational(2)}, {"z'", Rational(5)}})));
  EXPECT_FALSE(evalFormula(f, pt({{"x", Rational(2)}, {"z'", Rational(7)}})));
  EXPECT_TRUE(evalFormula(f, pt({{"x", Rational(-1)}, {"z'", Rational(-3)}})));
  EXPECT_FALSE(evalFormula(f, pt({{"x", Rational(-1)}, {"z'", Rational(-1)}})));
}

TEST(LinearizeMul, ZeroWidthForcesZero) {
  VarId z("z'", VarSort::PrimedState), x("x"), y("y");
  Formula f = linearizeMul(z, x, y, std::nullopt, std::make_pair(Rational(0), Rational(0)));
  EXPECT_TRUE(evalFormula(f, pt({{"x", Rational(5)}, {"z'", Rational(0)}})));
  EXPECT_FALSE(evalFormula(f, pt({{"x", Rational(5)}, {"z'", Rational(1)}})));
  EXPECT_FALSE(evalFormula(f, pt({{"x", Rational(-5)}, {"z'", Rational(1)}})));
}

TEST(LinearizeMul, BothBoundsConjoin) {
  VarId z("z'", VarSort::PrimedState), x("x"), y("y");
  Formula f = linearizeMul(z, x, y, std::make_pair(Rational(0), Rational(1)),
                           std::make_pair(Rational(2), Rational(3)));
  // true products stay inside
  EXPECT_TRUE(evalFormula(
      f, pt({{"x", Rational(1, 2)}, {"y", Rational(5, 2)}, {"z'", Rational(5, 4)}})));
  // a value outside both instantiations is rejected
  EXPECT_FALSE(
      evalFormula(f, pt({{"x", Rational(1, 2)}, {"y", Rational(5, 2)}, {"z'", Rational(4)}})));
  EXPECT_THROW(linearizeMul(z, x, y, std::nullopt, std::nullopt), NoBoundsAvailable);
}

TEST(Nondet, ConditionDisjoinsBranches) {
  ProgramAst p = parseProgram("var x; if (nondet()) { x = 1; } else { x = 2; }");
  Formula rel = semanticsOf(p.body, {VarId("x")});
  EXPECT_TRUE(holdsAt(rel, pt({{"x", Rational(0)}, {"x'", Rational(1)}})));
  EXPECT_TRUE(holdsAt(rel, pt({{"x", Rational(0)}, {"x'", Rational(2)}})));
  EXPECT_FALSE(holdsAt(rel, pt({{"x", Rational(0)}, {"x'", Rational(3)}})));
}

}  // namespace
