#include <gtest/gtest.h>

#include "absynth/qelim.hpp"
#include "testutil.hpp"

using namespace absynth;

namespace {

const VarId x("x"), y("y"), z("z");
LinTerm v(const VarId& w) { return LinTerm::var(w); }
LinTerm k(int c) { return LinTerm(Rational(c)); }

const std::vector<QeMethod> kAllMethods{QeMethod::LoosWeispfenning, QeMethod::FerranteRackoff,
                                        QeMethod::DnfProjection};

bool semanticallyEqual(const Formula& a, const Formula& b) {
  Formula diff = Formula::notF(Formula::iff(a, b));
  std::set<VarId> fv = diff.freeVars();
  Formula closed =
      Formula::exists(std::vector<VarId>(fv.begin(), fv.end()), diff);
  return eliminate(closed, QeMethod::DnfProjection).isFalse();
}

TEST(Eliminate, ForallIntroExample) {
  // forall x (x >= y => x >= 1)  ==  y >= 1
  Formula f = Formula::forall({x}, Formula::implies(Formula::ge(v(x), v(y)),
                                                    Formula::ge(v(x), k(1))));
  for (QeMethod m : kAllMethods) {
    Formula r = eliminate(f, m);
    EXPECT_TRUE(r.isQuantifierFree());
    std::set<VarId> fv = r.freeVars();
    EXPECT_TRUE(fv.empty() || (fv.size() == 1 && *fv.begin() == y));
    EXPECT_TRUE(semanticallyEqual(r, Formula::ge(v(y), k(1)))) << qeMethodName(m) << ": " << r.str();
  }
}

TEST(Eliminate, ForallThresholdThree) {
  Formula f = Formula::forall({x}, Formula::implies(Formula::ge(v(x), v(y)),
                                                    Formula::ge(v(x), k(3))));
  for (QeMethod m : kAllMethods)
    EXPECT_TRUE(semanticallyEqual(eliminate(f, m), Formula::ge(v(y), k(3))));
}

TEST(Eliminate, StrictPair) {
  // exists x (y < x && x < z)  ==  y < z
  Formula f = Formula::exists({x}, Formula::andF({Formula::lt(v(y), v(x)), Formula::lt(v(x), v(z))}));
  for (QeMethod m : kAllMethods)
    EXPECT_TRUE(semanticallyEqual(eliminate(f, m), Formula::lt(v(y), v(z))));
}

TEST(Eliminate, FreeVariableContainment) {
  testutil::Rng rng(23);
  std::vector<VarId> vars{x, y, z};
  for (int i = 0; i < 60; ++i) {
    Formula qf = testutil::randomQf(rng, vars, 6);
    Formula f = Formula::exists({x}, qf);
    std::set<VarId> before = f.freeVars();
    for (QeMethod m : kAllMethods) {
      std::set<VarId> after = eliminate(f, m).freeVars();
      for (const auto& w : after) {
        EXPECT_TRUE(before.count(w));
        EXPECT_NE(w, x);
      }
    }
  }
}

TEST(Eliminate, ResourceLimitFires) {
  std::vector<VarId> vars{x, y, z};
  testutil::Rng rng(5);
  Formula f = testutil::randomQf(rng, vars, 8);
  Formula q = Formula::exists({x, y, z}, f);
  Budget tiny;
  tiny.maxNodes = 3;
  EXPECT_THROW(eliminate(q, QeMethod::LoosWeispfenning, tiny), ResourceLimit);
}

TEST(ProjectConjunction, Transitivity) {
  std::vector<Atom> conj{Atom(v(y) - v(x), Rel::Le), Atom(v(x) - v(z), Rel::Le)};
  auto r = projectConjunction(conj, {x});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], Atom(v(y) - v(z), Rel::Le));
}

TEST(ProjectConjunction, OneSidedBoundIsTrue) {
  auto r = projectConjunction({Atom(v(x) - k(5), Rel::Le)}, {x});
  EXPECT_TRUE(r.empty());
}

TEST(ProjectConjunction, CombinesScaledBounds) {
  // exists x: 2x <= y && -x <= 1   gives   -y <= 2
  std::vector<Atom> conj{Atom(v(x) * Rational(2) - v(y), Rel::Le), Atom(-v(x) - k(1), Rel::Le)};
  auto r = projectConjunction(conj, {x});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], Atom(-v(y) - k(2), Rel::Le));
}

TEST(ProjectConjunction, GaussianEqualityFirst) {
  // x = y + 1 && x <= z  projects to  y + 1 <= z
  std::vector<Atom> conj{Atom(v(x) - v(y) - k(1), Rel::Eq), Atom(v(x) - v(z), Rel::Le)};
  auto r = projectConjunction(conj, {x});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], Atom(v(y) + k(1) - v(z), Rel::Le));
}

TEST(ProjectConjunction, WitnessReconstruction) {
  // Any point satisfying the projection extends to a witness: recompute the
  // eliminated variable's interval from the original rows.
  testutil::Rng rng(41);
  std::vector<VarId> vars{x, y, z};
  int reconstructed = 0;
  for (int i = 0; i < 150; ++i) {
    std::vector<Atom> conj;
    int n = 2 + static_cast<int>(rng() % 4);
    for (int j = 0; j < n; ++j) {
      Atom a = testutil::randomAtom(rng, vars);
      if (a.rel() == Rel::Eq && (rng() & 1)) a = Atom(a.lhs(), Rel::Le);
      conj.push_back(a);
    }
    auto proj = projectConjunction(conj, {x});
    if (isFalseMarker(proj)) continue;
    Assignment a = testutil::randomAssignment(rng, {y, z});
    bool sat = true;
    for (const auto& at : proj)
      if (!at.eval(a)) sat = false;
    if (!sat) continue;
    // interval for x from the original conjunction at this point
    std::optional<Rational> lo, hi;
    bool loStrict = false, hiStrict = false, feasible = true;
    std::optional<Rational> pin;
    for (const auto& at : conj) {
      Rational c = at.lhs().coeff(x);
      if (c == 0) {
        if (!at.eval(a)) feasible = false;
        continue;
      }
      LinTerm rest = at.lhs();
      rest.addTerm(x, -c);
      Rational bound = -rest.eval(a) / c;
      if (at.rel() == Rel::Eq) {
        if (pin && *pin != bound) feasible = false;
        pin = bound;
      } else if (c > 0) {
        if (!hi || bound < *hi) hi = bound, hiStrict = at.rel() == Rel::Lt;
        else if (bound == *hi) hiStrict = hiStrict || at.rel() == Rel::Lt;
      } else {
        if (!lo || bound > *lo) lo = bound, loStrict = at.rel() == Rel::Lt;
        else if (bound == *lo) loStrict = loStrict || at.rel() == Rel::Lt;
      }
    }
    ASSERT_TRUE(feasible) << "projection not sound";
    Rational wx;
    if (pin)
      wx = *pin;
    else if (lo && hi)
      wx = (*lo + *hi) / 2;
    else if (lo)
      wx = *lo + 1;
    else if (hi)
      wx = *hi - 1;
    else
      wx = 0;
    if (pin == std::nullopt && lo && hi && *lo == *hi && (loStrict || hiStrict)) {
      ADD_FAILURE() << "projection kept an empty interval";
      continue;
    }
    Assignment full = a;
    full[x] = wx;
    for (const auto& at : conj) EXPECT_TRUE(at.eval(full)) << at.str();
    ++reconstructed;
  }
  EXPECT_GT(reconstructed, 20);
}

TEST(IsSatConj, Examples) {
  EXPECT_FALSE(isSatConj({Atom(v(x), Rel::Le), Atom(-v(x) + k(1), Rel::Le)}));  // x<=0, x>=1
  EXPECT_TRUE(isSatConj({Atom(v(x), Rel::Lt), Atom(-v(x) - k(1), Rel::Lt)}));   // x<0, x>-1
  EXPECT_TRUE(isSatConj({Atom(v(x) * Rational(2) + v(y) * Rational(3) - k(6), Rel::Le),
                         Atom(-v(x), Rel::Le), Atom(-v(y) + k(2), Rel::Le)}));
}

TEST(QelimDnfModulo, PaperAbsExample) {
  // Under t = (xmin+xmax >= 0), projecting ymax out of Eq 3.5 gives true.
  VarId xmin("xmin"), xmax("xmax"), ymax("ymax");
  LinTerm sum = v(xmin) + v(xmax);
  Formula f = Formula::orF({
      Formula::andF({Formula::ge(sum, LinTerm()), Formula::eq(v(ymax), v(xmax))}),
      Formula::andF({Formula::lt(sum, LinTerm()), Formula::eq(v(ymax), -v(xmin))}),
  });
  Formula t = Formula::ge(sum, LinTerm());
  EXPECT_TRUE(qelimDnfModulo({ymax}, f, t).isTrue());
}

TEST(QelimDnfModulo, TrueAssumptionReducesToDnf) {
  testutil::Rng rng(17);
  std::vector<VarId> vars{x, y, z};
  for (int i = 0; i < 40; ++i) {
    Formula f = testutil::randomQf(rng, vars, 6);
    EXPECT_EQ(qelimDnfModulo({}, f, Formula::trueF()), toDNF(f, true));
  }
}

TEST(QelimDnfModulo, DropsDisjunctAndErasesImpliedLiteral) {
  Formula A = Formula::le(v(y), k(1));
  Formula B = Formula::le(v(z), k(0));
  Formula xge0 = Formula::ge(v(x), k(0));
  Formula f = Formula::orF({Formula::andF({xge0, A}), Formula::andF({Formula::lt(v(x), k(0)), B})});
  EXPECT_EQ(qelimDnfModulo({}, f, xge0), A);
}

TEST(QelimDnfModulo, ContractHoldsOnRandomInputs) {
  testutil::Rng rng(29);
  std::vector<VarId> vars{x, y, z};
  std::set<VarId> varSet{vars.begin(), vars.end()};
  for (int i = 0; i < 40; ++i) {
    Formula f = testutil::randomQf(rng, vars, 6);
    // conjunction assumption
    std::vector<Formula> ts;
    for (int j = 0; j < 2; ++j) ts.push_back(Formula::atom(testutil::randomAtom(rng, vars)));
    Formula t = Formula::andF(ts);
    Formula fp = qelimDnfModulo({x}, f, t);
    Formula oracle = eliminate(Formula::exists({x}, f), QeMethod::DnfProjection);
    for (int p = 0; p < 60; ++p) {
      Assignment a = testutil::randomAssignment(rng, varSet);
      bool lhs = evalFormula(fp, a) && evalFormula(t, a);
      bool rhs = evalFormula(oracle, a) && evalFormula(t, a);
      EXPECT_EQ(lhs, rhs);
    }
  }
}

TEST(Differential, EnginesAgreeOnRandomFormulas) {
  testutil::Rng rng(101);
  std::vector<VarId> vars{x, y, z};
  std::uniform_int_distribution<int> nq(1, 3);
  int done = 0;
  for (int i = 0; i < 60; ++i) {
    Formula qf = testutil::randomQf(rng, vars, 8);
    int quantified = nq(rng);
    Formula f = qf;
    std::vector<VarId> qvars(vars.begin(), vars.begin() + quantified);
    f = (rng() & 1) ? Formula::exists(qvars, qf) : Formula::forall(qvars, qf);
    Formula lw = eliminate(f, QeMethod::LoosWeispfenning);
    Formula fr = eliminate(f, QeMethod::FerranteRackoff);
    Formula pr = eliminate(f, QeMethod::DnfProjection);
    std::set<VarId> fv = f.freeVars();
    std::set<VarId> all{vars.begin(), vars.end()};
    for (int p = 0; p < 100; ++p) {
      Assignment a = testutil::randomAssignment(rng, all);
      bool b0 = evalFormula(lw, a), b1 = evalFormula(fr, a), b2 = evalFormula(pr, a);
      ASSERT_EQ(b0, b1) << "LW vs FR on " << f.str();
      ASSERT_EQ(b0, b2) << "LW vs projection on " << f.str();
    }
    ++done;
  }
  EXPECT_EQ(done, 60);
}

TEST(Differential, DoubleNegationForall) {
  testutil::Rng rng(59);
  std::vector<VarId> vars{x, y, z};
  std::set<VarId> all{vars.begin(), vars.end()};
  for (int i = 0; i < 30; ++i) {
    Formula qf = testutil::randomQf(rng, vars, 6);
    Formula direct = eliminate(Formula::forall({x}, qf));
    Formula doubled =
        eliminate(Formula::notF(Formula::exists({x}, Formula::notF(qf))));
    for (int p = 0; p < 50; ++p) {
      Assignment a = testutil::randomAssignment(rng, all);
      EXPECT_EQ(evalFormula(direct, a), evalFormula(doubled, a));
    }
  }
}

TEST(Differential, BlockOrderIrrelevant) {
  testutil::Rng rng(71);
  std::vector<VarId> vars{x, y, z};
  std::set<VarId> all{vars.begin(), vars.end()};
  for (int i = 0; i < 20; ++i) {
    Formula qf = testutil::randomQf(rng, vars, 6);
    Formula a1 = eliminate(Formula::exists({x, y}, qf));
    Formula a2 = eliminate(Formula::exists({y, x}, qf));
    for (int p = 0; p < 50; ++p) {
      Assignment a = testutil::randomAssignment(rng, all);
      EXPECT_EQ(evalFormula(a1, a), evalFormula(a2, a));
    }
  }
}

}  // namespace
