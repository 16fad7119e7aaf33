#include "sparsechan/lp.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sparsechan;

namespace {

// Bounded, feasible 4-variable / 6-constraint program: the first row caps
// Σx, the rest are random with b chosen so a random x₀ ≥ 0 is strictly feasible.
LinearProgram random_program(std::mt19937_64& rng, int n = 4, int m = 6) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  LinearProgram lp;
  lp.constraints.resize(m, n);
  lp.objective.resize(n);
  for (int j = 0; j < n; ++j) lp.objective(j) = g(rng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) lp.constraints(i, j) = i == 0 ? 1.0 : g(rng);
  RealVector x0(n);
  for (int j = 0; j < n; ++j) x0(j) = u(rng);
  lp.rhs = lp.constraints * x0;
  for (int i = 0; i < m; ++i) lp.rhs(i) += u(rng);
  return lp;
}

void expect_certified(const LpSolution& s, double tol) {
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_LE(s.kkt.primal_infeasibility, tol);
  EXPECT_LE(s.kkt.dual_infeasibility, tol);
  EXPECT_LE(s.kkt.complementarity_gap, tol);
}

}  // namespace

TEST(SolveLp, LowerBoundedScalar) {
  // minimize x s.t. −x ≤ −1
  LinearProgram lp{RealVector::Ones(1), RealMatrix::Constant(1, 1, -1.0), RealVector::Constant(1, -1.0)};
  const LpSolution s = solve_lp(lp);
  expect_certified(s, 1e-8);
  EXPECT_NEAR(s.x(0), 1.0, 1e-7);
  EXPECT_NEAR(s.objective_value, 1.0, 1e-7);
}

TEST(SolveLp, BoxVertex) {
  LinearProgram lp{-RealVector::Ones(2), RealMatrix::Identity(2, 2), RealVector::Ones(2)};
  const LpSolution s = solve_lp(lp);
  expect_certified(s, 1e-8);
  EXPECT_NEAR(s.x(0), 1.0, 1e-7);
  EXPECT_NEAR(s.x(1), 1.0, 1e-7);
  EXPECT_NEAR(s.objective_value, -2.0, 1e-7);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 50; ++t) {
    const LinearProgram lp = random_program(rng);
    const auto expected = oracle::lp_by_vertex_enumeration(lp.constraints, lp.rhs, lp.objective);
    ASSERT_TRUE(expected.has_value());
    const LpSolution s = solve_lp(lp);
    expect_certified(s, 1e-8);
    EXPECT_NEAR(s.objective_value, *expected, 1e-7) << "program " << t;
  }
}

TEST(SolveLp, ComplementarySlackness) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 20; ++t) {
    const LinearProgram lp = random_program(rng);
    const LpSolution s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::optimal);
    EXPECT_TRUE((s.x.array() >= -1e-8).all());
    EXPECT_TRUE((s.duals.array() >= 0.0).all());
    for (Eigen::Index i = 0; i < lp.rhs.size(); ++i)
      EXPECT_LE(std::abs(s.slacks(i) * s.duals(i)), 1e-8 * (1.0 + std::abs(s.objective_value)));
  }
}

TEST(SolveLp, ArgminInvariantUnderObjectiveScaling) {
  std::mt19937_64 rng(91);
  for (int t = 0; t < 20; ++t) {
    LinearProgram lp = random_program(rng);
    const LpSolution base = solve_lp(lp);
    const double factor = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    lp.objective *= factor;
    const LpSolution scaled = solve_lp(lp);
    ASSERT_EQ(scaled.status, LpStatus::optimal);
    EXPECT_LE((scaled.x - base.x).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(scaled.objective_value, factor * base.objective_value,
                1e-6 * (1.0 + std::abs(scaled.objective_value)));
  }
}

TEST(SolveLp, RelaxingRhsNeverHurts) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int t = 0; t < 20; ++t) {
    LinearProgram lp = random_program(rng);
    const double tight = solve_lp(lp).objective_value;
    for (Eigen::Index i = 0; i < lp.rhs.size(); ++i) lp.rhs(i) += u(rng);
    const double relaxed = solve_lp(lp).objective_value;
    EXPECT_LE(relaxed, tight + 1e-8 * (1.0 + std::abs(tight)));
  }
}

TEST(SolveLp, DetectsInfeasibility) {
  // x ≤ −1 with x ≥ 0
  LinearProgram lp{RealVector::Ones(1), RealMatrix::Constant(1, 1, 1.0), RealVector::Constant(1, -1.0)};
  const LpSolution s = solve_lp(lp);
  EXPECT_EQ(s.status, LpStatus::infeasible);
  EXPECT_LE(s.kkt.dual_infeasibility, 1e-8);
}

TEST(SolveLp, DetectsUnboundedness) {
  RealMatrix a(2, 2);
  a << 1.0, -1.0, -1.0, 1.0;  // |x₁ − x₂| ≤ 1, both may grow together
  LinearProgram lp{RealVector::Constant(2, -1.0), a, RealVector::Ones(2)};
  const LpSolution s = solve_lp(lp);
  EXPECT_EQ(s.status, LpStatus::unbounded);
  EXPECT_LE(s.kkt.primal_infeasibility, 1e-8);
  EXPECT_LT(lp.objective.dot(s.x), 0.0);
}

TEST(SolveLp, IterationLimitIsReported) {
  std::mt19937_64 rng(4);
  const LinearProgram lp = random_program(rng);
  const LpSolution s = solve_lp(lp, {1e-8, 1, 1e-10});
  EXPECT_EQ(s.status, LpStatus::iteration_limit);
  EXPECT_EQ(s.iterations, 1);
}

TEST(SolveLp, RejectsMalformedInput) {
  LinearProgram lp{RealVector::Ones(2), RealMatrix::Identity(2, 2), RealVector::Ones(2)};
  LinearProgram bad = lp;
  bad.rhs(0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_lp(bad), InvalidInput);
  bad = lp;
  bad.constraints = RealMatrix::Identity(3, 2);
  EXPECT_THROW(solve_lp(bad), InvalidInput);
  EXPECT_THROW(solve_lp(lp, {1e-3, 200, 1e-10}), InvalidInput);
  EXPECT_THROW(solve_lp(lp, {1e-8, 0, 1e-10}), InvalidInput);
}

TEST(SolveLp, RedundantEqualityPairs) {
  // x₁ + x₂ = 1 written twice as paired inequalities; minimize x₁ − x₂.
  RealMatrix a(4, 2);
  a << 1, 1, -1, -1, 1, 1, -1, -1;
  RealVector b(4);
  b << 1, -1, 1, -1;
  RealVector c(2);
  c << 1, -1;
  const LpSolution s = solve_lp({c, a, b});
  expect_certified(s, 1e-8);
  EXPECT_NEAR(s.objective_value, -1.0, 1e-7);
}
