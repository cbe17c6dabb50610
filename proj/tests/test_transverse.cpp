#include <gtest/gtest.h>

#include <cmath>

#include "dprime/transverse.hpp"

using namespace dprime;

namespace {

TransverseProblem problem(double beta, double d, Variant v, double theta = 0.0, double M = 0.0) {
  TransverseProblem p;
  p.beta = beta;
  p.d = d;
  p.variant = v;
  p.M_iface = M;
  if (v == Variant::minus) p.robin_theta = theta;
  return p;
}

// Independent fixed-point oracles: kappa = (2/beta) tanh(kappa d) for the
// Dirichlet ends and kappa = (2/beta) coth(kappa d) for Neumann ends; both
// maps are contractions near the root once d/beta > 1.
double plus_fixed_point(double beta, double d) {
  double k = 2 / beta;
  for (int i = 0; i < 200; ++i) k = 2 / beta * std::tanh(k * d);
  return -k * k;
}
double neumann_fixed_point(double beta, double d) {
  double k = 2 / beta;
  for (int i = 0; i < 200; ++i) k = 2 / beta / std::tanh(k * d);
  return -k * k;
}

}  // namespace

TEST(Transverse, LineLimit) {
  for (double beta : {0.05, 0.1, 0.2}) {
    const auto r = solve_transverse(problem(beta, 20 * beta, Variant::plus));
    EXPECT_NEAR(r.eigenvalue / line_eigenvalue(beta), 1.0, 1e-9);
  }
}

TEST(Transverse, RootsMatchFixedPointOracles) {
  for (double beta : {0.01, 0.1, 0.5})
    for (double ratio : {1.5, 2.5, 4.0}) {
      const double d = ratio * beta;
      const double tp = solve_transverse(problem(beta, d, Variant::plus)).eigenvalue;
      const double tm = solve_transverse(problem(beta, d, Variant::minus, 0.0)).eigenvalue;
      EXPECT_NEAR(tp / plus_fixed_point(beta, d), 1.0, 1e-13);
      EXPECT_NEAR(tm / neumann_fixed_point(beta, d), 1.0, 1e-13);
    }
}

TEST(Transverse, VariantsOrderAroundLineValue) {
  const double beta = 0.1, d = 0.3;
  const double tp = solve_transverse(problem(beta, d, Variant::plus)).eigenvalue;
  const double tm = solve_transverse(problem(beta, d, Variant::minus)).eigenvalue;
  const double tr = solve_transverse(problem(beta, d, Variant::minus, 0.3)).eigenvalue;
  EXPECT_LT(tm, line_eigenvalue(beta));
  EXPECT_GT(tp, line_eigenvalue(beta));
  EXPECT_GT(tr, tm);  // a Robin end raises the Neumann value
}

TEST(Transverse, ExactlyOneNegativeEigenvalue) {
  for (double beta : {0.01, 0.1, 1.0})
    for (double ratio : {0.8, 2.5, 10.0})
      for (Variant v : {Variant::plus, Variant::minus})
        EXPECT_EQ(count_negative_eigenvalues(problem(beta, ratio * beta, v, 0.2)), 1);
}

TEST(Transverse, InterfaceMeanCurvatureDoesNotMoveTheRoot) {
  for (Variant v : {Variant::plus, Variant::minus}) {
    const double a = solve_transverse(problem(0.1, 0.3, v, 0.2, 0.0)).eigenvalue;
    const double b = solve_transverse(problem(0.1, 0.3, v, 0.2, 1.7)).eigenvalue;
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
  }
}

TEST(Transverse, FiniteDifferenceOracleConvergesAtSecondOrder) {
  for (Variant v : {Variant::plus, Variant::minus}) {
    const auto p = problem(0.1, 0.3, v, 0.3, 0.4);
    const double exact = solve_transverse(p).eigenvalue;
    const double a = fd_oracle(p, 2500), b = fd_oracle(p, 5000), c = fd_oracle(p, 10000);
    EXPECT_LE(std::abs(c - exact) / std::abs(exact), 1e-5);
    EXPECT_LE(std::abs(c - exact) / std::abs(exact), 5e3 / (10000.0 * 10000.0));
    const double ratio = (a - b) / (b - c);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
  }
}

TEST(Transverse, LowerBoundHoldsOnWholeGrid) {
  const Lemma1Report rep = verify_lemma1({0.01, 0.02, 0.05, 0.1, 0.13}, {2.5, 3, 5, 10});
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.in_regime);
    EXPECT_GE(row.t_minus - row.lower, -1e-12 * std::abs(row.line));
    EXPECT_LE(row.t_minus - row.line, 1e-12 * std::abs(row.line));
    EXPECT_GE(row.t_plus - row.line, -1e-12 * std::abs(row.line));
  }
}

TEST(Transverse, UpperBoundHoldsForWideLayers) {
  const Lemma1Report rep = verify_lemma1({0.01, 0.02, 0.05, 0.1, 0.13}, {5, 10});
  EXPECT_TRUE(rep.all_pass());
  EXPECT_NEAR(rep.observed_constant, 16.0, 1e-3);
}

TEST(Transverse, UpperBoundExcessMatchesSecondOrderExpansion) {
  // 1 + t_+ beta^2/4 = 4x + (16a - 8) x^2 + O(x^3), x = exp(-4d/beta), a = 2d/beta,
  // so t_+ overshoots -4/beta^2 + 16x/beta^2 by (16a - 8) x^2 |t| to leading order.
  for (double ratio : {2.5, 3.0}) {
    const double beta = 0.05, d = ratio * beta;
    const double x = std::exp(-4 * ratio), a = 2 * ratio;
    const double t = solve_transverse(problem(beta, d, Variant::plus)).eigenvalue;
    const double upper = line_eigenvalue(beta) + lemma1_gap(beta, d);
    const double excess = (t - upper) / std::abs(line_eigenvalue(beta));
    EXPECT_GT(excess, 0.0);
    EXPECT_NEAR(excess / ((16 * a - 8) * x * x), 1.0, 0.02);
  }
}

TEST(Transverse, OutOfRegimeRowsAreMarked) {
  const Lemma1Report rep = verify_lemma1({0.1}, {1.0, 3.0});
  EXPECT_FALSE(rep.rows[0].in_regime);
  EXPECT_EQ(rep.rows[0].note, "out-of-regime");
  EXPECT_TRUE(rep.rows[1].in_regime);
}

TEST(Transverse, FormInequalityOnRandomTrials) {
  const FormInequalityReport r = check_form_inequality(0.1, 0.3, 200, 7);
  EXPECT_EQ(r.violations, 0);
  EXPECT_TRUE(r.neumann_respects_bound);
  EXPECT_LE(r.saturation_vs_eigenvalue, 1e-12);
  EXPECT_LE(r.saturation_vs_bound, 1e-8);
}

TEST(Transverse, QuadratureReproducesClosedFormIntegrals) {
  // f = sign(u) cosh(k (d - |u|)); per side int f'^2 = k^2 (sinh(2kd)/(4k) - d/2)
  // and int f^2 = sinh(2kd)/(4k) + d/2.
  const double k = 7.0, d = 0.4;
  const FormValues v = transverse_form(neumann_ground_state(k, d));
  const double s2 = std::sinh(2 * k * d) / (4 * k);
  EXPECT_NEAR(v.kinetic, 2 * k * k * (s2 - d / 2), 1e-10 * v.kinetic);
  EXPECT_NEAR(v.norm2, 2 * (s2 + d / 2), 1e-12 * v.norm2);
  EXPECT_NEAR(v.jump, 4 * std::cosh(k * d) * std::cosh(k * d), 1e-12 * v.jump);
}

TEST(Transverse, InvalidProblemsThrow) {
  EXPECT_THROW(solve_transverse(problem(0.1, -1.0, Variant::plus)), DomainError);
  EXPECT_THROW(solve_transverse(problem(0.0, 1.0, Variant::plus)), DomainError);
  EXPECT_THROW(solve_transverse(problem(0.1, 0.3, Variant::minus, -1.0)), DomainError);
}
