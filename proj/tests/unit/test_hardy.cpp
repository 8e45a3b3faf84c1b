#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "degcarl/error.hpp"
#include "degcarl/fields.hpp"
#include "degcarl/hardy.hpp"

using namespace degcarl;

namespace {

ProblemSpec power_pair(double K1, double K2, BoundaryKind bc, int N) {
  ProblemSpec s;
  s.a = CoefficientFn::power(K1, 0.5);
  s.b = CoefficientFn::power(K2, 0.5);
  s.lambda = -1.0;
  s.bc = bc;
  s.N = N;
  return s;
}

Eigen::MatrixXd dense(const SymTridiag& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = m.diag[i];
    if (i + 1 < n) d(i, i + 1) = d(i + 1, i) = m.off[i];
  }
  return d;
}

// C is optimal iff C·rhs - lhs is positive semidefinite and singular; rhs may itself be singular.
double extremal_eigenvalue(const HardyForms& f, double C) {
  const Eigen::MatrixXd M = C * dense(f.rhs) - dense(f.lhs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().minCoeff() / M.norm();
}

const HardyVariant kAll[] = {HardyVariant::DirichletP, HardyVariant::NeumannPBoundary, HardyVariant::CstarDirichlet,
                             HardyVariant::CstarNeumannH1, HardyVariant::CstarNeumannZero};

BoundaryKind bc_of(HardyVariant v) {
  return v == HardyVariant::DirichletP || v == HardyVariant::CstarDirichlet ? BoundaryKind::Dirichlet
                                                                             : BoundaryKind::Neumann;
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (HardyVariant v : kAll) CHECK(parse_hardy_variant(to_string(v)) == v);
  CHECK_THROWS_AS(parse_hardy_variant("no-such-variant"), Error);
}

TEST_CASE("classical Poincare constant for a = b = 1") {
  ProblemSpec s;
  s.N = 200;
  const ConstantReport r = best_constant(HardyVariant::CstarDirichlet, s, build_grid(s));
  CHECK(r.C_best == doctest::Approx(1.0 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-3));
}

TEST_CASE("inverse iteration agrees with a dense eigensolve") {
  for (HardyVariant v : kAll) {
    CAPTURE(to_string(v));
    const ProblemSpec s = power_pair(0.25, 0.25, bc_of(v), 60);
    const Grid g = build_grid(s);
    const HardyForms f = hardy_forms(v, s, g);
    const double C = best_constant(v, s, g).C_best;
    CHECK(std::abs(extremal_eigenvalue(f, C)) <= 1e-10);
    CHECK(extremal_eigenvalue(f, C * (1 - 1e-6)) < 0.0);
  }
}

TEST_CASE("margin is nonnegative on random fields and vanishes at the extremal") {
  for (HardyVariant v : kAll) {
    CAPTURE(to_string(v));
    const ProblemSpec s = power_pair(0.25, 0.25, bc_of(v), 100);
    const Grid g = build_grid(s);
    const ConstantReport r = best_constant(v, s, g);
    const HardyForms f = hardy_forms(v, s, g);
    Rng rng(21);
    for (int k = 0; k < 20; ++k) {
      auto w = smooth_random_field(g, bc_of(v), rng);
      for (std::size_t i : f.dropped) w[i] = 0.0;
      const auto [lhs, rhs] = inequality_sides(v, w, s, g);
      CHECK(r.C_best * rhs - lhs >= -1e-10 * std::abs(lhs));
    }
    const auto [lhs, rhs] = inequality_sides(v, r.eigenvector, s, g);
    CHECK(std::abs(r.C_best * rhs - lhs) <= 1e-8 * std::abs(lhs));
  }
}

TEST_CASE("constrained variant rejects fields that do not vanish at x0") {
  const ProblemSpec s = power_pair(0.25, 0.25, BoundaryKind::Neumann, 64);
  const Grid g = build_grid(s);
  const std::vector<double> ones(g.size(), 1.0);
  try {
    verify_inequality(HardyVariant::CstarNeumannZero, ones, 1.0, s, g);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
  }
}

TEST_CASE("the C* variant follows boundary condition and regime") {
  const auto nodes = build_grid(100, 0.5).nodes;
  auto rep = [&](double K1, double K2) {
    return classify_pair(CoefficientFn::power(K1, 0.5), CoefficientFn::power(K2, 0.5), nodes);
  };
  CHECK(cstar_variant(BoundaryKind::Dirichlet, rep(0.25, 0.25)) == HardyVariant::CstarDirichlet);
  CHECK(cstar_variant(BoundaryKind::Neumann, rep(0.25, 0.25)) == HardyVariant::CstarNeumannH1);
  CHECK(cstar_variant(BoundaryKind::Neumann, rep(1.0, 1.0)) == HardyVariant::CstarNeumannZero);
}

TEST_CASE("admissible lambda intervals") {
  const auto nodes = build_grid(100, 0.5).nodes;
  const auto weak = classify_pair(CoefficientFn::power(0.25, 0.5), CoefficientFn::power(0.25, 0.5), nodes);
  const LambdaInterval dir = admissible_lambda_range(0.5, BoundaryKind::Dirichlet, weak);
  CHECK(dir.contains(1.9));
  CHECK_FALSE(dir.contains(2.0));
  CHECK_FALSE(dir.contains(0.0));
  CHECK(dir.contains(-10.0));
  const LambdaInterval neu = admissible_lambda_range(0.5, BoundaryKind::Neumann, weak);
  CHECK_FALSE(neu.contains(0.1));
  CHECK(neu.contains(-0.1));
  CHECK_THROWS_AS(admissible_lambda_range(0.0, BoundaryKind::Dirichlet, weak), Error);
}

TEST_CASE("refinement reports a relative gap") {
  const ProblemSpec s = power_pair(0.25, 0.25, BoundaryKind::Dirichlet, 100);
  const ConstantReport r = best_constant_refined(HardyVariant::CstarDirichlet, s);
  REQUIRE(r.refinement_gap.has_value());
  CHECK(*r.refinement_gap >= 0.0);
  CHECK(*r.refinement_gap < 0.05);
}

TEST_CASE("coercivity is positive for admissible lambda") {
  ProblemSpec s = power_pair(0.25, 0.25, BoundaryKind::Dirichlet, 100);
  const Grid g = build_grid(s);
  const CstarResult c = compute_cstar(s, g);
  s.lambda = 0.5 / c.report.C_best;
  const CoercivityReport r = coercivity_constant(s, g, c.report.C_best);
  CHECK(r.Lambda > 0.0);
  CHECK_FALSE(r.discrepancy);
}

TEST_CASE("Xi constant is positive inside the unit interval") {
  for (double q : {1.2, 1.5, 1.9})
    for (double x0 : {0.3, 0.5, 0.7}) CHECK(xi_constant(q, x0) > 0.0);
}
