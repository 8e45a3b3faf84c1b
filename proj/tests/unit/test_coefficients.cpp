#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "degcarl/coefficients.hpp"
#include "degcarl/error.hpp"
#include "degcarl/grid.hpp"

using namespace degcarl;

namespace {

std::vector<double> sample_nodes(int n, std::optional<double> x0) { return build_grid(n, x0).nodes; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Parameter;
}

}  // namespace

TEST_CASE("power coefficient matches its closed form") {
  const auto a = CoefficientFn::power(0.7, 0.4, 2.0);
  CHECK(a.degenerate());
  CHECK(a.value(0.4) == 0.0);
  CHECK(a.value(0.9) == doctest::Approx(2.0 * std::pow(0.5, 0.7)));
  CHECK(a.value(0.1) == doctest::Approx(2.0 * std::pow(0.3, 0.7)));
  // Central difference oracle for the analytic derivative, both sides of x0.
  for (double x : {0.05, 0.3, 0.45, 0.8}) {
    const double step = 1e-6;
    const double fd = (a.value(x + step) - a.value(x - step)) / (2 * step);
    CHECK(a.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("constant coefficient is the nondegenerate reference") {
  const auto c = CoefficientFn::constant(3.0);
  CHECK_FALSE(c.degenerate());
  CHECK(c.kind() == CoefficientKind::Constant);
  CHECK(c.value(0.25) == 3.0);
  CHECK(c.derivative(0.25) == 0.0);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK(kind_of([] { CoefficientFn::power(2.0, 0.5); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { CoefficientFn::power(0.5, 1.0); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { CoefficientFn::constant(0.0); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { CoefficientFn::tabulated({0.1, 0.2}, {1.0}, 0.5); }) == ErrorKind::Shape);
  CHECK(kind_of([] {
          CoefficientFn::tabulated({0.1, 0.2, 0.3, 0.6, 0.7, 0.8}, {1, 1, -1, 1, 1, 1}, 0.5);
        }) == ErrorKind::InvalidCoefficient);
}

TEST_CASE("tabulated power samples reproduce the power law") {
  const double K = 0.6, x0 = 0.5;
  std::vector<double> xs, vs;
  for (int i = 0; i < 400; ++i) {
    const double x = (i + 0.5) / 400.0;
    xs.push_back(x);
    vs.push_back(std::pow(std::abs(x - x0), K));
  }
  const auto t = CoefficientFn::tabulated(xs, vs, x0);
  CHECK(t.kind() == CoefficientKind::Tabulated);
  CHECK(t.value(0.8) == doctest::Approx(std::pow(0.3, K)).epsilon(1e-3));
  CHECK(t.value(0.2) == doctest::Approx(std::pow(0.3, K)).epsilon(1e-3));
  const double est = estimate_exponent(t, sample_nodes(100, x0));
  CHECK(est == doctest::Approx(K).epsilon(0.05));
}

TEST_CASE("parse_coefficient round trips through to_json") {
  const auto a = parse_coefficient(R"({"type":"power","K":1.25,"x0":0.3,"scale":0.5})");
  CHECK(a.exponent() == 1.25);
  CHECK(*a.x0() == 0.3);
  const auto b = parse_coefficient(a.to_json());
  for (double x : {0.1, 0.5, 0.9}) CHECK(b.value(x) == a.value(x));
  CHECK(parse_coefficient(R"({"type":"constant","value":2})").value(0.4) == 2.0);
  CHECK(kind_of([] { parse_coefficient(R"({"type":"cubic"})"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { parse_coefficient(R"({"type":"power","x0":0.5})"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { parse_coefficient("{not json"); }) == ErrorKind::Parse);
}

TEST_CASE("estimate_exponent recovers random exponents and scales") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> K(0.05, 1.95), S(0.01, 10.0), X(0.2, 0.8);
  for (int k = 0; k < 50; ++k) {
    const double kk = K(rng);
    const Grid g = build_grid(128, X(rng));
    CHECK(estimate_exponent(CoefficientFn::power(kk, *g.x0, S(rng)), g.nodes) == doctest::Approx(kk).epsilon(1e-10));
  }
}

TEST_CASE("classify_pair labels the regimes") {
  const auto nodes = sample_nodes(200, 0.5);
  auto cls = [&](double K1, double K2) {
    return classify_pair(CoefficientFn::power(K1, 0.5), CoefficientFn::power(K2, 0.5), nodes);
  };
  CHECK(cls(0.3, 0.4).regime == Regime::WWD);
  CHECK(cls(1.0, 1.0).regime == Regime::SSD);
  CHECK(cls(0.5, 1.5).regime == Regime::WSD);
  CHECK(cls(1.5, 0.5).regime == Regime::SWD);

  SUBCASE("weak pair below one needs the Neumann sign rule") {
    const auto r = cls(0.25, 0.25);
    CHECK(r.sum_below_one);
    CHECK(r.lambda_branch == LambdaBranch::NegativeOnlyNeumann);
    CHECK(r.scaling_bound_holds);
    CHECK(r.hardy_branch > 0);
  }
  SUBCASE("strong pair with K != 1 has no Hardy branch") { CHECK(cls(1.5, 1.5).hardy_branch == 0); }
  SUBCASE("interior zero from K1 + K2 >= 1") {
    CHECK(cls(0.6, 0.6).interior_zero);
    CHECK_FALSE(cls(0.3, 0.3).interior_zero);
  }
  SUBCASE("nondegenerate and mixed pairs") {
    CHECK(classify_pair(CoefficientFn::constant(1), CoefficientFn::constant(2), nodes).regime == Regime::Nondegenerate);
    CHECK(classify_pair(CoefficientFn::power(0.5, 0.5), CoefficientFn::constant(1), nodes).regime ==
          Regime::Unclassifiable);
  }
  SUBCASE("different zeros are unsupported") {
    CHECK(kind_of([&] { classify_pair(CoefficientFn::power(0.5, 0.5), CoefficientFn::power(0.5, 0.4), nodes); }) ==
          ErrorKind::UnsupportedConfiguration);
  }
}

TEST_CASE("scaling constants are the infima of |x-x0|^K / f") {
  const auto nodes = sample_nodes(200, 0.5);
  const auto r = classify_pair(CoefficientFn::power(0.5, 0.5, 4.0), CoefficientFn::power(0.5, 0.5, 0.5), nodes);
  CHECK(r.c1 == doctest::Approx(0.25));
  CHECK(r.c2 == doctest::Approx(2.0));
}

TEST_CASE("structural hypotheses report stable ids") {
  const auto nodes = sample_nodes(200, 0.5);
  const auto a = CoefficientFn::power(0.8, 0.5), b = CoefficientFn::power(0.3, 0.5);
  const HypothesisReport rep = check_structural_hypotheses(a, b, -1.0, nodes);
  std::vector<std::string> ids;
  for (const auto& c : rep.checks) ids.push_back(c.id);
  CHECK(std::find(ids.begin(), ids.end(), "log-derivative-lipschitz") != ids.end());
  CHECK(std::find(ids.begin(), ids.end(), "theta-monotone") != ids.end());
  CHECK(std::find(ids.begin(), ids.end(), "b-sign") != ids.end());
  CHECK(rep.all_pass());
  // Pure powers: (x-x0)a'/a is constant, and a/|x-x0|^K1 is flat.
  CHECK(rep.log_derivative_variation == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(*rep.theta == doctest::Approx(0.8));
}

TEST_CASE("weight identity with constant g on a constant a") {
  // a ≡ 1, g ≡ 1: a' = 0 so the induced value is √a g = 1 everywhere.
  WeightIdentity id;
  id.g = [](double) { return 1.0; };
  id.h0 = 1.0;
  id.frak_h = [](double, double) { return 1.0; };
  const auto nodes = sample_nodes(100, std::nullopt);
  const IdentityReport r = weight_identity_report(CoefficientFn::constant(1.0), id, nodes, true);
  REQUIRE(r.residual);
  CHECK(*r.residual == doctest::Approx(0.0));
  CHECK(r.induced_h_sup == doctest::Approx(1.0));
}

TEST_CASE("Gauss-Legendre integration is exact for polynomials") {
  CHECK(integrate([](double x) { return x * x * x * x; }, 0.0, 1.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) == doctest::Approx(2.0).epsilon(1e-12));
}
