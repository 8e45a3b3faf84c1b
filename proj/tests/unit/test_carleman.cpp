#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "degcarl/carleman.hpp"
#include "degcarl/error.hpp"

using namespace degcarl;

namespace {

ProblemSpec wwd(int N, int M, double T = 3.0) {
  ProblemSpec s;
  s.a = CoefficientFn::power(0.25, 0.5);
  s.b = CoefficientFn::power(0.25, 0.5);
  s.lambda = -1.0;
  s.N = N;
  s.M = M;
  s.T = T;
  return s;
}

ProblemSpec heat(int N, int M, double T = 3.0) {
  ProblemSpec s;
  s.N = N;
  s.M = M;
  s.T = T;
  return s;
}

std::vector<double> s_grid() {
  std::vector<double> s;
  for (int k = 0; k < 8; ++k) s.push_back(5.0 * std::pow(20.0, k / 7.0));
  return s;
}

}  // namespace

TEST_CASE("theta blows up at both ends") {
  CHECK(theta(0.5, 1.0).value == 256.0);
  CHECK(theta(0.25, 1.0).log == doctest::Approx(-4.0 * std::log(0.25 * 0.75)));
  CHECK(theta(0.2, 2.0).value == doctest::Approx(theta(1.8, 2.0).value));
  CHECK_THROWS_AS(theta(0.0, 1.0), Error);
  CHECK_THROWS_AS(theta(1.0, 1.0), Error);
}

TEST_CASE("psi table agrees with direct quadrature") {
  const ProblemSpec s = wwd(200, 100);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  for (std::size_t i = 0; i < g.size(); i += 17)
    CHECK(w.psi_nodes[i] == doctest::Approx(psi_at(w, s.a, g.nodes[i])).epsilon(1e-6));
  CHECK(w.psi_edges[g.x0_edge] == -w.d1 * w.d2);
  CHECK(w.d2 == doctest::Approx(1.5 * w.d2_bound));
  CHECK(w.K_used == 0.25);
}

TEST_CASE("weight invariants hold across regimes") {
  for (auto [K1, K2] : {std::pair{0.25, 0.25}, std::pair{1.0, 1.0}, std::pair{0.4, 1.3}, std::pair{1.3, 0.4}}) {
    ProblemSpec s = wwd(128, 64);
    s.a = CoefficientFn::power(K1, 0.5);
    s.b = CoefficientFn::power(K2, 0.5);
    const Grid g = build_grid(s);
    const WeightInvariants inv = check_weight_invariants(build_weights(s, g, 1.0, 1.0, 1.5), s, g);
    CHECK(inv.all());
    CHECK(inv.max_space < 0.0);
  }
  for (NondegVariant v : {NondegVariant::A1, NondegVariant::A2}) {
    const ProblemSpec s = heat(128, 64);
    NondegParams p;
    p.variant = v;
    const CarlemanWeights w = build_nondeg_weights(s, build_grid(s), p);
    CHECK_FALSE(w.degenerate());
    CHECK(check_weight_invariants(w, s, build_grid(s)).max_space < 0.0);
  }
}

TEST_CASE("weight construction preconditions") {
  const ProblemSpec s = wwd(64, 32);
  const Grid g = build_grid(s);
  CHECK_THROWS_AS(build_weights(s, g, 1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(build_weights(s, g, -1.0, 1.0, 1.5), Error);
  const ProblemSpec h = heat(64, 32);
  try {
    build_weights(h, build_grid(h), 1.0, 1.0, 1.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
  }
}

TEST_CASE("Carleman sides are quadratic in (v, h)") {
  const ProblemSpec s = wwd(64, 60);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  const auto cases = manufactured_family(1, 3, s, g);
  ManufacturedCase scaled = cases[0];
  const double c = 3.0;
  for (auto& f : scaled.v.fields)
    for (double& x : f) x *= c;
  for (auto& f : scaled.h.fields)
    for (double& x : f) x *= c;
  const CarlemanSides a = carleman_sides(cases[0].v, cases[0].h, 10.0, w, s, g);
  const CarlemanSides b = carleman_sides(scaled.v, scaled.h, 10.0, w, s, g);
  CHECK(b.lhs == doctest::Approx(c * c * a.lhs).epsilon(1e-13));
  CHECK(b.rhs == doctest::Approx(c * c * a.rhs).epsilon(1e-13));
}

TEST_CASE("endpoint levels carry negligible weight") {
  // e^{2sΘψ} at the first interior level underflows for s >= 1 on a fine time grid.
  const ProblemSpec s = wwd(64, 400, 1.0);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  const double th = theta(s.dt(), s.T).value;
  double worst = -std::numeric_limits<double>::infinity();
  for (double psi : w.psi_nodes) worst = std::max(worst, 2.0 * th * psi);
  CHECK(worst <= -690.0);
}

TEST_CASE("zero case gives the C_fit convention") {
  const ProblemSpec s = wwd(64, 40);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  ManufacturedCase zero{zero_trajectory(s, g, Direction::Backward), zero_trajectory(s, g, Direction::Backward)};
  const auto grid_s = s_grid();
  const ScanResult r = scan_s({zero}, grid_s, w, s, g);
  CHECK(r.C_fit == 0.0);
  REQUIRE(r.s0_est);
  CHECK(*r.s0_est == grid_s.front());
}

TEST_CASE("scan envelope holds above s0") {
  const ProblemSpec s = wwd(100, 200);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  const auto cases = manufactured_family(5, 17, s, g);
  const ScanResult r = scan_s(cases, s_grid(), w, s, g);
  CHECK(std::isfinite(r.C_fit));
  CHECK(r.C_fit > 0.0);
  REQUIRE(r.s0_est);
  CHECK(r.table.size() == 5 * s_grid().size());
  for (const ScanRow& row : r.table)
    if (row.s >= *r.s0_est) CHECK(row.lhs <= 1.05 * r.C_fit * row.rhs);
}

TEST_CASE("nondegenerate Dirichlet boundary term is reported with its sign") {
  const ProblemSpec s = heat(100, 200);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_nondeg_weights(s, g, NondegParams{});
  for (const ManufacturedCase& mc : manufactured_family(4, 5, s, g)) {
    const CarlemanSides sd = carleman_sides(mc.v, mc.h, 10.0, w, s, g);
    CHECK(std::isfinite(sd.boundary_term));
    CHECK(sd.rhs == doctest::Approx(sd.source_term + sd.boundary_term));
  }
}

TEST_CASE("scan rejects malformed grids") {
  const ProblemSpec s = wwd(64, 40);
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  const auto cases = manufactured_family(1, 1, s, g);
  CHECK_THROWS_AS(scan_s(cases, {}, w, s, g), Error);
  CHECK_THROWS_AS(scan_s(cases, {10.0, 5.0}, w, s, g), Error);
  CHECK_THROWS_AS(scan_s({}, {5.0}, w, s, g), Error);
}
