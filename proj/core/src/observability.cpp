#include "degcarl/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degcarl/error.hpp"
#include "degcarl/fields.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

namespace {

// F vⁿ for n = 1..M; for implicit Euler this is the previous adjoint level.
std::vector<double> resolved_level(const Trajectory& v, int n, const Stepper& stepper, const ProblemSpec& spec) {
  if (spec.scheme == Scheme::ImplicitEuler) return v.fields[n - 1];
  std::vector<double> f = v.fields[n];
  stepper.resolvent(f);
  return f;
}

}  // namespace

double observation_integral(const Trajectory& v, const Stepper& stepper, const ProblemSpec& spec) {
  const Grid& grid = stepper.grid();
  const auto mask = omega_mask(grid, spec.omega);
  const auto& mass = stepper.assembly().mass;
  double s = 0.0;
  for (int n = 1; n <= spec.M; ++n) {
    const auto f = resolved_level(v, n, stepper, spec);
    double lvl = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (mask[i]) lvl += mass[i] * f[i] * f[i];
    s += spec.dt() * lvl;
  }
  return s;
}

ObservationRatio observation_ratio(std::span<const double> vT, const ProblemSpec& spec, const Grid& grid) {
  bool nonzero = false;
  for (double x : vT) nonzero = nonzero || x != 0.0;
  if (!nonzero) fail(ErrorKind::Precondition, "observation ratio needs nonzero final data");
  const Stepper stepper(spec, grid);
  const Trajectory v = solve_adjoint(vT, nullptr, stepper, spec);
  ObservationRatio r;
  r.numerator = weighted_inner(v.fields[0], v.fields[0], grid, spec.a);
  r.denominator = observation_integral(v, stepper, spec);
  if (r.denominator > 0.0) {
    r.ratio = r.numerator / r.denominator;
  } else {
    r.ratio = std::numeric_limits<double>::infinity();
    r.infinite = true;
  }
  return r;
}

GramOperator::GramOperator(const ProblemSpec& spec, const Grid& grid)
    : spec_(spec), grid_(grid), stepper_(spec, grid), mask_(omega_mask(grid, spec.omega)) {}

Trajectory GramOperator::control(std::span<const double> vT) const {
  const Trajectory v = solve_adjoint(vT, nullptr, stepper_, spec_);
  Trajectory h = zero_trajectory(spec_, grid_);
  for (int n = 1; n <= spec_.M; ++n) {
    auto f = resolved_level(v, n, stepper_, spec_);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!mask_[i]) f[i] = 0.0;
    h.fields[n] = std::move(f);
  }
  return h;
}

std::vector<double> GramOperator::apply(std::span<const double> vT) const {
  ++applications_;
  const Trajectory h = control(vT);
  const std::vector<double> zero(grid_.size(), 0.0);
  return solve_forward(zero, &h, stepper_, spec_).fields.back();
}

std::vector<double> GramOperator::free_final(std::span<const double> u0) const {
  return solve_forward(u0, nullptr, stepper_, spec_).fields.back();
}

std::vector<double> GramOperator::adjoint_initial(std::span<const double> vT) const {
  return solve_adjoint(vT, nullptr, stepper_, spec_).fields.front();
}

double GramOperator::inner(std::span<const double> x, std::span<const double> y) const {
  const auto& m = stepper_.assembly().mass;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += m[i] * x[i] * y[i];
  return s;
}

CrResult conjugate_residual(const GramOperator& G, std::span<const double> b, double abs_tol, int max_iter,
                            double epsilon) {
  const std::size_t n = b.size();
  auto A = [&](std::span<const double> x) {
    auto y = G.apply(x);
    if (epsilon != 0.0)
      for (std::size_t i = 0; i < n; ++i) y[i] += epsilon * x[i];
    return y;
  };
  CrResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  double rnorm = std::sqrt(G.inner(r, r));
  res.residual_history.push_back(rnorm);
  if (rnorm <= abs_tol) {
    res.converged = true;
    return res;
  }
  std::vector<double> p = r;
  std::vector<double> Ar = A(r);
  std::vector<double> Ap = Ar;
  double rAr = G.inner(r, Ar);
  int flat = 0;
  for (int k = 1; k <= max_iter; ++k) {
    if (!(rAr > 0.0))
      fail(ErrorKind::NumericalFailure, "non-positive curvature in Gram solve at iteration " + std::to_string(k));
    const double ApAp = G.inner(Ap, Ap);
    const double alpha = rAr / ApAp;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    const double prev = rnorm;
    rnorm = std::sqrt(G.inner(r, r));
    res.residual_history.push_back(rnorm);
    res.iterations = k;
    if (rnorm <= abs_tol) {
      res.converged = true;
      return res;
    }
    flat = rnorm > prev * (1.0 - 1e-10) ? flat + 1 : 0;
    if (flat >= 10) {
      res.stalled = true;
      return res;
    }
    Ar = A(r);
    const double rAr_new = G.inner(r, Ar);
    const double beta = rAr_new / rAr;
    rAr = rAr_new;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = r[i] + beta * p[i];
      Ap[i] = Ar[i] + beta * Ap[i];
    }
  }
  return res;
}

LambdaInterval admissible_set(const ProblemSpec& spec, const Grid& grid) {
  const CstarResult c = compute_cstar(spec, grid);
  return admissible_lambda_range(c.report.C_best, spec.bc, c.degeneracy);
}

std::optional<HypothesisCheck> neumann_size_check(const ProblemSpec& spec, const Grid& grid) {
  if (spec.bc != BoundaryKind::Neumann || !grid.x0) return std::nullopt;
  const double x0 = *grid.x0;
  if (spec.omega.lo <= x0 && x0 <= spec.omega.hi) return std::nullopt;
  const DegeneracyReport rep = classify_pair(spec.a, spec.b, grid.nodes);
  if (!rep.sum_below_one) return std::nullopt;
  const ConstantReport c = best_constant(HardyVariant::CstarNeumannH1, spec, grid);
  double amax = std::max(spec.a.value(0.0), spec.a.value(1.0));
  for (double x : grid.nodes) amax = std::max(amax, spec.a.value(x));
  HypothesisCheck h;
  h.id = "neumann-size";
  h.margin = 1.0 / c.C_best - amax;
  h.pass = h.margin > 0.0;
  h.detail = "max a=" + fmt_g(amax) + " vs 1/C_HP=" + fmt_g(1.0 / c.C_best);
  return h;
}

ObservabilityEstimate estimate_observability_constant(const ProblemSpec& spec, const Grid& grid, int iters,
                                                      std::uint64_t seed, double rel_tol) {
  if (iters < 1) fail(ErrorKind::Parameter, "observability.iters must be at least 1");
  ObservabilityEstimate est;
  est.neumann_size = neumann_size_check(spec, grid);
  est.outside_hypotheses = est.neumann_size && !est.neumann_size->pass;

  const GramOperator G(spec, grid);
  Rng rng(derive_seed(seed, 0));
  std::vector<double> x = smooth_random_field(grid, spec.bc, rng);
  auto normalize = [&](std::vector<double>& v) {
    const double nv = std::sqrt(G.inner(v, v));
    for (double& e : v) e /= nv;
  };
  normalize(x);
  const int inner_max = std::max(200, 4 * grid.N);
  double best = 0.0;
  for (int k = 1; k <= iters; ++k) {
    const auto Ex = G.adjoint_initial(x);
    const auto E2x = G.adjoint_initial(Ex);
    const auto Lx = G.apply(x);
    const double mu = G.inner(Ex, Ex) / G.inner(Lx, x);
    est.history.push_back(mu);
    est.iterations = k;
    if (mu > best) {
      best = mu;
      est.extremal = x;
    }
    if (k >= 2) {
      const double prev = est.history[k - 2];
      est.gap = std::abs(mu - prev) / std::abs(mu);
      if (est.gap <= rel_tol) {
        est.converged = true;
        break;
      }
    }
    const double bn = std::sqrt(G.inner(E2x, E2x));
    CrResult cr = conjugate_residual(G, E2x, 1e-10 * bn, inner_max);
    x = std::move(cr.x);
    normalize(x);
  }
  est.C_T = best;
  if (!est.converged) est.warning = true;
  return est;
}

namespace {

double duality_gate(const ProblemSpec& spec, const Grid& grid) {
  Rng rng(derive_seed(0x5eed, 7));
  const auto u0 = smooth_random_field(grid, spec.bc, rng);
  const auto vT = smooth_random_field(grid, spec.bc, rng);
  const auto mask = omega_mask(grid, spec.omega);
  Trajectory h = zero_trajectory(spec, grid);
  const auto prof = smooth_random_field(grid, spec.bc, rng);
  for (int n = 1; n <= spec.M; ++n)
    for (std::size_t i = 0; i < grid.size(); ++i)
      h.fields[n][i] = mask[i] ? prof[i] * std::cos(3.0 * n * spec.dt()) : 0.0;
  const DualityReport d = duality_check(u0, h, vT, spec, grid);
  return d.scale > 0.0 ? d.residual_exact() / d.scale : d.residual_exact();
}

}  // namespace

HUMResult hum_control(std::span<const double> u0, const ProblemSpec& spec, const Grid& grid, double tol, int max_iter) {
  if (!(tol > 0.0)) fail(ErrorKind::Parameter, "hum.tol must be positive");
  if (max_iter < 1) fail(ErrorKind::Parameter, "hum.max_iter must be at least 1");
  if (u0.size() != grid.size()) fail(ErrorKind::Shape, "initial field length does not match grid");
  const LambdaInterval I = admissible_set(spec, grid);
  if (!I.contains(spec.lambda))
    fail(ErrorKind::Precondition, "lambda-admissible: hum_control refused, lambda=" + fmt_g(spec.lambda) +
                                      " outside admissible set " + I.describe());

  HUMResult out;
  out.duality_residual = duality_gate(spec, grid);
  if (out.duality_residual > 1e-10)
    fail(ErrorKind::NumericalFailure, "discrete duality identity fails (relative residual " +
                                          fmt_g(out.duality_residual) + ")");

  const GramOperator G(spec, grid);
  const double n0 = std::sqrt(G.inner(u0, u0));
  if (n0 == 0.0) {
    out.control = zero_trajectory(spec, grid);
    out.converged = true;
    return out;
  }
  std::vector<double> b = G.free_final(u0);
  for (double& e : b) e = -e;

  CrResult cr = conjugate_residual(G, b, tol * n0, max_iter);
  if (!cr.converged && cr.stalled) {
    const double scale = G.inner(G.apply(b), b) / G.inner(b, b);
    out.epsilon = 1e-8 * scale;
    cr = conjugate_residual(G, b, tol * n0, max_iter, out.epsilon);
  }
  out.cg_iterations = cr.iterations;
  for (double r : cr.residual_history) out.residual_history.push_back(r / n0);
  for (std::size_t k = 1; k < out.residual_history.size(); ++k)
    if (!(out.residual_history[k] < out.residual_history[k - 1])) out.residual_monotone = false;

  out.control = G.control(cr.x);
  const Trajectory u = solve_forward(u0, &out.control, G.stepper(), spec);
  out.final_norm_ratio = std::sqrt(G.inner(u.fields.back(), u.fields.back())) / n0;
  double cost = 0.0;
  for (int n = 1; n <= spec.M; ++n) cost += spec.dt() * G.inner(out.control.fields[n], out.control.fields[n]);
  out.cost_ratio = cost / (n0 * n0);
  out.converged = out.final_norm_ratio <= tol;
  return out;
}

void check_caccioppoli_geometry(Interval omega_prime, Interval omega, const Grid& grid) {
  if (grid.x0 && omega.lo <= *grid.x0 && *grid.x0 <= omega.hi)
    fail(ErrorKind::Precondition, "omega-geometry: x0=" + fmt_g(*grid.x0) + " lies in the closure of omega");
  if (!(omega.lo < omega_prime.lo && omega_prime.lo < omega_prime.hi && omega_prime.hi < omega.hi))
    fail(ErrorKind::Precondition, "omega-geometry: omega' must be compactly contained in omega");
}

CaccioppoliSides caccioppoli_margin(const Trajectory& v, Interval omega_prime, Interval omega, double s,
                                    const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid) {
  check_caccioppoli_geometry(omega_prime, omega, grid);
  if (!(s > 0.0)) fail(ErrorKind::Parameter, "Carleman parameter s must be positive");
  if (v.fields.size() != static_cast<std::size_t>(spec.M + 1)) fail(ErrorKind::Shape, "trajectory needs M+1 levels");
  const auto emask = omega_edge_mask(grid, omega_prime);
  const auto nmask = omega_mask(grid, omega);
  const auto& se = w.space_edges();
  const double dt = spec.dt();
  CaccioppoliSides out;
  for (int n = 1; n < spec.M; ++n) {
    const double sth = s * theta(n * dt, spec.T).value;
    const auto& f = v.fields[n];
    for (int j = 1; j < grid.N; ++j) {
      if (!emask[j]) continue;
      const double g = (f[j] - f[j - 1]) / grid.h;
      if (g != 0.0) out.lhs += dt * grid.h * g * g * std::exp(2.0 * sth * se[j]);
    }
  }
  for (int n = 0; n < spec.M; ++n) {
    const auto& f = v.fields[n];
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (nmask[i]) out.rhs += dt * grid.h * f[i] * f[i] / spec.a.value(grid.nodes[i]);
  }
  return out;
}

CaccioppoliFit caccioppoli_fit(std::size_t count, std::uint64_t seed, Interval omega_prime, double s,
                               const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid) {
  check_caccioppoli_geometry(omega_prime, spec.omega, grid);
  const Stepper stepper(spec, grid);
  CaccioppoliFit fit;
  for (std::size_t c = 0; c < count; ++c) {
    Rng rng(derive_seed(seed, c));
    const auto vT = smooth_random_field(grid, spec.bc, rng);
    const Trajectory v = solve_adjoint(vT, nullptr, stepper, spec);
    const CaccioppoliSides sd = caccioppoli_margin(v, omega_prime, spec.omega, s, w, spec, grid);
    fit.rows.push_back(sd);
    if (sd.lhs > 0.0)
      fit.C = std::max(fit.C, sd.rhs > 0.0 ? sd.lhs / sd.rhs : std::numeric_limits<double>::infinity());
  }
  return fit;
}

}  // namespace degcarl
