#include "degcarl/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "degcarl/error.hpp"
#include "degcarl/fields.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

LogValue theta(double t, double T) {
  if (!(T > 0.0)) fail(ErrorKind::Parameter, "time horizon T must be positive");
  if (!(t > 0.0 && t < T)) fail(ErrorKind::Pole, "Theta has a pole at t=" + fmt_g(t) + " (needs 0 < t < T)");
  const double base = t * (T - t);
  LogValue out;
  out.log = -4.0 * std::log(base);
  out.value = 1.0 / (base * base * base * base);
  return out;
}

namespace {

constexpr int kSub = 16;  // quadrature sub-cells per half cell

double psi_integrand(const CoefficientFn& a, double x0, double R, double y) {
  const double r = std::abs(y - x0);
  return r * std::exp(R * r * r) / a.value(y);
}

// Cumulative ∫ between x0 and each half-cell point, walking outward from the edge x0_edge.
// Returns values at positions j·h/2 for j = 0..2N.
std::vector<double> cumulative_psi_integral(const CoefficientFn& a, const Grid& grid, double R) {
  const int n_half = 2 * grid.N;
  const double x0 = *grid.x0;
  const int j0 = 2 * grid.x0_edge;
  const double step = 0.5 * grid.h;
  const double delta = step / kSub;
  std::vector<double> I(n_half + 1, 0.0);
  auto segment = [&](double lo) {
    double s = 0.0;
    for (int k = 0; k < kSub; ++k) s += psi_integrand(a, x0, R, lo + (k + 0.5) * delta);
    return s * delta;
  };
  for (int j = j0 + 1; j <= n_half; ++j) I[j] = I[j - 1] + segment((j - 1) * step);
  for (int j = j0 - 1; j >= 0; --j) I[j] = I[j + 1] + segment(j * step);
  return I;
}

double K_of(const CoefficientFn& a, const Grid& grid) {
  return a.kind() == CoefficientKind::Power ? a.exponent() : estimate_exponent(a, grid.nodes);
}

}  // namespace

CarlemanWeights build_weights(const ProblemSpec& spec, const Grid& grid, double d1, double R, double safety) {
  const CoefficientFn& a = spec.a;
  if (!a.degenerate() || !grid.x0)
    fail(ErrorKind::Precondition, "degenerate weights need a coefficient a vanishing at an interior x0");
  if (!(d1 > 0.0)) fail(ErrorKind::Parameter, "carleman.d1 must be positive");
  if (!(R >= 0.0)) fail(ErrorKind::Parameter, "carleman.R must be nonnegative");
  if (!(safety > 1.0)) fail(ErrorKind::Parameter, "carleman.safety must exceed 1");
  const double K = K_of(a, grid);
  if (!(K > 0.0 && K < 2.0))
    fail(ErrorKind::UnsupportedConfiguration, "weight psi needs K1 in (0,2), got K1=" + fmt_g(K));

  CarlemanWeights w;
  w.T = spec.T;
  w.d1 = d1;
  w.R = R;
  w.K_used = K;
  w.safety = safety;
  w.x0 = grid.x0;
  const double x0 = *grid.x0;
  const double right = (1.0 - x0) * (1.0 - x0) * std::exp(R * (1.0 - x0) * (1.0 - x0)) / ((2.0 - K) * a.value(1.0));
  const double left = x0 * x0 * std::exp(R * x0 * x0) / ((2.0 - K) * a.value(0.0));
  w.d2_bound = std::max(right, left);
  w.d2 = safety * w.d2_bound;

  const auto I = cumulative_psi_integral(a, grid, R);
  w.psi_edges.resize(grid.N + 1);
  w.psi_nodes.resize(grid.size());
  w.xfac_nodes.resize(grid.size());
  for (int j = 0; j <= grid.N; ++j) w.psi_edges[j] = d1 * (I[2 * j] - w.d2);
  for (int i = 0; i < grid.N; ++i) {
    w.psi_nodes[i] = d1 * (I[2 * i + 1] - w.d2);
    w.xfac_nodes[i] = (grid.nodes[i] - x0) / a.value(grid.nodes[i]);
  }
  w.psi_edges[grid.x0_edge] = -d1 * w.d2;

  const WeightInvariants inv = check_weight_invariants(w, spec, grid);
  if (!inv.all())
    fail(ErrorKind::Construction, "Carleman weight invariants violated (max psi=" + fmt_g(inv.max_space) +
                                      ", d2=" + fmt_g(w.d2) + ", bound=" + fmt_g(w.d2_bound) + ")");
  return w;
}

double psi_at(const CarlemanWeights& w, const CoefficientFn& a, double x, int panels) {
  if (!w.x0) fail(ErrorKind::Precondition, "psi is defined for degenerate weights only");
  const double x0 = *w.x0;
  const double lo = std::min(x, x0), hi = std::max(x, x0);
  const double delta = (hi - lo) / panels;
  double s = 0.0;
  for (int k = 0; k < panels; ++k) s += psi_integrand(a, x0, w.R, lo + (k + 0.5) * delta);
  return w.d1 * (s * delta - w.d2);
}

NondegWeights nondeg_weights(const CoefficientFn& a, const Grid& grid, const NondegParams& params) {
  if (a.degenerate()) fail(ErrorKind::Precondition, "nondegenerate weights need a bounded below by a positive constant");
  if (!(params.r > 0.0)) fail(ErrorKind::Parameter, "carleman.r must be positive");
  const int n_f = 2 * grid.N * kSub;
  const double delta = 1.0 / n_f;
  double a_min = std::min(a.value(0.0), a.value(1.0));
  std::vector<double> am(n_f);
  for (int k = 0; k < n_f; ++k) {
    am[k] = a.value((k + 0.5) * delta);
    a_min = std::min(a_min, am[k]);
  }
  if (!(a_min > 0.0) || !std::isfinite(a_min))
    fail(ErrorKind::Precondition, "nondegenerate weights need a bounded below by a positive constant (min a=" +
                                      fmt_g(a_min) + ")");

  NondegWeights nw;
  nw.variant = params.variant;
  nw.r = params.r;
  std::vector<double> base(n_f + 1, 0.0);  // J(x) for A1, ζ₁(x) for A2, at fine points
  if (params.variant == NondegVariant::A1) {
    if (!params.g) fail(ErrorKind::Parameter, "variant a1 needs the function g");
    std::vector<double> Cg(n_f + 1, 0.0);
    for (int k = 1; k <= n_f; ++k) Cg[k] = Cg[k - 1] + delta * params.g((k - 0.5) * delta);
    const double total = Cg[n_f];
    for (int k = 1; k <= n_f; ++k) {
      const double G_mid = total - 0.5 * (Cg[k - 1] + Cg[k]);
      base[k] = base[k - 1] + delta * (G_mid + params.h0) / std::sqrt(am[k - 1]);
    }
    nw.frak_c = params.frak_c.value_or(1.0);
    if (!(nw.frak_c > 0.0)) fail(ErrorKind::Parameter, "carleman.frak_c must be positive");
    nw.bt_coef0 = std::sqrt(a.value(0.0)) * (total + params.h0);
    nw.bt_coef1 = std::sqrt(a.value(1.0)) * params.h0;
  } else {
    double dmax = 0.0;
    for (int k = 0; k <= n_f; ++k) dmax = std::max(dmax, std::abs(a.derivative(k * delta)));
    nw.frak_d = dmax;
    std::vector<double> Cinv(n_f + 1, 0.0);
    for (int k = 1; k <= n_f; ++k) Cinv[k] = Cinv[k - 1] + delta / am[k - 1];
    for (int k = 0; k <= n_f; ++k) base[k] = dmax * (Cinv[n_f] - Cinv[k]);
    const double emax = std::exp(params.r * base[0]);
    nw.frak_c = params.frak_c.value_or(params.safety * emax);
    nw.bt_coef0 = a.value(0.0) * std::exp(params.r * base[0]);
    nw.bt_coef1 = a.value(1.0);
  }

  auto rho = [&](int k) {
    return params.variant == NondegVariant::A1 ? -params.r * base[k] - nw.frak_c
                                               : std::exp(params.r * base[k]) - nw.frak_c;
  };
  nw.rho_edges.resize(grid.N + 1);
  nw.rho_nodes.resize(grid.size());
  for (int j = 0; j <= grid.N; ++j) nw.rho_edges[j] = rho(2 * kSub * j);
  for (int i = 0; i < grid.N; ++i) nw.rho_nodes[i] = rho(2 * kSub * i + kSub);
  if (params.variant == NondegVariant::A2) {
    nw.zeta1_edges.resize(grid.N + 1);
    for (int j = 0; j <= grid.N; ++j) nw.zeta1_edges[j] = base[2 * kSub * j];
  }
  return nw;
}

CarlemanWeights build_nondeg_weights(const ProblemSpec& spec, const Grid& grid, const NondegParams& params) {
  CarlemanWeights w;
  w.T = spec.T;
  w.nondeg = nondeg_weights(spec.a, grid, params);
  const WeightInvariants inv = check_weight_invariants(w, spec, grid);
  if (!inv.all())
    fail(ErrorKind::Construction, "nondegenerate weight has max rho=" + fmt_g(inv.max_space) + " (needs < 0)");
  return w;
}

WeightInvariants check_weight_invariants(const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid) {
  WeightInvariants inv;
  const auto& sn = w.space_nodes();
  const auto& se = w.space_edges();
  inv.max_space = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (double v : sn) inv.max_space = std::max(inv.max_space, v), lo = std::min(lo, v);
  for (double v : se) inv.max_space = std::max(inv.max_space, v), lo = std::min(lo, v);
  inv.min_psi = lo;
  inv.space_negative = inv.max_space < 0.0;
  if (w.degenerate()) {
    const double floor = -w.d1 * w.d2;
    inv.psi_lower_bound = lo >= floor * (1.0 + 1e-12);
    inv.psi_at_x0 = grid.x0_edge >= 0 ? se[grid.x0_edge] : 0.0;
    inv.psi_x0_exact = inv.psi_at_x0 == floor;
    inv.d2_above_bound = w.d2 > w.d2_bound;
  }
  // φ = Θψ at every interior time level of the spec's clock.
  inv.phi_negative = true;
  for (int n = 1; n < spec.M; ++n) {
    const double th = theta(n * spec.dt(), spec.T).value;
    if (!(th * inv.max_space < 0.0)) inv.phi_negative = false;
  }
  return inv;
}

namespace {

void check_finite(const Trajectory& t, const char* what) {
  for (const auto& f : t.fields)
    for (double v : f)
      if (!std::isfinite(v)) fail(ErrorKind::Data, std::string(what) + " contains non-finite values");
}

// One-sided w_x² at a Dirichlet end, e^{2sΘψ_end} factored through log space.
// Quadratic through (end, 0), the first and second nodes from that end.
double boundary_wx2(double v_near, double v_next, double psi_near, double psi_next, double psi_end, double sth,
                    double h) {
  const double e_near = sth * (psi_near - psi_end), e_next = sth * (psi_next - psi_end);
  const double m = std::max(e_near, e_next);
  const double inner = 9.0 * v_near * std::exp(e_near - m) - v_next * std::exp(e_next - m);
  if (inner == 0.0) return 0.0;
  return std::exp(2.0 * (sth * psi_end + m) + 2.0 * std::log(std::abs(inner)) - std::log(9.0 * h * h));
}

}  // namespace

CarlemanSides carleman_sides(const Trajectory& v, const Trajectory& h, double s, const CarlemanWeights& w,
                             const ProblemSpec& spec, const Grid& grid, CarlemanForm form) {
  if (!(s > 0.0)) fail(ErrorKind::Parameter, "Carleman parameter s must be positive");
  const std::size_t levels = static_cast<std::size_t>(spec.M + 1);
  if (v.fields.size() != levels || h.fields.size() != levels)
    fail(ErrorKind::Shape, "trajectories need M+1 time levels");
  check_finite(v, "v trajectory");
  check_finite(h, "h trajectory");

  const auto& sn = w.space_nodes();
  const auto& se = w.space_edges();
  const int N = grid.N;
  const double dx = grid.h;
  const double dt = spec.dt();
  const bool deg = w.degenerate();
  std::vector<double> log_inv_a(grid.size()), log_xfac2(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    log_inv_a[i] = -std::log(spec.a.value(grid.nodes[i]));
    if (deg) log_xfac2[i] = 2.0 * std::log(std::abs(w.xfac_nodes[i]));
  }
  const auto omask = omega_mask(grid, spec.omega);
  const bool neumann = spec.bc == BoundaryKind::Neumann;
  const bool local = neumann && (form == CarlemanForm::Localized || !deg);

  CarlemanSides out;
  double bt = 0.0;
  for (int n = 1; n < spec.M; ++n) {
    const LogValue th = theta(n * dt, spec.T);
    const double sth = s * th.value;
    const double log_sth = std::log(s) + th.log;
    const auto& vn = v.fields[n];
    const auto& hn = h.fields[n];
    const EdgeGradient g = edge_gradient(vn, grid, spec.bc, spec.closure);
    double lhs = 0.0, src = 0.0, zero = 0.0;
    for (int j = 0; j <= N; ++j) {
      if (g.grad[j] == 0.0 || g.length[j] == 0.0) continue;
      lhs += g.grad[j] * g.grad[j] * g.length[j] * std::exp(2.0 * sth * se[j] + log_sth);
    }
    for (int i = 0; i < N; ++i) {
      const double e = 2.0 * sth * sn[i];
      if (vn[i] != 0.0) lhs += dx * vn[i] * vn[i] * std::exp(e + 3.0 * log_sth + log_xfac2[i]);
      if (hn[i] != 0.0) src += dx * hn[i] * hn[i] * std::exp(deg ? e + log_inv_a[i] : e);
      if (neumann && vn[i] != 0.0 && (!local || omask[i])) zero += dx * vn[i] * vn[i] * std::exp(e);
    }
    out.lhs += dt * lhs;
    out.source_term += dt * src;
    out.zero_order_term += dt * zero;

    if (!neumann) {
      const double wx0 = boundary_wx2(vn[0], vn[1], sn[0], sn[1], se[0], sth, dx);
      const double wx1 = boundary_wx2(vn[N - 1], vn[N - 2], sn[N - 1], sn[N - 2], se[N], sth, dx);
      if (deg) {
        const double x0 = *w.x0;
        const double f1 = (1.0 - x0) * std::exp(w.R * (1.0 - x0) * (1.0 - x0)) * wx1;
        const double f0 = (0.0 - x0) * std::exp(w.R * x0 * x0) * wx0;
        bt += dt * s * w.d1 * th.value * (f1 - f0);
      } else {
        const auto& nw = *w.nondeg;
        bt += dt * s * nw.r * th.value * (nw.bt_coef1 * wx1 - nw.bt_coef0 * wx0);
      }
    }
  }
  if (neumann) {
    out.rhs = out.source_term + out.zero_order_term;
  } else {
    out.boundary_term = deg ? bt : -bt;
    out.rhs = out.source_term + out.boundary_term;
  }
  return out;
}

ScanResult scan_s(const std::vector<ManufacturedCase>& cases, const std::vector<double>& s_grid,
                  const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid, CarlemanForm form) {
  if (cases.empty()) fail(ErrorKind::Parameter, "scan needs at least one case");
  if (s_grid.empty()) fail(ErrorKind::Parameter, "scan needs at least one s value");
  for (std::size_t k = 1; k < s_grid.size(); ++k)
    if (!(s_grid[k] > s_grid[k - 1])) fail(ErrorKind::Parameter, "s grid must be strictly increasing");

  ScanResult res;
  const std::size_t S = s_grid.size();
  std::vector<std::vector<double>> lhs(cases.size(), std::vector<double>(S)), rhs = lhs;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (std::size_t k = 0; k < S; ++k) {
      const CarlemanSides sd = carleman_sides(cases[c].v, cases[c].h, s_grid[k], w, spec, grid, form);
      lhs[c][k] = sd.lhs;
      rhs[c][k] = sd.rhs;
      ScanRow row;
      row.case_id = c;
      row.s = s_grid[k];
      row.lhs = sd.lhs;
      row.rhs = sd.rhs;
      row.boundary_term = sd.boundary_term;
      if (sd.lhs == 0.0)
        row.ratio = 0.0;
      else if (sd.rhs > 0.0)
        row.ratio = sd.lhs / sd.rhs;
      else
        row.ratio = std::numeric_limits<double>::infinity();
      res.table.push_back(row);
    }
  }
  for (const auto& row : res.table)
    if (row.s == s_grid.back()) res.C_fit = std::max(res.C_fit, row.ratio);

  auto holds = [&](std::size_t k) {
    for (std::size_t c = 0; c < cases.size(); ++c)
      if (!(lhs[c][k] <= 1.05 * res.C_fit * rhs[c][k])) return false;
    return true;
  };
  if (std::isfinite(res.C_fit)) {
    std::optional<std::size_t> first;
    for (std::size_t k = S; k-- > 0;) {
      if (!holds(k)) break;
      first = k;
    }
    if (first) res.s0_est = s_grid[*first];
  }
  return res;
}

std::vector<ManufacturedCase> manufactured_family(std::size_t count, std::uint64_t seed, const ProblemSpec& spec,
                                                  const Grid& grid) {
  std::vector<ManufacturedCase> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Rng rng(derive_seed(seed, c));
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    const double c1 = U(rng), c2 = U(rng);
    const auto g = smooth_random_field(grid, spec.bc, rng);
    const double T = spec.T;
    auto eta = [=](double t) { return 1.0 + c1 * t / T + c2 * std::sin(std::numbers::pi * t / T); };
    out.push_back(manufactured_case(eta, std::span<const double>(g), spec, grid));
  }
  return out;
}

}  // namespace degcarl
