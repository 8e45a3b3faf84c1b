#include "degcarl/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

Trajectory zero_trajectory(const ProblemSpec& spec, const Grid& grid, Direction dir) {
  Trajectory t;
  t.direction = dir;
  t.times.resize(spec.M + 1);
  for (int n = 0; n <= spec.M; ++n) t.times[n] = n * spec.dt();
  t.fields.assign(spec.M + 1, std::vector<double>(grid.size(), 0.0));
  return t;
}

namespace {

TridiagSolver factor_step(const SymTridiag& m) {
  try {
    return TridiagSolver(m);
  } catch (const Error&) {
    fail(ErrorKind::StepFailure, "singular step matrix at step 1");
  }
}

}  // namespace

Stepper::Stepper(const ProblemSpec& spec, const Grid& grid) : grid_(grid), A_(assemble_operator(spec, grid)) {
  dt_ = spec.dt();
  theta_ = spec.theta();
  const SymTridiag W = A_.mass_form();
  SymTridiag implicit_part = W;
  implicit_part.add_scaled(-theta_ * dt_, A_.weighted);
  explicit_part_ = W;
  explicit_part_.add_scaled((1.0 - theta_) * dt_, A_.weighted);
  solver_ = factor_step(implicit_part);
}

void Stepper::step(std::vector<double>& u, std::span<const double> f, double sign, std::size_t step_index) const {
  std::vector<double> rhs = theta_ == 1.0 ? std::vector<double>(u.size()) : explicit_part_.apply(u);
  if (theta_ == 1.0)
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = A_.mass[i] * u[i];
  if (!f.empty())
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] += sign * dt_ * A_.mass[i] * f[i];
  for (std::size_t i : A_.pinned) rhs[i] = 0.0;
  solver_.solve_in_place(rhs);
  for (double v : rhs)
    if (!std::isfinite(v)) fail(ErrorKind::StepFailure, "non-finite state at step " + std::to_string(step_index));
  u = std::move(rhs);
}

void Stepper::resolvent(std::vector<double>& u) const {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= A_.mass[i];
  for (std::size_t i : A_.pinned) u[i] = 0.0;
  solver_.solve_in_place(u);
}

namespace {

void check_control_support(const Trajectory& control, const ProblemSpec& spec, const Grid& grid) {
  if (control.fields.size() != static_cast<std::size_t>(spec.M + 1))
    fail(ErrorKind::Shape, "control needs M+1 time levels");
  const auto mask = omega_mask(grid, spec.omega);
  for (const auto& f : control.fields) {
    if (f.size() != grid.size()) fail(ErrorKind::Shape, "control field length does not match grid");
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!mask[i] && f[i] != 0.0) fail(ErrorKind::Precondition, "control is nonzero outside omega");
  }
}

}  // namespace

Trajectory solve_forward(std::span<const double> u0, const Trajectory* control, const Stepper& stepper,
                         const ProblemSpec& spec) {
  const Grid& grid = stepper.grid();
  if (u0.size() != grid.size()) fail(ErrorKind::Shape, "initial field length does not match grid");
  for (double v : u0)
    if (!std::isfinite(v)) fail(ErrorKind::Data, "initial field is not finite");
  if (control) check_control_support(*control, spec, grid);
  Trajectory tr;
  tr.direction = Direction::Forward;
  tr.times.resize(spec.M + 1);
  tr.fields.resize(spec.M + 1);
  std::vector<double> u(u0.begin(), u0.end());
  tr.times[0] = 0.0;
  tr.fields[0] = u;
  for (int n = 1; n <= spec.M; ++n) {
    std::span<const double> f;
    if (control) f = control->fields[n];
    stepper.step(u, f, 1.0, n);
    tr.times[n] = n * spec.dt();
    tr.fields[n] = u;
  }
  return tr;
}

Trajectory solve_forward(std::span<const double> u0, const Trajectory* control, const ProblemSpec& spec,
                         const Grid& grid) {
  return solve_forward(u0, control, Stepper(spec, grid), spec);
}

Trajectory solve_adjoint(std::span<const double> vT, const Trajectory* source, const Stepper& stepper,
                         const ProblemSpec& spec) {
  const Grid& grid = stepper.grid();
  if (vT.size() != grid.size()) fail(ErrorKind::Shape, "final field length does not match grid");
  for (double v : vT)
    if (!std::isfinite(v)) fail(ErrorKind::Data, "final field is not finite");
  if (source && source->fields.size() != static_cast<std::size_t>(spec.M + 1))
    fail(ErrorKind::Shape, "adjoint source needs M+1 time levels");
  Trajectory tr;
  tr.direction = Direction::Backward;
  tr.times.resize(spec.M + 1);
  tr.fields.resize(spec.M + 1);
  std::vector<double> v(vT.begin(), vT.end());
  tr.times[spec.M] = spec.T;
  tr.fields[spec.M] = v;
  for (int n = spec.M; n >= 1; --n) {
    std::span<const double> f;
    if (source) f = source->fields[n - 1];
    stepper.step(v, f, -1.0, spec.M - n + 1);
    tr.times[n - 1] = (n - 1) * spec.dt();
    tr.fields[n - 1] = v;
  }
  return tr;
}

Trajectory solve_adjoint(std::span<const double> vT, const Trajectory* source, const ProblemSpec& spec,
                         const Grid& grid) {
  return solve_adjoint(vT, source, Stepper(spec, grid), spec);
}

std::vector<double> energy_series(const Trajectory& traj, const ProblemSpec& spec, const Grid& grid) {
  std::vector<double> inv_ab(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    inv_ab[i] = grid.h / (spec.a.value(grid.nodes[i]) * spec.b.value(grid.nodes[i]));
  std::vector<double> E;
  E.reserve(traj.fields.size());
  for (const auto& v : traj.fields) {
    const EdgeGradient g = edge_gradient(v, grid, spec.bc, spec.closure);
    double grad = 0.0, pot = 0.0;
    for (std::size_t j = 0; j < g.grad.size(); ++j) grad += g.grad[j] * g.grad[j] * g.length[j];
    for (std::size_t i = 0; i < v.size(); ++i) pot += v[i] * v[i] * inv_ab[i];
    E.push_back(grad - spec.lambda * pot);
  }
  return E;
}

std::vector<double> norm_series(const Trajectory& traj, const ProblemSpec& spec, const Grid& grid) {
  std::vector<double> out;
  out.reserve(traj.fields.size());
  for (const auto& u : traj.fields) out.push_back(weighted_norm(u, grid, spec.a));
  return out;
}

double contraction_report(const Trajectory& traj, const ProblemSpec& spec, const Grid& grid) {
  const auto nrm = norm_series(traj, spec, grid);
  double worst = 0.0;
  bool any = false;
  for (std::size_t n = 0; n + 1 < nrm.size(); ++n) {
    if (nrm[n] == 0.0) continue;
    const double g = (nrm[n + 1] - nrm[n]) / nrm[n];
    worst = any ? std::max(worst, g) : g;
    any = true;
  }
  return any ? worst : 0.0;
}

DualityReport duality_check(std::span<const double> u0, const Trajectory& control, std::span<const double> vT,
                            const ProblemSpec& spec, const Grid& grid) {
  const Stepper stepper(spec, grid);
  const Trajectory u = solve_forward(u0, &control, stepper, spec);
  const Trajectory v = solve_adjoint(vT, nullptr, stepper, spec);
  const auto mask = omega_mask(grid, spec.omega);
  auto ip = [&](std::span<const double> p, std::span<const double> q) { return weighted_inner(p, q, grid, spec.a); };
  DualityReport r;
  r.lhs = ip(u.fields[spec.M], vT) - ip(u0, v.fields[0]);
  const double dt = spec.dt();
  for (int n = 1; n <= spec.M; ++n) {
    std::vector<double> hc = control.fields[n];
    for (std::size_t i = 0; i < hc.size(); ++i)
      if (!mask[i]) hc[i] = 0.0;
    std::vector<double> Fv = v.fields[n];
    stepper.resolvent(Fv);
    r.rhs_exact += dt * ip(hc, Fv);
    r.rhs_naive += dt * ip(hc, v.fields[n]);
    r.scale += dt * std::sqrt(ip(hc, hc) * ip(v.fields[n], v.fields[n]));
  }
  r.scale += std::sqrt(ip(u.fields[spec.M], u.fields[spec.M]) * ip(vT, vT)) +
             std::sqrt(ip(u0, u0) * ip(v.fields[0], v.fields[0]));
  return r;
}

ManufacturedCase manufactured_case(const std::function<double(double)>& eta, std::span<const double> g,
                                   const ProblemSpec& spec, const Grid& grid) {
  if (g.size() != grid.size()) fail(ErrorKind::Shape, "profile length does not match grid");
  const OperatorAssembly A = assemble_operator(spec, grid);
  const double dt = spec.dt();
  const double th = spec.theta();
  ManufacturedCase mc;
  mc.v = zero_trajectory(spec, grid, Direction::Backward);
  mc.h = zero_trajectory(spec, grid, Direction::Backward);
  const auto Ag = A.apply(g);
  for (int n = 0; n <= spec.M; ++n) {
    const double e = eta(n * dt);
    for (std::size_t i = 0; i < g.size(); ++i) mc.v.fields[n][i] = e * g[i];
  }
  for (int m = 0; m < spec.M; ++m) {
    const double e0 = eta(m * dt), e1 = eta((m + 1) * dt);
    const double mix = th * e0 + (1.0 - th) * e1;
    for (std::size_t i = 0; i < g.size(); ++i) mc.h.fields[m][i] = (e1 - e0) / dt * g[i] + mix * Ag[i];
  }
  mc.h.fields[spec.M] = mc.h.fields[spec.M - 1];
  return mc;
}

ManufacturedCase manufactured_case(const std::function<double(double)>& eta, const std::function<double(double)>& g,
                                   const ProblemSpec& spec, const Grid& grid) {
  double scale = 0.0;
  std::vector<double> gn(grid.size());
  for (std::size_t i = 0; i < gn.size(); ++i) {
    gn[i] = g(grid.nodes[i]);
    scale = std::max(scale, std::abs(gn[i]));
  }
  const double tol = 1e-10 * std::max(scale, 1.0);
  if (spec.bc == BoundaryKind::Dirichlet) {
    if (std::abs(g(0.0)) > tol || std::abs(g(1.0)) > tol)
      fail(ErrorKind::Precondition, "manufactured profile must vanish at x=0 and x=1");
  } else {
    const double eps = 1e-6;
    const double s0 = (g(eps) - g(0.0)) / eps, s1 = (g(1.0) - g(1.0 - eps)) / eps;
    if (std::abs(s0) > 1e-4 * std::max(scale, 1.0) || std::abs(s1) > 1e-4 * std::max(scale, 1.0))
      fail(ErrorKind::Precondition, "manufactured profile must have zero slope at x=0 and x=1");
  }
  return manufactured_case(eta, gn, spec, grid);
}

}  // namespace degcarl
