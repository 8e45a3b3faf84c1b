#include "degcarl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

std::vector<std::size_t> Grid::straddle() const {
  if (x0_edge < 1) return {};
  return {static_cast<std::size_t>(x0_edge - 1), static_cast<std::size_t>(x0_edge)};
}

Grid build_grid(int N, std::optional<double> x0) {
  if (N < 16) fail(ErrorKind::Parameter, "grid needs N >= 16 cells, got " + std::to_string(N));
  Grid g;
  g.N = N;
  g.h = 1.0 / N;
  g.nodes.resize(N);
  for (int i = 0; i < N; ++i) g.nodes[i] = (i + 0.5) * g.h;
  if (x0) {
    if (!(*x0 > 0.0 && *x0 < 1.0)) fail(ErrorKind::Parameter, "x0 must lie in (0,1)");
    int k = static_cast<int>(std::lround(*x0 * N));
    k = std::clamp(k, 1, N - 1);
    g.x0_edge = k;
    g.x0 = static_cast<double>(k) / N;
    if (std::abs(*g.x0 - *x0) > 1e-12) {
      g.warning = "x0=" + fmt_g(*x0) + " snapped to nearest cell edge " + fmt_g(*g.x0);
    }
  }
  return g;
}

double weighted_inner(std::span<const double> u, std::span<const double> v, const Grid& grid, const CoefficientFn& a) {
  if (u.size() != grid.size() || v.size() != grid.size()) fail(ErrorKind::Shape, "field length does not match grid");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i] * grid.h / a.value(grid.nodes[i]);
  return s;
}

double weighted_norm(std::span<const double> u, const Grid& grid, const CoefficientFn& a) {
  return std::sqrt(weighted_inner(u, u, grid, a));
}

namespace {

std::pair<int, int> snapped_cells(const Grid& grid, Interval omega) {
  if (!(omega.lo < omega.hi)) fail(ErrorKind::Parameter, "control interval needs lo < hi");
  const int lo = static_cast<int>(std::lround(std::clamp(omega.lo, 0.0, 1.0) * grid.N));
  const int hi = static_cast<int>(std::lround(std::clamp(omega.hi, 0.0, 1.0) * grid.N));
  if (hi <= lo) fail(ErrorKind::Parameter, "control interval is narrower than one cell");
  return {lo, hi};
}

}  // namespace

std::vector<char> omega_mask(const Grid& grid, Interval omega) {
  const auto [lo, hi] = snapped_cells(grid, omega);
  std::vector<char> m(grid.size(), 0);
  for (int i = lo; i < hi; ++i) m[i] = 1;
  return m;
}

std::vector<char> omega_edge_mask(const Grid& grid, Interval omega) {
  const auto [lo, hi] = snapped_cells(grid, omega);
  std::vector<char> m(grid.size() + 1, 0);
  for (int j = lo + 1; j < hi; ++j) m[j] = 1;
  return m;
}

SymTridiag stiffness(const Grid& grid, BoundaryKind bc, DirichletClosure closure, std::span<const double> edge_weight) {
  const int N = grid.N;
  const double h = grid.h;
  if (!edge_weight.empty() && edge_weight.size() != static_cast<std::size_t>(N + 1))
    fail(ErrorKind::Shape, "edge weights need N+1 entries");
  auto p = [&](int j) { return edge_weight.empty() ? 1.0 : edge_weight[j]; };
  SymTridiag K(N);
  for (int j = 1; j < N; ++j) {
    const double w = p(j) / h;
    K.diag[j - 1] += w;
    K.diag[j] += w;
    K.off[j - 1] -= w;
  }
  if (bc == BoundaryKind::Dirichlet) {
    const double c = closure == DirichletClosure::OddReflection ? 2.0 : 1.0;
    K.diag[0] += c * p(0) / h;
    K.diag[N - 1] += c * p(N) / h;
  }
  return K;
}

Tridiag second_difference(const Grid& grid, BoundaryKind bc, DirichletClosure closure) {
  const int N = grid.N;
  const double h2 = grid.h * grid.h;
  Tridiag D;
  D.diag.assign(N, -2.0 / h2);
  D.lower.assign(N - 1, 1.0 / h2);
  D.upper.assign(N - 1, 1.0 / h2);
  double end;
  if (bc == BoundaryKind::Neumann) end = -1.0 / h2;  // mirror ghost u_{-1} = u_0
  else if (closure == DirichletClosure::OddReflection) end = -3.0 / h2;
  else end = -2.0 / h2;
  D.diag[0] = end;
  D.diag[N - 1] = end;
  return D;
}

OperatorAssembly assemble_operator(const ProblemSpec& spec, const Grid& grid) {
  const int N = grid.N;
  OperatorAssembly A;
  A.bc = spec.bc;
  A.closure = spec.closure;
  A.h = grid.h;
  A.a_nodes.resize(N);
  A.b_nodes.resize(N);
  A.mass.resize(N);
  for (int i = 0; i < N; ++i) {
    const double x = grid.nodes[i];
    A.a_nodes[i] = spec.a.value(x);
    A.b_nodes[i] = spec.b.value(x);
    if (!(A.a_nodes[i] > 0.0) || !(A.b_nodes[i] > 0.0))
      fail(ErrorKind::InvalidCoefficient, "coefficient vanishes at grid node x=" + fmt_g(x));
    A.mass[i] = grid.h / A.a_nodes[i];
  }
  const Tridiag D = second_difference(grid, spec.bc, spec.closure);
  A.op = D;
  for (int i = 0; i < N; ++i) {
    A.op.diag[i] = A.a_nodes[i] * D.diag[i] + spec.lambda / A.b_nodes[i];
    if (i > 0) A.op.lower[i - 1] = A.a_nodes[i] * D.lower[i - 1];
    if (i + 1 < N) A.op.upper[i] = A.a_nodes[i] * D.upper[i];
  }
  // diag(h/a)·op = -K + λ diag(h/(ab)), built directly so it is exactly symmetric.
  A.weighted = stiffness(grid, spec.bc, spec.closure).scaled(-1.0);
  for (int i = 0; i < N; ++i) A.weighted.diag[i] += spec.lambda * grid.h / (A.a_nodes[i] * A.b_nodes[i]);

  // u(x0) = 0 pins the two straddle nodes; their rows and columns drop out of the dynamics.
  bool pin = false;
  if (grid.x0_edge >= 1) {
    if (spec.interior_zero) {
      pin = *spec.interior_zero;
    } else {
      const DegeneracyReport rep = classify_pair(spec.a, spec.b, grid.nodes);
      pin = rep.K1 + rep.K2 >= 1.0;
    }
  }
  if (pin) {
    A.pinned = grid.straddle();
    for (std::size_t i : A.pinned) {
      A.op.diag[i] = 0.0;
      if (i > 0) A.op.lower[i - 1] = 0.0;
      if (i + 1 < A.op.size()) A.op.upper[i] = 0.0;
      if (i > 0) A.op.upper[i - 1] = 0.0;
      if (i + 1 < A.op.size()) A.op.lower[i] = 0.0;
      A.weighted.diag[i] = 0.0;
      if (i > 0) A.weighted.off[i - 1] = 0.0;
      if (i + 1 < A.weighted.size()) A.weighted.off[i] = 0.0;
    }
  }
  return A;
}

EdgeGradient edge_gradient(std::span<const double> u, const Grid& grid, BoundaryKind bc, DirichletClosure closure) {
  const int N = grid.N;
  const double h = grid.h;
  if (u.size() != static_cast<std::size_t>(N)) fail(ErrorKind::Shape, "field length does not match grid");
  EdgeGradient g;
  g.grad.assign(N + 1, 0.0);
  g.length.assign(N + 1, h);
  for (int j = 1; j < N; ++j) g.grad[j] = (u[j] - u[j - 1]) / h;
  if (bc == BoundaryKind::Neumann) {
    g.length[0] = g.length[N] = 0.5 * h;
  } else if (closure == DirichletClosure::OddReflection) {
    g.grad[0] = 2.0 * u[0] / h;
    g.grad[N] = -2.0 * u[N - 1] / h;
    g.length[0] = g.length[N] = 0.5 * h;
  } else {
    g.grad[0] = u[0] / h;
    g.grad[N] = -u[N - 1] / h;
  }
  return g;
}

GreenCheck discrete_green_check(std::span<const double> u, std::span<const double> v, const Grid& grid,
                                BoundaryKind bc, DirichletClosure closure) {
  if (v.size() != u.size()) fail(ErrorKind::Shape, "field lengths differ");
  const Tridiag D = second_difference(grid, bc, closure);
  const auto d2u = D.apply(u);
  GreenCheck c;
  for (std::size_t i = 0; i < u.size(); ++i) c.second_term += d2u[i] * v[i] * grid.h;
  const auto gu = edge_gradient(u, grid, bc, closure);
  const auto gv = edge_gradient(v, grid, bc, closure);
  double nu = 0.0, nv = 0.0;
  for (std::size_t j = 0; j < gu.grad.size(); ++j) {
    c.gradient_term += gu.grad[j] * gv.grad[j] * gu.length[j];
    nu += gu.grad[j] * gu.grad[j] * gu.length[j];
    nv += gv.grad[j] * gv.grad[j] * gv.length[j];
  }
  c.residual = std::abs(c.second_term + c.gradient_term);
  c.scale = std::sqrt(nu * nv);
  return c;
}

}  // namespace degcarl
