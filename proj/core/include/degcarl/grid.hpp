#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degcarl/coefficients.hpp"
#include "degcarl/problem.hpp"
#include "degcarl/tridiag.hpp"

namespace degcarl {

/// Cell-centred grid on (0,1) with the degeneracy point on a cell edge.
struct Grid {
  int N = 0;
  double h = 0.0;
  std::optional<double> x0;  // snapped
  int x0_edge = -1;          // edge index k with x0 = k h, -1 when nondegenerate
  std::vector<double> nodes;
  std::optional<std::string> warning;

  double edge(int j) const { return j * h; }
  std::size_t size() const { return nodes.size(); }
  // Indices of the two nodes straddling x0 (x0_edge-1, x0_edge).
  std::vector<std::size_t> straddle() const;
};

Grid build_grid(int N, std::optional<double> x0);
inline Grid build_grid(const ProblemSpec& spec) { return build_grid(spec.N, spec.x0()); }

/// Σ u_i v_i h / a(x_i).
double weighted_inner(std::span<const double> u, std::span<const double> v, const Grid& grid, const CoefficientFn& a);
double weighted_norm(std::span<const double> u, const Grid& grid, const CoefficientFn& a);

/// Node mask of ω with its ends snapped to cell edges.
std::vector<char> omega_mask(const Grid& grid, Interval omega);
/// Edge mask (interior edges 1..N-1) of edges lying inside ω.
std::vector<char> omega_edge_mask(const Grid& grid, Interval omega);

/// Discrete counterpart of u ↦ a u'' + λu/b together with the L²_{1/a} mass.
struct OperatorAssembly {
  BoundaryKind bc = BoundaryKind::Dirichlet;
  DirichletClosure closure = DirichletClosure::OddReflection;
  double h = 0.0;
  Tridiag op;                       // nodal action
  std::vector<double> mass;         // h / a(x_i)
  SymTridiag weighted;              // diag(mass) · op, assembled symmetrically
  std::vector<double> a_nodes;
  std::vector<double> b_nodes;
  std::vector<std::size_t> pinned;  // nodes held at zero (u(x0) = 0 active)

  std::vector<double> apply(std::span<const double> u) const { return op.apply(u); }
  SymTridiag mass_form() const { return SymTridiag::diagonal(mass); }
};

/// Unweighted stiffness ∫ p (u')² on the grid; p sampled on edges 0..N (empty means p ≡ 1).
SymTridiag stiffness(const Grid& grid, BoundaryKind bc, DirichletClosure closure,
                     std::span<const double> edge_weight = {});

/// Second difference D² with the boundary closure (no coefficient).
Tridiag second_difference(const Grid& grid, BoundaryKind bc, DirichletClosure closure);

OperatorAssembly assemble_operator(const ProblemSpec& spec, const Grid& grid);

struct GreenCheck {
  double second_term = 0.0;    // Σ (u'')_i v_i h
  double gradient_term = 0.0;  // Σ_edges u' v' |edge|
  double residual = 0.0;       // |sum of the two|
  double scale = 0.0;          // |Σ u'v'| normaliser, ‖u'‖‖v'‖
  double relative() const { return scale > 0 ? residual / scale : residual; }
};

/// Summation-by-parts identity Σ u'' v h = -Σ u' v' on the discrete grid.
GreenCheck discrete_green_check(std::span<const double> u, std::span<const double> v, const Grid& grid,
                                BoundaryKind bc, DirichletClosure closure);

/// Edge gradients including boundary half-edges; returns (gradient, edge length) per edge 0..N.
struct EdgeGradient {
  std::vector<double> grad;
  std::vector<double> length;
};
EdgeGradient edge_gradient(std::span<const double> u, const Grid& grid, BoundaryKind bc, DirichletClosure closure);

}  // namespace degcarl
