#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degcarl/coefficients.hpp"

namespace degcarl {

enum class BoundaryKind { Dirichlet, Neumann };
enum class Scheme { ImplicitEuler, CrankNicolson };

// How the Dirichlet condition is closed on the cell-centred grid.
//  OddReflection: ghost u_{-1} = -u_0, zero sits on the boundary edge (second order).
//  ZeroGhost:     ghost u_{-1} = 0, zero sits half a cell outside (first order).
enum class DirichletClosure { OddReflection, ZeroGhost };

std::string to_string(BoundaryKind bc);
std::string to_string(Scheme s);
std::string to_string(DirichletClosure c);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double x) const noexcept { return lo < x && x < hi; }
};

/// One problem instance u_t - a u_xx - λu/b = hχ_ω on (0,T)×(0,1).
struct ProblemSpec {
  CoefficientFn a = CoefficientFn::constant(1.0);
  CoefficientFn b = CoefficientFn::constant(1.0);
  double lambda = 0.0;
  double T = 1.0;
  BoundaryKind bc = BoundaryKind::Dirichlet;
  Interval omega{0.3, 0.7};
  int N = 100;
  int M = 200;
  Scheme scheme = Scheme::ImplicitEuler;
  DirichletClosure closure = DirichletClosure::OddReflection;
  // Impose u(x0) = 0 in the constrained eigenproblems; unset means "when K1 + K2 >= 1".
  std::optional<bool> interior_zero;

  std::optional<double> x0() const { return a.degenerate() ? a.x0() : b.x0(); }
  double dt() const { return T / M; }
  double theta() const { return scheme == Scheme::ImplicitEuler ? 1.0 : 0.5; }
};

/// Checks ranges that every pipeline relies on; returns warnings (e.g. M < 2N).
std::vector<std::string> validate(const ProblemSpec& spec);

}  // namespace degcarl
