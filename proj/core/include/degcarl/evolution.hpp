#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "degcarl/grid.hpp"
#include "degcarl/problem.hpp"
#include "degcarl/tridiag.hpp"

namespace degcarl {

enum class Direction { Forward, Backward };

// fields[n] lives at times[n] = n·Δt, n = 0..M, for both directions.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> fields;
  Direction direction = Direction::Forward;

  std::size_t steps() const { return fields.empty() ? 0 : fields.size() - 1; }
};

Trajectory zero_trajectory(const ProblemSpec& spec, const Grid& grid, Direction dir = Direction::Forward);

/// θ-scheme stepping kernel shared by the forward and adjoint solvers.
/// Works in the L²_{1/a}-weighted form so every step is a symmetric tridiagonal solve:
///   (W - θΔt S) u⁺ = (W + (1-θ)Δt S) u + Δt W f.
class Stepper {
 public:
  Stepper(const ProblemSpec& spec, const Grid& grid);

  const OperatorAssembly& assembly() const { return A_; }
  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }

  // u ← F(G u + Δt·sign·f); f may be empty. `step_index` only labels failures.
  void step(std::vector<double>& u, std::span<const double> f, double sign, std::size_t step_index) const;
  // u ← (I - θΔt A)^{-1} u
  void resolvent(std::vector<double>& u) const;

 private:
  Grid grid_;
  OperatorAssembly A_;
  double dt_ = 0.0;
  double theta_ = 1.0;
  SymTridiag explicit_part_;  // W + (1-θ)Δt S
  TridiagSolver solver_;      // W - θΔt S
};

/// Forward problem from u0 with control h (fields[n] applied on step n-1 → n, n = 1..M).
Trajectory solve_forward(std::span<const double> u0, const Trajectory* control, const ProblemSpec& spec,
                         const Grid& grid);
Trajectory solve_forward(std::span<const double> u0, const Trajectory* control, const Stepper& stepper,
                         const ProblemSpec& spec);

/// Backward adjoint v_t + a v_xx + λv/b = h with v(T) = vT, stepped on the reversed clock.
Trajectory solve_adjoint(std::span<const double> vT, const Trajectory* source, const ProblemSpec& spec,
                         const Grid& grid);
Trajectory solve_adjoint(std::span<const double> vT, const Trajectory* source, const Stepper& stepper,
                         const ProblemSpec& spec);

/// E(t) = ∫ v_x² - λ ∫ v²/(ab) per time level.
std::vector<double> energy_series(const Trajectory& traj, const ProblemSpec& spec, const Grid& grid);

/// Weighted norms ‖u(t_n)‖_{1/a}.
std::vector<double> norm_series(const Trajectory& traj, const ProblemSpec& spec, const Grid& grid);

/// max_n (‖uⁿ⁺¹‖ - ‖uⁿ‖)/‖uⁿ‖ over a zero-control forward trajectory (0 for the zero solution).
double contraction_report(const Trajectory& traj, const ProblemSpec& spec, const Grid& grid);

struct DualityReport {
  double lhs = 0.0;          // ⟨u(T), vT⟩ - ⟨u0, v(0)⟩
  double rhs_exact = 0.0;    // Δt Σ ⟨χh^n, (I-θΔtA)^{-1} v^n⟩
  double rhs_naive = 0.0;    // Δt Σ ⟨χh^n, v^n⟩
  double scale = 0.0;        // Δt Σ ‖h^n‖‖v^n‖ + ‖u(T)‖‖vT‖ + ‖u0‖‖v(0)‖
  double residual_exact() const { return std::abs(lhs - rhs_exact); }
  double residual_naive() const { return std::abs(lhs - rhs_naive); }
};

/// Discrete Green-in-time identity between the forward and homogeneous adjoint solves.
DualityReport duality_check(std::span<const double> u0, const Trajectory& control, std::span<const double> vT,
                            const ProblemSpec& spec, const Grid& grid);

struct ManufacturedCase {
  Trajectory v;
  Trajectory h;  // h^m, m = 0..M-1 exact; h^M repeats h^{M-1}
};

/// v = η(t) g(x) on the space-time grid and h the discrete adjoint residual of v,
/// so that (v, h) satisfies the discrete backward equation exactly.
ManufacturedCase manufactured_case(const std::function<double(double)>& eta, const std::function<double(double)>& g,
                                   const ProblemSpec& spec, const Grid& grid);
ManufacturedCase manufactured_case(const std::function<double(double)>& eta, std::span<const double> g_nodes,
                                   const ProblemSpec& spec, const Grid& grid);

}  // namespace degcarl
