#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degcarl/carleman.hpp"
#include "degcarl/coefficients.hpp"
#include "degcarl/evolution.hpp"
#include "degcarl/hardy.hpp"

namespace degcarl {

// Observation functional Δt Σ_{n=1}^{M} ‖χ_ω F vⁿ‖²_{1/a}, F the step resolvent.
// For implicit Euler F vⁿ = vⁿ⁻¹, i.e. a left-endpoint rule over [0,T).
double observation_integral(const Trajectory& v, const Stepper& stepper, const ProblemSpec& spec);

struct ObservationRatio {
  double ratio = 0.0;
  double numerator = 0.0;    // ‖v(0)‖²_{1/a}
  double denominator = 0.0;  // observation integral
  bool infinite = false;
};

ObservationRatio observation_ratio(std::span<const double> vT, const ProblemSpec& spec, const Grid& grid);

/// Gram operator Λ vT = u(T), u driven from 0 by the HUM control χ F v.
class GramOperator {
 public:
  GramOperator(const ProblemSpec& spec, const Grid& grid);

  std::vector<double> apply(std::span<const double> vT) const;
  Trajectory control(std::span<const double> vT) const;
  std::vector<double> free_final(std::span<const double> u0) const;
  std::vector<double> adjoint_initial(std::span<const double> vT) const;  // v(0)
  double inner(std::span<const double> x, std::span<const double> y) const;
  const Stepper& stepper() const { return stepper_; }
  const ProblemSpec& spec() const { return spec_; }
  std::size_t applications() const { return applications_; }

 private:
  ProblemSpec spec_;
  Grid grid_;
  Stepper stepper_;
  std::vector<char> mask_;
  mutable std::size_t applications_ = 0;
};

struct CrResult {
  std::vector<double> x;
  std::vector<double> residual_history;  // W-norm of b - Λx, entry 0 is the initial residual
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

/// Conjugate residual on (Λ + εI) x = b in the L²_{1/a} inner product, stopping at ‖r‖ ≤ abs_tol.
/// Non-positive curvature raises a numerical failure naming the iteration.
CrResult conjugate_residual(const GramOperator& G, std::span<const double> b, double abs_tol, int max_iter,
                            double epsilon = 0.0);

/// Admissible λ set for the spec (computes C*).
LambdaInterval admissible_set(const ProblemSpec& spec, const Grid& grid);

struct ObservabilityEstimate {
  double C_T = 0.0;
  double gap = 0.0;  // relative gap of the last two Rayleigh quotients
  int iterations = 0;
  bool converged = false;
  bool warning = false;
  std::vector<double> history;
  std::vector<double> extremal;  // vT attaining the estimate
  std::optional<HypothesisCheck> neumann_size;
  bool outside_hypotheses = false;
};

/// Power iteration for sup ‖v(0)‖² / observation over final data, i.e. the largest
/// eigenvalue of Λ⁻¹E² with E the homogeneous adjoint propagator.
ObservabilityEstimate estimate_observability_constant(const ProblemSpec& spec, const Grid& grid, int iters,
                                                      std::uint64_t seed = 1, double rel_tol = 1e-6);

/// Neumann small-coefficient condition max a < 1/C_HP (checked when x0 ∉ ω and K1 + K2 < 1).
std::optional<HypothesisCheck> neumann_size_check(const ProblemSpec& spec, const Grid& grid);

struct HUMResult {
  Trajectory control;
  double final_norm_ratio = 0.0;
  double cost_ratio = 0.0;
  int cg_iterations = 0;
  bool converged = false;
  bool residual_monotone = true;
  std::vector<double> residual_history;  // relative to ‖u0‖
  double epsilon = 0.0;                  // Tikhonov shift, 0 unless the plain solve stalled
  double duality_residual = 0.0;
};

HUMResult hum_control(std::span<const double> u0, const ProblemSpec& spec, const Grid& grid, double tol, int max_iter);

struct CaccioppoliSides {
  double lhs = 0.0;  // ∫∫_{ω'} v_x² e^{2sφ}
  double rhs = 0.0;  // ∫∫_ω v²/a
};

void check_caccioppoli_geometry(Interval omega_prime, Interval omega, const Grid& grid);

CaccioppoliSides caccioppoli_margin(const Trajectory& v, Interval omega_prime, Interval omega, double s,
                                    const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid);

struct CaccioppoliFit {
  double C = 0.0;  // max lhs/rhs, 0 when every trajectory vanishes
  std::vector<CaccioppoliSides> rows;
};

/// Family of homogeneous adjoint trajectories from seeded smooth final data.
CaccioppoliFit caccioppoli_fit(std::size_t count, std::uint64_t seed, Interval omega_prime, double s,
                               const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid);

}  // namespace degcarl
