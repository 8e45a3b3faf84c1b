#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degcarl/evolution.hpp"
#include "degcarl/grid.hpp"
#include "degcarl/problem.hpp"

namespace degcarl {

struct LogValue {
  double value = 0.0;
  double log = 0.0;
};

/// Θ(t) = 1/[t(T-t)]⁴ with its logarithm; poles at t = 0 and t = T.
LogValue theta(double t, double T);

enum class NondegVariant { A1, A2 };

struct NondegParams {
  NondegVariant variant = NondegVariant::A1;
  double r = 1.0;
  std::function<double(double)> g = [](double) { return 1.0; };  // variant A1 only
  double h0 = 1.0;                                             // variant A1 only
  std::optional<double> frak_c;  // default: 1 for A1, safety·max e^{rζ₁} for A2
  double safety = 2.0;
};

/// Space part of the nondegenerate weight Φ = Θ ρ.
struct NondegWeights {
  NondegVariant variant = NondegVariant::A1;
  double r = 1.0;
  double frak_c = 0.0;
  double frak_d = 0.0;                // ‖a'‖∞ (A2)
  std::vector<double> rho_nodes;
  std::vector<double> rho_edges;      // edges 0..N
  std::vector<double> zeta1_edges;    // A2 only
  double bt_coef0 = 0.0;              // boundary coefficient at x = 0 (without z_x² e^{2sΦ})
  double bt_coef1 = 0.0;              // at x = 1
};

NondegWeights nondeg_weights(const CoefficientFn& a, const Grid& grid, const NondegParams& params);

struct CarlemanWeights {
  double T = 1.0;
  // Degenerate ψ(x) = d₁(∫_{x0}^x (y-x0)/a e^{R(y-x0)²} dy - d₂).
  double d1 = 1.0;
  double d2 = 0.0;
  double d2_bound = 0.0;
  double R = 1.0;
  double K_used = 0.0;
  double safety = 1.0;
  std::optional<double> x0;
  std::vector<double> psi_nodes;
  std::vector<double> psi_edges;  // edges 0..N
  std::vector<double> xfac_nodes; // (x-x0)/a at nodes
  std::optional<NondegWeights> nondeg;

  bool degenerate() const { return !nondeg.has_value(); }
  const std::vector<double>& space_nodes() const { return nondeg ? nondeg->rho_nodes : psi_nodes; }
  const std::vector<double>& space_edges() const { return nondeg ? nondeg->rho_edges : psi_edges; }
};

/// Degenerate weights with d₂ = safety × (its lower bound), K read as K₁.
CarlemanWeights build_weights(const ProblemSpec& spec, const Grid& grid, double d1, double R, double safety);
/// Nondegenerate weights Φ = Θρ₀,₁.
CarlemanWeights build_nondeg_weights(const ProblemSpec& spec, const Grid& grid, const NondegParams& params);

/// ψ(x) evaluated directly with a fine midpoint rule (reference for the cumulative table).
double psi_at(const CarlemanWeights& w, const CoefficientFn& a, double x, int panels = 20000);

struct WeightInvariants {
  double max_space = 0.0;    // max ψ (or ρ) over nodes and edges
  double min_psi = 0.0;
  double psi_at_x0 = 0.0;
  bool space_negative = false;
  bool psi_lower_bound = true;
  bool psi_x0_exact = true;
  bool d2_above_bound = true;
  bool phi_negative = false;
  bool all() const {
    return space_negative && psi_lower_bound && psi_x0_exact && d2_above_bound && phi_negative;
  }
};

WeightInvariants check_weight_invariants(const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid);

enum class CarlemanForm {
  Standard,   // Dirichlet: boundary term; Neumann: ∫∫ v² e^{2sφ} over (0,1)
  Localized,  // Neumann: ∫∫_ω v² e^{2sφ}
};

struct CarlemanSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double source_term = 0.0;    // ∫∫ h² e^{2sφ}/a (degenerate) or ∫∫ h² e^{2sΦ}
  double boundary_term = 0.0;  // contribution of the boundary term to rhs (after its sign)
  double zero_order_term = 0.0;
};

CarlemanSides carleman_sides(const Trajectory& v, const Trajectory& h, double s, const CarlemanWeights& w,
                             const ProblemSpec& spec, const Grid& grid, CarlemanForm form = CarlemanForm::Standard);

struct ScanRow {
  std::size_t case_id = 0;
  double s = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double boundary_term = 0.0;
};

struct ScanResult {
  double C_fit = 0.0;
  std::optional<double> s0_est;  // empty: threshold above scan range
  std::vector<ScanRow> table;
};

ScanResult scan_s(const std::vector<ManufacturedCase>& cases, const std::vector<double>& s_grid,
                  const CarlemanWeights& w, const ProblemSpec& spec, const Grid& grid,
                  CarlemanForm form = CarlemanForm::Standard);

/// Family of separable cases η(t)g(x): g smooth random (seeded), η(t) = 1 + c₁ t/T + c₂ sin(πt/T).
std::vector<ManufacturedCase> manufactured_family(std::size_t count, std::uint64_t seed, const ProblemSpec& spec,
                                                  const Grid& grid);

}  // namespace degcarl
