#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degcarl/coefficients.hpp"
#include "degcarl/grid.hpp"
#include "degcarl/problem.hpp"
#include "degcarl/tridiag.hpp"

namespace degcarl {

enum class HardyVariant {
  DirichletP,        // ∫ p w²/(x-x0)² ≤ C ∫ p w'², w(0)=w(1)=0
  NeumannPBoundary,  // same with w'(0)=w'(1)=0 plus 2Ξ[...] end terms
  CstarDirichlet,    // ∫ u²/(ab) ≤ C ∫ u'², zero ends
  CstarNeumannH1,    // ∫ u²/(ab) ≤ C ‖u‖²_{H¹}, zero end slopes
  CstarNeumannZero,  // ∫ u²/(ab) ≤ C ∫ u'², zero end slopes and u(x0)=0
};

std::string to_string(HardyVariant v);
HardyVariant parse_hardy_variant(const std::string& s);

/// Optional weight for the p-variants; defaults to p = (x-x0)²/(ab) with q = 2 - K1 - K2.
struct PWeight {
  std::function<double(double)> p;
  std::optional<double> q;  // estimated from samples when absent
};

struct ConstantReport {
  HardyVariant variant = HardyVariant::CstarDirichlet;
  int N = 0;
  double C_best = 0.0;
  std::vector<double> eigenvector;  // full grid length, zeros on constrained nodes
  std::optional<double> refinement_gap;
  bool gap_flagged = false;
  std::optional<double> Xi;
  std::optional<double> beta;
  std::optional<double> q;
  bool q_estimated = false;
  bool q_unreliable = false;
  bool interior_zero = false;
  int eigen_iterations = 0;
  std::string note;
};

/// Quadratic forms of one inequality: `lhs` ≤ C · `rhs` (boundary terms folded into lhs).
struct HardyForms {
  SymTridiag lhs;
  SymTridiag rhs;
  std::vector<std::size_t> dropped;  // constrained nodes removed from both forms
  std::optional<double> Xi;
  std::optional<double> q;
  bool q_estimated = false;
};

HardyForms hardy_forms(HardyVariant variant, const ProblemSpec& spec, const Grid& grid,
                       const std::optional<PWeight>& weight = std::nullopt);

ConstantReport best_constant(HardyVariant variant, const ProblemSpec& spec, const Grid& grid,
                             const std::optional<PWeight>& weight = std::nullopt);

/// best_constant at spec.N and 2·spec.N, reporting the relative gap (flagged above 2%).
ConstantReport best_constant_refined(HardyVariant variant, const ProblemSpec& spec,
                                     const std::optional<PWeight>& weight = std::nullopt);

/// Signed margin C·RHS(w) + end terms - LHS(w); rejects w violating the variant's constraints.
double verify_inequality(HardyVariant variant, std::span<const double> w, double C, const ProblemSpec& spec,
                         const Grid& grid, const std::optional<PWeight>& weight = std::nullopt);

/// Sides of the inequality for one field (lhs includes the negated end terms for the Neumann p-variant).
std::pair<double, double> inequality_sides(HardyVariant variant, std::span<const double> w, const ProblemSpec& spec,
                                           const Grid& grid, const std::optional<PWeight>& weight = std::nullopt);

double xi_constant(double q, double x0);
double beta_constant(const CoefficientFn& a, const CoefficientFn& b, double x0);

/// Whether u(x0) = 0 is imposed for this spec (config switch, default K1 + K2 >= 1).
bool interior_zero_active(const ProblemSpec& spec, const DegeneracyReport& rep);

/// The C* variant that applies to (bc, regime).
HardyVariant cstar_variant(BoundaryKind bc, const DegeneracyReport& rep);

struct CstarResult {
  HardyVariant variant;
  ConstantReport report;
  DegeneracyReport degeneracy;
};
CstarResult compute_cstar(const ProblemSpec& spec, const Grid& grid);

struct LambdaInterval {
  double upper = 0.0;            // supremum
  bool upper_inclusive = false;
  bool zero_excluded = true;
  bool contains(double lambda) const;
  std::string describe() const;
};

LambdaInterval admissible_lambda_range(double Cstar, BoundaryKind bc, const DegeneracyReport& rep);

struct CoercivityReport {
  double Lambda = 0.0;
  double analytic_bound = 0.0;   // lower bound from the norm-equivalence chain
  double norm_equivalence = 0.0; // c with ‖u‖²_K ≤ c ∫u'²
  bool uses_kab_norm = false;
  bool discrepancy = false;      // Λ ≤ 0 despite admissible λ
};

CoercivityReport coercivity_constant(const ProblemSpec& spec, const Grid& grid, double Cstar);

}  // namespace degcarl
