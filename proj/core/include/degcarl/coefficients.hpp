#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace degcarl {

enum class CoefficientKind { Power, Tabulated, Constant };

/// A diffusion coefficient a(x) or singular weight b(x) on [0,1].
///
/// Degenerate kinds vanish at a single interior point x0 and are strictly
/// positive elsewhere; the constant kind is the nondegenerate reference case.
/// Instances are immutable and cheap to copy (tables are shared).
class CoefficientFn {
 public:
  static CoefficientFn power(double K, double x0, double scale = 1.0);
  static CoefficientFn constant(double value);
  // Samples must be strictly increasing, avoid x0 and be strictly positive.
  static CoefficientFn tabulated(std::vector<double> nodes, std::vector<double> values, double x0);

  double value(double x) const;
  double operator()(double x) const { return value(x); }
  /// Analytic for power/constant kinds, finite differences of the table otherwise.
  double derivative(double x) const;

  CoefficientKind kind() const noexcept { return kind_; }
  std::optional<double> x0() const noexcept { return x0_; }
  bool degenerate() const noexcept { return x0_.has_value(); }
  double exponent() const noexcept { return K_; }   // power kind only
  double scale() const noexcept { return scale_; }  // power and constant kinds
  const std::vector<double>& table_nodes() const;
  const std::vector<double>& table_values() const;

  std::string to_json() const;

 private:
  struct Table;

  CoefficientKind kind_ = CoefficientKind::Constant;
  std::optional<double> x0_;
  double K_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<const Table> table_;
};

CoefficientFn make_power_coefficient(double K, double x0, double scale);

/// {"type":"power"|"tabulated"|"constant", "K", "x0", "scale", "nodes", "values", "value"}
CoefficientFn parse_coefficient(const std::string& json_text);

/// sup over nodes of (x - x0) f'(x) / f(x): the least K with (x-x0)f' <= K f on the nodes.
double estimate_exponent(const CoefficientFn& f, std::span<const double> nodes);

enum class Regime { WWD, SSD, WSD, SWD, Nondegenerate, Unclassifiable };
std::string to_string(Regime r);

enum class SobolevClass { W11, W1Inf };

/// Which branch of the λ-admissibility rule applies.
enum class LambdaBranch {
  NegativeOnlyNeumann,  // weak pair with K1 + K2 < 1: Neumann needs λ < 0
  BelowInverseCstar,    // λ < 1/C* (λ != 0 for degenerate pairs)
};

struct DegeneracyReport {
  double K1 = 0.0;
  double K2 = 0.0;
  Regime regime = Regime::Unclassifiable;
  SobolevClass a_class = SobolevClass::W1Inf;
  SobolevClass b_class = SobolevClass::W1Inf;
  double c1 = 0.0;  // inf |x-x0|^K1 / a
  double c2 = 0.0;  // inf |x-x0|^K2 / b
  bool scaling_bound_holds = false;
  bool sum_below_one = false;
  // Hardy-Poincaré branch 1..4 (0 when none applies, e.g. SSD with K != 1).
  int hardy_branch = 0;
  LambdaBranch lambda_branch = LambdaBranch::BelowInverseCstar;
  // Requires u(x0) = 0 in the constrained Hardy variants.
  bool interior_zero = false;
};

DegeneracyReport classify_pair(const CoefficientFn& a, const CoefficientFn& b, std::span<const double> nodes);

struct HypothesisCheck {
  std::string id;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

/// User-supplied pair for the weight identity a'/(2√a)(∫_x^B g + h0) + √a g = 𝔥(x,B).
struct WeightIdentity {
  std::function<double(double)> g;
  double h0 = 1.0;
  // Optional reference 𝔥(x,B); without it only the induced 𝔥 is reported.
  std::function<double(double, double)> frak_h;
};

struct IdentityReport {
  double g_min = 0.0;
  double induced_h_sup = 0.0;
  double induced_h_lipschitz = 0.0;
  std::optional<double> residual;
  std::size_t samples = 0;
};

struct HypothesisReport {
  double log_derivative_variation = 0.0;     // sup |d/dx[(x-x0)a'/a]|
  bool theta_required = false;               // K1 >= 1/2
  std::optional<double> theta;               // largest admissible monotonicity exponent
  std::optional<double> min_xb_prime;        // min (x-x0) b' when λ < 0
  std::optional<IdentityReport> identity;
  std::vector<HypothesisCheck> checks;

  bool all_pass() const;
};

HypothesisReport check_structural_hypotheses(const CoefficientFn& a, const CoefficientFn& b, double lambda,
                                             std::span<const double> nodes,
                                             const std::optional<WeightIdentity>& identity = std::nullopt);

/// Residual of the weight identity over pairs (x,B) on one side of x0 (or
/// with B = 1 fixed when `fixed_upper` is set, the nondegenerate form).
IdentityReport weight_identity_report(const CoefficientFn& a, const WeightIdentity& id,
                                      std::span<const double> nodes, bool fixed_upper);

/// ∫_lo^hi f by composite Gauss-Legendre; shared by weights and identity checks.
double integrate(const std::function<double(double)>& f, double lo, double hi, int panels = 16);

}  // namespace degcarl
