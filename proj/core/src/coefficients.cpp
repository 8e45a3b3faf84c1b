#include "degcarl/coefficients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Local power exponent from two samples on the same side of x0.
double local_exponent(double r1, double v1, double r2, double v2) {
  const double k = std::log(v2 / v1) / std::log(r2 / r1);
  return std::clamp(k, 1e-6, 2.0 - 1e-6);
}

}  // namespace

struct CoefficientFn::Table {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> dv;  // finite-difference slopes at the knots
  std::size_t split = 0;   // first knot to the right of x0
  double k_left = 1.0;
  double k_right = 1.0;
};

CoefficientFn CoefficientFn::power(double K, double x0, double scale) {
  if (!(K > 0.0 && K < 2.0)) fail(ErrorKind::Parameter, "exponent K must lie in (0,2), got " + fmt_g(K));
  if (!(x0 > 0.0 && x0 < 1.0)) fail(ErrorKind::Parameter, "x0 must lie in (0,1), got " + fmt_g(x0));
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorKind::Parameter, "scale must be positive, got " + fmt_g(scale));
  CoefficientFn f;
  f.kind_ = CoefficientKind::Power;
  f.x0_ = x0;
  f.K_ = K;
  f.scale_ = scale;
  return f;
}

CoefficientFn CoefficientFn::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) fail(ErrorKind::Parameter, "constant coefficient must be positive");
  CoefficientFn f;
  f.kind_ = CoefficientKind::Constant;
  f.scale_ = value;
  return f;
}

CoefficientFn CoefficientFn::tabulated(std::vector<double> nodes, std::vector<double> values, double x0) {
  if (nodes.size() != values.size()) fail(ErrorKind::Shape, "tabulated nodes and values differ in length");
  if (!(x0 > 0.0 && x0 < 1.0)) fail(ErrorKind::Parameter, "x0 must lie in (0,1)");
  auto t = std::make_shared<Table>();
  t->x = std::move(nodes);
  t->v = std::move(values);
  const std::size_t n = t->x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t->v[i] > 0.0) || !std::isfinite(t->v[i]))
      fail(ErrorKind::InvalidCoefficient, "tabulated value must be positive at x=" + fmt_g(t->x[i]));
    if (t->x[i] == x0) fail(ErrorKind::InvalidCoefficient, "tabulated nodes must avoid x0");
    if (i > 0 && !(t->x[i] > t->x[i - 1])) fail(ErrorKind::Parameter, "tabulated nodes must be strictly increasing");
  }
  t->split = static_cast<std::size_t>(std::upper_bound(t->x.begin(), t->x.end(), x0) - t->x.begin());
  const std::size_t nl = t->split, nr = n - t->split;
  if (nl < 3 || nr < 3) fail(ErrorKind::Parameter, "tabulated coefficient needs at least 3 knots on each side of x0");

  // Centered differences only inside one side of x0; one-sided 3-point stencils at the ends of each side.
  t->dv.assign(n, 0.0);
  auto side = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t i0, i1, i2;
      if (i == lo) { i0 = i; i1 = i + 1; i2 = i + 2; }
      else if (i + 1 == hi) { i0 = i - 2; i1 = i - 1; i2 = i; }
      else { i0 = i - 1; i1 = i; i2 = i + 1; }
      // Derivative at x[i] of the quadratic through three knots.
      const double x0_ = t->x[i0], x1 = t->x[i1], x2 = t->x[i2], xi = t->x[i];
      const double l0 = ((xi - x1) + (xi - x2)) / ((x0_ - x1) * (x0_ - x2));
      const double l1 = ((xi - x0_) + (xi - x2)) / ((x1 - x0_) * (x1 - x2));
      const double l2 = ((xi - x0_) + (xi - x1)) / ((x2 - x0_) * (x2 - x1));
      t->dv[i] = l0 * t->v[i0] + l1 * t->v[i1] + l2 * t->v[i2];
    }
  };
  side(0, nl);
  side(nl, n);
  t->k_left = local_exponent(x0 - t->x[nl - 2], t->v[nl - 2], x0 - t->x[nl - 1], t->v[nl - 1]);
  t->k_right = local_exponent(t->x[nl] - x0, t->v[nl], t->x[nl + 1] - x0, t->v[nl + 1]);

  CoefficientFn f;
  f.kind_ = CoefficientKind::Tabulated;
  f.x0_ = x0;
  f.table_ = std::move(t);
  return f;
}

const std::vector<double>& CoefficientFn::table_nodes() const {
  if (!table_) fail(ErrorKind::Evaluation, "coefficient has no table");
  return table_->x;
}

const std::vector<double>& CoefficientFn::table_values() const {
  if (!table_) fail(ErrorKind::Evaluation, "coefficient has no table");
  return table_->v;
}

namespace {

// Cubic Hermite value and slope on [x0,x1].
std::pair<double, double> hermite(double xa, double xb, double va, double vb, double da, double db, double x) {
  const double h = xb - xa;
  const double t = (x - xa) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double v = h00 * va + h10 * h * da + h01 * vb + h11 * h * db;
  const double d00 = (6 * t2 - 6 * t) / h, d10 = 3 * t2 - 4 * t + 1, d01 = (-6 * t2 + 6 * t) / h, d11 = 3 * t2 - 2 * t;
  const double d = d00 * va + d10 * da + d01 * vb + d11 * db;
  return {v, d};
}

}  // namespace

double CoefficientFn::value(double x) const {
  switch (kind_) {
    case CoefficientKind::Constant:
      return scale_;
    case CoefficientKind::Power:
      return scale_ * std::pow(std::abs(x - *x0_), K_);
    case CoefficientKind::Tabulated: {
      const Table& t = *table_;
      const double x0 = *x0_;
      if (x == x0) return 0.0;
      const std::size_t n = t.x.size();
      const std::size_t nl = t.split;
      if (x < x0 && x > t.x[nl - 1])
        return t.v[nl - 1] * std::pow((x0 - x) / (x0 - t.x[nl - 1]), t.k_left);
      if (x > x0 && x < t.x[nl]) return t.v[nl] * std::pow((x - x0) / (t.x[nl] - x0), t.k_right);
      if (x <= t.x[0]) return std::max(t.v[0] + t.dv[0] * (x - t.x[0]), 1e-300);
      if (x >= t.x[n - 1]) return std::max(t.v[n - 1] + t.dv[n - 1] * (x - t.x[n - 1]), 1e-300);
      const std::size_t j = static_cast<std::size_t>(std::upper_bound(t.x.begin(), t.x.end(), x) - t.x.begin());
      return hermite(t.x[j - 1], t.x[j], t.v[j - 1], t.v[j], t.dv[j - 1], t.dv[j], x).first;
    }
  }
  return 0.0;
}

double CoefficientFn::derivative(double x) const {
  switch (kind_) {
    case CoefficientKind::Constant:
      return 0.0;
    case CoefficientKind::Power: {
      const double r = x - *x0_;
      if (r == 0.0) fail(ErrorKind::Evaluation, "derivative undefined at x0");
      return scale_ * K_ * sign(r) * std::pow(std::abs(r), K_ - 1.0);
    }
    case CoefficientKind::Tabulated: {
      const Table& t = *table_;
      const double x0 = *x0_;
      if (x == x0) fail(ErrorKind::Evaluation, "derivative undefined at x0");
      const std::size_t n = t.x.size();
      const std::size_t nl = t.split;
      if (x < x0 && x > t.x[nl - 1]) {
        const double r0 = x0 - t.x[nl - 1];
        return -t.v[nl - 1] * t.k_left * std::pow((x0 - x) / r0, t.k_left - 1.0) / r0;
      }
      if (x > x0 && x < t.x[nl]) {
        const double r0 = t.x[nl] - x0;
        return t.v[nl] * t.k_right * std::pow((x - x0) / r0, t.k_right - 1.0) / r0;
      }
      if (x <= t.x[0]) return t.dv[0];
      if (x >= t.x[n - 1]) return t.dv[n - 1];
      const std::size_t j = static_cast<std::size_t>(std::upper_bound(t.x.begin(), t.x.end(), x) - t.x.begin());
      return hermite(t.x[j - 1], t.x[j], t.v[j - 1], t.v[j], t.dv[j - 1], t.dv[j], x).second;
    }
  }
  return 0.0;
}

std::string CoefficientFn::to_json() const {
  nlohmann::ordered_json j;
  switch (kind_) {
    case CoefficientKind::Constant:
      j["type"] = "constant";
      j["value"] = scale_;
      break;
    case CoefficientKind::Power:
      j["type"] = "power";
      j["K"] = K_;
      j["x0"] = *x0_;
      j["scale"] = scale_;
      break;
    case CoefficientKind::Tabulated:
      j["type"] = "tabulated";
      j["x0"] = *x0_;
      j["nodes"] = table_->x;
      j["values"] = table_->v;
      break;
  }
  return j.dump();
}

CoefficientFn make_power_coefficient(double K, double x0, double scale) { return CoefficientFn::power(K, x0, scale); }

CoefficientFn parse_coefficient(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("coefficient: ") + e.what());
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) fail(ErrorKind::Validation, std::string("coefficient: missing field '") + key + "'");
    return j.at(key);
  };
  try {
    const std::string type = need("type").get<std::string>();
    if (type == "power" || type == "scaled-power") {
      const double scale = j.contains("scale") ? j.at("scale").get<double>() : 1.0;
      return CoefficientFn::power(need("K").get<double>(), need("x0").get<double>(), scale);
    }
    if (type == "constant") {
      const double v = j.contains("value") ? j.at("value").get<double>() : (j.contains("scale") ? j.at("scale").get<double>() : 1.0);
      return CoefficientFn::constant(v);
    }
    if (type == "tabulated") {
      return CoefficientFn::tabulated(need("nodes").get<std::vector<double>>(), need("values").get<std::vector<double>>(),
                                      need("x0").get<double>());
    }
    fail(ErrorKind::Validation, "coefficient: unknown type '" + type + "'");
  } catch (const nlohmann::json::type_error& e) {
    fail(ErrorKind::Validation, std::string("coefficient: ") + e.what());
  }
}

double estimate_exponent(const CoefficientFn& f, std::span<const double> nodes) {
  if (!f.degenerate()) return 0.0;
  const double x0 = *f.x0();
  double sup = -kInf;
  for (double x : nodes) {
    if (x == x0) fail(ErrorKind::Evaluation, "grid node coincides with x0");
    const double v = f.value(x);
    if (!(v > 0.0)) fail(ErrorKind::InvalidCoefficient, "coefficient not positive at x=" + fmt_g(x));
    const double d = f.derivative(x);
    if (!std::isfinite(d)) fail(ErrorKind::Evaluation, "derivative unavailable at x=" + fmt_g(x));
    sup = std::max(sup, (x - x0) * d / v);
  }
  return sup;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::WWD: return "WWD";
    case Regime::SSD: return "SSD";
    case Regime::WSD: return "WSD";
    case Regime::SWD: return "SWD";
    case Regime::Nondegenerate: return "nondegenerate";
    case Regime::Unclassifiable: return "unclassifiable";
  }
  return "unclassifiable";
}

namespace {

SobolevClass sobolev_class(const CoefficientFn& f, double K) {
  switch (f.kind()) {
    case CoefficientKind::Constant: return SobolevClass::W1Inf;
    case CoefficientKind::Power: return K < 1.0 ? SobolevClass::W11 : SobolevClass::W1Inf;
    case CoefficientKind::Tabulated: break;
  }
  // Bounded sampled derivative: the slope must not grow toward x0 on either side.
  const auto& x = f.table_nodes();
  const double x0 = *f.x0();
  const std::size_t nl = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), x0) - x.begin());
  const double dl_near = std::abs(f.derivative(x[nl - 1])), dl_next = std::abs(f.derivative(x[nl - 2]));
  const double dr_near = std::abs(f.derivative(x[nl])), dr_next = std::abs(f.derivative(x[nl + 1]));
  const bool bounded = dl_near <= (1.0 + 1e-3) * dl_next && dr_near <= (1.0 + 1e-3) * dr_next;
  return bounded ? SobolevClass::W1Inf : SobolevClass::W11;
}

double scaling_infimum(const CoefficientFn& f, double K, std::span<const double> nodes) {
  const double x0 = *f.x0();
  double inf = kInf;
  for (double x : nodes) inf = std::min(inf, std::pow(std::abs(x - x0), K) / f.value(x));
  return inf;
}

bool weak(double K) { return K > 0.0 && K < 1.0; }
bool strong(double K) { return K >= 1.0 && K < 2.0; }

}  // namespace

DegeneracyReport classify_pair(const CoefficientFn& a, const CoefficientFn& b, std::span<const double> nodes) {
  DegeneracyReport rep;
  if (a.degenerate() && b.degenerate() && std::abs(*a.x0() - *b.x0()) > 1e-12)
    fail(ErrorKind::UnsupportedConfiguration,
         "a and b vanish at different points (" + fmt_g(*a.x0()) + " vs " + fmt_g(*b.x0()) + ")");
  if (!a.degenerate() && !b.degenerate()) {
    rep.regime = Regime::Nondegenerate;
    rep.scaling_bound_holds = true;
    rep.c1 = 1.0 / a.scale();
    rep.c2 = 1.0 / b.scale();
    return rep;
  }
  rep.K1 = estimate_exponent(a, nodes);
  rep.K2 = estimate_exponent(b, nodes);
  // Exact exponents for pure powers; the estimate differs only by rounding.
  if (a.kind() == CoefficientKind::Power) rep.K1 = a.exponent();
  if (b.kind() == CoefficientKind::Power) rep.K2 = b.exponent();
  rep.a_class = sobolev_class(a, rep.K1);
  rep.b_class = sobolev_class(b, rep.K2);
  if (!a.degenerate() || !b.degenerate()) {
    rep.regime = Regime::Unclassifiable;
    return rep;
  }
  const double K1 = rep.K1, K2 = rep.K2;
  if (weak(K1) && weak(K2)) rep.regime = Regime::WWD;
  else if (strong(K1) && strong(K2)) rep.regime = Regime::SSD;
  else if (weak(K1) && strong(K2)) rep.regime = Regime::WSD;
  else if (strong(K1) && weak(K2)) rep.regime = Regime::SWD;
  else rep.regime = Regime::Unclassifiable;
  if (rep.regime == Regime::Unclassifiable) return rep;

  rep.c1 = scaling_infimum(a, K1, nodes);
  rep.c2 = scaling_infimum(b, K2, nodes);
  rep.scaling_bound_holds = rep.c1 > 0.0 && rep.c2 > 0.0 && std::isfinite(rep.c1) && std::isfinite(rep.c2);
  const double sum = K1 + K2;
  rep.sum_below_one = sum < 1.0;
  constexpr double eps = 1e-8;
  if (rep.regime == Regime::WWD && rep.sum_below_one) rep.hardy_branch = 1;
  else if (rep.regime == Regime::WWD && sum <= 2.0 && rep.scaling_bound_holds) rep.hardy_branch = 2;
  else if ((rep.regime == Regime::WSD || rep.regime == Regime::SWD) && sum <= 2.0 + eps && rep.scaling_bound_holds)
    rep.hardy_branch = 3;
  else if (rep.regime == Regime::SSD && std::abs(K1 - 1.0) < eps && std::abs(K2 - 1.0) < eps) rep.hardy_branch = 4;
  rep.lambda_branch = rep.hardy_branch == 1 ? LambdaBranch::NegativeOnlyNeumann : LambdaBranch::BelowInverseCstar;
  rep.interior_zero = !rep.sum_below_one;
  return rep;
}

bool HypothesisReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass; });
}

double integrate(const std::function<double(double)>& f, double lo, double hi, int panels) {
  static constexpr std::array<double, 5> xg = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                               -0.9061798459386640};
  static constexpr std::array<double, 5> wg = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                               0.2369268850561891, 0.2369268850561891};
  if (hi == lo) return 0.0;
  const double w = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * w;
    for (std::size_t k = 0; k < xg.size(); ++k) sum += wg[k] * f(c + 0.5 * w * xg[k]);
  }
  return 0.5 * w * sum;
}

IdentityReport weight_identity_report(const CoefficientFn& a, const WeightIdentity& id, std::span<const double> nodes,
                                      bool fixed_upper) {
  if (!id.g) fail(ErrorKind::Parameter, "weight identity needs g");
  IdentityReport rep;
  rep.g_min = kInf;
  for (double x : nodes) rep.g_min = std::min(rep.g_min, id.g(x));

  // Subsample to keep the pair count moderate.
  std::vector<double> xs;
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 40);
  for (std::size_t i = 0; i < nodes.size(); i += stride) xs.push_back(nodes[i]);

  auto induced = [&](double x, double B) {
    const double av = a.value(x);
    const double G = integrate(id.g, x, B);
    return a.derivative(x) / (2.0 * std::sqrt(av)) * (G + id.h0) + std::sqrt(av) * id.g(x);
  };
  auto same_side = [&](double x, double B) {
    if (!a.degenerate()) return true;
    const double x0 = *a.x0();
    return (x < B && B < x0) || (x0 < x && x < B);
  };

  std::vector<double> uppers;
  if (fixed_upper) uppers.push_back(1.0);
  else uppers = xs;
  double resid = 0.0;
  for (double B : uppers) {
    double prev_x = 0.0, prev_h = 0.0;
    bool have_prev = false;
    for (double x : xs) {
      if (!fixed_upper && !same_side(x, B)) {
        have_prev = false;
        continue;
      }
      if (fixed_upper && a.degenerate()) fail(ErrorKind::Precondition, "fixed-upper identity requires a nondegenerate a");
      const double hv = induced(x, B);
      ++rep.samples;
      rep.induced_h_sup = std::max(rep.induced_h_sup, std::abs(hv));
      if (have_prev) rep.induced_h_lipschitz = std::max(rep.induced_h_lipschitz, std::abs(hv - prev_h) / (x - prev_x));
      if (id.frak_h) resid = std::max(resid, std::abs(hv - id.frak_h(x, B)));
      prev_x = x;
      prev_h = hv;
      have_prev = true;
    }
  }
  if (id.frak_h) rep.residual = resid;
  return rep;
}

HypothesisReport check_structural_hypotheses(const CoefficientFn& a, const CoefficientFn& b, double lambda,
                                             std::span<const double> nodes,
                                             const std::optional<WeightIdentity>& identity) {
  HypothesisReport rep;
  if (a.degenerate()) {
    const double x0 = *a.x0();
    const double K1 = a.kind() == CoefficientKind::Power ? a.exponent() : estimate_exponent(a, nodes);

    // (x-x0)a'/a should be Lipschitz; report the sampled slope sup.
    double var = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const double xl = nodes[i - 1], xr = nodes[i];
      if ((xl - x0) * (xr - x0) <= 0.0) continue;
      const double Ll = (xl - x0) * a.derivative(xl) / a.value(xl);
      const double Lr = (xr - x0) * a.derivative(xr) / a.value(xr);
      var = std::max(var, std::abs(Lr - Ll) / (xr - xl));
    }
    rep.log_derivative_variation = var;
    rep.checks.push_back({"log-derivative-lipschitz", std::isfinite(var), var,
                          "sup |d/dx[(x-x0)a'/a]| = " + fmt_g(var)});

    rep.theta_required = K1 >= 0.5;
    if (rep.theta_required) {
      double theta = K1;
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double xl = nodes[i - 1], xr = nodes[i];
        if ((xl - x0) * (xr - x0) <= 0.0) continue;
        const double dlogr = std::log(std::abs(xr - x0)) - std::log(std::abs(xl - x0));
        const double ratio = (std::log(a.value(xr)) - std::log(a.value(xl))) / dlogr;
        if (ratio < K1 * (1.0 - 1e-9)) theta = std::min(theta, ratio);
      }
      rep.theta = theta;
      rep.checks.push_back({"theta-monotone", theta > 0.0, theta,
                            "largest theta with a/|x-x0|^theta monotone on each side = " + fmt_g(theta)});
    }
  }
  if (lambda < 0.0 && b.degenerate()) {
    const double x0 = *b.x0();
    double mn = kInf;
    for (double x : nodes) mn = std::min(mn, (x - x0) * b.derivative(x));
    rep.min_xb_prime = mn;
    rep.checks.push_back({"b-sign", mn >= 0.0, mn, "min (x-x0) b' = " + fmt_g(mn)});
  }
  if (identity) {
    IdentityReport ir = weight_identity_report(a, *identity, nodes, !a.degenerate());
    const bool g_ok = ir.g_min > 0.0 && identity->h0 > 0.0;
    const bool resid_ok = !ir.residual || *ir.residual <= 1e-8 * std::max(1.0, ir.induced_h_sup);
    const bool finite = std::isfinite(ir.induced_h_sup) && std::isfinite(ir.induced_h_lipschitz);
    std::ostringstream os;
    os << "g_min = " << fmt_g(ir.g_min) << ", sup|h| = " << fmt_g(ir.induced_h_sup)
       << ", Lipschitz proxy = " << fmt_g(ir.induced_h_lipschitz);
    if (ir.residual) os << ", residual = " << fmt_g(*ir.residual);
    rep.checks.push_back({"weight-identity", g_ok && resid_ok && finite, ir.residual.value_or(ir.g_min), os.str()});
    rep.identity = ir;
  }
  return rep;
}

}  // namespace degcarl
