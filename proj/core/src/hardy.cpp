#include "degcarl/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

std::string to_string(HardyVariant v) {
  switch (v) {
    case HardyVariant::DirichletP: return "dirichlet_p";
    case HardyVariant::NeumannPBoundary: return "neumann_p_boundary";
    case HardyVariant::CstarDirichlet: return "cstar_dirichlet";
    case HardyVariant::CstarNeumannH1: return "cstar_neumann_H1";
    case HardyVariant::CstarNeumannZero: return "cstar_neumann_zero";
  }
  return "unknown";
}

HardyVariant parse_hardy_variant(const std::string& s) {
  for (auto v : {HardyVariant::DirichletP, HardyVariant::NeumannPBoundary, HardyVariant::CstarDirichlet,
                 HardyVariant::CstarNeumannH1, HardyVariant::CstarNeumannZero})
    if (to_string(v) == s) return v;
  fail(ErrorKind::Validation, "unknown Hardy variant '" + s + "'");
}

double xi_constant(double q, double x0) {
  if (!(q > 1.0)) fail(ErrorKind::HypothesisViolation, "Xi needs q > 1, got q=" + fmt_g(q));
  return std::max(std::pow(1.0 - x0, q - 1.0) / (q - 1.0), 1.0 / (q - 1.0));
}

double beta_constant(const CoefficientFn& a, const CoefficientFn& b, double x0) {
  return std::max(x0 * x0 / (a.value(0.0) * b.value(0.0)), (1.0 - x0) * (1.0 - x0) / (a.value(1.0) * b.value(1.0)));
}

bool interior_zero_active(const ProblemSpec& spec, const DegeneracyReport& rep) {
  if (!spec.x0()) return false;
  if (spec.interior_zero) return *spec.interior_zero;
  return rep.K1 + rep.K2 >= 1.0;
}

HardyVariant cstar_variant(BoundaryKind bc, const DegeneracyReport& rep) {
  if (bc == BoundaryKind::Dirichlet) return HardyVariant::CstarDirichlet;
  if (rep.regime == Regime::Nondegenerate || rep.hardy_branch == 1) return HardyVariant::CstarNeumannH1;
  return HardyVariant::CstarNeumannZero;
}

namespace {

bool is_p_variant(HardyVariant v) { return v == HardyVariant::DirichletP || v == HardyVariant::NeumannPBoundary; }

BoundaryKind variant_bc(HardyVariant v) {
  return (v == HardyVariant::DirichletP || v == HardyVariant::CstarDirichlet) ? BoundaryKind::Dirichlet
                                                                             : BoundaryKind::Neumann;
}

std::vector<double> inv_ab_mass(const ProblemSpec& spec, const Grid& grid) {
  std::vector<double> m(grid.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = grid.nodes[i];
    m[i] = grid.h / (spec.a.value(x) * spec.b.value(x));
  }
  return m;
}

// Largest q with p/|x-x0|^q monotone on each side, from consecutive node pairs.
double estimate_q(const std::function<double(double)>& p, const Grid& grid) {
  const double x0 = *grid.x0;
  double q = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double xl = grid.nodes[i - 1], xr = grid.nodes[i];
    if ((xl - x0) * (xr - x0) <= 0.0) continue;
    const double dlogr = std::log(std::abs(xr - x0)) - std::log(std::abs(xl - x0));
    q = std::min(q, (std::log(p(xr)) - std::log(p(xl))) / dlogr);
  }
  return q;
}

}  // namespace

HardyForms hardy_forms(HardyVariant variant, const ProblemSpec& spec, const Grid& grid,
                       const std::optional<PWeight>& weight) {
  HardyForms f;
  const BoundaryKind bc = variant_bc(variant);
  const std::size_t n = grid.size();

  if (is_p_variant(variant)) {
    if (!grid.x0) fail(ErrorKind::UnsupportedConfiguration, to_string(variant) + " needs a degenerate coefficient");
    const double x0 = *grid.x0;
    std::function<double(double)> p;
    std::optional<double> q;
    if (weight && weight->p) {
      p = weight->p;
      q = weight->q;
    } else {
      p = [&spec, x0](double x) { return (x - x0) * (x - x0) / (spec.a.value(x) * spec.b.value(x)); };
      if (spec.a.kind() == CoefficientKind::Power && spec.b.kind() == CoefficientKind::Power)
        q = 2.0 - spec.a.exponent() - spec.b.exponent();
    }
    if (!q) {
      q = estimate_q(p, grid);
      f.q_estimated = true;
    }
    f.q = q;
    if (!(*q > 1.0))
      fail(ErrorKind::HypothesisViolation,
           "hardy-branch: " + to_string(variant) + " needs q > 1 (monotone p/|x-x0|^q), got q=" + fmt_g(*q));

    std::vector<double> pe(grid.N + 1);
    for (int j = 0; j <= grid.N; ++j) pe[j] = (j == grid.x0_edge) ? 0.0 : p(grid.edge(j));
    f.rhs = stiffness(grid, bc, spec.closure, pe);
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = grid.nodes[i] - x0;
      l[i] = grid.h * p(grid.nodes[i]) / (r * r);
    }
    f.lhs = SymTridiag::diagonal(std::move(l));
    if (variant == HardyVariant::NeumannPBoundary) {
      const double xi = xi_constant(*q, x0);
      f.Xi = xi;
      // End values by linear extrapolation from the two nearest nodes: w(1) ≈ (3w_{N-1} - w_{N-2})/2.
      const double c1 = 2.0 * xi * p(1.0) / std::pow(1.0 - x0, *q);
      const double c0 = 2.0 * xi * p(0.0) / std::pow(x0, *q);
      auto fold = [&f](std::size_t near, std::size_t next, std::size_t offi, double c) {
        f.lhs.diag[near] -= 9.0 * c / 4.0;
        f.lhs.diag[next] -= c / 4.0;
        f.lhs.off[offi] += 3.0 * c / 4.0;
      };
      fold(n - 1, n - 2, n - 2, c1);
      fold(0, 1, 0, c0);
    }
    return f;
  }

  f.lhs = SymTridiag::diagonal(inv_ab_mass(spec, grid));
  f.rhs = stiffness(grid, bc, spec.closure);
  if (variant == HardyVariant::CstarNeumannH1) {
    for (std::size_t i = 0; i < n; ++i) f.rhs.diag[i] += grid.h;
  }
  bool drop = false;
  if (variant == HardyVariant::CstarNeumannZero) {
    if (!grid.x0) fail(ErrorKind::UnsupportedConfiguration, "cstar_neumann_zero needs a degenerate coefficient");
    drop = true;
  } else if (variant == HardyVariant::CstarDirichlet && grid.x0) {
    drop = interior_zero_active(spec, classify_pair(spec.a, spec.b, grid.nodes));
  }
  if (drop) {
    f.dropped = grid.straddle();
    f.lhs = f.lhs.without(f.dropped);
    f.rhs = f.rhs.without(f.dropped);
  }
  return f;
}

namespace {

std::vector<double> expand(std::span<const double> reduced, std::span<const std::size_t> dropped, std::size_t n) {
  std::vector<double> full(n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(dropped.begin(), dropped.end(), i) != dropped.end()) continue;
    full[i] = reduced[k++];
  }
  return full;
}

std::vector<double> reduce(std::span<const double> full, std::span<const std::size_t> dropped) {
  std::vector<double> r;
  r.reserve(full.size());
  for (std::size_t i = 0; i < full.size(); ++i)
    if (std::find(dropped.begin(), dropped.end(), i) == dropped.end()) r.push_back(full[i]);
  return r;
}

}  // namespace

ConstantReport best_constant(HardyVariant variant, const ProblemSpec& spec, const Grid& grid,
                             const std::optional<PWeight>& weight) {
  HardyForms f = hardy_forms(variant, spec, grid, weight);
  // C = sup lhs/rhs = 1/μ with μ the largest value keeping rhs - μ·lhs semidefinite.
  GeneralizedEigen e = min_generalized_eigenvalue(f.rhs, f.lhs);
  if (!(e.mu > 0.0)) fail(ErrorKind::NumericalFailure, to_string(variant) + ": non-positive pencil value " + fmt_g(e.mu));
  ConstantReport r;
  r.variant = variant;
  r.N = grid.N;
  r.C_best = 1.0 / e.mu;
  r.eigenvector = expand(e.vector, f.dropped, grid.size());
  r.Xi = f.Xi;
  r.q = f.q;
  r.q_estimated = f.q_estimated;
  r.q_unreliable = f.q_estimated && f.q && *f.q <= 1.05;
  r.interior_zero = !f.dropped.empty();
  r.eigen_iterations = e.iterations;
  if (grid.x0 && is_p_variant(variant)) r.beta = beta_constant(spec.a, spec.b, *grid.x0);
  if (grid.x0 && variant == HardyVariant::CstarDirichlet) r.beta = beta_constant(spec.a, spec.b, *grid.x0);
  if (r.interior_zero) r.note = "u(x0)=0 imposed on the two nodes straddling x0";
  return r;
}

ConstantReport best_constant_refined(HardyVariant variant, const ProblemSpec& spec, const std::optional<PWeight>& weight) {
  const Grid g1 = build_grid(spec);
  ConstantReport r1 = best_constant(variant, spec, g1, weight);
  ProblemSpec fine = spec;
  fine.N = 2 * spec.N;
  const Grid g2 = build_grid(fine);
  ConstantReport r2 = best_constant(variant, fine, g2, weight);
  r1.refinement_gap = std::abs(r2.C_best - r1.C_best) / r2.C_best;
  r1.gap_flagged = *r1.refinement_gap > 0.02;
  return r1;
}

std::pair<double, double> inequality_sides(HardyVariant variant, std::span<const double> w, const ProblemSpec& spec,
                                           const Grid& grid, const std::optional<PWeight>& weight) {
  if (w.size() != grid.size()) fail(ErrorKind::Shape, "field length does not match grid");
  HardyForms f = hardy_forms(variant, spec, grid, weight);
  double wmax = 0.0;
  for (double v : w) wmax = std::max(wmax, std::abs(v));
  for (std::size_t i : f.dropped)
    if (std::abs(w[i]) > 1e-12 * wmax)
      fail(ErrorKind::Precondition, to_string(variant) + ": field must vanish on the nodes straddling x0");
  const auto r = reduce(w, f.dropped);
  return {f.lhs.quad(r), f.rhs.quad(r)};
}

double verify_inequality(HardyVariant variant, std::span<const double> w, double C, const ProblemSpec& spec,
                         const Grid& grid, const std::optional<PWeight>& weight) {
  const auto [lhs, rhs] = inequality_sides(variant, w, spec, grid, weight);
  return C * rhs - lhs;
}

CstarResult compute_cstar(const ProblemSpec& spec, const Grid& grid) {
  DegeneracyReport rep = classify_pair(spec.a, spec.b, grid.nodes);
  const HardyVariant v = cstar_variant(spec.bc, rep);
  ConstantReport c = best_constant(v, spec, grid);
  c.note += (c.note.empty() ? "" : "; ") + std::string("branch ") + std::to_string(rep.hardy_branch) + " -> " +
            to_string(v);
  return {v, std::move(c), rep};
}

bool LambdaInterval::contains(double lambda) const {
  if (zero_excluded && lambda == 0.0) return false;
  return upper_inclusive ? lambda <= upper : lambda < upper;
}

std::string LambdaInterval::describe() const {
  std::string s = "(-inf," + fmt_g(upper) + (upper_inclusive ? "]" : ")");
  if (zero_excluded && (upper > 0.0 || (upper == 0.0 && upper_inclusive))) s += " minus {0}";
  return s;
}

LambdaInterval admissible_lambda_range(double Cstar, BoundaryKind bc, const DegeneracyReport& rep) {
  if (!(Cstar > 0.0)) fail(ErrorKind::Parameter, "C* must be positive");
  LambdaInterval I;
  if (rep.regime == Regime::Nondegenerate) {
    // No singular potential: λ = 0 is the plain heat operator. Neumann keeps the
    // constants in the kernel at λ = 0, so it needs λ < 0 for coercivity.
    I.zero_excluded = false;
    I.upper = bc == BoundaryKind::Dirichlet ? 1.0 / Cstar : 0.0;
    return I;
  }
  I.zero_excluded = true;
  if (bc == BoundaryKind::Neumann && rep.lambda_branch == LambdaBranch::NegativeOnlyNeumann) I.upper = 0.0;
  else I.upper = 1.0 / Cstar;
  return I;
}

namespace {

double max_on_unit(const CoefficientFn& f, const Grid& grid) {
  double m = std::max(f.value(0.0), f.value(1.0));
  for (double x : grid.nodes) m = std::max(m, f.value(x));
  return m;
}

}  // namespace

CoercivityReport coercivity_constant(const ProblemSpec& spec, const Grid& grid, double Cstar) {
  const DegeneracyReport rep = classify_pair(spec.a, spec.b, grid.nodes);
  const LambdaInterval I = admissible_lambda_range(Cstar, spec.bc, rep);
  if (!I.contains(spec.lambda))
    fail(ErrorKind::Precondition,
         "lambda-admissible: lambda=" + fmt_g(spec.lambda) + " outside admissible set " + I.describe());

  CoercivityReport out;
  const std::size_t n = grid.size();
  const SymTridiag K = stiffness(grid, spec.bc, spec.closure);
  std::vector<double> m_a(n), m_ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.nodes[i];
    m_a[i] = grid.h / spec.a.value(x);
    m_ab[i] = m_a[i] / spec.b.value(x);
  }
  SymTridiag form = K;
  form.add_scaled(-spec.lambda, SymTridiag::diagonal(m_ab));
  SymTridiag norm = K;
  norm.add_scaled(1.0, SymTridiag::diagonal(m_a));
  out.uses_kab_norm = rep.regime != Regime::Nondegenerate && !rep.sum_below_one;
  if (out.uses_kab_norm) norm.add_scaled(1.0, SymTridiag::diagonal(m_ab));
  if (interior_zero_active(spec, rep)) {
    const auto drop = grid.straddle();
    form = form.without(drop);
    norm = norm.without(drop);
  }
  out.Lambda = min_generalized_eigenvalue(form, norm).mu;

  const double max_b = max_on_unit(spec.b, grid);
  out.norm_equivalence = 1.0 + max_b * Cstar + (out.uses_kab_norm ? Cstar : 0.0);
  if (spec.bc == BoundaryKind::Neumann &&
      (rep.lambda_branch == LambdaBranch::NegativeOnlyNeumann || rep.regime == Regime::Nondegenerate)) {
    out.analytic_bound = std::min(1.0, -spec.lambda / max_b);
  } else {
    out.analytic_bound = (1.0 - std::max(spec.lambda, 0.0) * Cstar) / out.norm_equivalence;
  }
  out.discrepancy = !(out.Lambda > 0.0);
  return out;
}

}  // namespace degcarl
