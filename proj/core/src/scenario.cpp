#include "degcarl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "degcarl/coefficients.hpp"
#include "degcarl/evolution.hpp"
#include "degcarl/fields.hpp"
#include "degcarl/format.hpp"
#include "degcarl/grid.hpp"
#include "degcarl/observability.hpp"

namespace degcarl {

using nlohmann::json;

namespace {

const std::vector<std::pair<Pipeline, std::string>> kPipelineNames = {
    {Pipeline::Classify, "classify"}, {Pipeline::Hardy, "hardy"},
    {Pipeline::Wellposed, "wellposed"}, {Pipeline::Evolve, "evolve"},
    {Pipeline::Carleman, "carleman"}, {Pipeline::Observability, "observability"},
    {Pipeline::Hum, "hum"}, {Pipeline::Sweep, "sweep"},
};

const std::vector<std::string> kAxes = {"lambda", "K1", "K2", "omega_lo", "omega_hi", "N", "s"};

}  // namespace

std::string to_string(Pipeline p) {
  for (const auto& [k, v] : kPipelineNames)
    if (k == p) return v;
  return "unknown";
}

Pipeline parse_pipeline(const std::string& s) {
  for (const auto& [k, v] : kPipelineNames)
    if (v == s) return k;
  fail(ErrorKind::Validation, "unknown pipeline '" + s + "'");
}

// ---------------------------------------------------------------- config parsing

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& need(const char* key) const {
    if (!has(key)) fail(ErrorKind::Validation, "missing field '" + field(key) + "'");
    return j_.at(key);
  }

  template <class T>
  T get(const char* key) const {
    try {
      return need(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::Validation, "field '" + field(key) + "' has the wrong type");
    }
  }

  template <class T>
  T get_or(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  Reader sub(const char* key) const {
    const json& s = need(key);
    if (!s.is_object()) fail(ErrorKind::Validation, "field '" + field(key) + "' must be an object");
    return Reader(s, field(key));
  }

  const json& raw() const { return j_; }

 private:
  const json& j_;
  std::string path_;
};

CoefficientFn read_coefficient(const Reader& r, const char* key) {
  const json& j = r.need(key);
  if (j.is_number()) return CoefficientFn::constant(j.get<double>());
  try {
    return parse_coefficient(j.dump());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parameter || e.kind() == ErrorKind::InvalidCoefficient)
      fail(ErrorKind::Validation, "field '" + r.field(key) + "': " + e.what());
    throw;
  }
}

Interval read_interval(const Reader& r, const char* key) {
  const auto v = r.get<std::vector<double>>(key);
  if (v.size() != 2) fail(ErrorKind::Validation, "field '" + r.field(key) + "' must be [lo, hi]");
  return {v[0], v[1]};
}

int read_positive_int(const Reader& r, const char* key, int fallback) {
  const int v = r.get_or<int>(key, fallback);
  if (v < 1) fail(ErrorKind::Validation, "field '" + r.field(key) + "' must be positive");
  return v;
}

double read_positive(const Reader& r, const char* key, double fallback) {
  const double v = r.get_or<double>(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::Validation, "field '" + r.field(key) + "' must be positive");
  return v;
}

ProblemSpec read_problem(const Reader& root) {
  const Reader p = root.sub("problem");
  ProblemSpec s;
  s.a = read_coefficient(p, "a");
  s.b = read_coefficient(p, "b");
  s.lambda = p.get<double>("lambda");
  s.T = p.get<double>("T");
  const std::string bc = p.get<std::string>("bc");
  if (bc == "dirichlet") s.bc = BoundaryKind::Dirichlet;
  else if (bc == "neumann") s.bc = BoundaryKind::Neumann;
  else fail(ErrorKind::Validation, "field 'problem.bc' must be dirichlet or neumann");
  s.omega = read_interval(p, "omega");
  s.N = p.get<int>("N");
  s.M = p.get<int>("M");
  const std::string scheme = p.get_or<std::string>("scheme", "implicit-euler");
  if (scheme == "implicit-euler") s.scheme = Scheme::ImplicitEuler;
  else if (scheme == "crank-nicolson") s.scheme = Scheme::CrankNicolson;
  else fail(ErrorKind::Validation, "field 'problem.scheme' must be implicit-euler or crank-nicolson");
  const std::string closure = p.get_or<std::string>("closure", "odd-reflection");
  if (closure == "odd-reflection") s.closure = DirichletClosure::OddReflection;
  else if (closure == "zero-ghost") s.closure = DirichletClosure::ZeroGhost;
  else fail(ErrorKind::Validation, "field 'problem.closure' must be odd-reflection or zero-ghost");
  if (p.has("interior_zero")) s.interior_zero = p.get<bool>("interior_zero");
  return s;
}

std::vector<double> default_s_grid() {
  std::vector<double> s(20);
  for (int k = 0; k < 20; ++k) s[k] = 5.0 * std::pow(20.0, k / 19.0);
  return s;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Parse, "config: top level must be a JSON object");
  const Reader root(j, "");
  ScenarioConfig cfg;
  if (root.has("pipeline")) cfg.pipeline = parse_pipeline(root.get<std::string>("pipeline"));
  cfg.problem = read_problem(root);
  if (root.has("seed")) cfg.seed = root.get<std::uint64_t>("seed");
  if (root.has("output_dir")) cfg.output_dir = root.get<std::string>("output_dir");

  if (root.has("identity")) {
    const Reader r = root.sub("identity");
    cfg.identity_g = r.get<double>("g");
    cfg.identity_h0 = read_positive(r, "h0", 1.0);
  }
  if (root.has("hardy")) {
    const Reader r = root.sub("hardy");
    if (r.has("variants"))
      for (const auto& v : r.get<std::vector<std::string>>("variants")) cfg.hardy.variants.push_back(parse_hardy_variant(v));
    cfg.hardy.fields = read_positive_int(r, "fields", cfg.hardy.fields);
    cfg.hardy.refine = r.get_or<bool>("refine", cfg.hardy.refine);
  }
  if (root.has("wellposed")) {
    const Reader r = root.sub("wellposed");
    cfg.wellposed.fields = read_positive_int(r, "fields", cfg.wellposed.fields);
  }
  if (root.has("evolve")) {
    const Reader r = root.sub("evolve");
    cfg.evolve.u0 = r.get_or<std::string>("u0", cfg.evolve.u0);
    if (cfg.evolve.u0 != "sine" && cfg.evolve.u0 != "random")
      fail(ErrorKind::Validation, "field 'evolve.u0' must be sine or random");
    cfg.evolve.mode = read_positive_int(r, "mode", cfg.evolve.mode);
  }
  cfg.carleman.s_grid = default_s_grid();
  if (root.has("carleman")) {
    cfg.has_carleman = true;
    const Reader r = root.sub("carleman");
    CarlemanParams& c = cfg.carleman;
    c.d1 = read_positive(r, "d1", c.d1);
    c.R = r.get_or<double>("R", c.R);
    if (!(c.R >= 0.0)) fail(ErrorKind::Validation, "field 'carleman.R' must be nonnegative");
    c.safety = r.get_or<double>("safety", c.safety);
    if (!(c.safety > 1.0)) fail(ErrorKind::Validation, "field 'carleman.safety' must exceed 1");
    if (r.has("s_grid")) c.s_grid = r.get<std::vector<double>>("s_grid");
    if (c.s_grid.empty()) fail(ErrorKind::Validation, "field 'carleman.s_grid' must not be empty");
    for (std::size_t k = 0; k < c.s_grid.size(); ++k)
      if (!(c.s_grid[k] > 0.0) || (k > 0 && !(c.s_grid[k] > c.s_grid[k - 1])))
        fail(ErrorKind::Validation, "field 'carleman.s_grid' must be positive and strictly increasing");
    c.cases = read_positive_int(r, "cases", c.cases);
    const std::string variant = r.get_or<std::string>("variant", "a1");
    if (variant == "a1") c.variant = NondegVariant::A1;
    else if (variant == "a2") c.variant = NondegVariant::A2;
    else fail(ErrorKind::Validation, "field 'carleman.variant' must be a1 or a2");
    c.r = read_positive(r, "r", c.r);
    c.h0 = read_positive(r, "h0", c.h0);
    c.g = r.get_or<double>("g", c.g);
    if (r.has("frak_c")) c.frak_c = read_positive(r, "frak_c", 1.0);
    c.localized = r.get_or<bool>("localized", c.localized);
  }
  if (root.has("observability")) {
    const Reader r = root.sub("observability");
    cfg.observability.iters = read_positive_int(r, "iters", cfg.observability.iters);
    cfg.observability.tol = read_positive(r, "tol", cfg.observability.tol);
    if (r.has("caccioppoli")) {
      const Reader c = r.sub("caccioppoli");
      CaccioppoliParams cp;
      cp.omega_prime = read_interval(c, "omega_prime");
      cp.s = read_positive(c, "s", cp.s);
      cp.count = read_positive_int(c, "count", cp.count);
      cfg.observability.caccioppoli = cp;
    }
  }
  if (root.has("hum")) {
    const Reader r = root.sub("hum");
    cfg.hum.tol = read_positive(r, "tol", cfg.hum.tol);
    cfg.hum.max_iter = read_positive_int(r, "max_iter", cfg.hum.max_iter);
    cfg.hum.u0 = r.get_or<std::string>("u0", cfg.hum.u0);
    if (cfg.hum.u0 != "sine" && cfg.hum.u0 != "random")
      fail(ErrorKind::Validation, "field 'hum.u0' must be sine or random");
  }
  if (root.has("sweep")) {
    const Reader r = root.sub("sweep");
    SweepParams sw;
    sw.pipeline = parse_pipeline(r.get<std::string>("pipeline"));
    if (sw.pipeline == Pipeline::Sweep) fail(ErrorKind::Validation, "field 'sweep.pipeline' cannot be sweep");
    sw.axis = r.get<std::string>("axis");
    if (!is_sweep_axis(sw.axis)) fail(ErrorKind::Parameter, "unsweepable axis '" + sw.axis + "'");
    sw.values = r.get<std::vector<double>>("values");
    cfg.sweep = sw;
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Parse, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

bool is_sweep_axis(const std::string& axis) { return std::find(kAxes.begin(), kAxes.end(), axis) != kAxes.end(); }

void apply_axis(ScenarioConfig& cfg, const std::string& axis, double value) {
  ProblemSpec& p = cfg.problem;
  if (axis == "lambda") {
    p.lambda = value;
  } else if (axis == "K1" || axis == "K2") {
    CoefficientFn& f = axis == "K1" ? p.a : p.b;
    if (f.kind() != CoefficientKind::Power) fail(ErrorKind::Parameter, axis + " sweep needs a power coefficient");
    f = CoefficientFn::power(value, *f.x0(), f.scale());
  } else if (axis == "omega_lo") {
    p.omega.lo = value;
  } else if (axis == "omega_hi") {
    p.omega.hi = value;
  } else if (axis == "N") {
    if (value != std::floor(value)) fail(ErrorKind::Parameter, "N sweep values must be integers");
    p.N = static_cast<int>(value);
  } else if (axis == "s") {
    cfg.carleman.s_grid = {value};
    if (cfg.observability.caccioppoli) cfg.observability.caccioppoli->s = value;
  } else {
    fail(ErrorKind::Parameter, "unsweepable axis '" + axis + "'");
  }
}

SweepParams parse_sweep_arg(const std::string& arg, Pipeline pipeline) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) fail(ErrorKind::Parameter, "--sweep expects axis=v1,v2,...");
  SweepParams sw;
  sw.pipeline = pipeline;
  sw.axis = arg.substr(0, eq);
  if (!is_sweep_axis(sw.axis)) fail(ErrorKind::Parameter, "unsweepable axis '" + sw.axis + "'");
  std::stringstream ss(arg.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      sw.values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::Parameter, "--sweep value '" + item + "' is not a number");
    }
  }
  return sw;
}

// ---------------------------------------------------------------- pipelines

bool PipelineResult::outside_hypotheses() const {
  for (const auto& c : checks)
    if (c.blocking && !c.check.pass) return true;
  return false;
}

namespace {

std::string cell(double v) { return csv_cell(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return csv_cell(v); }
std::string opt_cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }

HypothesisCheck make_check(std::string id, bool pass, double margin, std::string detail) {
  HypothesisCheck c;
  c.id = std::move(id);
  c.pass = pass;
  c.margin = margin;
  c.detail = std::move(detail);
  return c;
}

struct Context {
  const ScenarioConfig& cfg;
  const ProblemSpec& spec;
  Grid grid;
  DegeneracyReport rep;
  PipelineResult out;

  explicit Context(const ScenarioConfig& c) : cfg(c), spec(c.problem), grid(build_grid(c.problem)) {
    for (auto& w : validate(spec)) out.warnings.push_back(std::move(w));
    if (grid.warning) out.warnings.push_back(*grid.warning);
    rep = classify_pair(spec.a, spec.b, grid.nodes);
  }

  void check(HypothesisCheck c, bool blocking = true) { out.checks.push_back({std::move(c), blocking}); }
  void metric(const std::string& k, std::string v) { out.metrics.emplace_back(k, std::move(v)); }
  void table(const std::string& name, CsvTable t) { out.tables.emplace_back(name, std::move(t)); }

  void structural_checks(bool blocking) {
    const bool classifiable = rep.regime != Regime::Unclassifiable;
    double margin = 0.0;
    if (rep.regime == Regime::Nondegenerate) margin = 1.0;
    else margin = std::min({rep.K1, 2.0 - rep.K1, rep.K2, 2.0 - rep.K2});
    check(make_check("regime", classifiable, margin, "class=" + to_string(rep.regime)), true);
    if (rep.regime != Regime::Nondegenerate) {
      check(make_check("scaling-bound", rep.scaling_bound_holds, std::min(rep.c1, rep.c2),
                       "c1=" + fmt_g(rep.c1) + " c2=" + fmt_g(rep.c2)),
            blocking);
      check(make_check("hardy-branch", rep.hardy_branch > 0, rep.hardy_branch,
                       "branch " + std::to_string(rep.hardy_branch)),
            blocking);
    }
    std::optional<WeightIdentity> id;
    if (cfg.identity_g) {
      WeightIdentity w;
      const double g = *cfg.identity_g;
      w.g = [g](double) { return g; };
      w.h0 = cfg.identity_h0;
      id = w;
    }
    const HypothesisReport h = check_structural_hypotheses(spec.a, spec.b, spec.lambda, grid.nodes, id);
    for (const auto& c : h.checks) check(c, blocking);
  }

  void lambda_check(const LambdaInterval& I) {
    const double margin = I.upper - spec.lambda;
    check(make_check("lambda-admissible", I.contains(spec.lambda), margin,
                     "lambda=" + fmt_g(spec.lambda) + " in " + I.describe()));
  }
};

std::vector<double> initial_field(const std::string& kind, int mode, const Context& ctx, std::uint64_t salt) {
  if (kind == "random") {
    Rng rng(derive_seed(ctx.cfg.seed, salt));
    return smooth_random_field(ctx.grid, ctx.spec.bc, rng);
  }
  std::vector<double> u(ctx.grid.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double arg = mode * std::numbers::pi * ctx.grid.nodes[i];
    u[i] = ctx.spec.bc == BoundaryKind::Dirichlet ? std::sin(arg) : std::cos(arg);
  }
  return u;
}

void run_classify(Context& ctx) {
  ctx.structural_checks(false);
  const auto& r = ctx.rep;
  ctx.metric("class", to_string(r.regime));
  ctx.metric("K1", cell(r.K1));
  ctx.metric("K2", cell(r.K2));
  ctx.metric("c1", cell(r.c1));
  ctx.metric("c2", cell(r.c2));
  ctx.metric("hardy_branch", cell(r.hardy_branch));
  ctx.metric("sum_below_one", cell(r.sum_below_one));
  ctx.metric("interior_zero", cell(interior_zero_active(ctx.spec, r)));
  ctx.out.notes.push_back("class=" + to_string(r.regime));
}

BoundaryKind variant_bc(HardyVariant v) {
  return v == HardyVariant::DirichletP || v == HardyVariant::CstarDirichlet ? BoundaryKind::Dirichlet
                                                                            : BoundaryKind::Neumann;
}

void run_hardy(Context& ctx) {
  ctx.structural_checks(true);
  std::vector<HardyVariant> variants = ctx.cfg.hardy.variants;
  if (variants.empty()) variants.push_back(cstar_variant(ctx.spec.bc, ctx.rep));
  CsvTable t;
  t.header = {"variant", "N", "C_best", "refinement_gap", "gap_flagged", "Xi", "beta", "q", "q_estimated", "min_rel_margin"};
  bool first = true;
  for (HardyVariant v : variants) {
    ProblemSpec sv = ctx.spec;
    sv.bc = variant_bc(v);
    const Grid g = build_grid(sv);
    const ConstantReport rep = ctx.cfg.hardy.refine ? best_constant_refined(v, sv) : best_constant(v, sv, g);
    const HardyForms forms = hardy_forms(v, sv, g);
    double min_rel = std::numeric_limits<double>::infinity();
    for (int k = 0; k < ctx.cfg.hardy.fields; ++k) {
      Rng rng(derive_seed(ctx.cfg.seed, 1000 + k));
      auto w = smooth_random_field(g, sv.bc, rng);
      for (std::size_t i : forms.dropped) w[i] = 0.0;
      const auto [lhs, rhs] = inequality_sides(v, w, sv, g);
      const double margin = rep.C_best * rhs - lhs;
      min_rel = std::min(min_rel, margin / std::max(std::abs(lhs), 1e-300));
    }
    if (rep.q_unreliable) ctx.out.warnings.push_back(to_string(v) + ": estimated q close to 1, constant unreliable");
    if (rep.gap_flagged)
      ctx.out.warnings.push_back(to_string(v) + ": refinement gap " + fmt_short(*rep.refinement_gap) + " above 2%");
    t.add({to_string(v), cell(rep.N), cell(rep.C_best), opt_cell(rep.refinement_gap), cell(rep.gap_flagged),
           opt_cell(rep.Xi), opt_cell(rep.beta), opt_cell(rep.q), cell(rep.q_estimated), cell(min_rel)});
    CsvTable e;
    e.header = {"x", "value"};
    for (std::size_t i = 0; i < g.size(); ++i) e.add({cell(g.nodes[i]), cell(rep.eigenvector[i])});
    ctx.table("eigen_" + to_string(v) + ".csv", std::move(e));
    if (first) {
      ctx.metric("variant", to_string(v));
      ctx.metric("C_best", cell(rep.C_best));
      ctx.metric("refinement_gap", opt_cell(rep.refinement_gap));
      ctx.metric("min_rel_margin", cell(min_rel));
      first = false;
    }
    ctx.out.notes.push_back(to_string(v) + ": C_best=" + fmt_g(rep.C_best) +
                            (rep.note.empty() ? "" : " (" + rep.note + ")"));
  }
  ctx.table("hardy.csv", std::move(t));
}

void run_wellposed(Context& ctx) {
  ctx.structural_checks(true);
  const CstarResult cs = compute_cstar(ctx.spec, ctx.grid);
  const double Cstar = cs.report.C_best;
  const LambdaInterval I = admissible_lambda_range(Cstar, ctx.spec.bc, cs.degeneracy);
  ctx.lambda_check(I);
  const bool admissible = I.contains(ctx.spec.lambda);
  ctx.metric("C_star", cell(Cstar));
  ctx.metric("cstar_variant", to_string(cs.variant));
  ctx.metric("lambda_upper", cell(I.upper));
  ctx.metric("admissible", cell(admissible));
  if (admissible) {
    const CoercivityReport co = coercivity_constant(ctx.spec, ctx.grid, Cstar);
    ctx.metric("Lambda", cell(co.Lambda));
    ctx.metric("analytic_bound", cell(co.analytic_bound));
    if (co.discrepancy) ctx.out.warnings.push_back("coercivity constant not positive despite admissible lambda");
  } else {
    ctx.metric("Lambda", "");
    ctx.metric("analytic_bound", "");
  }

  const OperatorAssembly A = assemble_operator(ctx.spec, ctx.grid);
  const GeneralizedEigen top = min_generalized_eigenvalue(A.weighted.scaled(-1.0), A.mass_form());
  const double max_eig = -top.mu;
  ctx.metric("max_eigenvalue", cell(max_eig));

  const Stepper stepper(ctx.spec, ctx.grid);
  const Trajectory mode = solve_forward(top.vector, nullptr, stepper, ctx.spec);
  const double growth = weighted_norm(mode.fields.back(), ctx.grid, ctx.spec.a) /
                        weighted_norm(mode.fields.front(), ctx.grid, ctx.spec.a);
  ctx.metric("mode_growth", cell(growth));

  double contraction = -std::numeric_limits<double>::infinity();
  double energy_drop = 0.0;
  for (int k = 0; k < ctx.cfg.wellposed.fields; ++k) {
    Rng rng(derive_seed(ctx.cfg.seed, 2000 + k));
    auto u0 = smooth_random_field(ctx.grid, ctx.spec.bc, rng);
    if (interior_zero_active(ctx.spec, ctx.rep)) zero_straddle(u0, ctx.grid);
    const Trajectory u = solve_forward(u0, nullptr, stepper, ctx.spec);
    contraction = std::max(contraction, contraction_report(u, ctx.spec, ctx.grid));
    const Trajectory v = solve_adjoint(u0, nullptr, stepper, ctx.spec);
    const auto E = energy_series(v, ctx.spec, ctx.grid);
    double scale = 0.0;
    for (double e : E) scale = std::max(scale, std::abs(e));
    for (std::size_t n = 0; n + 1 < E.size(); ++n)
      if (scale > 0.0) energy_drop = std::max(energy_drop, (E[n] - E[n + 1]) / scale);
  }
  ctx.metric("contraction", cell(contraction));
  ctx.metric("energy_drop", cell(energy_drop));
  ctx.out.notes.push_back("admissible set " + I.describe() + ", C*=" + fmt_g(Cstar));
}

void run_evolve(Context& ctx) {
  ctx.structural_checks(true);
  const CstarResult cs = compute_cstar(ctx.spec, ctx.grid);
  ctx.lambda_check(admissible_lambda_range(cs.report.C_best, ctx.spec.bc, cs.degeneracy));
  const auto u0 = initial_field(ctx.cfg.evolve.u0, ctx.cfg.evolve.mode, ctx, 3000);
  const Trajectory u = solve_forward(u0, nullptr, ctx.spec, ctx.grid);
  const auto nrm = norm_series(u, ctx.spec, ctx.grid);
  const auto E = energy_series(u, ctx.spec, ctx.grid);
  CsvTable t;
  t.header = {"t", "norm", "energy"};
  for (std::size_t n = 0; n < nrm.size(); ++n) t.add({cell(u.times[n]), cell(nrm[n]), cell(E[n])});
  ctx.table("evolve.csv", std::move(t));
  CsvTable f;
  f.header = {"x", "u0", "uT"};
  for (std::size_t i = 0; i < ctx.grid.size(); ++i)
    f.add({cell(ctx.grid.nodes[i]), cell(u0[i]), cell(u.fields.back()[i])});
  ctx.table("field.csv", std::move(f));
  ctx.metric("final_norm_ratio", cell(nrm.back() / nrm.front()));
  ctx.metric("contraction", cell(contraction_report(u, ctx.spec, ctx.grid)));
}

CarlemanWeights weights_for(const Context& ctx, const Grid& grid) {
  const CarlemanParams& c = ctx.cfg.carleman;
  if (ctx.spec.a.degenerate()) return build_weights(ctx.spec, grid, c.d1, c.R, c.safety);
  NondegParams np;
  np.variant = c.variant;
  np.r = c.r;
  const double g = c.g;
  np.g = [g](double) { return g; };
  np.h0 = c.h0;
  np.frak_c = c.frak_c;
  return build_nondeg_weights(ctx.spec, grid, np);
}

void run_carleman(Context& ctx) {
  ctx.structural_checks(true);
  const CarlemanWeights w = weights_for(ctx, ctx.grid);
  const WeightInvariants inv = check_weight_invariants(w, ctx.spec, ctx.grid);
  ctx.out.notes.push_back("weights: max space weight=" + fmt_g(inv.max_space) +
                          (w.degenerate() ? ", d2=" + fmt_g(w.d2) + " (bound " + fmt_g(w.d2_bound) + ")" : ""));
  const auto cases = manufactured_family(ctx.cfg.carleman.cases, ctx.cfg.seed, ctx.spec, ctx.grid);
  const ScanResult sr = scan_s(cases, ctx.cfg.carleman.s_grid, w, ctx.spec, ctx.grid,
                               ctx.cfg.carleman.localized ? CarlemanForm::Localized : CarlemanForm::Standard);
  CsvTable t;
  t.header = {"case_id", "s", "LHS", "RHS", "ratio", "boundary_term"};
  std::size_t bt_nonneg = 0;
  for (const auto& r : sr.table) {
    t.add({std::to_string(r.case_id), cell(r.s), cell(r.lhs), cell(r.rhs), cell(r.ratio), cell(r.boundary_term)});
    if (r.boundary_term >= 0.0) ++bt_nonneg;
  }
  ctx.table("scan.csv", std::move(t));
  CsvTable wd;
  wd.header = {"x", "psi", "rho01"};
  for (std::size_t i = 0; i < ctx.grid.size(); ++i) {
    const double v = w.space_nodes()[i];
    wd.add({cell(ctx.grid.nodes[i]), w.degenerate() ? cell(v) : "", w.degenerate() ? "" : cell(v)});
  }
  ctx.table("weights.csv", std::move(wd));
  ctx.metric("C_fit", cell(sr.C_fit));
  ctx.metric("s0_est", sr.s0_est ? cell(*sr.s0_est) : std::string("threshold above scan range"));
  ctx.metric("boundary_term_nonnegative", std::to_string(bt_nonneg) + "/" + std::to_string(sr.table.size()));
}

void run_observability(Context& ctx) {
  ctx.structural_checks(true);
  const CstarResult cs = compute_cstar(ctx.spec, ctx.grid);
  ctx.lambda_check(admissible_lambda_range(cs.report.C_best, ctx.spec.bc, cs.degeneracy));
  const ObservabilityEstimate est = estimate_observability_constant(ctx.spec, ctx.grid, ctx.cfg.observability.iters,
                                                                    ctx.cfg.seed, ctx.cfg.observability.tol);
  if (est.neumann_size) ctx.check(*est.neumann_size);
  if (est.warning) ctx.out.warnings.push_back("observability power iteration did not reach the requested tolerance");
  CsvTable t;
  t.header = {"omega_lo", "omega_hi", "lambda", "K1", "K2", "C_T", "gap"};
  t.add({cell(ctx.spec.omega.lo), cell(ctx.spec.omega.hi), cell(ctx.spec.lambda), cell(ctx.rep.K1), cell(ctx.rep.K2),
         cell(est.C_T), cell(est.gap)});
  ctx.table("observability.csv", std::move(t));
  CsvTable h;
  h.header = {"iteration", "rayleigh"};
  for (std::size_t k = 0; k < est.history.size(); ++k) h.add({std::to_string(k + 1), cell(est.history[k])});
  ctx.table("power_history.csv", std::move(h));
  ctx.metric("C_T", cell(est.C_T));
  ctx.metric("gap", cell(est.gap));
  ctx.metric("iterations", cell(est.iterations));

  if (ctx.cfg.observability.caccioppoli) {
    const CaccioppoliParams& cp = *ctx.cfg.observability.caccioppoli;
    check_caccioppoli_geometry(cp.omega_prime, ctx.spec.omega, ctx.grid);
    ctx.check(make_check("omega-geometry", true, ctx.grid.x0 ? std::min(std::abs(*ctx.grid.x0 - ctx.spec.omega.lo),
                                                                         std::abs(*ctx.grid.x0 - ctx.spec.omega.hi))
                                                               : 1.0,
                         "x0 outside closure(omega), omega' inside omega"));
    const CarlemanWeights w = weights_for(ctx, ctx.grid);
    const CaccioppoliFit fit = caccioppoli_fit(cp.count, ctx.cfg.seed, cp.omega_prime, cp.s, w, ctx.spec, ctx.grid);
    CsvTable c;
    c.header = {"trajectory", "lhs", "rhs", "ratio"};
    for (std::size_t k = 0; k < fit.rows.size(); ++k) {
      const auto& r = fit.rows[k];
      c.add({std::to_string(k), cell(r.lhs), cell(r.rhs), cell(r.rhs > 0.0 ? r.lhs / r.rhs : 0.0)});
    }
    ctx.table("caccioppoli.csv", std::move(c));
    ctx.metric("caccioppoli_C", cell(fit.C));
  } else {
    ctx.metric("caccioppoli_C", "");
  }
  if (ctx.cfg.has_carleman) {
    const CarlemanWeights w = weights_for(ctx, ctx.grid);
    const auto cases = manufactured_family(ctx.cfg.carleman.cases, ctx.cfg.seed, ctx.spec, ctx.grid);
    const ScanResult sr = scan_s(cases, ctx.cfg.carleman.s_grid, w, ctx.spec, ctx.grid);
    ctx.metric("carleman_C_fit", cell(sr.C_fit));
    ctx.out.notes.push_back("Carleman route: C_fit=" + fmt_g(sr.C_fit) + " beside operator estimate C_T=" +
                            fmt_g(est.C_T));
  } else {
    ctx.metric("carleman_C_fit", "");
  }
}

std::string spec_hash(const ProblemSpec& s) {
  std::ostringstream os;
  os << s.a.to_json() << '|' << s.b.to_json() << '|' << fmt_g(s.lambda) << '|' << fmt_g(s.T) << '|' << to_string(s.bc)
     << '|' << fmt_g(s.omega.lo) << '|' << fmt_g(s.omega.hi) << '|' << s.N << '|' << s.M << '|' << to_string(s.scheme)
     << '|' << to_string(s.closure);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void run_hum(Context& ctx) {
  ctx.structural_checks(true);
  const CstarResult cs = compute_cstar(ctx.spec, ctx.grid);
  ctx.lambda_check(admissible_lambda_range(cs.report.C_best, ctx.spec.bc, cs.degeneracy));
  const auto u0 = initial_field(ctx.cfg.hum.u0, 1, ctx, 4000);
  const HUMResult r = hum_control(u0, ctx.spec, ctx.grid, ctx.cfg.hum.tol, ctx.cfg.hum.max_iter);
  CsvTable t;
  t.header = {"spec_hash", "tol", "iterations", "final_norm_ratio", "cost_ratio", "converged", "epsilon"};
  t.add({spec_hash(ctx.spec), cell(ctx.cfg.hum.tol), cell(r.cg_iterations), cell(r.final_norm_ratio),
         cell(r.cost_ratio), cell(r.converged), cell(r.epsilon)});
  ctx.table("hum.csv", std::move(t));
  CsvTable h;
  h.header = {"iteration", "relative_residual"};
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) h.add({std::to_string(k), cell(r.residual_history[k])});
  ctx.table("residuals.csv", std::move(h));
  ctx.metric("final_norm_ratio", cell(r.final_norm_ratio));
  ctx.metric("cost_ratio", cell(r.cost_ratio));
  ctx.metric("iterations", cell(r.cg_iterations));
  ctx.metric("converged", cell(r.converged));
  if (!r.residual_monotone) ctx.out.warnings.push_back("Gram residual did not decrease strictly at every iteration");
  if (r.epsilon > 0.0) ctx.out.warnings.push_back("Tikhonov fallback engaged with epsilon=" + fmt_g(r.epsilon));
  if (!r.converged) {
    ctx.out.numerical_failure = true;
    ctx.out.warnings.push_back("HUM did not reach tol=" + fmt_g(ctx.cfg.hum.tol));
  }
}

}  // namespace

std::vector<std::string> metric_keys(Pipeline p) {
  switch (p) {
    case Pipeline::Classify: return {"class", "K1", "K2", "c1", "c2", "hardy_branch", "sum_below_one", "interior_zero"};
    case Pipeline::Hardy: return {"variant", "C_best", "refinement_gap", "min_rel_margin"};
    case Pipeline::Wellposed:
      return {"C_star", "cstar_variant", "lambda_upper", "admissible", "Lambda", "analytic_bound",
              "max_eigenvalue", "mode_growth", "contraction", "energy_drop"};
    case Pipeline::Evolve: return {"final_norm_ratio", "contraction"};
    case Pipeline::Carleman: return {"C_fit", "s0_est", "boundary_term_nonnegative"};
    case Pipeline::Observability: return {"C_T", "gap", "iterations", "caccioppoli_C", "carleman_C_fit"};
    case Pipeline::Hum: return {"final_norm_ratio", "cost_ratio", "iterations", "converged"};
    case Pipeline::Sweep: return {};
  }
  return {};
}

namespace {

std::string primary_metric(Pipeline p) {
  switch (p) {
    case Pipeline::Hardy: return "C_best";
    case Pipeline::Wellposed: return "Lambda";
    case Pipeline::Evolve: return "final_norm_ratio";
    case Pipeline::Carleman: return "C_fit";
    case Pipeline::Observability: return "C_T";
    case Pipeline::Hum: return "cost_ratio";
    default: return "";
  }
}

}  // namespace

PipelineResult run_pipeline(Pipeline p, const ScenarioConfig& cfg) {
  Context ctx(cfg);
  switch (p) {
    case Pipeline::Classify: run_classify(ctx); break;
    case Pipeline::Hardy: run_hardy(ctx); break;
    case Pipeline::Wellposed: run_wellposed(ctx); break;
    case Pipeline::Evolve: run_evolve(ctx); break;
    case Pipeline::Carleman: run_carleman(ctx); break;
    case Pipeline::Observability: run_observability(ctx); break;
    case Pipeline::Hum: run_hum(ctx); break;
    case Pipeline::Sweep: fail(ErrorKind::Parameter, "sweep is not a single pipeline");
  }
  return std::move(ctx.out);
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::Parameter:
    case ErrorKind::Shape:
    case ErrorKind::Evaluation:
    case ErrorKind::InvalidCoefficient:
      return 2;
    case ErrorKind::HypothesisViolation:
    case ErrorKind::Precondition:
    case ErrorKind::UnsupportedConfiguration:
      return 3;
    case ErrorKind::NumericalFailure:
    case ErrorKind::StepFailure:
    case ErrorKind::Construction:
    case ErrorKind::Data:
    case ErrorKind::Pole:
      return 4;
  }
  return 1;
}

namespace {

std::string status_for(int code) {
  switch (code) {
    case 0: return "ok";
    case 2: return "invalid";
    case 3: return "outside-hypotheses";
    case 4: return "numerical-failure";
    default: return "error";
  }
}

std::string problem_line(const ProblemSpec& s) {
  return "a=" + s.a.to_json() + " b=" + s.b.to_json() + " lambda=" + fmt_g(s.lambda) + " T=" + fmt_g(s.T) +
         " bc=" + to_string(s.bc) + " omega=(" + fmt_g(s.omega.lo) + "," + fmt_g(s.omega.hi) + ") N=" +
         std::to_string(s.N) + " M=" + std::to_string(s.M) + " scheme=" + to_string(s.scheme) +
         " closure=" + to_string(s.closure);
}

std::string render_report(Pipeline p, const ScenarioConfig& cfg, const PipelineResult& r, const std::string& status) {
  std::ostringstream os;
  os << "degcarl report\n";
  os << "pipeline: " << to_string(p) << "\n";
  os << "seed: " << cfg.seed << "\n";
  os << "problem: " << problem_line(cfg.problem) << "\n";
  os << "hypotheses checked:\n";
  for (const auto& c : r.checks)
    os << "  [" << (c.check.pass ? "pass" : "FAIL") << "] " << c.check.id << " margin=" << fmt_g(c.check.margin)
       << (c.blocking ? "" : " (informational)") << "  " << c.check.detail << "\n";
  if (!r.warnings.empty()) {
    os << "warnings:\n";
    for (const auto& w : r.warnings) os << "  " << w << "\n";
  }
  os << "results:\n";
  for (const auto& [k, v] : r.metrics) os << "  " << k << " = " << v << "\n";
  for (const auto& n : r.notes) os << "  " << n << "\n";
  os << "status: " << status << "\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Data, "cannot write " + path.string());
  f << text;
}

RunOutcome run_sweep(const ScenarioConfig& cfg, const SweepParams& sw, const std::filesystem::path& dir,
                     bool allow_outside) {
  if (!is_sweep_axis(sw.axis)) fail(ErrorKind::Parameter, "unsweepable axis '" + sw.axis + "'");
  if (sw.pipeline == Pipeline::Sweep) fail(ErrorKind::Parameter, "sweep pipeline cannot be nested");
  const auto keys = metric_keys(sw.pipeline);
  const std::string primary = primary_metric(sw.pipeline);
  CsvTable t;
  t.header = {"axis", "value", "status", "exit_code", "outside_hypotheses", "message"};
  for (const auto& k : keys) t.header.push_back(k);
  t.header.push_back("refinement_gap");

  std::optional<double> prev_primary;
  int worst = 0;
  std::ostringstream rep;
  rep << "degcarl sweep report\npipeline: " << to_string(sw.pipeline) << "\naxis: " << sw.axis << "\nseed: " << cfg.seed
      << "\nproblem: " << problem_line(cfg.problem) << "\n";
  for (std::size_t k = 0; k < sw.values.size(); ++k) {
    const double value = sw.values[k];
    std::vector<std::string> row = {sw.axis, cell(value)};
    std::string status, message;
    int code = 0;
    bool outside = false;
    Metrics metrics;
    try {
      ScenarioConfig c = cfg;
      apply_axis(c, sw.axis, value);
      const PipelineResult r = run_pipeline(sw.pipeline, c);
      metrics = r.metrics;
      outside = r.outside_hypotheses();
      for (const auto& ch : r.checks)
        if (ch.blocking && !ch.check.pass) {
          message += (message.empty() ? "" : "; ") + ch.check.id + ": " + ch.check.detail;
          rep << "  " << sw.axis << "=" << fmt_g(value) << " [FAIL] " << ch.check.id << " margin=" << fmt_g(ch.check.margin)
              << "\n";
        }
      if (r.numerical_failure) code = 4;
      else if (outside && !allow_outside) code = 3;
      status = outside ? "outside-hypotheses" : (r.numerical_failure ? "numerical-failure" : "ok");
    } catch (const Error& e) {
      code = exit_code_for(e);
      status = status_for(code);
      message = e.what();
      outside = code == 3;
    }
    row.push_back(status);
    row.push_back(std::to_string(code));
    row.push_back(cell(outside));
    row.push_back(csv_cell(message));
    std::string primary_value;
    for (const auto& key : keys) {
      std::string v;
      for (const auto& [mk, mv] : metrics)
        if (mk == key) v = mv;
      if (key == primary) primary_value = v;
      row.push_back(csv_cell(v));
    }
    std::string gap;
    if (sw.axis == "N" && !primary_value.empty()) {
      const double cur = std::stod(primary_value);
      if (prev_primary && *prev_primary != 0.0) gap = cell(std::abs(cur - *prev_primary) / std::abs(*prev_primary));
      prev_primary = cur;
    }
    row.push_back(gap);
    t.add(std::move(row));
    rep << "  " << sw.axis << "=" << fmt_g(value) << " status=" << status << "\n";
    if (code != 3 || !allow_outside) worst = std::max(worst, code);
  }
  RunOutcome out;
  out.exit_code = 0;  // per-row failures are recorded, never abort the sweep
  out.status = sw.values.empty() ? "empty" : (worst == 0 ? "ok" : "rows-with-failures");
  rep << "status: " << out.status << "\n";
  out.report = rep.str();
  t.write(dir / "sweep.csv");
  write_text(dir / "report.txt", out.report);
  out.files = {dir / "sweep.csv", dir / "report.txt"};
  return out;
}

}  // namespace

RunOutcome run_scenario(ScenarioConfig cfg, const RunOptions& opts) {
  if (opts.seed) cfg.seed = *opts.seed;
  const std::filesystem::path dir = opts.out ? *opts.out : cfg.output_dir;
  std::optional<SweepParams> sweep = opts.sweep;
  if (!sweep && cfg.pipeline == Pipeline::Sweep) {
    if (!cfg.sweep) fail(ErrorKind::Validation, "missing field 'sweep'");
    sweep = cfg.sweep;
  }
  if (sweep) return run_sweep(cfg, *sweep, dir, opts.allow_outside_hypotheses);

  const Pipeline p = cfg.pipeline;
  const PipelineResult r = run_pipeline(p, cfg);
  RunOutcome out;
  const bool outside = r.outside_hypotheses();
  if (r.numerical_failure) out.exit_code = 4;
  else if (outside && !opts.allow_outside_hypotheses) out.exit_code = 3;
  out.status = outside ? (opts.allow_outside_hypotheses ? "outside stated hypotheses (allowed)" : "outside stated hypotheses")
                       : (r.numerical_failure ? "numerical failure" : "ok");

  CsvTable summary;
  summary.header = {"pipeline", "quantity", "value"};
  for (const auto& [k, v] : r.metrics) summary.add({to_string(p), k, csv_cell(v)});
  summary.write(dir / "summary.csv");
  out.files.push_back(dir / "summary.csv");

  CsvTable hyp;
  hyp.header = {"id", "pass", "margin", "blocking", "detail"};
  for (const auto& c : r.checks)
    hyp.add({c.check.id, cell(c.check.pass), cell(c.check.margin), cell(c.blocking), csv_cell(c.check.detail)});
  hyp.write(dir / "hypotheses.csv");
  out.files.push_back(dir / "hypotheses.csv");

  for (const auto& [name, table] : r.tables) {
    table.write(dir / name);
    out.files.push_back(dir / name);
  }
  out.report = render_report(p, cfg, r, out.status);
  write_text(dir / "report.txt", out.report);
  out.files.push_back(dir / "report.txt");
  return out;
}

}  // namespace degcarl
