#include "degcarl/problem.hpp"

#include <cmath>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

std::string to_string(BoundaryKind bc) { return bc == BoundaryKind::Dirichlet ? "dirichlet" : "neumann"; }

std::string to_string(Scheme s) { return s == Scheme::ImplicitEuler ? "implicit-euler" : "crank-nicolson"; }

std::string to_string(DirichletClosure c) {
  return c == DirichletClosure::OddReflection ? "odd-reflection" : "zero-ghost";
}

std::vector<std::string> validate(const ProblemSpec& spec) {
  std::vector<std::string> warnings;
  if (spec.a.degenerate() && spec.b.degenerate() && std::abs(*spec.a.x0() - *spec.b.x0()) > 1e-12)
    fail(ErrorKind::UnsupportedConfiguration, "a and b must vanish at the same point");
  if (!(spec.T > 0.0) || !std::isfinite(spec.T)) fail(ErrorKind::Validation, "problem.T must be positive");
  if (spec.N < 16) fail(ErrorKind::Validation, "problem.N must be >= 16");
  if (spec.M < 1) fail(ErrorKind::Validation, "problem.M must be >= 1");
  if (!std::isfinite(spec.lambda)) fail(ErrorKind::Validation, "problem.lambda must be finite");
  const Interval w = spec.omega;
  if (!(0.0 <= w.lo && w.lo < w.hi && w.hi <= 1.0))
    fail(ErrorKind::Validation, "problem.omega must satisfy 0 <= lo < hi <= 1, got (" + fmt_g(w.lo) + "," + fmt_g(w.hi) + ")");
  if (spec.M < 2 * spec.N) warnings.push_back("M < 2N: time resolution below the parabolic guideline");
  return warnings;
}

}  // namespace degcarl
