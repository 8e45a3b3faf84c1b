#include "degcarl/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

SymTridiag SymTridiag::diagonal(std::vector<double> d) {
  SymTridiag m;
  m.off.assign(d.empty() ? 0 : d.size() - 1, 0.0);
  m.diag = std::move(d);
  return m;
}

std::vector<double> SymTridiag::apply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) fail(ErrorKind::Shape, "matrix/vector size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

double SymTridiag::bilinear(std::span<const double> x, std::span<const double> y) const {
  const auto My = apply(y);
  double s = 0.0;
  for (std::size_t i = 0; i < My.size(); ++i) s += x[i] * My[i];
  return s;
}

double SymTridiag::quad(std::span<const double> x) const { return bilinear(x, x); }

SymTridiag& SymTridiag::add_scaled(double alpha, const SymTridiag& other) {
  if (other.size() != size()) fail(ErrorKind::Shape, "matrix size mismatch");
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] += alpha * other.diag[i];
  for (std::size_t i = 0; i < off.size(); ++i) off[i] += alpha * other.off[i];
  return *this;
}

SymTridiag SymTridiag::scaled(double alpha) const {
  SymTridiag m = *this;
  for (double& v : m.diag) v *= alpha;
  for (double& v : m.off) v *= alpha;
  return m;
}

SymTridiag SymTridiag::without(std::span<const std::size_t> drop) const {
  std::vector<bool> gone(size(), false);
  for (std::size_t i : drop) gone.at(i) = true;
  SymTridiag m;
  std::size_t prev = size();
  for (std::size_t i = 0; i < size(); ++i) {
    if (gone[i]) continue;
    if (!m.diag.empty()) m.off.push_back(prev + 1 == i ? off[prev] : 0.0);
    m.diag.push_back(diag[i]);
    prev = i;
  }
  return m;
}

double SymTridiag::max_abs() const {
  double m = 0.0;
  for (double v : diag) m = std::max(m, std::abs(v));
  for (double v : off) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> Tridiag::apply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) fail(ErrorKind::Shape, "matrix/vector size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += lower[i - 1] * x[i - 1];
    if (i + 1 < n) s += upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

TridiagSolver::TridiagSolver(const SymTridiag& m, bool clamp) {
  const std::size_t n = m.size();
  d_.resize(n);
  l_.resize(n > 0 ? n - 1 : 0);
  const double tiny = std::max(m.max_abs(), 1e-300) * 1e-15;
  for (std::size_t i = 0; i < n; ++i) {
    double piv = m.diag[i];
    if (i > 0) piv -= l_[i - 1] * m.off[i - 1];
    if (!(std::abs(piv) > tiny)) {
      if (!clamp || !std::isfinite(piv))
        fail(ErrorKind::NumericalFailure, "singular tridiagonal pivot at row " + std::to_string(i));
      piv = piv < 0 ? -tiny : tiny;
    }
    d_[i] = piv;
    if (i + 1 < n) l_[i] = m.off[i] / piv;
  }
}

void TridiagSolver::solve_in_place(std::span<double> x) const {
  const std::size_t n = d_.size();
  if (x.size() != n) fail(ErrorKind::Shape, "solver/vector size mismatch");
  for (std::size_t i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= d_[i];
  for (std::size_t i = n; i-- > 1;) x[i - 1] -= l_[i - 1] * x[i];
}

std::vector<double> TridiagSolver::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

std::size_t count_negative(const SymTridiag& A, const SymTridiag& B, double mu, double tol) {
  const std::size_t n = A.size();
  std::size_t neg = 0;
  double prev_piv = 1.0;
  double prev_off = 0.0;
  const double tiny = std::numeric_limits<double>::min() * 16;
  for (std::size_t i = 0; i < n; ++i) {
    double piv = A.diag[i] - mu * B.diag[i] + tol;
    if (i > 0) piv -= prev_off * prev_off / prev_piv;
    if (piv == 0.0) piv = -tiny;  // treat an exact zero as marginally negative
    if (piv < 0.0) ++neg;
    prev_piv = piv;
    if (i + 1 < n) prev_off = A.off[i] - mu * B.off[i];
  }
  return neg;
}

std::size_t count_eigenvalues_below(const SymTridiag& A, const SymTridiag& B, double mu) {
  return count_negative(A, B, mu, 0.0);
}

GeneralizedEigen min_generalized_eigenvalue(const SymTridiag& A, const SymTridiag& B, int max_iter) {
  const std::size_t n = A.size();
  if (n == 0 || B.size() != n) fail(ErrorKind::Shape, "eigen pencil is empty or mismatched");
  const double a_scale = std::max(A.max_abs(), 1e-300);
  const double b_scale = std::max(B.max_abs(), 1e-300);
  const double s = a_scale / b_scale;
  auto tol_at = [&](double mu) { return 1e-13 * (a_scale + std::abs(mu) * b_scale); };
  auto feasible = [&](double mu) { return count_negative(A, B, mu, tol_at(mu)) == 0; };

  // Bracket: lo feasible, hi infeasible.
  double lo = 0.0;
  bool found = feasible(lo);
  for (int k = 0; !found && k < 80; ++k) {
    lo = -s * std::ldexp(1.0, k);
    found = feasible(lo);
  }
  if (!found) fail(ErrorKind::NumericalFailure, "no feasible lower bracket for the pencil");
  double step = s;
  double hi = lo + step;
  int guard = 0;
  while (feasible(hi)) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
    if (++guard > 200) fail(ErrorKind::NumericalFailure, "pencil unbounded above (right form never dominates)");
  }
  int iters = 0;
  while (hi - lo > 1e-13 * std::max({std::abs(lo), std::abs(hi), 1e-300})) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (feasible(mid) ? lo : hi) = mid;
    if (++iters > 4 * max_iter) fail(ErrorKind::NumericalFailure, "bisection did not converge");
  }

  // Inverse iteration at a shift just below the bracket.
  const double width = std::max(hi - lo, 1e-14 * std::max(std::abs(lo), s * 1e-6));
  const double sigma = lo - width;
  SymTridiag shifted = A;
  shifted.add_scaled(-sigma, B);
  TridiagSolver solver(shifted, true);

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * std::sin(1.0 + 3.7 * static_cast<double>(i));
  double mu_prev = std::numeric_limits<double>::quiet_NaN();
  double mu = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    ++iters;
    solver.solve_in_place(x);
    const double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(ErrorKind::NumericalFailure, "inverse iteration lost the iterate");
    for (double& v : x) v /= nrm;
    const double xb = B.quad(x);
    const double xa = A.quad(x);
    if (xb != 0.0) mu = xa / xb;
    const double abs_scale = std::max(std::abs(mu), 1e-12 * s);
    if (it > 0 && std::abs(mu - mu_prev) < 1e-10 * abs_scale) {
      converged = true;
      break;
    }
    mu_prev = mu;
  }
  if (!converged) fail(ErrorKind::NumericalFailure, "inverse iteration hit the iteration cap; last mu = " + fmt_g(mu));
  // Rayleigh value outside the bracket means the vector is contaminated; trust the bracket.
  const double slack = 1e-9 * std::max(std::abs(hi), s * 1e-9);
  if (mu < lo - slack || mu > hi + slack) mu = 0.5 * (lo + hi);

  const double xb = B.quad(x);
  if (xb > 0.0) {
    const double c = 1.0 / std::sqrt(xb);
    for (double& v : x) v *= c;
  }
  // Fix the sign for reproducible output.
  const auto big = std::max_element(x.begin(), x.end(), [](double p, double q) { return std::abs(p) < std::abs(q); });
  if (*big < 0) for (double& v : x) v = -v;
  return {mu, std::move(x), iters, lo, hi};
}

}  // namespace degcarl
