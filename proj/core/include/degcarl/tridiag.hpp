#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace degcarl {

// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  SymTridiag() = default;
  explicit SymTridiag(std::size_t n) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}
  static SymTridiag diagonal(std::vector<double> d);

  std::size_t size() const noexcept { return diag.size(); }
  std::vector<double> apply(std::span<const double> x) const;
  double quad(std::span<const double> x) const;          // x^T M x
  double bilinear(std::span<const double> x, std::span<const double> y) const;
  SymTridiag& add_scaled(double alpha, const SymTridiag& other);  // *this += alpha * other
  SymTridiag scaled(double alpha) const;
  // Drops the listed rows/columns (sorted, unique); couplings across a gap are removed.
  SymTridiag without(std::span<const std::size_t> drop) const;
  double max_abs() const;
};

// General tridiagonal matrix, used for the non-symmetric operator action.
struct Tridiag {
  std::vector<double> lower;  // lower[i] couples row i+1 to column i
  std::vector<double> diag;
  std::vector<double> upper;  // upper[i] couples row i to column i+1

  std::size_t size() const noexcept { return diag.size(); }
  std::vector<double> apply(std::span<const double> x) const;
};

/// LDL^T factorization of a symmetric tridiagonal matrix without pivoting.
class TridiagSolver {
 public:
  TridiagSolver() = default;
  // With `clamp` set, tiny pivots are nudged instead of raising; inverse iteration relies on this.
  explicit TridiagSolver(const SymTridiag& m, bool clamp = false);
  void solve_in_place(std::span<double> rhs) const;
  std::vector<double> solve(std::span<const double> rhs) const;
  std::size_t size() const noexcept { return d_.size(); }

 private:
  std::vector<double> d_;  // pivots
  std::vector<double> l_;  // unit lower multipliers
};

/// Number of negative eigenvalues of (A - mu B) + tol I, by Sylvester's law of inertia.
std::size_t count_negative(const SymTridiag& A, const SymTridiag& B, double mu, double tol);

/// Number of generalized eigenvalues of (A, B) below mu, for positive definite B.
std::size_t count_eigenvalues_below(const SymTridiag& A, const SymTridiag& B, double mu);

struct GeneralizedEigen {
  double mu = 0.0;
  std::vector<double> vector;  // B-normalized when x^T B x > 0
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Largest mu with A - mu B positive semidefinite. For positive definite B this
/// is the smallest generalized eigenvalue of A x = mu B x; B may also be
/// indefinite provided mu = 0 or some negative mu is feasible.
/// Bisection on the inertia count brackets mu, then shifted inverse iteration
/// with Rayleigh updates converges to 1e-10 relative.
GeneralizedEigen min_generalized_eigenvalue(const SymTridiag& A, const SymTridiag& B, int max_iter = 500);

}  // namespace degcarl
