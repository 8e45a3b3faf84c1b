#include "degcarl/fields.hpp"

#include <cmath>
#include <numbers>

namespace degcarl {

std::vector<double> smooth_random_field(const Grid& grid, BoundaryKind bc, Rng& rng, int modes) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> c(modes + 1, 0.0);
  for (int k = 0; k <= modes; ++k) c[k] = nd(rng) / std::max(k, 1);
  std::vector<double> u(grid.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = grid.nodes[i];
    double s = bc == BoundaryKind::Neumann ? c[0] : 0.0;
    for (int k = 1; k <= modes; ++k) {
      const double arg = k * std::numbers::pi * x;
      s += c[k] * (bc == BoundaryKind::Dirichlet ? std::sin(arg) : std::cos(arg));
    }
    u[i] = s;
  }
  return u;
}

std::vector<double> nodal_random_field(const Grid& grid, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> u(grid.size());
  for (double& v : u) v = nd(rng);
  return u;
}

std::vector<double> sine_mode(const Grid& grid, int k) {
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(k * std::numbers::pi * grid.nodes[i]);
  return u;
}

void zero_straddle(std::vector<double>& u, const Grid& grid) {
  for (std::size_t i : grid.straddle()) u[i] = 0.0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  // splitmix64 finaliser over the pair
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace degcarl
