#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "degcarl/grid.hpp"
#include "degcarl/problem.hpp"

namespace degcarl {

using Rng = std::mt19937_64;

// Grid-independent smooth random field: Σ c_k sin(kπx) (Dirichlet) or
// c_0 + Σ c_k cos(kπx) (Neumann) with c_k ~ N(0,1)/k. The same seed gives the
// same continuum function at every resolution.
std::vector<double> smooth_random_field(const Grid& grid, BoundaryKind bc, Rng& rng, int modes = 8);

// Independent N(0,1) nodal values.
std::vector<double> nodal_random_field(const Grid& grid, Rng& rng);

std::vector<double> sine_mode(const Grid& grid, int k);

// Sets the two nodes straddling x0 to zero.
void zero_straddle(std::vector<double>& u, const Grid& grid);

// Child seed for row/case k of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

}  // namespace degcarl
