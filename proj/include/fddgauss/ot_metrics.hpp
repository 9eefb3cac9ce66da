#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fddgauss/forward_sim.hpp"
#include "fddgauss/nngp_kernel.hpp"

namespace fddgauss {

// N points in R^D stored row-major. FDD matrices are flattened row-major, so
// D = n * s and the ground cost is the Frobenius norm of the difference.
struct PointCloud {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::size_t coords = 0;  // n
  std::size_t points = 0;  // s
  std::vector<double> data;

  PointCloud() = default;
  PointCloud(std::size_t count, std::size_t dim, std::vector<double> data);
  static PointCloud from_fdd(const FddSample& sample);

  std::span<const double> point(std::size_t i) const { return {data.data() + i * dim, dim}; }
  void check() const;
};

inline constexpr std::size_t kDefaultMatchingCap = 4096;

double w1_exact_1d(std::vector<double> xs, std::vector<double> ys);

// Exact equal-N empirical W1: min over permutations of the mean Euclidean cost.
double w1_matching(const PointCloud& X, const PointCloud& Y, std::size_t cap = kDefaultMatchingCap,
                   unsigned threads = 0);

struct SinkhornOptions {
  double eps = 0.05;
  std::size_t max_iter = 100000;
  double tol = 1e-6;  // L1 violation of the row marginal
};

struct SinkhornResult {
  double cost = 0.0;  // <P, C> for the final plan
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Log-domain entropic OT with uniform marginals and Euclidean ground cost.
// Throws ConvergenceError (carrying the residual) after max_iter.
SinkhornResult w1_sinkhorn(const PointCloud& X, const PointCloud& Y, const SinkhornOptions& options = {},
                           std::size_t cap = kDefaultMatchingCap, unsigned threads = 0);

// Mean over seeds of w1_matching between two independent N(0, K)-row samples
// (streams floor_a and floor_b).
double matching_bias_baseline(const KernelMatrix& K, std::size_t n, std::size_t replicates,
                              std::span<const std::uint64_t> seeds, std::size_t cap = kDefaultMatchingCap,
                              unsigned threads = 0);

}  // namespace fddgauss
