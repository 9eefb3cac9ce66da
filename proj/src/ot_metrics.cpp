#include "fddgauss/ot_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fddgauss/assignment.hpp"
#include "fddgauss/errors.hpp"
#include "fddgauss/parallel.hpp"

namespace fddgauss {

namespace {

constexpr std::size_t kCostBlockRows = 64;

void check_pair(const PointCloud& X, const PointCloud& Y, std::size_t cap, const char* who) {
  X.check();
  Y.check();
  if (X.count != Y.count) {
    throw InvalidArgument(std::string(who) + ": sample sizes differ (" + std::to_string(X.count) + " vs " +
                          std::to_string(Y.count) + ")");
  }
  if (X.dim != Y.dim) {
    throw InvalidArgument(std::string(who) + ": dimensions differ (" + std::to_string(X.dim) + " vs " +
                          std::to_string(Y.dim) + ")");
  }
  if (X.count == 0) throw InvalidArgument(std::string(who) + ": empty point clouds");
  if (X.count > cap) throw CapacityError(X.count, cap);
}

std::vector<double> cost_matrix(const PointCloud& X, const PointCloud& Y, unsigned threads) {
  const std::size_t n = X.count;
  const std::size_t dim = X.dim;
  std::vector<double> cost(n * n);
  const std::size_t blocks = (n + kCostBlockRows - 1) / kCostBlockRows;
  parallel_for(blocks, threads, [&](std::size_t block) {
    const std::size_t begin = block * kCostBlockRows;
    const std::size_t end = std::min(n, begin + kCostBlockRows);
    for (std::size_t i = begin; i < end; ++i) {
      const double* x = X.data.data() + i * dim;
      double* row = cost.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double* y = Y.data.data() + j * dim;
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double diff = x[k] - y[k];
          acc += diff * diff;
        }
        row[j] = std::sqrt(acc);
      }
    }
  });
  return cost;
}

double log_sum_exp(const double* values, std::size_t count) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) top = std::max(top, values[k]);
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) sum += std::exp(values[k] - top);
  return top + std::log(sum);
}

constexpr double kSinkhornStageTol = 1e-3;
constexpr std::size_t kSinkhornCheckEvery = 8;

}  // namespace

PointCloud::PointCloud(std::size_t n_points, std::size_t dimension, std::vector<double> values)
    : count(n_points), dim(dimension), coords(1), points(dimension), data(std::move(values)) {
  check();
}

PointCloud PointCloud::from_fdd(const FddSample& sample) {
  sample.check_shape();
  PointCloud cloud;
  cloud.count = sample.replicates;
  cloud.dim = sample.replicate_size();
  cloud.coords = sample.coords;
  cloud.points = sample.points;
  cloud.data = sample.data;
  return cloud;
}

void PointCloud::check() const {
  if (data.size() != count * dim) throw InvalidArgument("PointCloud: data size does not match count x dim");
  if (coords * points != dim) throw InvalidArgument("PointCloud: n * s does not match dim");
  for (double v : data) {
    if (!std::isfinite(v)) throw InvalidArgument("PointCloud: non-finite entry");
  }
}

double w1_exact_1d(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("w1_exact_1d: lengths differ (" + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
  }
  if (xs.empty()) throw InvalidArgument("w1_exact_1d: empty samples");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> gaps(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) gaps[i] = std::abs(xs[i] - ys[i]);
  std::sort(gaps.begin(), gaps.end());
  double sum = 0.0;
  for (double g : gaps) sum += g;
  return sum / static_cast<double>(xs.size());
}

double w1_matching(const PointCloud& X, const PointCloud& Y, std::size_t cap, unsigned threads) {
  check_pair(X, Y, cap, "w1_matching");
  // Solving in a canonical argument order makes the value exactly symmetric.
  const bool swap = std::lexicographical_compare(Y.data.begin(), Y.data.end(), X.data.begin(), X.data.end());
  const PointCloud& A = swap ? Y : X;
  const PointCloud& B = swap ? X : Y;
  const std::vector<double> cost = cost_matrix(A, B, threads);
  const std::vector<std::size_t> match = solve_assignment(cost, A.count);
  std::vector<double> matched(A.count);
  for (std::size_t i = 0; i < A.count; ++i) matched[i] = cost[i * A.count + match[i]];
  std::sort(matched.begin(), matched.end());
  double sum = 0.0;
  for (double c : matched) sum += c;
  return sum / static_cast<double>(A.count);
}

SinkhornResult w1_sinkhorn(const PointCloud& X, const PointCloud& Y, const SinkhornOptions& options,
                           std::size_t cap, unsigned threads) {
  check_pair(X, Y, cap, "w1_sinkhorn");
  if (!(options.eps > 0.0)) throw InvalidArgument("w1_sinkhorn: eps must be positive");
  if (options.max_iter == 0) throw InvalidArgument("w1_sinkhorn: max_iter must be >= 1");
  const std::size_t n = X.count;
  const std::vector<double> cost = cost_matrix(X, Y, threads);
  const double log_w = -std::log(static_cast<double>(n));
  std::vector<double> f(n, 0.0), g(n, 0.0), scratch(n);

  auto sweep = [&](double eps) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) scratch[j] = log_w + (g[j] - cost[i * n + j]) / eps;
      f[i] = -eps * log_sum_exp(scratch.data(), n);
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) scratch[i] = log_w + (f[i] - cost[i * n + j]) / eps;
      g[j] = -eps * log_sum_exp(scratch.data(), n);
    }
  };
  auto row_residual = [&](double eps) {
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) scratch[j] = (f[i] + g[j] - cost[i * n + j]) / eps;
      residual += std::abs(std::exp(2.0 * log_w + log_sum_exp(scratch.data(), n)) - std::exp(log_w));
    }
    return residual;
  };

  // Epsilon scaling: halve eps from the largest cost, warm-starting the
  // potentials, then iterate at the target eps until the tolerance is met.
  std::vector<double> schedule;
  const double max_cost = *std::max_element(cost.begin(), cost.end());
  for (double e = max_cost; e > 2.0 * options.eps; e *= 0.5) schedule.push_back(e);
  schedule.push_back(options.eps);

  SinkhornResult result;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const bool last = stage + 1 == schedule.size();
    const double stage_tol = last ? options.tol : std::max(options.tol, kSinkhornStageTol);
    result.residual = std::numeric_limits<double>::infinity();
    do {
      if (result.iterations == options.max_iter) break;
      sweep(schedule[stage]);
      ++result.iterations;
      if (result.iterations % kSinkhornCheckEvery != 0 && result.iterations != options.max_iter) continue;
      result.residual = row_residual(schedule[stage]);
    } while (result.residual > stage_tol);
    if (result.iterations == options.max_iter) {
      result.residual = row_residual(options.eps);
      break;
    }
  }
  if (result.residual > options.tol) {
    throw ConvergenceError("w1_sinkhorn: no convergence after " + std::to_string(options.max_iter) + " iterations",
                           result.residual);
  }
  const double eps = options.eps;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      total += std::exp(2.0 * log_w + (f[i] + g[j] - cost[i * n + j]) / eps) * cost[i * n + j];
    }
  }
  result.cost = total;
  return result;
}

double matching_bias_baseline(const KernelMatrix& K, std::size_t n, std::size_t replicates,
                              std::span<const std::uint64_t> seeds, std::size_t cap, unsigned threads) {
  if (seeds.empty()) throw InvalidArgument("matching_bias_baseline: need at least one seed");
  if (replicates > cap) throw CapacityError(replicates, cap);
  double sum = 0.0;
  for (std::uint64_t seed : seeds) {
    const FddSample a = sample_gaussian_fdd(K, n, replicates, seed, StreamPurpose::floor_a, threads);
    const FddSample b = sample_gaussian_fdd(K, n, replicates, seed, StreamPurpose::floor_b, threads);
    sum += w1_matching(PointCloud::from_fdd(a), PointCloud::from_fdd(b), cap, threads);
  }
  return sum / static_cast<double>(seeds.size());
}

}  // namespace fddgauss
