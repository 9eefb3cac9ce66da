#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fddgauss/assignment.hpp"
#include "fddgauss/errors.hpp"
#include "fddgauss/ot_metrics.hpp"
#include "fddgauss/rng.hpp"

using namespace fddgauss;

namespace {

PointCloud gaussian_cloud(std::size_t n, std::size_t dim, std::uint64_t seed, double shift = 0.0, double scale = 1.0) {
  RngStream rng(StreamId{seed});
  std::vector<double> data(n * dim);
  for (double& v : data) v = shift + scale * rng.normal();
  return PointCloud(n, dim, std::move(data));
}

PointCloud permuted(const PointCloud& X, std::uint64_t seed) {
  std::vector<std::size_t> order(X.count);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(StreamId{seed});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next_u64() % i]);
  std::vector<double> data;
  for (std::size_t i : order) {
    const auto p = X.point(i);
    data.insert(data.end(), p.begin(), p.end());
  }
  return PointCloud(X.count, X.dim, std::move(data));
}

std::vector<double> coords_of(const PointCloud& X) { return X.data; }

// Brute force over all permutations.
double brute_force_w1(const PointCloud& X, const PointCloud& Y) {
  std::vector<std::size_t> perm(X.count);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < X.count; ++i) {
      double sq = 0.0;
      for (std::size_t k = 0; k < X.dim; ++k) sq += std::pow(X.point(i)[k] - Y.point(perm[i])[k], 2);
      total += std::sqrt(sq);
    }
    best = std::min(best, total / X.count);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_SUITE("ot_metrics") {
  TEST_CASE("exact 1-D examples") {
    CHECK(w1_exact_1d({1.0, 3.0, 2.0}, {2.0, 1.0, 3.0}) == 0.0);
    CHECK(w1_exact_1d({0.0}, {1.0}) == 1.0);
    CHECK(w1_exact_1d({0.0, 4.0}, {1.0, 1.0}) == 2.0);
    CHECK_THROWS_AS(w1_exact_1d({0.0}, {1.0, 2.0}), InvalidArgument);
  }

  TEST_CASE("matching equals the 1-D oracle on shifted normals") {
    const PointCloud X = gaussian_cloud(100, 1, 1);
    const PointCloud Y = gaussian_cloud(100, 1, 2, 2.0);
    CHECK(std::abs(w1_matching(X, Y) - w1_exact_1d(coords_of(X), coords_of(Y))) <= 1e-12);
  }

  TEST_CASE("matching equals brute force on small problems") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PointCloud X = gaussian_cloud(7, 3, 100 + seed);
      const PointCloud Y = gaussian_cloud(7, 3, 200 + seed, 0.3);
      CHECK(w1_matching(X, Y) == doctest::Approx(brute_force_w1(X, Y)).epsilon(1e-13));
    }
  }

  TEST_CASE("assignment solver returns a permutation") {
    const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
    const auto match = solve_assignment(cost, 3);
    CHECK(match == std::vector<std::size_t>{1, 0, 2});
    const std::vector<double> ties(16, 1.0);
    CHECK(solve_assignment(ties, 4) == std::vector<std::size_t>{0, 1, 2, 3});
  }

  TEST_CASE("identical and permuted clouds are at distance zero") {
    const PointCloud X = gaussian_cloud(300, 6, 3);
    CHECK(w1_matching(X, X) == 0.0);
    CHECK(w1_matching(X, permuted(X, 9)) == 0.0);
    CHECK(w1_matching(permuted(X, 9), X) == 0.0);
  }

  TEST_CASE("zero only for equal multisets") {
    const PointCloud X = gaussian_cloud(50, 2, 4);
    PointCloud Y = permuted(X, 10);
    Y.data[17] = std::nextafter(Y.data[17], 10.0);
    CHECK(w1_matching(X, Y) > 0.0);
  }

  TEST_CASE("symmetry is exact") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PointCloud X = gaussian_cloud(200, 4, 10 + seed);
      const PointCloud Y = gaussian_cloud(200, 4, 20 + seed, 0.1, 1.2);
      CHECK(w1_matching(X, Y) == w1_matching(Y, X));
    }
  }

  TEST_CASE("triangle inequality") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PointCloud X = gaussian_cloud(150, 3, 30 + seed);
      const PointCloud Y = gaussian_cloud(150, 3, 40 + seed, 0.5);
      const PointCloud Z = gaussian_cloud(150, 3, 50 + seed, -0.2, 2.0);
      CHECK(w1_matching(X, Z) <= w1_matching(X, Y) + w1_matching(Y, Z) + 1e-9);
    }
  }

  TEST_CASE("translation behaviour") {
    const PointCloud X = gaussian_cloud(120, 3, 61);
    const PointCloud Y = gaussian_cloud(120, 3, 62);
    const std::vector<double> v{0.3, -1.2, 0.5};
    auto shift = [&](PointCloud P) {
      for (std::size_t i = 0; i < P.count; ++i) {
        for (std::size_t k = 0; k < 3; ++k) P.data[i * 3 + k] += v[k];
      }
      return P;
    };
    const double base = w1_matching(X, Y);
    CHECK(std::abs(w1_matching(shift(X), shift(Y)) - base) <= 1e-12);
    const double norm = std::sqrt(0.09 + 1.44 + 0.25);
    CHECK(std::abs(w1_matching(shift(X), Y) - base) <= norm + 1e-12);
  }

  TEST_CASE("capacity and shape errors") {
    const PointCloud X = gaussian_cloud(20, 2, 1);
    const PointCloud Y = gaussian_cloud(20, 2, 2);
    CHECK_THROWS_AS(w1_matching(X, Y, 10), CapacityError);
    CHECK_THROWS_AS(w1_matching(X, gaussian_cloud(21, 2, 2)), InvalidArgument);
    CHECK_THROWS_AS(w1_matching(X, gaussian_cloud(20, 3, 2)), InvalidArgument);
    CHECK_THROWS_AS(PointCloud(3, 2, std::vector<double>(5)), InvalidArgument);
  }

  TEST_CASE("matching is thread-count independent") {
    const PointCloud X = gaussian_cloud(400, 5, 71);
    const PointCloud Y = gaussian_cloud(400, 5, 72);
    CHECK(w1_matching(X, Y, kDefaultMatchingCap, 1) == w1_matching(X, Y, kDefaultMatchingCap, 3));
  }

  TEST_CASE("from_fdd flattens replicates row-major") {
    FddSample s(2, 2, 3, 1, Provenance::finite_network);
    std::iota(s.data.begin(), s.data.end(), 0.0);
    const PointCloud P = PointCloud::from_fdd(s);
    CHECK(P.count == 2);
    CHECK(P.dim == 6);
    CHECK(P.coords == 2);
    CHECK(P.points == 3);
    CHECK(P.point(1)[0] == 6.0);
  }

  TEST_CASE("sinkhorn on identical clouds is below eps log N") {
    const PointCloud X = gaussian_cloud(100, 2, 81);
    SinkhornOptions opt;
    opt.eps = 0.05;
    const SinkhornResult r = w1_sinkhorn(X, X, opt);
    CHECK(r.cost >= 0.0);
    CHECK(r.cost <= opt.eps * std::log(100.0));
    CHECK(r.residual <= opt.tol);
  }

  TEST_CASE("sinkhorn approaches the matching value as eps shrinks") {
    const PointCloud X = gaussian_cloud(200, 2, 91);
    const PointCloud Y = gaussian_cloud(200, 2, 92, 0.7);
    const double exact = w1_matching(X, Y);
    double previous = INFINITY;
    for (double eps : {1.0, 0.1, 0.01}) {
      SinkhornOptions opt;
      opt.eps = eps;
      opt.max_iter = 200000;
      const double cost = w1_sinkhorn(X, Y, opt).cost;
      CAPTURE(eps);
      CHECK(cost >= exact - eps * std::log(200.0));
      CHECK(std::abs(cost - exact) <= std::abs(previous - exact));
      previous = cost;
    }
    CHECK(std::abs(previous - exact) <= 0.02 * exact);
  }

  TEST_CASE("sinkhorn scales with the clouds") {
    const PointCloud X = gaussian_cloud(150, 2, 93);
    const PointCloud Y = gaussian_cloud(150, 2, 94, 0.5);
    PointCloud X3 = X, Y3 = Y;
    for (double& v : X3.data) v *= 3.0;
    for (double& v : Y3.data) v *= 3.0;
    SinkhornOptions opt;
    opt.eps = 0.01;
    opt.max_iter = 200000;
    CHECK(w1_sinkhorn(X3, Y3, opt).cost == doctest::Approx(3.0 * w1_sinkhorn(X, Y, opt).cost).epsilon(0.01));
  }

  TEST_CASE("sinkhorn reports non-convergence") {
    const PointCloud X = gaussian_cloud(100, 2, 95);
    const PointCloud Y = gaussian_cloud(100, 2, 96, 1.0);
    SinkhornOptions opt;
    opt.eps = 0.001;
    opt.max_iter = 2;
    CHECK_THROWS_AS(w1_sinkhorn(X, Y, opt), ConvergenceError);
  }

  TEST_CASE("matching floor") {
    KernelMatrix zero;
    zero.entries = Eigen::MatrixXd::Zero(2, 2);
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    CHECK(matching_bias_baseline(zero, 1, 64, seeds) == 0.0);

    KernelMatrix K;
    K.layer = 2;
    K.entries = (Eigen::MatrixXd(2, 2) << 1.0, 0.3, 0.3, 0.8).finished();
    CHECK(matching_bias_baseline(K, 1, 1024, seeds, kDefaultMatchingCap, 1) <
          matching_bias_baseline(K, 1, 256, seeds, kDefaultMatchingCap, 1));
    CHECK(matching_bias_baseline(K, 4, 256, seeds, kDefaultMatchingCap, 1) >
          matching_bias_baseline(K, 1, 256, seeds, kDefaultMatchingCap, 1));
    CHECK_THROWS_AS(matching_bias_baseline(K, 1, 256, {}), InvalidArgument);
  }
}
