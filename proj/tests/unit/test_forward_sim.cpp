#include <doctest.h>

#include <cmath>
#include <vector>

#include "fddgauss/errors.hpp"
#include "fddgauss/forward_sim.hpp"
#include "test_support.hpp"

using namespace fddgauss;

namespace {

InputSet three_points() {
  return InputSet::from_rows({{1.0, -0.5, 2.0}, {0.3, 0.7, -1.1}, {-1.2, 0.4, 0.0}});
}

}  // namespace

TEST_SUITE("forward_sim") {
  TEST_CASE("activation constants") {
    CHECK(ActivationSpec::relu().lip() == 1.0);
    CHECK(ActivationSpec::tanh().lip() == 1.0);
    CHECK(ActivationSpec::identity().lip() == 1.0);
    CHECK(ActivationSpec::leaky_relu(0.1).lip() == 1.0);
    CHECK(ActivationSpec::leaky_relu(-3.0).lip() == 3.0);
    for (const auto& sigma : {ActivationSpec::relu(), ActivationSpec::tanh(), ActivationSpec::identity(),
                              ActivationSpec::leaky_relu(0.2)}) {
      CHECK(sigma.sigma0() == 0.0);
      CHECK(sigma(0.0) == 0.0);
    }
    CHECK(ActivationSpec::leaky_relu(0.2)(-2.0) == doctest::Approx(-0.4));
    CHECK_THROWS_AS(activation_kind_from_string("gelu"), InvalidArgument);
  }

  TEST_CASE("depth one is W^0 x") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 5}, ActivationSpec::relu(), WeightSpec::uniform(1.0));
    const auto weights = sample_weights(net, 8, 0);
    const Eigen::MatrixXd out = forward(net, weights, chi);
    const Eigen::MatrixXd direct = weights[0] * chi.matrix();
    CHECK((out.array() == direct.array()).all());
  }

  TEST_CASE("relu maps the zero input to zero at every depth") {
    const InputSet zero = InputSet::from_rows({{0.0, 0.0}});
    for (std::size_t L = 1; L <= 4; ++L) {
      std::vector<std::size_t> widths{2};
      for (std::size_t l = 0; l < L; ++l) widths.push_back(6);
      const auto net = NetworkConfig::uniform_family(widths, ActivationSpec::relu(), WeightSpec::gaussian(2.0));
      const FddSample sample = sample_fdd(net, zero, 5, 1, 1);
      for (double v : sample.data) CHECK(v == 0.0);
    }
  }

  TEST_CASE("identity network equals the matrix product") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 7, 4}, ActivationSpec::identity(), WeightSpec::gaussian(1.3));
    const auto weights = sample_weights(net, 21, 0);
    const Eigen::MatrixXd product = weights[1] * weights[0];
    const Eigen::MatrixXd expected = product * chi.matrix();
    const Eigen::MatrixXd out = forward(net, weights, chi);
    CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("one replicate equals forward on the replicate-0 weights") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 9, 8, 2}, ActivationSpec::tanh(), WeightSpec::rademacher(1.5));
    const FddSample sample = sample_fdd(net, chi, 1, 314, 1);
    const Eigen::MatrixXd direct = forward(net, sample_weights(net, 314, 0), chi);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t a = 0; a < 3; ++a) CHECK(sample.at(0, i, a) == direct(i, a));
    }
    CHECK(sample.layer == 3);
    CHECK(sample.provenance == Provenance::finite_network);
  }

  TEST_CASE("depth-one output variance is c_w |x|^2 / n0") {
    const InputSet chi = InputSet::from_rows({{1.0, 2.0, -2.0, 0.5}});
    const auto net = NetworkConfig::uniform_family({4, 3}, ActivationSpec::relu(), WeightSpec::gaussian(1.6));
    const std::size_t N = 4000;
    const FddSample sample = sample_fdd(net, chi, N, 5, 1);
    const double expected = 1.6 * (1.0 + 4.0 + 4.0 + 0.25) / 4.0;
    for (std::size_t i = 0; i < 3; ++i) {
      double sq = 0.0;
      for (std::size_t r = 0; r < N; ++r) sq += sample.at(r, i, 0) * sample.at(r, i, 0);
      // The output is exactly N(0, expected); its mean square has sd expected * sqrt(2/N).
      CHECK(std::abs(sq / N - expected) < 5.0 * expected * std::sqrt(2.0 / N));
    }
  }

  TEST_CASE("sampling is deterministic and thread-count independent") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 16, 16, 2}, ActivationSpec::relu(), WeightSpec::student_t(2.0, 7.0));
    const FddSample a = sample_fdd(net, chi, 37, 99, 1);
    const FddSample b = sample_fdd(net, chi, 37, 99, 1);
    const FddSample c = sample_fdd(net, chi, 37, 99, 4);
    const FddSample d = sample_fdd(net, chi, 37, 100, 1);
    CHECK(a.data == b.data);
    CHECK(a.data == c.data);
    CHECK(a.data != d.data);
  }

  TEST_CASE("truncate_coords") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 5, 3}, ActivationSpec::relu(), WeightSpec::gaussian(2.0));
    const FddSample sample = sample_fdd(net, chi, 10, 4, 1);
    const FddSample same = truncate_coords(sample, 3);
    CHECK(same.data == sample.data);
    const FddSample one = truncate_coords(sample, 1);
    CHECK(one.replicates == 10);
    CHECK(one.coords == 1);
    CHECK(one.points == 3);
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t a = 0; a < 3; ++a) CHECK(one.at(r, 0, a) == sample.at(r, 0, a));
    }
    CHECK_THROWS_AS(truncate_coords(sample, 0), InvalidArgument);
    CHECK_THROWS_AS(truncate_coords(sample, 4), InvalidArgument);
  }

  TEST_CASE("shape errors") {
    const auto net = NetworkConfig::uniform_family({3, 5, 3}, ActivationSpec::relu(), WeightSpec::gaussian(2.0));
    const InputSet wrong = InputSet::from_rows({{1.0, 2.0}});
    CHECK_THROWS_AS(sample_fdd(net, wrong, 2, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_fdd(net, three_points(), 0, 1, 1), InvalidArgument);
    auto weights = sample_weights(net, 1, 0);
    weights[1] = RowMatrix::Zero(2, 5);
    CHECK_THROWS_AS(forward(net, weights, three_points()), InvalidArgument);
    NetworkConfig bad = net;
    bad.weights.pop_back();
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_THROWS_AS(InputSet::from_rows({{1.0, 2.0}, {1.0}}), InvalidArgument);
  }

  TEST_CASE("coordinates are exchangeable (KS at the 1% level)") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 32, 4}, ActivationSpec::relu(), WeightSpec::rademacher(2.0));
    const std::size_t N = 4000;
    const FddSample sample = sample_fdd(net, chi, N, 17, 1);
    for (std::size_t a = 0; a < 3; ++a) {
      std::vector<double> first, second;
      for (std::size_t r = 0; r < N; ++r) {
        first.push_back(sample.at(r, 0, a));
        second.push_back(sample.at(r, 1, a));
      }
      CHECK(test::ks_statistic(first, second) < 1.628 * std::sqrt(2.0 / N));
    }
  }

  TEST_CASE("distinct coordinates are uncorrelated") {
    const InputSet chi = three_points();
    const auto net = NetworkConfig::uniform_family({3, 32, 4}, ActivationSpec::relu(), WeightSpec::uniform(2.0));
    const std::size_t N = 4000;
    const FddSample sample = sample_fdd(net, chi, N, 23, 1);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        std::vector<double> prod;
        for (std::size_t r = 0; r < N; ++r) prod.push_back(sample.at(r, 0, a) * sample.at(r, 1, b));
        const auto est = test::mean_stderr(prod);
        CHECK(std::abs(est.mean) < 5.0 * est.stderr_);
      }
    }
  }

  TEST_CASE("doubling the last-layer c_w doubles the output variance") {
    const InputSet chi = InputSet::from_rows({{0.8, -1.3, 0.4}});
    auto net = NetworkConfig::uniform_family({3, 24, 3}, ActivationSpec::tanh(), WeightSpec::uniform(1.0));
    auto doubled = net;
    doubled.weights.back().c_w = 2.0;
    const std::size_t N = 20000;
    const FddSample base = sample_fdd(net, chi, N, 1, 1);
    const FddSample twice = sample_fdd(doubled, chi, N, 2, 1);
    auto squares = [&](const FddSample& s) {
      std::vector<double> out;
      for (std::size_t r = 0; r < N; ++r) out.push_back(s.at(r, 0, 0) * s.at(r, 0, 0));
      return test::mean_stderr(out);
    };
    const auto v1 = squares(base);
    const auto v2 = squares(twice);
    const double sd = std::sqrt(4.0 * v1.stderr_ * v1.stderr_ + v2.stderr_ * v2.stderr_);
    CHECK(std::abs(v2.mean - 2.0 * v1.mean) < 5.0 * sd);
    CHECK(v2.mean / v1.mean == doctest::Approx(2.0).epsilon(0.1));
  }
}
