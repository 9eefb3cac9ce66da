#include <doctest.h>

#include <cmath>
#include <vector>

#include "fddgauss/errors.hpp"
#include "fddgauss/weight_models.hpp"
#include "test_support.hpp"

using namespace fddgauss;

namespace {

std::vector<WeightSpec> all_families() {
  return {WeightSpec::gaussian(1.7), WeightSpec::uniform(0.8), WeightSpec::rademacher(2.0),
          WeightSpec::student_t(1.3, 9.0)};
}

}  // namespace

TEST_SUITE("weight_models") {
  TEST_CASE("rademacher entries are +-sqrt(c_w/n)") {
    const RowMatrix w = sample_matrix(WeightSpec::rademacher(1.0), 40, 30, 4, 11);
    int positive = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      REQUIRE(std::abs(w.data()[i]) == 0.5);
      positive += w.data()[i] > 0;
    }
    CHECK(positive > 500);
    CHECK(positive < 700);
  }

  TEST_CASE("gaussian sample variance with c_w=2, fan_in=8") {
    const RowMatrix w = sample_matrix(WeightSpec::gaussian(2.0), 1000, 1000, 8, 3);
    const double n = static_cast<double>(w.size());
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / (n - 1.0);
    // sd of the sample variance of a normal sample: sigma^2 sqrt(2/(n-1)).
    CHECK(std::abs(var - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / (n - 1.0)));
  }

  TEST_CASE("uniform with c_w=1, fan_in=3 has support [-1, 1]") {
    const RowMatrix w = sample_matrix(WeightSpec::uniform(1.0), 500, 200, 3, 5);
    CHECK(w.maxCoeff() <= 1.0);
    CHECK(w.minCoeff() >= -1.0);
    CHECK(w.maxCoeff() > 0.999);
    CHECK(w.minCoeff() < -0.999);
  }

  TEST_CASE("moment constant examples") {
    CHECK(moment_constant(WeightSpec::gaussian(2.5), 2) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(moment_constant(WeightSpec::rademacher(2.0), 3) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-15));
    CHECK(moment_constant(WeightSpec::gaussian(1.0), 6) == 15.0);
    // Numerical integration oracle for E|Z|^6 and E|Z|^3.
    const double z6 = test::simpson([](double x) { return std::pow(x, 6) * test::std_normal_pdf(x); }, -14, 14, 20000);
    CHECK(z6 == doctest::Approx(15.0).epsilon(1e-10));
    const double z3 = 2.0 * test::simpson([](double x) { return x * x * x * test::std_normal_pdf(x); }, 0, 14, 20000);
    CHECK(moment_constant(WeightSpec::gaussian(1.0), 3) == doctest::Approx(z3).epsilon(1e-10));
  }

  TEST_CASE("every family has variance c_w/n") {
    for (const WeightSpec& spec : all_families()) {
      CAPTURE(spec.label());
      CHECK(moment_constant(spec, 2) == doctest::Approx(spec.c_w).epsilon(1e-14));
    }
  }

  TEST_CASE("moment constants match Monte Carlo within 5 sigma") {
    const std::size_t fan_in = 7;
    for (const WeightSpec& spec : all_families()) {
      const RowMatrix w = sample_matrix(spec, 1000, 1000, fan_in, 2718);
      const int max_k = spec.family == WeightFamily::student_t ? 4 : 6;
      for (int k = 1; k <= max_k; ++k) {
        CAPTURE(spec.label());
        CAPTURE(k);
        std::vector<double> draws(static_cast<std::size_t>(w.size()));
        const double scale = std::pow(static_cast<double>(fan_in), 0.5 * k);
        for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = std::pow(std::abs(w.data()[i]), k) * scale;
        const auto est = test::mean_stderr(draws);
        const double exact = moment_constant(spec, k);
        if (spec.family == WeightFamily::rademacher) {
          // Every draw equals the moment, so check them one by one.
          std::size_t off = 0;
          for (double d : draws) off += std::abs(d - exact) > 1e-12 * exact;
          CHECK(off == 0);
        } else {
          CHECK(std::abs(est.mean - exact) < 5.0 * est.stderr_);
        }
      }
    }
  }

  TEST_CASE("sample mean is zero within 5 sigma") {
    for (const WeightSpec& spec : all_families()) {
      CAPTURE(spec.label());
      const RowMatrix w = sample_matrix(spec, 1000, 1000, 1, 99);
      const double sd = std::sqrt(spec.c_w / static_cast<double>(w.size()));
      CHECK(std::abs(w.mean()) < 5.0 * sd);
    }
  }

  TEST_CASE("student_t moments of order >= nu are infinite") {
    CHECK_THROWS_AS(moment_constant(WeightSpec::student_t(1.0, 9.0), 9), MomentError);
    CHECK_THROWS_AS(moment_constant(WeightSpec::student_t(1.0, 5.0), 6), MomentError);
    CHECK(std::isfinite(moment_constant(WeightSpec::student_t(1.0, 9.0), 8)));
  }

  TEST_CASE("Hoelder consistency c_2^p <= c_2p") {
    for (const WeightSpec& spec : {WeightSpec::gaussian(1.0), WeightSpec::gaussian(2.0), WeightSpec::uniform(1.0),
                                   WeightSpec::uniform(3.0), WeightSpec::rademacher(1.0), WeightSpec::rademacher(2.0),
                                   WeightSpec::student_t(1.0, 40.0), WeightSpec::student_t(2.0, 40.0)}) {
      for (int p = 1; p <= 6; ++p) {
        CAPTURE(spec.label());
        CAPTURE(p);
        const double c2p = moment_constant(spec, 2 * p);
        if (c2p < 1.0) continue;
        CHECK(std::pow(moment_constant(spec, 2), p) <= c2p * (1.0 + 1e-14));
      }
    }
  }

  TEST_CASE("sampling is deterministic per seed") {
    for (const WeightSpec& spec : all_families()) {
      const RowMatrix a = sample_matrix(spec, 33, 17, 17, 1234);
      const RowMatrix b = sample_matrix(spec, 33, 17, 17, 1234);
      const RowMatrix c = sample_matrix(spec, 33, 17, 17, 1235);
      CHECK((a.array() == b.array()).all());
      CHECK_FALSE((a.array() == c.array()).all());
      RowMatrix into;
      sample_matrix_into(into, spec, 33, 17, 17, StreamId{1234});
      CHECK((a.array() == into.array()).all());
    }
  }

  TEST_CASE("invalid specs and shapes are rejected") {
    CHECK_THROWS_AS(sample_matrix(WeightSpec::student_t(1.0, 2.0), 2, 2, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_matrix(WeightSpec::gaussian(0.0), 2, 2, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_matrix(WeightSpec::gaussian(1.0), 0, 2, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_matrix(WeightSpec::gaussian(1.0), 2, 2, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(moment_constant(WeightSpec::gaussian(1.0), 0), InvalidArgument);
    CHECK_THROWS_AS(weight_family_from_string("cauchy"), InvalidArgument);
  }
}
