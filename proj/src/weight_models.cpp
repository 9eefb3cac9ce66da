#include "fddgauss/weight_models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fddgauss/errors.hpp"

namespace fddgauss {

std::string_view to_string(WeightFamily family) {
  switch (family) {
    case WeightFamily::gaussian: return "gaussian";
    case WeightFamily::uniform: return "uniform";
    case WeightFamily::rademacher: return "rademacher";
    case WeightFamily::student_t: return "student_t";
  }
  return "unknown";
}

WeightFamily weight_family_from_string(std::string_view name) {
  if (name == "gaussian") return WeightFamily::gaussian;
  if (name == "uniform") return WeightFamily::uniform;
  if (name == "rademacher") return WeightFamily::rademacher;
  if (name == "student_t") return WeightFamily::student_t;
  throw InvalidArgument("unknown weight family '" + std::string(name) + "'");
}

void WeightSpec::validate() const {
  if (!(c_w > 0.0) || !std::isfinite(c_w)) {
    throw InvalidArgument("weight variance scale c_w must be positive and finite");
  }
  if (family == WeightFamily::student_t && !(nu > 2.0 && std::isfinite(nu))) {
    throw InvalidArgument("student_t weights need nu > 2 for a finite variance");
  }
}

std::string WeightSpec::label() const {
  std::ostringstream out;
  out << to_string(family);
  if (family == WeightFamily::student_t) out << "(nu=" << nu << ")";
  return out.str();
}

double sample_entry(const WeightSpec& spec, double fan_in, RngStream& rng) {
  switch (spec.family) {
    case WeightFamily::gaussian:
      return std::sqrt(spec.c_w / fan_in) * rng.normal();
    case WeightFamily::rademacher:
      return std::sqrt(spec.c_w / fan_in) * rng.sign();
    case WeightFamily::uniform:
      return std::sqrt(3.0 * spec.c_w / fan_in) * rng.symmetric_uniform();
    case WeightFamily::student_t:
      return std::sqrt(spec.c_w * (spec.nu - 2.0) / (spec.nu * fan_in)) * rng.student_t(spec.nu);
  }
  return 0.0;
}

namespace {

// Fills `out` row by row; the family switch is hoisted out of the inner loop.
template <typename Draw>
void fill(RowMatrix& out, double scale, Draw&& draw) {
  double* data = out.data();
  const auto count = static_cast<std::size_t>(out.size());
  for (std::size_t i = 0; i < count; ++i) data[i] = scale * draw();
}

}  // namespace

void sample_matrix_into(RowMatrix& out, const WeightSpec& spec, std::size_t rows, std::size_t cols,
                        std::size_t fan_in, const StreamId& id) {
  spec.validate();
  if (rows == 0 || cols == 0) throw InvalidArgument("sample_matrix: zero dimension");
  if (fan_in == 0) throw InvalidArgument("sample_matrix: fan_in must be >= 1");
  out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  RngStream rng(id);
  const double n = static_cast<double>(fan_in);
  switch (spec.family) {
    case WeightFamily::gaussian:
      rng.fill_normals(out.data(), static_cast<std::size_t>(out.size()), std::sqrt(spec.c_w / n));
      break;
    case WeightFamily::rademacher:
      rng.fill_signs(out.data(), static_cast<std::size_t>(out.size()), std::sqrt(spec.c_w / n));
      break;
    case WeightFamily::uniform:
      rng.fill_symmetric_uniform(out.data(), static_cast<std::size_t>(out.size()), std::sqrt(3.0 * spec.c_w / n));
      break;
    case WeightFamily::student_t:
      fill(out, std::sqrt(spec.c_w * (spec.nu - 2.0) / (spec.nu * n)),
           [&] { return rng.student_t(spec.nu); });
      break;
  }
}

RowMatrix sample_matrix(const WeightSpec& spec, std::size_t rows, std::size_t cols,
                        std::size_t fan_in, const StreamId& id) {
  RowMatrix out;
  sample_matrix_into(out, spec, rows, cols, fan_in, id);
  return out;
}

RowMatrix sample_matrix(const WeightSpec& spec, std::size_t rows, std::size_t cols,
                        std::size_t fan_in, std::uint64_t seed) {
  return sample_matrix(spec, rows, cols, fan_in, StreamId{seed, StreamPurpose::user, 0, 0});
}

double moment_constant(const WeightSpec& spec, int k) {
  spec.validate();
  if (k < 1) throw InvalidArgument("moment_constant: order k must be >= 1");
  const double half_k = 0.5 * k;
  switch (spec.family) {
    case WeightFamily::gaussian: {
      if (k % 2 == 0) {
        double double_factorial = 1.0;
        for (int j = k - 1; j > 1; j -= 2) double_factorial *= j;
        return std::pow(spec.c_w, half_k) * double_factorial;
      }
      // E|Z|^k = 2^{k/2} Gamma((k+1)/2) / sqrt(pi)
      return std::pow(2.0 * spec.c_w, half_k) *
             std::exp(std::lgamma(0.5 * (k + 1)) - 0.5 * std::log(std::numbers::pi));
    }
    case WeightFamily::rademacher:
      return std::pow(spec.c_w, half_k);
    case WeightFamily::uniform:
      return std::pow(3.0 * spec.c_w, half_k) / (k + 1);
    case WeightFamily::student_t: {
      if (k >= spec.nu) {
        std::ostringstream msg;
        msg << "student_t(nu=" << spec.nu << ") has no finite moment of order " << k;
        throw MomentError(msg.str());
      }
      // E|T|^k = nu^{k/2} Gamma((k+1)/2) Gamma((nu-k)/2) / (sqrt(pi) Gamma(nu/2)),
      // and W = T * sqrt(c_w (nu-2) / (nu n)).
      const double log_ratio = std::lgamma(0.5 * (k + 1)) + std::lgamma(0.5 * (spec.nu - k)) -
                               0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * spec.nu);
      return std::pow(spec.c_w * (spec.nu - 2.0), half_k) * std::exp(log_ratio);
    }
  }
  return 0.0;
}

}  // namespace fddgauss
