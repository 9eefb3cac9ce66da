#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "fddgauss/rng.hpp"

namespace fddgauss {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class WeightFamily { gaussian, uniform, rademacher, student_t };

std::string_view to_string(WeightFamily family);
WeightFamily weight_family_from_string(std::string_view name);

// A centred weight law, rescaled so that a matrix with fan-in n has entry
// variance c_w / n. `nu` is only meaningful for the student_t family.
struct WeightSpec {
  WeightFamily family = WeightFamily::gaussian;
  double c_w = 1.0;
  double nu = 0.0;

  static WeightSpec gaussian(double c_w) { return {WeightFamily::gaussian, c_w, 0.0}; }
  static WeightSpec uniform(double c_w) { return {WeightFamily::uniform, c_w, 0.0}; }
  static WeightSpec rademacher(double c_w) { return {WeightFamily::rademacher, c_w, 0.0}; }
  static WeightSpec student_t(double c_w, double nu) { return {WeightFamily::student_t, c_w, nu}; }

  // Throws InvalidArgument for c_w <= 0 or student_t with nu <= 2.
  void validate() const;
  std::string label() const;

  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

// One weight entry scaled to variance c_w / fan_in.
double sample_entry(const WeightSpec& spec, double fan_in, RngStream& rng);

// rows x cols matrix of i.i.d. entries with variance c_w / fan_in, filled in
// row-major order from the stream `id`.
RowMatrix sample_matrix(const WeightSpec& spec, std::size_t rows, std::size_t cols,
                        std::size_t fan_in, const StreamId& id);
RowMatrix sample_matrix(const WeightSpec& spec, std::size_t rows, std::size_t cols,
                        std::size_t fan_in, std::uint64_t seed);
// Same draw written into `out`, resized as needed.
void sample_matrix_into(RowMatrix& out, const WeightSpec& spec, std::size_t rows, std::size_t cols,
                        std::size_t fan_in, const StreamId& id);

// c_k such that E|W|^k = c_k * n^(-k/2) exactly for fan-in n.
// Throws MomentError when the moment is infinite (student_t with k >= nu).
double moment_constant(const WeightSpec& spec, int k);

}  // namespace fddgauss
