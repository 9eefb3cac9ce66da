#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fddgauss/activation.hpp"
#include "fddgauss/weight_models.hpp"

namespace fddgauss {

// Depth-L network F^1(x) = W^0 x, F^{l+1}(x) = W^l sigma(F^l(x)).
struct NetworkConfig {
  std::vector<std::size_t> widths;   // n_0 .. n_L
  ActivationSpec activation;
  std::vector<WeightSpec> weights;   // one per layer 0 .. L-1
  // Optional N(0, bias_variance) biases on every layer. Zero by default; the
  // error bounds do not cover biased networks.
  double bias_variance = 0.0;

  std::size_t depth() const { return widths.empty() ? 0 : widths.size() - 1; }
  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  void validate() const;

  // Same network with every layer drawing from `spec`.
  static NetworkConfig uniform_family(std::vector<std::size_t> widths, ActivationSpec activation,
                                      const WeightSpec& spec);
  // The first `depth` layers of this network (F^depth).
  NetworkConfig truncated(std::size_t depth) const;
};

// Input points x_1..x_s stored as the columns of an n_0 x s matrix.
class InputSet {
 public:
  InputSet() = default;
  explicit InputSet(Eigen::MatrixXd columns);
  static InputSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.rows()); }
  const Eigen::MatrixXd& matrix() const { return points_; }
  Eigen::VectorXd point(std::size_t a) const { return points_.col(static_cast<Eigen::Index>(a)); }
  double l1_norm(std::size_t a) const;
  // The two-point set (x_a, x_b).
  InputSet pair(std::size_t a, std::size_t b) const;

 private:
  Eigen::MatrixXd points_;
};

enum class Provenance { finite_network, gaussian_limit };
std::string_view to_string(Provenance provenance);

// N replicates of an n x s FDD matrix, stored replicate-major then row-major:
// element (r, i, a) lives at data[(r * n + i) * s + a].
struct FddSample {
  std::size_t replicates = 0;
  std::size_t coords = 0;
  std::size_t points = 0;
  std::size_t layer = 0;
  Provenance provenance = Provenance::finite_network;
  std::vector<double> data;

  FddSample() = default;
  FddSample(std::size_t replicates, std::size_t coords, std::size_t points, std::size_t layer,
            Provenance provenance);

  std::size_t replicate_size() const { return coords * points; }
  double& at(std::size_t r, std::size_t i, std::size_t a) { return data[(r * coords + i) * points + a]; }
  double at(std::size_t r, std::size_t i, std::size_t a) const { return data[(r * coords + i) * points + a]; }
  std::span<const double> replicate(std::size_t r) const {
    return {data.data() + r * replicate_size(), replicate_size()};
  }
  std::span<double> replicate(std::size_t r) { return {data.data() + r * replicate_size(), replicate_size()}; }
  void check_shape() const;
};

StreamId network_stream(std::uint64_t seed, std::size_t layer, std::size_t replicate);

// All weight matrices of one replicate, drawn from the network streams.
std::vector<RowMatrix> sample_weights(const NetworkConfig& config, std::uint64_t seed,
                                      std::size_t replicate);

// F^L(chi) as an n_L x s matrix for fixed weights (and optional biases).
Eigen::MatrixXd forward(const NetworkConfig& config, std::span<const RowMatrix> weights,
                        const InputSet& chi, std::span<const Eigen::VectorXd> biases = {});

// N independent weight draws pushed through `forward`. Replicate r uses the
// streams (seed, network, layer, r); `threads == 0` means hardware concurrency.
FddSample sample_fdd(const NetworkConfig& config, const InputSet& chi, std::size_t replicates,
                     std::uint64_t seed, unsigned threads = 0);

// Keeps the first d coordinate rows of every replicate.
FddSample truncate_coords(const FddSample& sample, std::size_t d);

}  // namespace fddgauss
