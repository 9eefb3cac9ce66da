#include "fddgauss/forward_sim.hpp"

#include <cmath>
#include <string>

#include "fddgauss/errors.hpp"
#include "fddgauss/parallel.hpp"

namespace fddgauss {

void NetworkConfig::validate() const {
  if (widths.size() < 2) throw InvalidArgument("network needs depth L >= 1 (at least two widths)");
  for (std::size_t w : widths) {
    if (w == 0) throw InvalidArgument("network widths must be >= 1");
  }
  if (weights.size() != depth()) {
    throw InvalidArgument("network needs one weight spec per layer: expected " +
                          std::to_string(depth()) + ", got " + std::to_string(weights.size()));
  }
  for (const auto& spec : weights) spec.validate();
  if (!(bias_variance >= 0.0) || !std::isfinite(bias_variance)) {
    throw InvalidArgument("bias_variance must be finite and non-negative");
  }
}

NetworkConfig NetworkConfig::uniform_family(std::vector<std::size_t> widths, ActivationSpec activation,
                                            const WeightSpec& spec) {
  NetworkConfig config;
  config.widths = std::move(widths);
  config.activation = activation;
  config.weights.assign(config.depth(), spec);
  return config;
}

NetworkConfig NetworkConfig::truncated(std::size_t new_depth) const {
  if (new_depth < 1 || new_depth > depth()) throw InvalidArgument("truncated: depth out of range");
  NetworkConfig out = *this;
  out.widths.resize(new_depth + 1);
  out.weights.resize(new_depth);
  return out;
}

InputSet::InputSet(Eigen::MatrixXd columns) : points_(std::move(columns)) {
  if (points_.cols() < 1 || points_.rows() < 1) throw InvalidArgument("input set needs s >= 1 points of dimension >= 1");
  if (!points_.allFinite()) throw InvalidArgument("input points must be finite");
}

InputSet InputSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidArgument("input set needs s >= 1 points");
  const std::size_t dim = rows.front().size();
  Eigen::MatrixXd columns(dim, rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != dim) {
      throw InvalidArgument("input point " + std::to_string(a) + " has dimension " +
                            std::to_string(rows[a].size()) + ", expected " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) columns(j, a) = rows[a][j];
  }
  return InputSet(std::move(columns));
}

double InputSet::l1_norm(std::size_t a) const {
  return points_.col(static_cast<Eigen::Index>(a)).lpNorm<1>();
}

InputSet InputSet::pair(std::size_t a, std::size_t b) const {
  Eigen::MatrixXd columns(points_.rows(), 2);
  columns.col(0) = points_.col(static_cast<Eigen::Index>(a));
  columns.col(1) = points_.col(static_cast<Eigen::Index>(b));
  return InputSet(std::move(columns));
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::finite_network ? "finite_network" : "gaussian_limit";
}

FddSample::FddSample(std::size_t n_rep, std::size_t n_coords, std::size_t n_points, std::size_t layer_tag,
                     Provenance source)
    : replicates(n_rep), coords(n_coords), points(n_points), layer(layer_tag), provenance(source),
      data(n_rep * n_coords * n_points, 0.0) {}

void FddSample::check_shape() const {
  if (data.size() != replicates * coords * points) throw InvalidArgument("FddSample: data size does not match shape");
  for (double v : data) {
    if (!std::isfinite(v)) throw InvalidArgument("FddSample: non-finite entry");
  }
}

StreamId network_stream(std::uint64_t seed, std::size_t layer, std::size_t replicate) {
  return StreamId{seed, StreamPurpose::network, layer, replicate};
}

namespace {

constexpr std::size_t kBiasLayerOffset = 1u << 20;

Eigen::MatrixXd apply_activation(const ActivationSpec& sigma, const Eigen::MatrixXd& pre) {
  return pre.unaryExpr([&](double v) { return sigma(v); });
}

void check_weight_shapes(const NetworkConfig& config, std::span<const RowMatrix> weights,
                         const InputSet& chi) {
  if (weights.size() != config.depth()) throw InvalidArgument("forward: wrong number of weight matrices");
  if (chi.dim() != config.input_dim()) {
    throw InvalidArgument("forward: input dimension " + std::to_string(chi.dim()) +
                          " does not match n_0 = " + std::to_string(config.input_dim()));
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (static_cast<std::size_t>(weights[l].rows()) != config.widths[l + 1] ||
        static_cast<std::size_t>(weights[l].cols()) != config.widths[l]) {
      throw InvalidArgument("forward: weight matrix " + std::to_string(l) + " has shape " +
                            std::to_string(weights[l].rows()) + "x" + std::to_string(weights[l].cols()) +
                            ", expected " + std::to_string(config.widths[l + 1]) + "x" +
                            std::to_string(config.widths[l]));
    }
  }
}

Eigen::VectorXd sample_bias(const NetworkConfig& config, std::size_t layer, std::uint64_t seed,
                            std::size_t replicate) {
  RngStream rng(network_stream(seed, kBiasLayerOffset + layer, replicate));
  Eigen::VectorXd bias(static_cast<Eigen::Index>(config.widths[layer + 1]));
  const double scale = std::sqrt(config.bias_variance);
  for (Eigen::Index i = 0; i < bias.size(); ++i) bias(i) = scale * rng.normal();
  return bias;
}

}  // namespace

std::vector<RowMatrix> sample_weights(const NetworkConfig& config, std::uint64_t seed, std::size_t replicate) {
  config.validate();
  std::vector<RowMatrix> weights;
  weights.reserve(config.depth());
  for (std::size_t l = 0; l < config.depth(); ++l) {
    weights.push_back(sample_matrix(config.weights[l], config.widths[l + 1], config.widths[l], config.widths[l],
                                    network_stream(seed, l, replicate)));
  }
  return weights;
}

Eigen::MatrixXd forward(const NetworkConfig& config, std::span<const RowMatrix> weights, const InputSet& chi,
                        std::span<const Eigen::VectorXd> biases) {
  config.validate();
  check_weight_shapes(config, weights, chi);
  if (!biases.empty() && biases.size() != weights.size()) throw InvalidArgument("forward: wrong number of bias vectors");
  Eigen::MatrixXd h = weights[0] * chi.matrix();
  if (!biases.empty()) h.colwise() += biases[0];
  for (std::size_t l = 1; l < weights.size(); ++l) {
    h = weights[l] * apply_activation(config.activation, h);
    if (!biases.empty()) h.colwise() += biases[l];
  }
  return h;
}

FddSample sample_fdd(const NetworkConfig& config, const InputSet& chi, std::size_t replicates, std::uint64_t seed,
                     unsigned threads) {
  config.validate();
  if (replicates == 0) throw InvalidArgument("sample_fdd: need N >= 1 replicates");
  if (chi.dim() != config.input_dim()) throw InvalidArgument("sample_fdd: input dimension does not match n_0");
  FddSample out(replicates, config.output_dim(), chi.size(), config.depth(), Provenance::finite_network);
  parallel_for(replicates, threads, [&](std::size_t r) {
    // Layer-by-layer so only one weight matrix is alive per replicate.
    thread_local RowMatrix w;
    Eigen::MatrixXd h;
    for (std::size_t l = 0; l < config.depth(); ++l) {
      sample_matrix_into(w, config.weights[l], config.widths[l + 1], config.widths[l], config.widths[l],
                         network_stream(seed, l, r));
      h = l == 0 ? Eigen::MatrixXd(w * chi.matrix()) : Eigen::MatrixXd(w * apply_activation(config.activation, h));
      if (config.bias_variance > 0.0) h.colwise() += sample_bias(config, l, seed, r);
    }
    auto slot = out.replicate(r);
    for (std::size_t i = 0; i < out.coords; ++i) {
      for (std::size_t a = 0; a < out.points; ++a) {
        slot[i * out.points + a] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
      }
    }
  });
  return out;
}

FddSample truncate_coords(const FddSample& sample, std::size_t d) {
  if (d < 1 || d > sample.coords) {
    throw InvalidArgument("truncate_coords: d = " + std::to_string(d) + " outside 1.." + std::to_string(sample.coords));
  }
  FddSample out(sample.replicates, d, sample.points, sample.layer, sample.provenance);
  for (std::size_t r = 0; r < sample.replicates; ++r) {
    const auto src = sample.replicate(r);
    auto dst = out.replicate(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(d * sample.points), dst.begin());
  }
  return out;
}

}  // namespace fddgauss
