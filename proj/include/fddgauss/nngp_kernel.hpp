#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fddgauss/activation.hpp"
#include "fddgauss/forward_sim.hpp"
#include "fddgauss/rng.hpp"
#include "fddgauss/weight_models.hpp"

namespace fddgauss {

// Eigenvalues below kClipRelative * trace are treated as exact zeros.
inline constexpr double kClipRelative = 1e-12;
// A matrix is accepted as PSD when its smallest eigenvalue is >= -kPsdTolerance * max(1, max diag).
inline constexpr double kPsdTolerance = 1e-10;

// s x s covariance of one coordinate of the limit field G^layer over chi.
struct KernelMatrix {
  std::size_t layer = 1;
  Eigen::MatrixXd entries;
  // Largest Monte Carlo standard error among the entries (0 when every entry
  // came from deterministic quadrature or exact enumeration).
  double mc_stderr = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  double operator()(std::size_t a, std::size_t b) const {
    return entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  bool is_psd() const;
  // Throws InvalidArgument unless symmetric, finite and PSD within tolerance.
  void check_psd() const;
};

// K^1[a, b] = c_w0 <x_a, x_b> / n0.
KernelMatrix base_kernel(const InputSet& chi, double c_w0, std::size_t n0);

// E[sigma(Z_a) sigma(Z_b)] for (Z_a, Z_b) ~ N(0, cov). The covariance is
// factored spectrally; directions with eigenvalue below kClipRelative * trace
// collapse to point masses. Each remaining Gaussian direction is integrated in
// polar form with Gauss-Legendre panels split at the kinks of sigma, so
// piecewise-linear activations are integrated to rounding error. `nodes` is the
// angular order per arc; radial panels use nodes / 4 points (at least 8).
double gaussian_expectation(const Eigen::Matrix2d& cov, const ActivationSpec& sigma, std::size_t nodes = 64);

// K^{l+1}[a, b] = c_w E[sigma(Z_a) sigma(Z_b)], Z ~ N(0, K^l[{a,b},{a,b}]).
// With check_convergence the entries are recomputed at 2 * nodes and a change
// above 1e-9 * max(1, |entry|) raises ConvergenceError.
KernelMatrix kernel_step(const KernelMatrix& K, const ActivationSpec& sigma, double c_w, std::size_t nodes = 64,
                         bool check_convergence = true);

// Arc-cosine closed form of E[relu(Z_a) relu(Z_b)].
double relu_closed_form(double kaa, double kab, double kbb);

enum class InputLawMode {
  exact,     // use the actual law of W^0 x for the first activation moment
  gaussian,  // treat W^0 x as Gaussian with covariance K^1
};

struct KernelOptions {
  std::size_t nodes = 64;
  bool check_convergence = true;
  InputLawMode input_law = InputLawMode::exact;
  std::size_t input_law_draws = std::size_t{1} << 22;  // Monte Carlo fallback
  std::uint64_t input_law_seed = 0x5eedull;
  std::size_t rademacher_enumeration_max_dim = 20;
};

// E[sigma(F^1_1(x_a)) sigma(F^1_1(x_b))] with F^1 = W^0 x under the actual law of
// W^0. Gaussian weights use gaussian_expectation; Rademacher weights are
// enumerated exactly over the 2^{n_0} signs; otherwise antithetic Monte Carlo.
KernelMatrix input_layer_moments(const InputSet& chi, const WeightSpec& spec, const ActivationSpec& sigma,
                                 const KernelOptions& options = {});

// K^1 .. K^L of the limit field for `config` (index l - 1 holds K^l).
std::vector<KernelMatrix> limit_kernels(const NetworkConfig& config, const InputSet& chi,
                                        const KernelOptions& options = {});

// Replicates whose n rows are i.i.d. N(0, K), via K = V diag(lambda) V^T with
// clipped eigenvalues. Replicate r reads the stream (seed, purpose, K.layer, r).
FddSample sample_gaussian_fdd(const KernelMatrix& K, std::size_t n, std::size_t replicates, std::uint64_t seed,
                              StreamPurpose purpose = StreamPurpose::limit, unsigned threads = 0);

// Draws from the limit law G^L(chi). For L = 1 the limit is F^1 itself, so a
// non-Gaussian first layer is sampled directly (fresh streams under `purpose`);
// otherwise this is sample_gaussian_fdd(K^L).
FddSample sample_limit_fdd(const NetworkConfig& config, const InputSet& chi, const KernelMatrix& K_last,
                           std::size_t replicates, std::uint64_t seed, StreamPurpose purpose = StreamPurpose::limit,
                           unsigned threads = 0);

}  // namespace fddgauss
