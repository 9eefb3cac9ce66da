#include "fddgauss/nngp_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fddgauss/errors.hpp"
#include "fddgauss/parallel.hpp"
#include "fddgauss/quadrature.hpp"

namespace fddgauss {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// exp(-R^2 / 2) ~ 5e-32 at R = 12; the integrands grow at most linearly.
constexpr double kRadialCutoff = 12.0;
constexpr std::size_t kRadialPanels = 16;

std::size_t radial_order(std::size_t nodes) { return std::max<std::size_t>(8, nodes / 4); }

double psd_floor(const Eigen::MatrixXd& m) {
  double scale = 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) scale = std::max(scale, std::abs(m(i, i)));
  return -kPsdTolerance * scale;
}

// int_0^inf f(r) r exp(-r^2/2) dr, or int_0^inf f(g) phi(g) dg with `gaussian_weight`.
template <typename F>
double radial_integral(F&& f, std::size_t nodes, bool gaussian_weight) {
  const double norm = 1.0 / std::sqrt(kTwoPi);
  return integrate_composite(
      [&](double r) {
        const double w = std::exp(-0.5 * r * r);
        return f(r) * (gaussian_weight ? norm * w : r * w);
      },
      0.0, kRadialCutoff, kRadialPanels, radial_order(nodes));
}

// E[sigma(v_a g) sigma(v_b g)], g ~ N(0, 1).
double rank_one_expectation(double va, double vb, const ActivationSpec& sigma, std::size_t nodes) {
  if (sigma.homogeneous()) {
    // E[g^2 ; g > 0] = 1/2 on each half-line.
    return 0.5 * (sigma(va) * sigma(vb) + sigma(-va) * sigma(-vb));
  }
  return radial_integral(
      [&](double g) { return sigma(va * g) * sigma(vb * g) + sigma(-va * g) * sigma(-vb * g); }, nodes, true);
}

// E[sigma((A u)_a) sigma((A u)_b)], u ~ N(0, I_2), in polar coordinates.
double rank_two_expectation(const Eigen::Matrix2d& A, const ActivationSpec& sigma, std::size_t nodes) {
  std::vector<double> breaks;
  for (int row = 0; row < 2; ++row) {
    const double c = A(row, 0);
    const double s = A(row, 1);
    if (c == 0.0 && s == 0.0) continue;
    double theta = std::atan2(-c, s);
    if (theta < 0.0) theta += std::numbers::pi;
    breaks.push_back(theta);
    breaks.push_back(theta + std::numbers::pi);
  }
  std::sort(breaks.begin(), breaks.end());
  std::vector<std::array<double, 2>> arcs;
  if (breaks.empty()) {
    arcs.push_back({0.0, kTwoPi});
  } else {
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      if (breaks[k + 1] > breaks[k]) arcs.push_back({breaks[k], breaks[k + 1]});
    }
    arcs.push_back({breaks.back(), breaks.front() + kTwoPi});
  }

  auto angular = [&](double theta) {
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double alpha = A(0, 0) * ct + A(0, 1) * st;
    const double beta = A(1, 0) * ct + A(1, 1) * st;
    if (sigma.homogeneous()) {
      // int_0^inf r^3 exp(-r^2/2) dr = 2
      return 2.0 * sigma(alpha) * sigma(beta);
    }
    return radial_integral([&](double r) { return sigma(r * alpha) * sigma(r * beta); }, nodes, false);
  };

  const QuadratureRule& rule = gauss_legendre(nodes);
  double total = 0.0;
  for (const auto& arc : arcs) {
    const double half = 0.5 * (arc[1] - arc[0]);
    const double mid = 0.5 * (arc[1] + arc[0]);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * angular(mid + half * rule.nodes[k]);
    total += half * sum;
  }
  return total / kTwoPi;
}

KernelMatrix symmetric_from(std::size_t layer, const Eigen::MatrixXd& upper) {
  KernelMatrix out;
  out.layer = layer;
  out.entries = upper.selfadjointView<Eigen::Upper>();
  return out;
}

}  // namespace

bool KernelMatrix::is_psd() const {
  if (entries.rows() != entries.cols() || entries.rows() == 0 || !entries.allFinite()) return false;
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= psd_floor(entries) &&
         entries.diagonal().minCoeff() >= psd_floor(entries);
}

void KernelMatrix::check_psd() const {
  if (!is_psd()) {
    throw InvalidArgument("kernel matrix at layer " + std::to_string(layer) +
                          " is not symmetric positive semidefinite within tolerance");
  }
}

KernelMatrix base_kernel(const InputSet& chi, double c_w0, std::size_t n0) {
  if (n0 != chi.dim()) {
    throw InvalidArgument("base_kernel: n0 = " + std::to_string(n0) + " but inputs have dimension " +
                          std::to_string(chi.dim()));
  }
  if (!(c_w0 > 0.0)) throw InvalidArgument("base_kernel: c_w0 must be positive");
  KernelMatrix out;
  out.layer = 1;
  out.entries = (c_w0 / static_cast<double>(n0)) * (chi.matrix().transpose() * chi.matrix());
  return out;
}

double gaussian_expectation(const Eigen::Matrix2d& cov, const ActivationSpec& sigma, std::size_t nodes) {
  if (!cov.allFinite()) throw InvalidArgument("gaussian_expectation: non-finite covariance");
  const double trace = cov(0, 0) + cov(1, 1);
  const double scale = std::max({1.0, std::abs(cov(0, 0)), std::abs(cov(1, 1))});
  if (std::abs(cov(0, 1) - cov(1, 0)) > 1e-12 * scale) throw InvalidArgument("gaussian_expectation: asymmetric covariance");
  Eigen::Matrix2d sym = cov;
  sym(0, 1) = sym(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(sym);
  const Eigen::Vector2d lambda = solver.eigenvalues();  // ascending
  if (lambda(0) < -kPsdTolerance * scale) {
    std::ostringstream msg;
    msg << "gaussian_expectation: covariance is indefinite (eigenvalue " << lambda(0) << ")";
    throw InvalidArgument(msg.str());
  }
  const double clip = kClipRelative * std::max(trace, 0.0);
  const bool keep_small = lambda(0) > clip;
  const bool keep_large = lambda(1) > clip;
  if (!keep_large) {
    const double s0 = sigma(0.0);
    return s0 * s0;
  }
  const Eigen::Vector2d v_large = std::sqrt(lambda(1)) * solver.eigenvectors().col(1);
  if (!keep_small) return rank_one_expectation(v_large(0), v_large(1), sigma, nodes);
  Eigen::Matrix2d A;
  A.col(0) = v_large;
  A.col(1) = std::sqrt(lambda(0)) * solver.eigenvectors().col(0);
  return rank_two_expectation(A, sigma, nodes);
}

KernelMatrix kernel_step(const KernelMatrix& K, const ActivationSpec& sigma, double c_w, std::size_t nodes,
                         bool check_convergence) {
  K.check_psd();
  if (!(c_w > 0.0)) throw InvalidArgument("kernel_step: c_w must be positive");
  const std::size_t s = K.size();
  Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a; b < s; ++b) {
      Eigen::Matrix2d sub;
      sub << K(a, a), K(a, b), K(a, b), K(b, b);
      const double value = gaussian_expectation(sub, sigma, nodes);
      if (check_convergence) {
        const double refined = gaussian_expectation(sub, sigma, 2 * nodes);
        const double change = std::abs(refined - value);
        if (change > 1e-9 * std::max(1.0, std::abs(value))) {
          throw ConvergenceError("kernel_step: quadrature did not converge at entry (" + std::to_string(a) + ", " +
                                     std::to_string(b) + ")",
                                 change);
        }
      }
      upper(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c_w * value;
    }
  }
  KernelMatrix out = symmetric_from(K.layer + 1, upper);
  out.mc_stderr = c_w * K.mc_stderr;
  return out;
}

double relu_closed_form(double kaa, double kab, double kbb) {
  if (kaa < 0.0 || kbb < 0.0) throw InvalidArgument("relu_closed_form: negative variance");
  const double scale = std::sqrt(kaa * kbb);
  if (scale == 0.0) {
    if (std::abs(kab) > 1e-12 * std::max(1.0, std::max(kaa, kbb))) {
      throw InvalidArgument("relu_closed_form: nonzero covariance with a zero variance");
    }
    return 0.0;
  }
  double rho = kab / scale;
  if (std::abs(rho) > 1.0 + 1e-10) throw InvalidArgument("relu_closed_form: correlation out of [-1, 1]");
  rho = std::clamp(rho, -1.0, 1.0);
  return scale / kTwoPi * (std::sqrt(1.0 - rho * rho) + rho * (std::numbers::pi - std::acos(rho)));
}

KernelMatrix input_layer_moments(const InputSet& chi, const WeightSpec& spec, const ActivationSpec& sigma,
                                 const KernelOptions& options) {
  spec.validate();
  const std::size_t n0 = chi.dim();
  const std::size_t s = chi.size();
  const auto si = static_cast<Eigen::Index>(s);

  if (spec.family == WeightFamily::gaussian || options.input_law == InputLawMode::gaussian) {
    return kernel_step(base_kernel(chi, spec.c_w, n0), sigma, 1.0, options.nodes, options.check_convergence);
  }

  const Eigen::MatrixXd& x = chi.matrix();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(si, si);
  KernelMatrix out;
  out.layer = 2;

  if (spec.family == WeightFamily::rademacher && n0 <= options.rademacher_enumeration_max_dim) {
    const double scale = std::sqrt(spec.c_w / static_cast<double>(n0));
    const std::uint64_t patterns = std::uint64_t{1} << n0;
    Eigen::VectorXd act(si);
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      for (Eigen::Index a = 0; a < si; ++a) {
        double u = 0.0;
        for (std::size_t j = 0; j < n0; ++j) {
          const double xj = x(static_cast<Eigen::Index>(j), a);
          u += (mask >> j) & 1u ? xj : -xj;
        }
        act(a) = sigma(scale * u);
      }
      sum.noalias() += act * act.transpose();
    }
    out.entries = sum / static_cast<double>(patterns);
    return out;
  }

  // Antithetic Monte Carlo: every symmetric law gives w and -w equal weight.
  const std::size_t draws = std::max<std::size_t>(2, options.input_law_draws);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(si, si);
  RngStream rng(StreamId{options.input_law_seed, StreamPurpose::input_law, 0, 0});
  Eigen::VectorXd u(si), plus(si), minus(si);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n0));
  for (std::size_t t = 0; t < draws; ++t) {
    for (std::size_t j = 0; j < n0; ++j) w(static_cast<Eigen::Index>(j)) = sample_entry(spec, static_cast<double>(n0), rng);
    u.noalias() = x.transpose() * w;
    for (Eigen::Index a = 0; a < si; ++a) {
      plus(a) = sigma(u(a));
      minus(a) = sigma(-u(a));
    }
    const Eigen::MatrixXd pair_mean = 0.5 * (plus * plus.transpose() + minus * minus.transpose());
    sum += pair_mean;
    sum_sq += pair_mean.cwiseProduct(pair_mean);
  }
  const double nd = static_cast<double>(draws);
  out.entries = sum / nd;
  const Eigen::MatrixXd variance = (sum_sq / nd - out.entries.cwiseProduct(out.entries)).cwiseMax(0.0);
  out.mc_stderr = std::sqrt(variance.maxCoeff() / (nd - 1.0));
  return out;
}

std::vector<KernelMatrix> limit_kernels(const NetworkConfig& config, const InputSet& chi, const KernelOptions& options) {
  config.validate();
  std::vector<KernelMatrix> kernels;
  KernelMatrix k1 = base_kernel(chi, config.weights[0].c_w, config.input_dim());
  k1.entries.array() += config.bias_variance;
  kernels.push_back(k1);
  if (config.depth() == 1) return kernels;

  KernelMatrix k2;
  if (config.bias_variance > 0.0) {
    if (options.input_law == InputLawMode::exact && config.weights[0].family != WeightFamily::gaussian) {
      throw InvalidArgument("limit_kernels: biases need Gaussian first-layer weights or the gaussian input law");
    }
    k2 = kernel_step(k1, config.activation, 1.0, options.nodes, options.check_convergence);
  } else {
    k2 = input_layer_moments(chi, config.weights[0], config.activation, options);
  }
  k2.layer = 2;
  k2.entries *= config.weights[1].c_w;
  k2.mc_stderr *= config.weights[1].c_w;
  k2.entries.array() += config.bias_variance;
  kernels.push_back(k2);
  for (std::size_t l = 2; l < config.depth(); ++l) {
    KernelMatrix next = kernel_step(kernels.back(), config.activation, config.weights[l].c_w, options.nodes,
                                    options.check_convergence);
    next.entries.array() += config.bias_variance;
    kernels.push_back(next);
  }
  return kernels;
}

FddSample sample_gaussian_fdd(const KernelMatrix& K, std::size_t n, std::size_t replicates, std::uint64_t seed,
                              StreamPurpose purpose, unsigned threads) {
  K.check_psd();
  if (n == 0 || replicates == 0) throw InvalidArgument("sample_gaussian_fdd: zero coordinates or replicates");
  const std::size_t s = K.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K.entries);
  Eigen::VectorXd lambda = solver.eigenvalues();
  const double clip = kClipRelative * std::max(K.entries.trace(), 0.0);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = lambda(i) > clip ? std::sqrt(lambda(i)) : 0.0;
  const Eigen::MatrixXd root = solver.eigenvectors() * lambda.asDiagonal();

  FddSample out(replicates, n, s, K.layer, Provenance::gaussian_limit);
  parallel_for(replicates, threads, [&](std::size_t r) {
    RngStream rng(StreamId{seed, purpose, K.layer, r});
    Eigen::VectorXd z(static_cast<Eigen::Index>(s));
    auto slot = out.replicate(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (Eigen::Index a = 0; a < z.size(); ++a) z(a) = rng.normal();
      const Eigen::VectorXd row = root * z;
      for (std::size_t a = 0; a < s; ++a) slot[i * s + a] = row(static_cast<Eigen::Index>(a));
    }
  });
  return out;
}

FddSample sample_limit_fdd(const NetworkConfig& config, const InputSet& chi, const KernelMatrix& K_last,
                           std::size_t replicates, std::uint64_t seed, StreamPurpose purpose, unsigned threads) {
  config.validate();
  const bool first_layer_only = config.depth() == 1;
  const bool gaussian_first = config.weights[0].family == WeightFamily::gaussian;
  if (!first_layer_only || gaussian_first) {
    return sample_gaussian_fdd(K_last, config.output_dim(), replicates, seed, purpose, threads);
  }
  FddSample out(replicates, config.output_dim(), chi.size(), 1, Provenance::gaussian_limit);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const RowMatrix w = sample_matrix(config.weights[0], config.widths[1], config.widths[0], config.widths[0],
                                      StreamId{seed, purpose, 0, r});
    const Eigen::MatrixXd h = w * chi.matrix();
    auto slot = out.replicate(r);
    for (std::size_t i = 0; i < out.coords; ++i) {
      for (std::size_t a = 0; a < out.points; ++a) {
        slot[i * out.points + a] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
      }
    }
  });
  return out;
}

}  // namespace fddgauss
