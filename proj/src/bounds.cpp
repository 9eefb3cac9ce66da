#include "fddgauss/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fddgauss/errors.hpp"
#include "fddgauss/nngp_kernel.hpp"

namespace fddgauss {

namespace {

using Table = std::vector<std::vector<double>>;

Table make_table(std::size_t s, double value = 0.0) { return Table(s, std::vector<double>(s, value)); }

void require_nonnegative(double value, const char* name, const char* who) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string(who) + ": " + name + " must be finite and non-negative");
  }
}

double smoothing_formula(double d3, double dim) {
  return 2.0 * std::pow(2.0 * std::sqrt(dim), 2.0 / 3.0) * std::cbrt(d3);
}

void check_layer(std::size_t layer, const MomentLedger& ledger, const char* who) {
  if (layer < 1 || layer > ledger.depth()) {
    throw InvalidArgument(std::string(who) + ": layer " + std::to_string(layer) + " outside 1.." +
                          std::to_string(ledger.depth()));
  }
}

std::vector<double> ledger_array(const nlohmann::json& value, const std::string& key, std::size_t expected) {
  if (!value.is_array() || value.size() != expected) {
    throw InvalidArgument("ledger override \"" + key + "\" must be an array of " + std::to_string(expected) +
                          " numbers");
  }
  std::vector<double> out;
  for (const auto& entry : value) {
    if (!entry.is_number()) throw InvalidArgument("ledger override \"" + key + "\" must contain numbers");
    out.push_back(entry.get<double>());
  }
  return out;
}

}  // namespace

double combinatorial_c(int p) {
  if (p < 1 || p > 15) throw InvalidArgument("combinatorial_c: p must lie in 1..15");
  const int n = 2 * p;
  // binom[i][k] and a[m] = partitions of an m-set without singletons.
  std::vector<std::vector<unsigned __int128>> binom(n + 1, std::vector<unsigned __int128>(n + 1, 0));
  for (int i = 0; i <= n; ++i) {
    binom[i][0] = 1;
    for (int k = 1; k <= i; ++k) binom[i][k] = binom[i - 1][k - 1] + (k <= i - 1 ? binom[i - 1][k] : 0);
  }
  std::vector<unsigned __int128> a(n + 1, 0);
  a[0] = 1;
  for (int m = 2; m <= n; ++m) {
    // The block holding element 1 has k further elements, k >= 1.
    for (int k = 1; k <= m - 1; ++k) a[m] += binom[m - 1][k] * a[m - 1 - k];
  }
  return static_cast<double>(a[n]);
}

MomentLedger MomentLedger::from_network(const NetworkConfig& config, const InputSet& chi, int p) {
  config.validate();
  if (chi.dim() != config.input_dim()) throw InvalidArgument("MomentLedger: input dimension does not match n_0");
  MomentLedger ledger;
  ledger.p = p;
  ledger.lip = config.activation.lip();
  ledger.sigma0 = config.activation.sigma0();
  ledger.n0 = config.input_dim();
  for (std::size_t a = 0; a < chi.size(); ++a) ledger.l1_norms.push_back(chi.l1_norm(a));
  for (std::size_t l = 0; l < config.depth(); ++l) {
    const WeightSpec& spec = config.weights[l];
    ledger.c2.push_back(moment_constant(spec, 2));
    ledger.c3.push_back(moment_constant(spec, 3));
    // The top layer's 2p-th moment never enters; heavy tails there are allowed.
    if (l + 1 < config.depth()) {
      ledger.c2p.push_back(moment_constant(spec, 2 * p));
    } else {
      try {
        ledger.c2p.push_back(moment_constant(spec, 2 * p));
      } catch (const MomentError&) {
        ledger.c2p.push_back(std::numeric_limits<double>::infinity());
      }
    }
  }
  return ledger;
}

void MomentLedger::apply_overrides(const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw InvalidArgument("ledger overrides must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    std::vector<double>* target = nullptr;
    if (key == "c2") {
      target = &c2;
    } else if (key == "c2p") {
      target = &c2p;
    } else if (key == "c3") {
      target = &c3;
    } else {
      throw InvalidArgument("unknown ledger override key \"" + key + "\"");
    }
    const std::vector<double> replacement = ledger_array(value, key, target->size());
    for (std::size_t l = 0; l < replacement.size(); ++l) {
      if (key == "c2" ? replacement[l] != (*target)[l] : replacement[l] < (*target)[l]) {
        throw InvalidArgument("ledger override " + key + "[" + std::to_string(l) + "] = " +
                              std::to_string(replacement[l]) + (key == "c2" ? " must equal " : " is below the exact value ") +
                              std::to_string((*target)[l]));
      }
    }
    *target = replacement;
  }
}

void MomentLedger::validate() const {
  if (p <= 2) throw MomentError("MomentLedger: p must be > 2, got " + std::to_string(p));
  if (c2.empty() || c3.size() != c2.size() || c2p.size() != c2.size()) {
    throw MomentError("MomentLedger: per-layer arrays must all have one entry per layer");
  }
  if (l1_norms.empty()) throw MomentError("MomentLedger: no inputs");
  if (n0 == 0) throw MomentError("MomentLedger: n0 must be >= 1");
  for (std::size_t l = 0; l < c2.size(); ++l) {
    if (!(c2[l] > 0.0) || !std::isfinite(c2[l]) || !(c3[l] > 0.0) || !std::isfinite(c3[l])) {
      throw MomentError("MomentLedger: c2 and c3 must be finite and positive at layer " + std::to_string(l));
    }
    if (l + 1 < c2.size()) {
      if (!std::isfinite(c2p[l])) {
        throw MomentError("MomentLedger: moment of order 2p is infinite at layer " + std::to_string(l));
      }
      if (c2p[l] < 1.0) {
        throw MomentError("MomentLedger: c_2p = " + std::to_string(c2p[l]) + " < 1 at layer " + std::to_string(l));
      }
    }
  }
  if (!(lip > 0.0) || !std::isfinite(lip) || !std::isfinite(sigma0)) {
    throw MomentError("MomentLedger: Lipschitz constant must be positive and sigma(0) finite");
  }
  for (double norm : l1_norms) {
    if (!(norm >= 0.0) || !std::isfinite(norm)) throw MomentError("MomentLedger: input norms must be finite");
  }
}

double b2p(std::size_t layer, double l1_norm, const MomentLedger& ledger) {
  check_layer(layer, ledger, "b2p");
  if (layer > 1 && layer - 1 > ledger.c2p.size()) throw InvalidArgument("b2p: ledger incomplete");
  const double p = ledger.p;
  const double l = static_cast<double>(layer);
  const double input = std::max(ledger.c2p[0] * std::pow(l1_norm, 2.0 * p) / std::pow(static_cast<double>(ledger.n0), p), 1.0);
  const double act = std::max(std::pow(ledger.lip + std::abs(ledger.sigma0), 2.0 * p * l), 1.0);
  double product = 1.0;
  for (std::size_t m = 1; m + 1 <= layer; ++m) product *= ledger.c2p[m];
  return std::pow(combinatorial_c(ledger.p), l) * input * act * product;
}

double b2p(std::size_t layer, std::size_t a, const MomentLedger& ledger) {
  if (a >= ledger.inputs()) throw InvalidArgument("b2p: input index out of range");
  return b2p(layer, ledger.l1_norms[a], ledger);
}

double b2(std::size_t layer, double l1_norm, const MomentLedger& ledger) {
  check_layer(layer, ledger, "b2");
  const double l = static_cast<double>(layer);
  const double input = std::max(ledger.c2[0] * l1_norm * l1_norm / static_cast<double>(ledger.n0), 1.0);
  const double act = std::max(std::pow(ledger.lip + std::abs(ledger.sigma0), 2.0 * l), 1.0);
  double product = 1.0;
  for (std::size_t m = 1; m + 1 <= layer; ++m) product *= std::max(ledger.c2[m], 1.0);
  return input * act * product;
}

double b2(std::size_t layer, std::size_t a, const MomentLedger& ledger) {
  if (a >= ledger.inputs()) throw InvalidArgument("b2: input index out of range");
  return b2(layer, ledger.l1_norms[a], ledger);
}

double c2p_const(double b_a, double b_b, double lip, int p) {
  const double q = 2.0 * p - 1.0;
  const double b = std::max(b_a, b_b);
  return 2.0 * std::sqrt(2.0) * std::pow(4.0 * std::sqrt(2.0) * b, 1.0 / q) * std::pow(lip, (2.0 * p - 2.0) / q);
}

double d2p_const(double b_a, double b_b, double lip, int p) {
  const double q = 2.0 * p - 1.0;
  const double b = std::max(b_a, b_b);
  return 4.0 * std::pow(8.0 * b, 3.0 / q) * std::pow(lip, (2.0 * p - 4.0) / q);
}

double c2p_const(std::size_t layer, std::size_t a, std::size_t b, const MomentLedger& ledger) {
  return c2p_const(b2p(layer, a, ledger), b2p(layer, b, ledger), ledger.lip, ledger.p);
}

double d2p_const(std::size_t layer, std::size_t a, std::size_t b, const MomentLedger& ledger) {
  return d2p_const(b2p(layer, a, ledger), b2p(layer, b, ledger), ledger.lip, ledger.p);
}

double general_to_gaussian_term(double d, double n_prev, double c2, double c3, double third_moment_sum) {
  const char* who = "general_to_gaussian_term";
  require_nonnegative(d, "d", who);
  require_nonnegative(c2, "c2", who);
  require_nonnegative(c3, "c3", who);
  require_nonnegative(third_moment_sum, "third_moment_sum", who);
  if (!(n_prev > 0.0)) throw InvalidArgument("general_to_gaussian_term: n_prev must be positive");
  return (2.0 * std::pow(c2, 1.5) + c3) / 6.0 * (d / std::sqrt(n_prev)) * third_moment_sum;
}

std::string to_string(BoundMode mode) { return mode == BoundMode::certificate ? "certificate" : "measurement"; }

BoundMode bound_mode_from_string(const std::string& name) {
  if (name == "certificate") return BoundMode::certificate;
  if (name == "measurement") return BoundMode::measurement;
  throw InvalidArgument("unknown bound mode \"" + name + "\" (expected certificate or measurement)");
}

PairTerms certificate_pair_terms(double C, double D, double b2p_a, double b2p_b, double b2_a, double b2_b,
                                 double d1_one, double d1_two, int p) {
  const char* who = "certificate_pair_terms";
  for (double v : {C, D, b2p_a, b2p_b, b2_a, b2_b}) require_nonnegative(v, "constant", who);
  require_nonnegative(d1_one, "d1_one", who);
  require_nonnegative(d1_two, "d1_two", who);
  const double q = 2.0 * p - 1.0;
  PairTerms out;
  out.mode = BoundMode::certificate;
  out.mismatch = C * std::pow(d1_one, (2.0 * p - 2.0) / q);
  out.variance = std::pow(b2p_a * b2p_b, 1.0 / (2.0 * p));
  out.cross = 2.0 * C * std::sqrt(b2_a * b2_b) * std::pow(d1_one, (p - 1.0) / q) + D * std::pow(d1_two, (p - 2.0) / q);
  return out;
}

PairTerms measured_pair_terms(double mismatch, double variance, double covariance) {
  PairTerms out;
  out.mode = BoundMode::measurement;
  out.mismatch = std::abs(mismatch);
  out.variance = std::sqrt(std::max(variance, 0.0));
  out.cross = std::sqrt(std::abs(covariance));
  return out;
}

double gaussian_to_limit_term(double d, double n_prev, double c2, const std::vector<PairTerms>& pairs,
                              BoundMode mode) {
  const char* who = "gaussian_to_limit_term";
  require_nonnegative(d, "d", who);
  require_nonnegative(c2, "c2", who);
  if (!(n_prev > 0.0)) throw InvalidArgument("gaussian_to_limit_term: n_prev must be positive");
  double sum = 0.0;
  for (const PairTerms& t : pairs) {
    if (t.mode != mode) {
      throw InvalidArgument("gaussian_to_limit_term: " + to_string(t.mode) + " pair terms passed in " +
                            to_string(mode) + " mode");
    }
    require_nonnegative(t.mismatch, "mismatch", who);
    require_nonnegative(t.variance, "variance", who);
    require_nonnegative(t.cross, "cross", who);
    // In measurement mode `variance` already holds sqrt(Var).
    sum += t.mismatch + t.variance / std::sqrt(n_prev) + t.cross;
  }
  return 0.5 * c2 * d * sum;
}

double lemma_moment_diff_bound(double d, double q, double C_q, double d1_value) {
  const char* who = "lemma_moment_diff_bound";
  if (!(d >= 1.0)) throw InvalidArgument("lemma_moment_diff_bound: d must be >= 1");
  if (!(q > 0.0)) throw InvalidArgument("lemma_moment_diff_bound: q must be positive");
  require_nonnegative(C_q, "C_q", who);
  require_nonnegative(d1_value, "d1", who);
  const double denom = q + d - 1.0;
  return 2.0 * std::sqrt(d) * std::pow(4.0 * std::sqrt(d) * C_q, (d - 1.0) / denom) * std::pow(d1_value, q / denom);
}

double smoothing_threshold(double dim) { return 2.0 * std::sqrt(dim); }

double smoothing_convert(double d3_value, double dim) {
  if (!(dim >= 1.0)) throw InvalidArgument("smoothing_convert: dimension must be >= 1");
  require_nonnegative(d3_value, "d3", "smoothing_convert");
  const double threshold = smoothing_threshold(dim);
  if (d3_value > threshold) throw PreconditionViolation("smoothing_convert: d3 above 2 sqrt(dim)", d3_value, threshold);
  return smoothing_formula(d3_value, dim);
}

double rate_exponent(std::size_t L, std::size_t m, double p) {
  if (!(p > 2.0)) throw InvalidArgument("rate_exponent: p must be > 2");
  if (m < 1 || m + 1 > L) throw InvalidArgument("rate_exponent: m must lie in 1..L-1");
  const double ratio = (p - 2.0) / (3.0 * (2.0 * p - 1.0));
  return std::pow(ratio, static_cast<double>(L - m - 1)) / 6.0;
}

double theorem_rate(const std::vector<std::size_t>& widths, std::size_t n_L, std::size_t L, double p, double C) {
  if (widths.size() != L + 1) throw InvalidArgument("theorem_rate: widths must list n_0..n_L");
  require_nonnegative(C, "C", "theorem_rate");
  if (n_L == 0) throw InvalidArgument("theorem_rate: n_L must be >= 1");
  double sum = 0.0;
  for (std::size_t m = 1; m < L; ++m) sum += std::pow(static_cast<double>(widths[m]), -rate_exponent(L, m, p));
  return C * std::cbrt(static_cast<double>(n_L)) * sum;
}

namespace {

struct MeasuredMoments {
  Table mean;         // E[H_1a H_1b]
  Table variance;     // Var(H_1a H_1b)
  Table covariance;   // Cov(H_1a H_1b, H_2a H_2b)
  std::vector<double> third;  // E|H_1a|^3
};

MeasuredMoments measure_hidden_moments(const NetworkConfig& config, const InputSet& chi,
                                       const MeasurementOptions& options) {
  const NetworkConfig hidden = config.truncated(config.depth() - 1);
  const FddSample sample = sample_fdd(hidden, chi, options.replicates, options.seed, options.threads);
  const std::size_t m = sample.coords;
  const std::size_t s = sample.points;
  MeasuredMoments out{make_table(s), make_table(s), make_table(s), std::vector<double>(s, 0.0)};
  Table sum = make_table(s), sum_sq = make_table(s), pair_sum = make_table(s);
  std::vector<double> h(m * s);
  for (std::size_t r = 0; r < sample.replicates; ++r) {
    const auto rep = sample.replicate(r);
    for (std::size_t k = 0; k < m * s; ++k) h[k] = config.activation(rep[k]);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t k = 0; k < m; ++k) out.third[a] += std::pow(std::abs(h[k * s + a]), 3.0);
      for (std::size_t b = 0; b < s; ++b) {
        double row_total = 0.0, row_sq = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double prod = h[k * s + a] * h[k * s + b];
          row_total += prod;
          row_sq += prod * prod;
        }
        sum[a][b] += row_total;
        sum_sq[a][b] += row_sq;
        if (m > 1) pair_sum[a][b] += (row_total * row_total - row_sq) / (static_cast<double>(m) * (m - 1.0));
      }
    }
  }
  const double total = static_cast<double>(sample.replicates * m);
  const double reps = static_cast<double>(sample.replicates);
  for (std::size_t a = 0; a < s; ++a) {
    out.third[a] /= total;
    for (std::size_t b = 0; b < s; ++b) {
      const double mean = sum[a][b] / total;
      out.mean[a][b] = mean;
      out.variance[a][b] = sum_sq[a][b] / total - mean * mean;
      out.covariance[a][b] = m > 1 ? pair_sum[a][b] / reps - mean * mean : 0.0;
    }
  }
  return out;
}

}  // namespace

BoundReport inductive_bound_chain(const NetworkConfig& config, const InputSet& chi, const MomentLedger& ledger,
                                  BoundMode mode, const MeasurementOptions& measurement) {
  config.validate();
  ledger.validate();
  if (config.bias_variance != 0.0) throw InvalidArgument("inductive_bound_chain: biased networks are not covered");
  if (ledger.depth() != config.depth()) throw InvalidArgument("inductive_bound_chain: ledger depth does not match network");
  if (ledger.inputs() != chi.size()) throw InvalidArgument("inductive_bound_chain: ledger inputs do not match chi");
  if (chi.dim() != config.input_dim()) throw InvalidArgument("inductive_bound_chain: input dimension does not match n_0");

  const std::size_t L = config.depth();
  const std::size_t s = chi.size();
  const int p = ledger.p;
  BoundReport report;
  report.mode = mode;
  report.p = p;
  report.depth = L;
  report.widths = config.widths;
  report.points = s;
  report.combinatorial_c = combinatorial_c(p);
  for (std::size_t m = 1; m < L; ++m) report.rate_exponents.push_back(rate_exponent(L, m, p));
  report.rate_profile = theorem_rate(config.widths, config.output_dim(), L, p, 1.0);
  report.smoothing_dim = static_cast<double>(config.output_dim() * s);

  if (L == 1) {
    report.notes.push_back("depth 1: the limit field is F^1 itself, the distance is zero");
    report.certified = mode == BoundMode::certificate;
    return report;
  }

  for (std::size_t l = 1; l < L; ++l) {
    std::vector<double> row_p, row_2;
    for (std::size_t a = 0; a < s; ++a) {
      row_p.push_back(b2p(l, a, ledger));
      row_2.push_back(b2(l, a, ledger));
    }
    report.b2p.push_back(row_p);
    report.b2.push_back(row_2);
  }
  report.c2p = make_table(s);
  report.d2p = make_table(s);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      report.c2p[a][b] = c2p_const(L - 1, a, b, ledger);
      report.d2p[a][b] = d2p_const(L - 1, a, b, ledger);
    }
  }

  const double third_power = 3.0 / (2.0 * p);
  auto bp = [&](std::size_t l, std::size_t a) { return report.b2p[l - 1][a]; };
  auto b2v = [&](std::size_t l, std::size_t a) { return report.b2[l - 1][a]; };

  // d3 bound at level l + 1 for the d coordinates over the input subset `idx`,
  // given d1 tables at level l.
  auto level_d3 = [&](std::size_t l, double d, const std::vector<std::size_t>& idx, const Table& d1_one,
                      const Table& d1_two, double* general_out, double* gaussian_out) {
    const double n_prev = static_cast<double>(config.widths[l]);
    double third = 0.0;
    for (std::size_t c : idx) third += std::pow(bp(l, c), third_power);
    const double general = general_to_gaussian_term(d, n_prev, ledger.c2[l], ledger.c3[l], third);
    std::vector<PairTerms> pairs;
    for (std::size_t a : idx) {
      for (std::size_t b : idx) {
        const double C = c2p_const(bp(l, a), bp(l, b), ledger.lip, p);
        const double D = d2p_const(bp(l, a), bp(l, b), ledger.lip, p);
        pairs.push_back(certificate_pair_terms(C, D, bp(l, a), bp(l, b), b2v(l, a), b2v(l, b), d1_one[a][b],
                                               d1_two[a][b], p));
      }
    }
    const double gaussian = gaussian_to_limit_term(d, n_prev, ledger.c2[l], pairs, BoundMode::certificate);
    if (general_out) *general_out = general;
    if (gaussian_out) *gaussian_out = gaussian;
    return general + gaussian;
  };

  auto smooth = [&](double d3, double dim, bool& ok) {
    if (d3 > smoothing_threshold(dim)) ok = false;
    return smoothing_formula(d3, dim);
  };

  // Level 1: F^1 = G^1.
  Table d1_one = make_table(s), d1_two = make_table(s);
  for (std::size_t target = 2; target < L; ++target) {
    const std::size_t l = target - 1;
    LevelBounds level;
    level.layer = target;
    level.d3_one = level.d3_two = level.d1_one = level.d1_two = make_table(s);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) {
        const std::vector<std::size_t> idx{a, b};
        level.d3_one[a][b] = level_d3(l, 1.0, idx, d1_one, d1_two, nullptr, nullptr);
        level.d3_two[a][b] = level_d3(l, 2.0, idx, d1_one, d1_two, nullptr, nullptr);
        level.d1_one[a][b] = smooth(level.d3_one[a][b], 2.0, level.smoothing_ok);
        level.d1_two[a][b] = smooth(level.d3_two[a][b], 4.0, level.smoothing_ok);
        if (level.d1_one[a][b] > 1.0 || level.d1_two[a][b] > 1.0) level.d1_at_most_one = false;
      }
    }
    report.smoothing_ok = report.smoothing_ok && level.smoothing_ok;
    report.d1_at_most_one = report.d1_at_most_one && level.d1_at_most_one;
    d1_one = level.d1_one;
    d1_two = level.d1_two;
    report.levels.push_back(std::move(level));
  }

  const double n_L = static_cast<double>(config.output_dim());
  const double n_prev = static_cast<double>(config.widths[L - 1]);
  std::vector<std::size_t> all(s);
  for (std::size_t a = 0; a < s; ++a) all[a] = a;

  if (mode == BoundMode::certificate) {
    report.final_d3 = level_d3(L - 1, n_L, all, d1_one, d1_two, &report.general_term, &report.gaussian_term);
  } else {
    const MeasuredMoments moments = measure_hidden_moments(config, chi, measurement);
    const bool first_hidden = L - 1 == 1;
    Table limit_mean = make_table(s);
    if (!first_hidden) {
      const std::vector<KernelMatrix> kernels = limit_kernels(config, chi);
      for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = 0; b < s; ++b) limit_mean[a][b] = kernels.back()(a, b) / ledger.c2[L - 1];
      }
    }
    double third = 0.0;
    for (double t : moments.third) third += t;
    report.general_term = general_to_gaussian_term(n_L, n_prev, ledger.c2[L - 1], ledger.c3[L - 1], third);
    std::vector<PairTerms> pairs;
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) {
        // With L - 1 = 1 the hidden field is exactly the limit and its rows are independent.
        pairs.push_back(measured_pair_terms(first_hidden ? 0.0 : limit_mean[a][b] - moments.mean[a][b],
                                            moments.variance[a][b], first_hidden ? 0.0 : moments.covariance[a][b]));
      }
    }
    report.gaussian_term = gaussian_to_limit_term(n_L, n_prev, ledger.c2[L - 1], pairs, BoundMode::measurement);
    report.final_d3 = report.general_term + report.gaussian_term;
    report.notes.push_back("measurement mode: final-level moments are Monte Carlo estimates over " +
                           std::to_string(measurement.replicates) + " replicates");
  }
  bool final_ok = true;
  report.bound_value = smooth(report.final_d3, report.smoothing_dim, final_ok);
  report.smoothing_ok = report.smoothing_ok && final_ok;
  if (!final_ok) report.notes.push_back("final d3 bound exceeds the smoothing threshold");
  if (!report.smoothing_ok) report.notes.push_back("widths too small for the smoothing step");
  report.certified = mode == BoundMode::certificate && report.smoothing_ok;
  return report;
}

nlohmann::json to_json(const BoundReport& report) {
  using nlohmann::json;
  auto level_json = [](const LevelBounds& level) {
    return json{{"layer", level.layer}, {"d3_one", level.d3_one}, {"d3_two", level.d3_two},
                {"d1_one", level.d1_one}, {"d1_two", level.d1_two}, {"smoothing_ok", level.smoothing_ok},
                {"d1_at_most_one", level.d1_at_most_one}};
  };
  json levels = json::array();
  for (const auto& level : report.levels) levels.push_back(level_json(level));
  return json{{"schema_version", 1},
              {"mode", to_string(report.mode)},
              {"p", report.p},
              {"depth", report.depth},
              {"widths", report.widths},
              {"points", report.points},
              {"combinatorial_c", report.combinatorial_c},
              {"b2p", report.b2p},
              {"b2", report.b2},
              {"c2p", report.c2p},
              {"d2p", report.d2p},
              {"levels", levels},
              {"general_term", report.general_term},
              {"gaussian_term", report.gaussian_term},
              {"final_d3", report.final_d3},
              {"smoothing_dim", report.smoothing_dim},
              {"bound_value", report.bound_value},
              {"rate_exponents", report.rate_exponents},
              {"rate_profile", report.rate_profile},
              {"smoothing_ok", report.smoothing_ok},
              {"d1_at_most_one", report.d1_at_most_one},
              {"certified", report.certified},
              {"notes", report.notes}};
}

}  // namespace fddgauss
