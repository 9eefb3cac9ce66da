#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fddgauss/forward_sim.hpp"

namespace fddgauss {

// Number of set partitions of {1..2p} with no singleton block, computed by a
// recursion over the block containing the first element. Exact below 2^53.
// Throws InvalidArgument for p < 1 or p > 15.
double combinatorial_c(int p);

// Moment constants for one network and input set. Layer arrays have one entry
// per weight layer 0..L-1: c2[l] = n_l E[(W^l)^2], c2p[l] >= n_l^p E[(W^l)^{2p}],
// c3[l] >= n_l^{3/2} E|W^l|^3.
struct MomentLedger {
  int p = 3;
  std::vector<double> c2;
  std::vector<double> c2p;
  std::vector<double> c3;
  double lip = 1.0;
  double sigma0 = 0.0;
  std::vector<double> l1_norms;  // ||x_a||_1
  std::size_t n0 = 1;

  // Exact constants from the weight laws of `config`.
  static MomentLedger from_network(const NetworkConfig& config, const InputSet& chi, int p);
  // Replaces constants by the "c2", "c2p", "c3" arrays of `overrides`. An
  // override below the exact constant is rejected.
  void apply_overrides(const nlohmann::json& overrides);

  std::size_t depth() const { return c2.size(); }
  std::size_t inputs() const { return l1_norms.size(); }
  // Throws MomentError unless p > 2, every entry is finite and positive, and
  // c2p[l] >= 1 for l = 0..L-2.
  void validate() const;
};

// B_{2p}^l(x): bound on E[sigma(F_1^l(x))^{2p}] and E[sigma(G_1^l(x))^{2p}].
double b2p(std::size_t layer, double l1_norm, const MomentLedger& ledger);
double b2p(std::size_t layer, std::size_t a, const MomentLedger& ledger);
// The p = 1 analogue used for second moments (each c2 factor floored at 1).
double b2(std::size_t layer, double l1_norm, const MomentLedger& ledger);
double b2(std::size_t layer, std::size_t a, const MomentLedger& ledger);

double c2p_const(double b_a, double b_b, double lip, int p);
double d2p_const(double b_a, double b_b, double lip, int p);
double c2p_const(std::size_t layer, std::size_t a, std::size_t b, const MomentLedger& ledger);
double d2p_const(std::size_t layer, std::size_t a, std::size_t b, const MomentLedger& ledger);

// ((2 c2^{3/2} + c3) / 6) (d / sqrt(n_prev)) sum_a E|sigma(F_1(x_a))|^3.
double general_to_gaussian_term(double d, double n_prev, double c2, double c3, double third_moment_sum);

enum class BoundMode { certificate, measurement };
std::string to_string(BoundMode mode);
BoundMode bound_mode_from_string(const std::string& name);

// The three bracketed pieces of one (a, b) summand. `variance` is taken before
// division by sqrt(n_prev).
struct PairTerms {
  BoundMode mode = BoundMode::certificate;
  double mismatch = 0.0;
  double variance = 0.0;
  double cross = 0.0;
};

// Certificate-mode terms from the moment bounds and the d1 bounds of the
// one- and two-coordinate marginals at the previous layer.
PairTerms certificate_pair_terms(double C, double D, double b2p_a, double b2p_b, double b2_a, double b2_b,
                                 double d1_one, double d1_two, int p);
// Measurement-mode terms: |E[KaKb] - E[HaHb]|, Var(HaHb), Cov across coordinates.
PairTerms measured_pair_terms(double mismatch, double variance, double covariance);

// (c2 d / 2) sum over pairs of (mismatch + variance / sqrt(n_prev) + cross).
// Throws InvalidArgument if any pair was produced in a different mode.
double gaussian_to_limit_term(double d, double n_prev, double c2, const std::vector<PairTerms>& pairs,
                              BoundMode mode);

// 2 sqrt(d) (4 sqrt(d) C_q)^{(d-1)/(q+d-1)} d1^{q/(q+d-1)}.
double lemma_moment_diff_bound(double d, double q, double C_q, double d1_value);

// 2 (2 sqrt(dim))^{2/3} d3^{1/3}; throws PreconditionViolation when d3 > 2 sqrt(dim).
double smoothing_convert(double d3_value, double dim);
double smoothing_threshold(double dim);

// (1/6) ((p-2) / (3(2p-1)))^{L-m-1} for m in 1..L-1, p > 2.
double rate_exponent(std::size_t L, std::size_t m, double p);
// C n_L^{1/3} sum_{m=1}^{L-1} n_m^{-rate_exponent(L, m, p)}; `widths` is n_0..n_L.
double theorem_rate(const std::vector<std::size_t>& widths, std::size_t n_L, std::size_t L, double p, double C);

// d3 and d1 bounds for the marginals F^l_[d](chi_{a,b}), d = 1, 2.
struct LevelBounds {
  std::size_t layer = 0;
  // Indexed [a][b] over the input set.
  std::vector<std::vector<double>> d3_one, d3_two, d1_one, d1_two;
  bool smoothing_ok = true;
  bool d1_at_most_one = true;
};

struct MeasurementOptions {
  std::size_t replicates = 256;
  std::uint64_t seed = 0x6d656173ull;
  unsigned threads = 0;
};

struct BoundReport {
  BoundMode mode = BoundMode::certificate;
  int p = 3;
  std::size_t depth = 0;
  std::vector<std::size_t> widths;
  std::size_t points = 0;
  double combinatorial_c = 0.0;
  // [l - 1][a] for l = 1..L-1.
  std::vector<std::vector<double>> b2p;
  std::vector<std::vector<double>> b2;
  // [a][b] at layer L-1.
  std::vector<std::vector<double>> c2p;
  std::vector<std::vector<double>> d2p;
  std::vector<LevelBounds> levels;  // layers 2..L-1
  double general_term = 0.0;
  double gaussian_term = 0.0;
  double final_d3 = 0.0;
  double smoothing_dim = 0.0;
  double bound_value = 0.0;  // d1(F^L(chi), G^L(chi)) bound
  std::vector<double> rate_exponents;  // m = 1..L-1
  double rate_profile = 0.0;           // theorem_rate with C = 1
  bool smoothing_ok = true;
  bool d1_at_most_one = true;
  bool certified = false;
  std::vector<std::string> notes;
};

// Composes the layerwise d3 bounds, smoothing each intermediate level and the
// final one. Certificate mode uses only the ledger; measurement mode replaces
// the final-level moments by Monte Carlo estimates from F^{L-1}(chi) and is
// never certified. Throws InvalidArgument for biased networks or shape
// mismatches and MomentError for ledgers violating the moment hypotheses.
BoundReport inductive_bound_chain(const NetworkConfig& config, const InputSet& chi, const MomentLedger& ledger,
                                  BoundMode mode, const MeasurementOptions& measurement = {});

nlohmann::json to_json(const BoundReport& report);

}  // namespace fddgauss
