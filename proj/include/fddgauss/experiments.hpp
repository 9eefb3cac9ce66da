#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fddgauss/bounds.hpp"
#include "fddgauss/forward_sim.hpp"
#include "fddgauss/nngp_kernel.hpp"
#include "fddgauss/ot_metrics.hpp"

namespace fddgauss {

enum class SolverKind { matching, sinkhorn };

struct SweepConfig {
  std::string experiment_id = "sweep";
  InputSet inputs;
  std::vector<std::size_t> depths;
  // Common hidden width; for depth 1 it is the output width n_1.
  std::vector<std::size_t> widths;
  // Explicit n_0..n_L lists used instead of depths x widths when non-empty.
  std::vector<std::vector<std::size_t>> networks;
  std::size_t output_width = 1;
  std::vector<WeightSpec> families;
  ActivationSpec activation;
  std::size_t replicates = 2048;
  std::vector<std::uint64_t> seeds;
  int p = 3;
  SolverKind solver = SolverKind::matching;
  std::size_t matching_cap = kDefaultMatchingCap;
  SinkhornOptions sinkhorn;
  KernelOptions kernel;
  BoundMode bound_mode = BoundMode::certificate;
  MeasurementOptions measurement;
  bool compute_bound = true;
  std::string output;  // CSV path; empty means no file
  unsigned threads = 0;

  void validate() const;
};

// One cell of the sweep grid.
struct SweepCell {
  std::size_t index = 0;
  WeightSpec family;
  std::vector<std::size_t> widths;  // n_0 .. n_L
  std::uint64_t seed = 0;
};

struct SweepRow {
  std::string experiment_id;
  std::string family;
  std::string activation;
  std::size_t L = 0;
  std::string widths;  // semicolon-joined n_0..n_L
  std::size_t s = 0;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  double w1_hat = 0.0;
  double w1_floor = 0.0;
  double bound_value = 0.0;
  bool bound_certified = false;
  double wallclock_ms = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
  // Identifies the cell for resume: (experiment_id, family, L, widths, seed).
  std::string key() const;
};

inline constexpr int kSweepSchemaVersion = 1;

std::string join_widths(const std::vector<std::size_t>& widths);
std::vector<std::size_t> split_widths(const std::string& text);

// The grid in emission order: network shape, then family, then seed.
std::vector<SweepCell> enumerate_cells(const SweepConfig& config);
NetworkConfig cell_network(const SweepConfig& config, const SweepCell& cell);

// Result of the limit-side computations that run_cell can share across cells.
struct LimitCache {
  std::vector<KernelMatrix> kernels;
  std::optional<double> floor;
};

// Runs one cell. `cache` (if given) supplies precomputed kernels and floor.
SweepRow run_cell(const SweepConfig& config, const SweepCell& cell, const LimitCache* cache = nullptr,
                  unsigned threads = 1);

struct SweepOptions {
  bool resume = false;
  // Stop after this many newly computed cells (0 = no limit).
  std::size_t max_new_cells = 0;
};

// Runs every cell (cells in parallel), writes the CSV to config.output if set,
// and returns the rows in grid order. Failed cells become rows whose status
// holds the error. With `resume`, ok rows already present in the output file
// are kept and their cells skipped.
std::vector<SweepRow> run_sweep(const SweepConfig& config, const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);
void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> load_sweep_csv(const std::string& path);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
  bool floor_corrected = true;
  std::vector<double> log_width;
  std::vector<double> log_w1;
};

inline constexpr double kFitClip = 1e-12;

// Least squares of log(w1) on log(width) over the per-width means of the ok
// rows. Floor correction subtracts w1_floor and clips at kFitClip. The width
// of a row is the geometric mean of its hidden widths (n_1 for depth 1).
// Rows must share one (L, family).
RateFit fit_rate(const std::vector<SweepRow>& rows, bool floor_corrected = true);

// Rows matching L and family label, in input order.
std::vector<SweepRow> filter_rows(const std::vector<SweepRow>& rows, std::size_t L, const std::string& family);

double row_width(const SweepRow& row);

}  // namespace fddgauss
