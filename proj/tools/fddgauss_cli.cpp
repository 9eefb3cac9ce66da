#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fddgauss/bounds.hpp"
#include "fddgauss/config.hpp"
#include "fddgauss/errors.hpp"
#include "fddgauss/experiments.hpp"
#include "fddgauss/fdd_io.hpp"
#include "fddgauss/forward_sim.hpp"
#include "fddgauss/nngp_kernel.hpp"
#include "fddgauss/ot_metrics.hpp"

using namespace fddgauss;
using nlohmann::json;

namespace {

void emit(const json& value, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << value.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw InvalidArgument("cannot open \"" + out_path + "\" for writing");
  out << value.dump(2) << "\n";
}

int cmd_kernel(const std::string& config_path, std::size_t layer, const std::string& out_path) {
  const NetworkFile file = load_network_file(config_path);
  const std::vector<KernelMatrix> kernels = limit_kernels(file.network, file.inputs, file.kernel);
  if (layer > 0) {
    if (layer > kernels.size()) throw InvalidArgument("--layer exceeds the network depth");
    emit(kernel_to_json(kernels[layer - 1]), out_path);
    return 0;
  }
  json layers = json::array();
  for (const auto& K : kernels) layers.push_back(kernel_to_json(K));
  emit(json{{"kernels", layers}}, out_path);
  return 0;
}

int cmd_simulate(const std::string& config_path, std::size_t replicates, std::uint64_t seed, bool limit,
                 const std::string& format, const std::string& out_path, unsigned threads) {
  const NetworkFile file = load_network_file(config_path);
  FddSample sample;
  if (limit) {
    const std::vector<KernelMatrix> kernels = limit_kernels(file.network, file.inputs, file.kernel);
    sample = sample_limit_fdd(file.network, file.inputs, kernels.back(), replicates, seed, StreamPurpose::limit, threads);
  } else {
    sample = sample_fdd(file.network, file.inputs, replicates, seed, threads);
  }
  const bool binary = format == "bin";
  if (out_path.empty()) {
    if (binary) throw InvalidArgument("binary output needs --out");
    write_fdd_csv(std::cout, sample);
  } else {
    save_fdd(out_path, sample, binary);
  }
  return 0;
}

int cmd_distance(const std::string& x_path, const std::string& y_path, const std::string& solver,
                 const SinkhornOptions& sinkhorn, std::size_t cap, unsigned threads) {
  const PointCloud X = PointCloud::from_fdd(load_fdd(x_path));
  const PointCloud Y = PointCloud::from_fdd(load_fdd(y_path));
  json out{{"solver", solver}, {"N", X.count}, {"D", X.dim}};
  if (solver == "matching") {
    out["w1"] = w1_matching(X, Y, cap, threads);
  } else {
    const SinkhornResult result = w1_sinkhorn(X, Y, sinkhorn, cap, threads);
    out["w1"] = result.cost;
    out["iterations"] = result.iterations;
    out["residual"] = result.residual;
    out["eps"] = sinkhorn.eps;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_bound(const std::string& config_path, const std::string& ledger_path, const std::string& mode, int p_override,
              std::size_t measurement_replicates, const std::string& out_path) {
  const NetworkFile file = load_network_file(config_path);
  const int p = p_override > 0 ? p_override : file.p;
  MomentLedger ledger = MomentLedger::from_network(file.network, file.inputs, p);
  if (!file.ledger.empty()) ledger.apply_overrides(file.ledger);
  if (!ledger_path.empty()) ledger.apply_overrides(load_json_file(ledger_path));
  MeasurementOptions measurement;
  measurement.replicates = measurement_replicates;
  const BoundReport report =
      inductive_bound_chain(file.network, file.inputs, ledger, bound_mode_from_string(mode), measurement);
  emit(to_json(report), out_path);
  return 0;
}

int cmd_sweep(const std::string& config_path, bool resume, std::size_t max_cells, int threads,
              const std::string& out_override) {
  SweepConfig config = load_sweep_config(config_path);
  if (threads >= 0) config.threads = static_cast<unsigned>(threads);
  if (!out_override.empty()) config.output = out_override;
  SweepOptions options;
  options.resume = resume;
  options.max_new_cells = max_cells;
  const std::vector<SweepRow> rows = run_sweep(config, options);
  if (config.output.empty()) write_sweep_csv(std::cout, rows);
  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.ok() ? 0 : 1;
  std::cerr << rows.size() << " rows, " << failed << " failed\n";
  return 0;
}

int cmd_fit(const std::string& csv_path, std::size_t depth, const std::string& family, bool raw) {
  const std::vector<SweepRow> rows = filter_rows(load_sweep_csv(csv_path), depth, family);
  const RateFit fit = fit_rate(rows, !raw);
  std::cout << json{{"L", depth},
                    {"family", family},
                    {"floor_corrected", fit.floor_corrected},
                    {"slope", fit.slope},
                    {"intercept", fit.intercept},
                    {"r2", fit.r2},
                    {"points", fit.points},
                    {"log_width", fit.log_width},
                    {"log_w1", fit.log_w1}}
                   .dump(2)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-width network simulation, NNGP kernels, W1 estimation and explicit error bounds"};
  app.require_subcommand(1);

  std::string config_path, out_path;

  auto* kernel = app.add_subcommand("kernel", "Emit the limit kernels K^1..K^L as JSON");
  std::size_t kernel_layer = 0;
  kernel->add_option("--config", config_path, "Network config JSON")->required()->check(CLI::ExistingFile);
  kernel->add_option("--layer", kernel_layer, "Emit only K^layer (default: all)");
  kernel->add_option("--out", out_path, "Output file (default: stdout)");

  auto* simulate = app.add_subcommand("simulate", "Sample F^L(chi) or G^L(chi)");
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  bool limit = false;
  std::string format = "csv";
  unsigned threads = 0;
  simulate->add_option("--config", config_path, "Network config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--replicates,-N", replicates, "Number of replicates")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Seed");
  simulate->add_flag("--limit", limit, "Sample the Gaussian limit instead of the network");
  simulate->add_option("--format", format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
  simulate->add_option("--out", out_path, "Output file (csv defaults to stdout)");
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* distance = app.add_subcommand("distance", "Empirical W1 between two FDD sample files");
  std::string x_path, y_path, solver = "matching";
  SinkhornOptions sinkhorn;
  std::size_t cap = kDefaultMatchingCap;
  distance->add_option("x", x_path, "First sample (binary or csv)")->required()->check(CLI::ExistingFile);
  distance->add_option("y", y_path, "Second sample (binary or csv)")->required()->check(CLI::ExistingFile);
  distance->add_option("--solver", solver, "matching or sinkhorn")->check(CLI::IsMember({"matching", "sinkhorn"}));
  distance->add_option("--eps", sinkhorn.eps, "Sinkhorn regularization");
  distance->add_option("--max-iter", sinkhorn.max_iter, "Sinkhorn iteration cap");
  distance->add_option("--tol", sinkhorn.tol, "Sinkhorn marginal tolerance");
  distance->add_option("--cap", cap, "Largest N accepted");
  distance->add_option("--threads", threads, "Worker threads for the cost matrix");

  auto* bound = app.add_subcommand("bound", "Evaluate the explicit error-bound chain as JSON");
  std::string ledger_path, mode = "certificate";
  int p_override = 0;
  std::size_t measurement_replicates = 256;
  bound->add_option("--config", config_path, "Network config JSON")->required()->check(CLI::ExistingFile);
  bound->add_option("--ledger", ledger_path, "Moment-constant overrides JSON")->check(CLI::ExistingFile);
  bound->add_option("--mode", mode, "certificate or measurement")->check(CLI::IsMember({"certificate", "measurement"}));
  bound->add_option("--p", p_override, "Moment order p (> 2)");
  bound->add_option("--measurement-replicates", measurement_replicates, "Monte Carlo replicates in measurement mode");
  bound->add_option("--out", out_path, "Output file (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "Run a width/depth/family sweep to CSV");
  bool resume = false;
  std::size_t max_cells = 0;
  int sweep_threads = -1;
  sweep->add_option("--config", config_path, "Sweep config JSON")->required()->check(CLI::ExistingFile);
  sweep->add_flag("--resume", resume, "Skip cells already present as ok rows in the output");
  sweep->add_option("--max-cells", max_cells, "Stop after this many new cells");
  sweep->add_option("--threads", sweep_threads, "Concurrent cells (0 = all cores)");
  sweep->add_option("--out", out_path, "Override the output CSV path");

  auto* fit = app.add_subcommand("fit", "Fit log(w1) against log(width) for one (L, family)");
  std::string csv_path, family;
  std::size_t depth = 2;
  bool raw = false;
  fit->add_option("csv", csv_path, "Sweep CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--depth,-L", depth, "Network depth")->required();
  fit->add_option("--family", family, "Family label as written in the CSV")->required();
  fit->add_flag("--raw", raw, "Fit raw w1_hat instead of floor-corrected values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*kernel) return cmd_kernel(config_path, kernel_layer, out_path);
    if (*simulate) return cmd_simulate(config_path, replicates, seed, limit, format, out_path, threads);
    if (*distance) return cmd_distance(x_path, y_path, solver, sinkhorn, cap, threads);
    if (*bound) return cmd_bound(config_path, ledger_path, mode, p_override, measurement_replicates, out_path);
    if (*sweep) return cmd_sweep(config_path, resume, max_cells, sweep_threads, out_path);
    if (*fit) return cmd_fit(csv_path, depth, family, raw);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
