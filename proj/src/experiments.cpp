#include "fddgauss/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "fddgauss/errors.hpp"
#include "fddgauss/fdd_io.hpp"
#include "fddgauss/parallel.hpp"

namespace fddgauss {

namespace {

const char* const kColumns[] = {"experiment_id", "family", "activation", "L", "widths", "s", "N", "seed",
                                "w1_hat", "w1_floor", "bound_value", "bound_certified", "wallclock_ms", "status"};
constexpr std::size_t kColumnCount = sizeof(kColumns) / sizeof(kColumns[0]);

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' || c == '\r' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_field(const std::string& text) {
  const std::optional<double> v = parse_double(text);
  if (!v) throw InvalidArgument("sweep csv: bad number \"" + text + "\"");
  return *v;
}

std::uint64_t parse_u64(const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("sweep csv: bad integer \"" + text + "\"");
  }
}

std::string kernel_key(const SweepConfig&, const SweepCell& cell) {
  return cell.family.label() + "|" + std::to_string(cell.widths.size() - 1);
}

std::string floor_key(const SweepConfig& config, const SweepCell& cell) {
  return kernel_key(config, cell) + "|" + std::to_string(cell.widths.back()) + "|" + std::to_string(config.replicates) +
         "|" + std::to_string(cell.seed);
}

double cell_distance(const SweepConfig& config, const FddSample& a, const FddSample& b, unsigned threads) {
  const PointCloud x = PointCloud::from_fdd(a);
  const PointCloud y = PointCloud::from_fdd(b);
  if (config.solver == SolverKind::sinkhorn) return w1_sinkhorn(x, y, config.sinkhorn, config.matching_cap, threads).cost;
  return w1_matching(x, y, config.matching_cap, threads);
}

std::vector<KernelMatrix> cell_kernels(const SweepConfig& config, const SweepCell& cell) {
  return limit_kernels(cell_network(config, cell), config.inputs, config.kernel);
}

double cell_floor(const SweepConfig& config, const SweepCell& cell, const std::vector<KernelMatrix>& kernels,
                  unsigned threads) {
  const NetworkConfig network = cell_network(config, cell);
  const bool gaussian_limit = network.depth() > 1 || network.weights[0].family == WeightFamily::gaussian;
  if (gaussian_limit) {
    const std::uint64_t seeds[] = {cell.seed};
    return matching_bias_baseline(kernels.back(), network.output_dim(), config.replicates, seeds,
                                  config.matching_cap, threads);
  }
  const FddSample a = sample_limit_fdd(network, config.inputs, kernels.back(), config.replicates, cell.seed,
                                       StreamPurpose::floor_a, threads);
  const FddSample b = sample_limit_fdd(network, config.inputs, kernels.back(), config.replicates, cell.seed,
                                       StreamPurpose::floor_b, threads);
  return cell_distance(config, a, b, threads);
}

std::filesystem::path resolve_output(const std::string& output) {
  std::filesystem::path path(output);
  if (const char* dir = std::getenv("FDDGAUSS_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    path = std::filesystem::path(dir) / path.filename();
  }
  return path;
}

}  // namespace

void SweepConfig::validate() const {
  if (inputs.size() == 0) throw InvalidArgument("sweep: no inputs");
  if (networks.empty()) {
    if (depths.empty()) throw InvalidArgument("sweep: depths must be non-empty");
    if (widths.empty()) throw InvalidArgument("sweep: widths must be non-empty");
    for (std::size_t L : depths) {
      if (L < 1) throw InvalidArgument("sweep: depths must be >= 1");
    }
    for (std::size_t w : widths) {
      if (w < 1) throw InvalidArgument("sweep: widths must be >= 1");
    }
  } else {
    for (const auto& shape : networks) {
      if (shape.size() < 2) throw InvalidArgument("sweep: each network needs at least n_0 and n_1");
      if (shape.front() != inputs.dim()) throw InvalidArgument("sweep: network n_0 does not match input dimension");
    }
  }
  if (output_width < 1) throw InvalidArgument("sweep: output_width must be >= 1");
  if (families.empty()) throw InvalidArgument("sweep: families must be non-empty");
  for (const auto& spec : families) spec.validate();
  if (seeds.empty()) throw InvalidArgument("sweep: seeds must be non-empty");
  if (replicates < 1) throw InvalidArgument("sweep: replicates must be >= 1");
  if (replicates > matching_cap) throw CapacityError(replicates, matching_cap);
  if (p <= 2) throw InvalidArgument("sweep: p must be > 2");
}

std::string SweepRow::key() const {
  return experiment_id + "|" + family + "|" + std::to_string(L) + "|" + widths + "|" + std::to_string(seed);
}

std::string join_widths(const std::vector<std::size_t>& widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(widths[i]);
  }
  return out;
}

std::vector<std::size_t> split_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) out.push_back(static_cast<std::size_t>(parse_u64(part)));
  if (out.empty()) throw InvalidArgument("sweep csv: empty widths field");
  return out;
}

std::vector<SweepCell> enumerate_cells(const SweepConfig& config) {
  std::vector<std::vector<std::size_t>> shapes = config.networks;
  if (shapes.empty()) {
    for (std::size_t L : config.depths) {
      for (std::size_t w : config.widths) {
        std::vector<std::size_t> shape{config.inputs.dim()};
        if (L == 1) {
          shape.push_back(w);
        } else {
          for (std::size_t l = 1; l < L; ++l) shape.push_back(w);
          shape.push_back(config.output_width);
        }
        shapes.push_back(shape);
      }
    }
  }
  std::vector<SweepCell> cells;
  for (const auto& shape : shapes) {
    for (const auto& family : config.families) {
      for (std::uint64_t seed : config.seeds) cells.push_back({cells.size(), family, shape, seed});
    }
  }
  return cells;
}

NetworkConfig cell_network(const SweepConfig& config, const SweepCell& cell) {
  return NetworkConfig::uniform_family(cell.widths, config.activation, cell.family);
}

SweepRow run_cell(const SweepConfig& config, const SweepCell& cell, const LimitCache* cache, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row;
  row.experiment_id = config.experiment_id;
  row.family = cell.family.label();
  row.activation = config.activation.label();
  row.L = cell.widths.size() - 1;
  row.widths = join_widths(cell.widths);
  row.s = config.inputs.size();
  row.N = config.replicates;
  row.seed = cell.seed;
  try {
    const NetworkConfig network = cell_network(config, cell);
    const std::vector<KernelMatrix> kernels =
        cache && !cache->kernels.empty() ? cache->kernels : cell_kernels(config, cell);
    const FddSample finite = sample_fdd(network, config.inputs, config.replicates, cell.seed, threads);
    const FddSample limit = sample_limit_fdd(network, config.inputs, kernels.back(), config.replicates, cell.seed,
                                             StreamPurpose::limit, threads);
    row.w1_hat = cell_distance(config, finite, limit, threads);
    row.w1_floor = cache && cache->floor ? *cache->floor : cell_floor(config, cell, kernels, threads);
    if (config.compute_bound) {
      try {
        const MomentLedger ledger = MomentLedger::from_network(network, config.inputs, config.p);
        MeasurementOptions measurement = config.measurement;
        measurement.threads = threads;
        const BoundReport report = inductive_bound_chain(network, config.inputs, ledger, config.bound_mode, measurement);
        row.bound_value = report.bound_value;
        row.bound_certified = report.certified;
      } catch (const std::exception&) {
        // Moment hypotheses fail for this family; the distance is still reported.
        row.bound_value = std::nan("");
        row.bound_certified = false;
      }
    } else {
      row.bound_value = std::nan("");
    }
  } catch (const std::exception& error) {
    row.status = "error: cell " + std::to_string(cell.index) + " (" + row.family + ", widths " + row.widths +
                 ", seed " + std::to_string(cell.seed) + "): " + error.what();
    row.w1_hat = row.w1_floor = row.bound_value = std::nan("");
    row.bound_certified = false;
  }
  row.wallclock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config, const SweepOptions& options) {
  config.validate();
  const std::vector<SweepCell> cells = enumerate_cells(config);
  const std::filesystem::path output = config.output.empty() ? std::filesystem::path() : resolve_output(config.output);

  std::vector<std::optional<SweepRow>> rows(cells.size());
  if (options.resume && !output.empty() && std::filesystem::exists(output)) {
    std::map<std::string, SweepRow> done;
    for (SweepRow& row : load_sweep_csv(output.string())) {
      if (row.ok()) done.emplace(row.key(), std::move(row));
    }
    for (const SweepCell& cell : cells) {
      SweepRow probe;
      probe.experiment_id = config.experiment_id;
      probe.family = cell.family.label();
      probe.L = cell.widths.size() - 1;
      probe.widths = join_widths(cell.widths);
      probe.seed = cell.seed;
      if (auto it = done.find(probe.key()); it != done.end()) rows[cell.index] = it->second;
    }
  }

  std::vector<SweepCell> todo;
  for (const SweepCell& cell : cells) {
    if (!rows[cell.index]) todo.push_back(cell);
  }
  if (options.max_new_cells > 0 && todo.size() > options.max_new_cells) todo.resize(options.max_new_cells);

  // Limit-side quantities depend only on (family, depth) and the floor key, so
  // they are computed once and shared.
  std::map<std::string, std::vector<KernelMatrix>> kernels;
  std::map<std::string, std::optional<double>> floors;
  {
    std::vector<const SweepCell*> kernel_cells;
    for (const SweepCell& cell : todo) {
      if (kernels.emplace(kernel_key(config, cell), std::vector<KernelMatrix>{}).second) kernel_cells.push_back(&cell);
    }
    std::vector<std::vector<KernelMatrix>> computed(kernel_cells.size());
    parallel_for(kernel_cells.size(), config.threads, [&](std::size_t k) {
      try {
        computed[k] = cell_kernels(config, *kernel_cells[k]);
      } catch (const std::exception&) {
        // Left empty; run_cell recomputes and reports the failure in its row.
      }
    });
    for (std::size_t k = 0; k < kernel_cells.size(); ++k) kernels[kernel_key(config, *kernel_cells[k])] = computed[k];

    std::vector<const SweepCell*> floor_cells;
    for (const SweepCell& cell : todo) {
      if (kernels[kernel_key(config, cell)].empty()) continue;
      if (floors.emplace(floor_key(config, cell), std::nullopt).second) floor_cells.push_back(&cell);
    }
    std::vector<double> floor_values(floor_cells.size(), std::nan(""));
    std::vector<char> floor_ok(floor_cells.size(), 0);
    parallel_for(floor_cells.size(), config.threads, [&](std::size_t k) {
      try {
        floor_values[k] = cell_floor(config, *floor_cells[k], kernels.at(kernel_key(config, *floor_cells[k])), 1);
        floor_ok[k] = 1;
      } catch (const std::exception&) {
        // run_cell recomputes and reports the failure in its row.
      }
    });
    for (std::size_t k = 0; k < floor_cells.size(); ++k) {
      if (floor_ok[k]) floors[floor_key(config, *floor_cells[k])] = floor_values[k];
    }
  }

  std::ofstream progress;
  std::mutex progress_mutex;
  if (!output.empty()) {
    if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());
    progress.open(output, options.resume ? std::ios::app : std::ios::trunc);
    if (!progress) throw InvalidArgument("cannot open sweep output \"" + output.string() + "\"");
    if (std::filesystem::file_size(output) == 0) {
      write_sweep_csv(progress, {});
      progress.flush();
    }
  }

  parallel_for(todo.size(), config.threads, [&](std::size_t k) {
    const SweepCell& cell = todo[k];
    LimitCache cache;
    cache.kernels = kernels.at(kernel_key(config, cell));
    if (auto it = floors.find(floor_key(config, cell)); it != floors.end()) cache.floor = it->second;
    SweepRow row = run_cell(config, cell, &cache, 1);
    if (progress.is_open()) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      std::ostringstream line;
      write_sweep_csv(line, {row});
      // Skip the two header lines of the single-row rendering.
      std::string text = line.str();
      for (int skip = 0; skip < 2; ++skip) text.erase(0, text.find('\n') + 1);
      progress << text;
      progress.flush();
    }
    rows[cell.index] = std::move(row);
  });
  if (progress.is_open()) progress.close();

  std::vector<SweepRow> out;
  for (auto& row : rows) {
    if (row) out.push_back(std::move(*row));
  }
  if (!output.empty()) save_sweep_csv(output.string(), out);
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "# schema_version=" << kSweepSchemaVersion << "\n";
  for (std::size_t c = 0; c < kColumnCount; ++c) out << (c ? "," : "") << kColumns[c];
  out << "\n";
  for (const SweepRow& row : rows) {
    out << csv_field(row.experiment_id) << ',' << csv_field(row.family) << ',' << csv_field(row.activation) << ','
        << row.L << ',' << row.widths << ',' << row.s << ',' << row.N << ',' << row.seed << ','
        << format_double(row.w1_hat) << ',' << format_double(row.w1_floor) << ',' << format_double(row.bound_value)
        << ',' << (row.bound_certified ? "true" : "false") << ',' << format_double(row.wallclock_ms) << ','
        << csv_field(row.status) << "\n";
  }
  if (!out) throw InvalidArgument("sweep csv: write failed");
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# schema_version=" + std::to_string(kSweepSchemaVersion)) {
    throw InvalidArgument("sweep csv: missing or unsupported schema_version line");
  }
  if (!std::getline(in, line)) throw InvalidArgument("sweep csv: missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() != kColumnCount || !std::equal(header.begin(), header.end(), kColumns)) {
    throw InvalidArgument("sweep csv: unexpected header \"" + line + "\"");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Repeated headers appear when an interrupted file was appended to.
    if (line.rfind("# schema_version=", 0) == 0 || line.rfind("experiment_id,", 0) == 0) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != kColumnCount) throw InvalidArgument("sweep csv: row has " + std::to_string(f.size()) + " fields");
    SweepRow row;
    row.experiment_id = f[0];
    row.family = f[1];
    row.activation = f[2];
    row.L = static_cast<std::size_t>(parse_u64(f[3]));
    row.widths = f[4];
    split_widths(row.widths);
    row.s = static_cast<std::size_t>(parse_u64(f[5]));
    row.N = static_cast<std::size_t>(parse_u64(f[6]));
    row.seed = parse_u64(f[7]);
    row.w1_hat = parse_field(f[8]);
    row.w1_floor = parse_field(f[9]);
    row.bound_value = parse_field(f[10]);
    if (f[11] != "true" && f[11] != "false") throw InvalidArgument("sweep csv: bad bound_certified \"" + f[11] + "\"");
    row.bound_certified = f[11] == "true";
    row.wallclock_ms = parse_field(f[12]);
    row.status = f[13];
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw InvalidArgument("cannot open \"" + tmp + "\" for writing");
    write_sweep_csv(out, rows);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SweepRow> load_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open \"" + path + "\"");
  return read_sweep_csv(in);
}

double row_width(const SweepRow& row) {
  const std::vector<std::size_t> widths = split_widths(row.widths);
  if (widths.size() < 2) throw InvalidArgument("row widths must list n_0..n_L");
  if (widths.size() == 2) return static_cast<double>(widths[1]);
  double log_sum = 0.0;
  for (std::size_t l = 1; l + 1 < widths.size(); ++l) log_sum += std::log(static_cast<double>(widths[l]));
  return std::exp(log_sum / static_cast<double>(widths.size() - 2));
}

std::vector<SweepRow> filter_rows(const std::vector<SweepRow>& rows, std::size_t L, const std::string& family) {
  std::vector<SweepRow> out;
  for (const SweepRow& row : rows) {
    if (row.L == L && row.family == family) out.push_back(row);
  }
  return out;
}

RateFit fit_rate(const std::vector<SweepRow>& rows, bool floor_corrected) {
  std::map<double, std::pair<double, std::size_t>> by_width;
  std::set<std::pair<std::size_t, std::string>> groups;
  for (const SweepRow& row : rows) {
    if (!row.ok()) continue;
    groups.emplace(row.L, row.family);
    const double value = floor_corrected ? row.w1_hat - row.w1_floor : row.w1_hat;
    auto& slot = by_width[row_width(row)];
    slot.first += value;
    slot.second += 1;
  }
  if (groups.size() > 1) throw InvalidArgument("fit_rate: rows mix several (L, family) groups");
  if (by_width.size() < 3) {
    throw InvalidArgument("fit_rate: need at least 3 distinct widths, got " + std::to_string(by_width.size()));
  }
  RateFit fit;
  fit.floor_corrected = floor_corrected;
  bool any_above = false;
  for (const auto& [width, acc] : by_width) {
    const double mean = acc.first / static_cast<double>(acc.second);
    if (!floor_corrected && !(mean > 0.0)) throw InvalidArgument("fit_rate: raw distances must be positive");
    if (mean > kFitClip) any_above = true;
    fit.log_width.push_back(std::log(width));
    fit.log_w1.push_back(std::log(std::max(mean, kFitClip)));
  }
  if (!any_above) throw InvalidArgument("fit_rate: every floor-corrected distance is at or below the floor");
  const std::size_t n = fit.log_width.size();
  const double mx = std::accumulate(fit.log_width.begin(), fit.log_width.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(fit.log_w1.begin(), fit.log_w1.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = fit.log_width[i] - mx;
    const double dy = fit.log_w1[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = fit.log_w1[i] - (fit.intercept + fit.slope * fit.log_width[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace fddgauss
