#include "fddgauss/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fddgauss/errors.hpp"
#include "fddgauss/fdd_io.hpp"

namespace fddgauss {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw InvalidArgument("unknown key \"" + key + "\" in " + where);
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw InvalidArgument(where + " is missing \"" + key + "\"");
  return obj.at(key);
}

template <typename T>
T as(const json& value, const std::string& what) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(what + " has the wrong type");
  }
}

std::size_t as_count(const json& value, const std::string& what) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw InvalidArgument(what + " must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

std::vector<std::size_t> count_list(const json& value, const std::string& what) {
  if (!value.is_array()) throw InvalidArgument(what + " must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : value) out.push_back(as_count(v, what));
  return out;
}

InputLawMode parse_input_law(const json& value) {
  const std::string name = as<std::string>(value, "input_law");
  if (name == "exact") return InputLawMode::exact;
  if (name == "gaussian") return InputLawMode::gaussian;
  throw InvalidArgument("input_law must be \"exact\" or \"gaussian\"");
}

std::filesystem::path base_of(const std::filesystem::path& path) {
  return path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open \"" + path.string() + "\"");
  try {
    return json::parse(in);
  } catch (const json::parse_error& error) {
    throw InvalidArgument("\"" + path.string() + "\": " + error.what());
  }
}

WeightSpec parse_weight_spec(const json& value) {
  check_keys(value, {"family", "c_w", "nu"}, "weight spec");
  WeightSpec spec;
  spec.family = weight_family_from_string(as<std::string>(require(value, "family", "weight spec"), "family"));
  spec.c_w = as<double>(require(value, "c_w", "weight spec"), "c_w");
  if (value.contains("nu")) {
    if (spec.family != WeightFamily::student_t) throw InvalidArgument("\"nu\" is only valid for student_t");
    spec.nu = as<double>(value.at("nu"), "nu");
  } else if (spec.family == WeightFamily::student_t) {
    throw InvalidArgument("student_t weight spec needs \"nu\"");
  }
  spec.validate();
  return spec;
}

json weight_spec_to_json(const WeightSpec& spec) {
  json out{{"family", std::string(to_string(spec.family))}, {"c_w", spec.c_w}};
  if (spec.family == WeightFamily::student_t) out["nu"] = spec.nu;
  return out;
}

ActivationSpec parse_activation(const json& value) {
  if (value.is_string()) {
    const ActivationKind kind = activation_kind_from_string(value.get<std::string>());
    if (kind == ActivationKind::leaky_relu) throw InvalidArgument("leaky_relu needs {\"kind\", \"slope\"}");
    return ActivationSpec(kind);
  }
  check_keys(value, {"kind", "slope"}, "activation");
  const ActivationKind kind = activation_kind_from_string(as<std::string>(require(value, "kind", "activation"), "kind"));
  if (kind == ActivationKind::leaky_relu) {
    return ActivationSpec::leaky_relu(as<double>(require(value, "slope", "activation"), "slope"));
  }
  if (value.contains("slope")) throw InvalidArgument("\"slope\" is only valid for leaky_relu");
  return ActivationSpec(kind);
}

InputSet read_inputs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open input CSV \"" + path.string() + "\"");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const std::optional<double> value = parse_double(cell);
      if (!value) throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": bad number \"" + cell + "\"");
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  return InputSet::from_rows(rows);
}

InputSet parse_inputs(const json& value, const std::filesystem::path& base_dir) {
  if (value.is_array()) {
    std::vector<std::vector<double>> rows;
    for (const auto& point : value) rows.push_back(as<std::vector<double>>(point, "input point"));
    return InputSet::from_rows(rows);
  }
  check_keys(value, {"csv"}, "inputs");
  std::filesystem::path path = as<std::string>(require(value, "csv", "inputs"), "csv");
  if (path.is_relative()) path = base_dir / path;
  return read_inputs_csv(path);
}

NetworkFile parse_network_file(const json& value, const std::filesystem::path& base_dir) {
  const std::string where = "network config";
  check_keys(value, {"widths", "activation", "weights", "bias_variance", "inputs", "p", "quad_nodes", "input_law",
                     "input_law_draws", "ledger"},
             where);
  NetworkFile file;
  file.network.widths = count_list(require(value, "widths", where), "widths");
  file.network.activation = parse_activation(require(value, "activation", where));
  const json& weights = require(value, "weights", where);
  if (weights.is_array()) {
    for (const auto& w : weights) file.network.weights.push_back(parse_weight_spec(w));
  } else {
    file.network.weights.assign(file.network.depth(), parse_weight_spec(weights));
  }
  if (value.contains("bias_variance")) file.network.bias_variance = as<double>(value.at("bias_variance"), "bias_variance");
  file.network.validate();
  file.inputs = parse_inputs(require(value, "inputs", where), base_dir);
  if (file.inputs.dim() != file.network.input_dim()) throw InvalidArgument("inputs do not have dimension n_0");
  if (value.contains("p")) file.p = as<int>(value.at("p"), "p");
  if (value.contains("quad_nodes")) file.kernel.nodes = as_count(value.at("quad_nodes"), "quad_nodes");
  if (value.contains("input_law")) file.kernel.input_law = parse_input_law(value.at("input_law"));
  if (value.contains("input_law_draws")) file.kernel.input_law_draws = as_count(value.at("input_law_draws"), "input_law_draws");
  if (value.contains("ledger")) file.ledger = value.at("ledger");
  return file;
}

NetworkFile load_network_file(const std::filesystem::path& path) {
  return parse_network_file(load_json_file(path), base_of(path));
}

SweepConfig parse_sweep_config(const json& value, const std::filesystem::path& base_dir) {
  const std::string where = "sweep config";
  check_keys(value, {"experiment_id", "inputs", "depths", "widths", "networks", "output_width", "families",
                     "activation", "replicates", "seeds", "p", "solver", "quad_nodes", "input_law", "input_law_draws",
                     "bound_mode", "measurement_replicates", "compute_bound", "output", "threads"},
             where);
  SweepConfig config;
  if (value.contains("experiment_id")) config.experiment_id = as<std::string>(value.at("experiment_id"), "experiment_id");
  config.inputs = parse_inputs(require(value, "inputs", where), base_dir);
  if (value.contains("networks")) {
    for (const auto& shape : value.at("networks")) config.networks.push_back(count_list(shape, "networks entry"));
  } else {
    config.depths = count_list(require(value, "depths", where), "depths");
    config.widths = count_list(require(value, "widths", where), "widths");
  }
  if (value.contains("output_width")) config.output_width = as_count(value.at("output_width"), "output_width");
  for (const auto& f : require(value, "families", where)) config.families.push_back(parse_weight_spec(f));
  config.activation = parse_activation(require(value, "activation", where));
  config.replicates = as_count(require(value, "replicates", where), "replicates");
  for (const auto& seed : require(value, "seeds", where)) {
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      throw InvalidArgument("seeds must be non-negative integers");
    }
    config.seeds.push_back(seed.get<std::uint64_t>());
  }
  if (value.contains("p")) config.p = as<int>(value.at("p"), "p");
  if (value.contains("solver")) {
    const json& solver = value.at("solver");
    check_keys(solver, {"kind", "cap", "eps", "max_iter", "tol"}, "solver");
    const std::string kind = as<std::string>(require(solver, "kind", "solver"), "solver kind");
    if (kind == "matching") {
      config.solver = SolverKind::matching;
    } else if (kind == "sinkhorn") {
      config.solver = SolverKind::sinkhorn;
    } else {
      throw InvalidArgument("solver kind must be \"matching\" or \"sinkhorn\"");
    }
    if (solver.contains("cap")) config.matching_cap = as_count(solver.at("cap"), "cap");
    if (solver.contains("eps")) config.sinkhorn.eps = as<double>(solver.at("eps"), "eps");
    if (solver.contains("max_iter")) config.sinkhorn.max_iter = as_count(solver.at("max_iter"), "max_iter");
    if (solver.contains("tol")) config.sinkhorn.tol = as<double>(solver.at("tol"), "tol");
  }
  if (value.contains("quad_nodes")) config.kernel.nodes = as_count(value.at("quad_nodes"), "quad_nodes");
  if (value.contains("input_law")) config.kernel.input_law = parse_input_law(value.at("input_law"));
  if (value.contains("input_law_draws")) {
    config.kernel.input_law_draws = as_count(value.at("input_law_draws"), "input_law_draws");
  }
  if (value.contains("bound_mode")) config.bound_mode = bound_mode_from_string(as<std::string>(value.at("bound_mode"), "bound_mode"));
  if (value.contains("measurement_replicates")) {
    config.measurement.replicates = as_count(value.at("measurement_replicates"), "measurement_replicates");
  }
  if (value.contains("compute_bound")) config.compute_bound = as<bool>(value.at("compute_bound"), "compute_bound");
  if (value.contains("output")) {
    std::filesystem::path out = as<std::string>(value.at("output"), "output");
    if (out.is_relative()) out = base_dir / out;
    config.output = out.string();
  }
  if (value.contains("threads")) config.threads = static_cast<unsigned>(as_count(value.at("threads"), "threads"));
  config.validate();
  return config;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(load_json_file(path), base_of(path));
}

}  // namespace fddgauss
