#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fddgauss/experiments.hpp"
#include "fddgauss/forward_sim.hpp"
#include "fddgauss/nngp_kernel.hpp"
#include "fddgauss/weight_models.hpp"

namespace fddgauss {

nlohmann::json load_json_file(const std::filesystem::path& path);

// {"family": "...", "c_w": x, "nu": y?}
WeightSpec parse_weight_spec(const nlohmann::json& value);
nlohmann::json weight_spec_to_json(const WeightSpec& spec);

// "relu" | "tanh" | "identity" | {"kind": "leaky_relu", "slope": a}
ActivationSpec parse_activation(const nlohmann::json& value);

// Inline array of points or {"csv": path}; relative paths resolve against base_dir.
InputSet parse_inputs(const nlohmann::json& value, const std::filesystem::path& base_dir);
// One point per line, comma-separated; blank lines and '#' lines are skipped.
InputSet read_inputs_csv(const std::filesystem::path& path);

// Network file: the network description plus the inputs and evaluation knobs.
struct NetworkFile {
  NetworkConfig network;
  InputSet inputs;
  int p = 3;
  KernelOptions kernel;
  nlohmann::json ledger = nlohmann::json::object();
};

NetworkFile parse_network_file(const nlohmann::json& value, const std::filesystem::path& base_dir);
NetworkFile load_network_file(const std::filesystem::path& path);

SweepConfig parse_sweep_config(const nlohmann::json& value, const std::filesystem::path& base_dir);
SweepConfig load_sweep_config(const std::filesystem::path& path);

}  // namespace fddgauss
