#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fddgauss/forward_sim.hpp"
#include "fddgauss/nngp_kernel.hpp"

namespace fddgauss {

// Binary layout (little-endian): "FDDS", u32 version = 1, u64 N, u64 n, u64 s,
// u64 layer, u32 provenance (0 finite_network, 1 gaussian_limit), then N*n*s
// doubles in FddSample order.
void write_fdd_binary(std::ostream& out, const FddSample& sample);
FddSample read_fdd_binary(std::istream& in);

// Text layout: one "# fdd ..." header line with key=value shape fields, then
// one line per replicate with its n*s values, comma-separated, in %.17g.
void write_fdd_csv(std::ostream& out, const FddSample& sample);
FddSample read_fdd_csv(std::istream& in);

void save_fdd(const std::string& path, const FddSample& sample, bool binary);
// Detects the format from the leading magic bytes.
FddSample load_fdd(const std::string& path);

nlohmann::json kernel_to_json(const KernelMatrix& K);
KernelMatrix kernel_from_json(const nlohmann::json& value);

// %.17g rendering used by every text output.
std::string format_double(double value);
// Exact inverse of format_double; surrounding blanks are allowed. Accepts
// subnormals, nan and inf. Empty on malformed text.
std::optional<double> parse_double(std::string_view text);

}  // namespace fddgauss
