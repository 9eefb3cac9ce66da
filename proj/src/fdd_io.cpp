#include "fddgauss/fdd_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fddgauss/errors.hpp"

namespace fddgauss {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary FDD format assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw InvalidArgument("FDD binary: truncated header");
  return value;
}

std::size_t parse_count(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw InvalidArgument("FDD csv: bad value for " + key + ": \"" + text + "\"");
  }
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!text.empty() && blank(text.front())) text.remove_prefix(1);
  while (!text.empty() && blank(text.back())) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [end, error] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || error != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_fdd_binary(std::ostream& out, const FddSample& sample) {
  sample.check_shape();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, sample.replicates);
  put<std::uint64_t>(out, sample.coords);
  put<std::uint64_t>(out, sample.points);
  put<std::uint64_t>(out, sample.layer);
  put<std::uint32_t>(out, sample.provenance == Provenance::finite_network ? 0u : 1u);
  out.write(reinterpret_cast<const char*>(sample.data.data()),
            static_cast<std::streamsize>(sample.data.size() * sizeof(double)));
  if (!out) throw InvalidArgument("FDD binary: write failed");
}

FddSample read_fdd_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InvalidArgument("FDD binary: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw InvalidArgument("FDD binary: unsupported version " + std::to_string(version));
  const auto n_rep = get<std::uint64_t>(in);
  const auto coords = get<std::uint64_t>(in);
  const auto points = get<std::uint64_t>(in);
  const auto layer = get<std::uint64_t>(in);
  const auto provenance = get<std::uint32_t>(in);
  if (provenance > 1) throw InvalidArgument("FDD binary: bad provenance tag");
  FddSample sample(n_rep, coords, points, layer,
                   provenance == 0 ? Provenance::finite_network : Provenance::gaussian_limit);
  in.read(reinterpret_cast<char*>(sample.data.data()),
          static_cast<std::streamsize>(sample.data.size() * sizeof(double)));
  if (!in) throw InvalidArgument("FDD binary: truncated data");
  sample.check_shape();
  return sample;
}

void write_fdd_csv(std::ostream& out, const FddSample& sample) {
  sample.check_shape();
  out << "# fdd replicates=" << sample.replicates << " coords=" << sample.coords << " points=" << sample.points
      << " layer=" << sample.layer << " provenance=" << to_string(sample.provenance) << "\n";
  const std::size_t width = sample.replicate_size();
  for (std::size_t r = 0; r < sample.replicates; ++r) {
    const auto rep = sample.replicate(r);
    for (std::size_t k = 0; k < width; ++k) {
      if (k) out << ',';
      out << format_double(rep[k]);
    }
    out << '\n';
  }
  if (!out) throw InvalidArgument("FDD csv: write failed");
}

FddSample read_fdd_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# fdd", 0) != 0) throw InvalidArgument("FDD csv: missing '# fdd' header");
  std::istringstream header(line.substr(5));
  std::string field;
  std::size_t n_rep = 0, coords = 0, points = 0, layer = 0;
  Provenance provenance = Provenance::finite_network;
  bool seen[5] = {false, false, false, false, false};
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw InvalidArgument("FDD csv: malformed header field \"" + field + "\"");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "replicates") {
      n_rep = parse_count(value, key);
      seen[0] = true;
    } else if (key == "coords") {
      coords = parse_count(value, key);
      seen[1] = true;
    } else if (key == "points") {
      points = parse_count(value, key);
      seen[2] = true;
    } else if (key == "layer") {
      layer = parse_count(value, key);
      seen[3] = true;
    } else if (key == "provenance") {
      if (value == "finite_network") {
        provenance = Provenance::finite_network;
      } else if (value == "gaussian_limit") {
        provenance = Provenance::gaussian_limit;
      } else {
        throw InvalidArgument("FDD csv: unknown provenance \"" + value + "\"");
      }
      seen[4] = true;
    } else {
      throw InvalidArgument("FDD csv: unknown header key \"" + key + "\"");
    }
  }
  for (bool s : seen) {
    if (!s) throw InvalidArgument("FDD csv: header must give replicates, coords, points, layer and provenance");
  }
  FddSample sample(n_rep, coords, points, layer, provenance);
  const std::size_t width = sample.replicate_size();
  for (std::size_t r = 0; r < n_rep; ++r) {
    if (!std::getline(in, line)) throw InvalidArgument("FDD csv: expected " + std::to_string(n_rep) + " rows");
    std::istringstream row(line);
    std::string cell;
    std::size_t k = 0;
    auto slot = sample.replicate(r);
    while (std::getline(row, cell, ',')) {
      if (k >= width) throw InvalidArgument("FDD csv: row " + std::to_string(r) + " has too many values");
      const std::optional<double> value = parse_double(cell);
      if (!value) throw InvalidArgument("FDD csv: bad number \"" + cell + "\" in row " + std::to_string(r));
      slot[k++] = *value;
    }
    if (k != width) throw InvalidArgument("FDD csv: row " + std::to_string(r) + " has too few values");
  }
  sample.check_shape();
  return sample;
}

void save_fdd(const std::string& path, const FddSample& sample, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InvalidArgument("cannot open \"" + path + "\" for writing");
  if (binary) {
    write_fdd_binary(out, sample);
  } else {
    write_fdd_csv(out, sample);
  }
}

FddSample load_fdd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open \"" + path + "\"");
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, kMagic, 4) == 0) return read_fdd_binary(in);
  return read_fdd_csv(in);
}

nlohmann::json kernel_to_json(const KernelMatrix& K) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t a = 0; a < K.size(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t b = 0; b < K.size(); ++b) row.push_back(K(a, b));
    rows.push_back(row);
  }
  return {{"layer", K.layer}, {"size", K.size()}, {"entries", rows}, {"mc_stderr", K.mc_stderr}};
}

KernelMatrix kernel_from_json(const nlohmann::json& value) {
  if (!value.is_object() || !value.contains("entries") || !value.contains("layer")) {
    throw InvalidArgument("kernel JSON needs \"layer\" and \"entries\"");
  }
  const auto& rows = value.at("entries");
  const std::size_t s = rows.size();
  KernelMatrix K;
  K.layer = value.at("layer").get<std::size_t>();
  K.entries.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t a = 0; a < s; ++a) {
    if (rows[a].size() != s) throw InvalidArgument("kernel JSON: entries must be square");
    for (std::size_t b = 0; b < s; ++b) {
      K.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rows[a][b].get<double>();
    }
  }
  if (value.contains("mc_stderr")) K.mc_stderr = value.at("mc_stderr").get<double>();
  K.check_psd();
  return K;
}

}  // namespace fddgauss
