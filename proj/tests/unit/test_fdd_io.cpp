#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "fddgauss/errors.hpp"
#include "fddgauss/fdd_io.hpp"

using namespace fddgauss;

namespace {

FddSample sample() {
  FddSample out(3, 2, 4, 2, Provenance::gaussian_limit);
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = std::sin(1.0 + k) * std::pow(10.0, k % 7 - 3.0);
  out.data[5] = -0.0;
  out.data[6] = std::numeric_limits<double>::denorm_min();
  return out;
}

void check_equal(const FddSample& a, const FddSample& b) {
  CHECK(a.replicates == b.replicates);
  CHECK(a.coords == b.coords);
  CHECK(a.points == b.points);
  CHECK(a.layer == b.layer);
  CHECK(a.provenance == b.provenance);
  REQUIRE(a.data.size() == b.data.size());
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    CHECK(a.data[k] == b.data[k]);
    CHECK(std::signbit(a.data[k]) == std::signbit(b.data[k]));
  }
}

}  // namespace

TEST_SUITE("fdd_io") {
  TEST_CASE("binary round trip is bit exact") {
    std::stringstream io;
    write_fdd_binary(io, sample());
    CHECK(io.str().substr(0, 4) == "FDDS");
    CHECK(io.str().size() == 4 + 4 + 8 * 4 + 4 + 8 * 24);
    check_equal(read_fdd_binary(io), sample());
  }

  TEST_CASE("text round trip is bit exact") {
    std::stringstream io;
    write_fdd_csv(io, sample());
    check_equal(read_fdd_csv(io), sample());
  }

  TEST_CASE("file helpers detect the format") {
    const auto dir = std::filesystem::temp_directory_path();
    save_fdd((dir / "fddgauss_io.bin").string(), sample(), true);
    save_fdd((dir / "fddgauss_io.csv").string(), sample(), false);
    check_equal(load_fdd((dir / "fddgauss_io.bin").string()), sample());
    check_equal(load_fdd((dir / "fddgauss_io.csv").string()), sample());
    CHECK_THROWS_AS(load_fdd((dir / "fddgauss_io_absent").string()), InvalidArgument);
  }

  TEST_CASE("corrupt input is rejected") {
    std::stringstream io;
    write_fdd_binary(io, sample());
    std::string bytes = io.str();
    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_fdd_binary(truncated), InvalidArgument);
    bytes[0] = 'X';
    std::istringstream bad_magic(bytes);
    CHECK_THROWS_AS(read_fdd_binary(bad_magic), InvalidArgument);

    std::stringstream text;
    write_fdd_csv(text, sample());
    std::string lines = text.str();
    lines.erase(lines.rfind(','));
    lines += "\n";
    std::istringstream short_row(lines);
    CHECK_THROWS_AS(read_fdd_csv(short_row), InvalidArgument);
  }

  TEST_CASE("kernel JSON round trip") {
    KernelMatrix K;
    K.layer = 3;
    K.entries = Eigen::MatrixXd{{2.0, 0.1 / 3.0}, {0.1 / 3.0, 0.7}};
    K.mc_stderr = 0.25;
    const KernelMatrix back = kernel_from_json(kernel_to_json(K));
    CHECK(back.layer == 3);
    CHECK(back.entries == K.entries);
    CHECK(back.mc_stderr == 0.25);
    nlohmann::json broken = kernel_to_json(K);
    broken["entries"][0].erase(1);
    CHECK_THROWS_AS(kernel_from_json(broken), InvalidArgument);
  }

  TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(2.0) == "2");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }
}
