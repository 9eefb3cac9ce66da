#include <doctest.h>

#include <cstdint>
#include <vector>

#include "fddgauss/rng.hpp"

using namespace fddgauss;

TEST_SUITE("rng") {
  TEST_CASE("philox4x32-10 known-answer vectors") {
    CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
          Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("stream words match the scalar block function") {
    const StreamId id{0x1234567890abcdefull, StreamPurpose::network, 3, 77};
    RngStream rng(id);
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(id.purpose));
    h = splitmix64(h ^ id.layer);
    h = splitmix64(h ^ (id.replicate * 0xD6E8FEB86659FD93ull));
    const Philox4x32::Key key{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)};
    for (std::uint32_t block = 0; block < 3 * RngStream::kBatch + 5; ++block) {
      const auto out = Philox4x32::generate({block, 0, static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)}, key);
      for (std::uint32_t word : out) REQUIRE(rng.next_u32() == word);
    }
  }

  TEST_CASE("next_u64 puts the earlier word high") {
    // Offset 1 makes every fourth word straddle a refill.
    for (int offset : {0, 1}) {
      RngStream words(StreamId{9}), pairs(StreamId{9});
      for (int i = 0; i < offset; ++i) REQUIRE(pairs.next_u32() == words.next_u32());
      for (int i = 0; i < 300; ++i) {
        const std::uint64_t hi = words.next_u32();
        const std::uint64_t lo = words.next_u32();
        REQUIRE(pairs.next_u64() == ((hi << 32) | lo));
      }
    }
  }

  TEST_CASE("uniform stays inside the open unit interval") {
    RngStream rng(StreamId{1});
    for (int i = 0; i < 100000; ++i) {
      const double u = rng.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }

  TEST_CASE("distinct stream ids give distinct output") {
    RngStream a(StreamId{5, StreamPurpose::network, 0, 0});
    RngStream b(StreamId{5, StreamPurpose::network, 0, 1});
    RngStream c(StreamId{5, StreamPurpose::limit, 0, 0});
    RngStream d(StreamId{6, StreamPurpose::network, 0, 0});
    const std::uint64_t x = a.next_u64();
    CHECK(x != b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }

  TEST_CASE("bulk fills equal repeated scalar draws") {
    for (std::size_t lead : {0, 1, 13, 63, 64, 65}) {
      CAPTURE(lead);
      RngStream a(StreamId{42}), b(StreamId{42});
      std::vector<double> bulk(1000 + lead);
      for (std::size_t i = 0; i < lead; ++i) REQUIRE(a.sign() == b.sign());
      a.fill_signs(bulk.data(), 1000, 0.25);
      for (std::size_t i = 0; i < 1000; ++i) REQUIRE(bulk[i] == 0.25 * b.sign());
      REQUIRE(a.next_u64() == b.next_u64());
      REQUIRE(a.sign() == b.sign());
    }
    RngStream a(StreamId{43}), b(StreamId{43});
    std::vector<double> bulk(5000);
    a.fill_normals(bulk.data(), bulk.size(), 1.5);
    for (double v : bulk) REQUIRE(v == 1.5 * b.normal());
    a.fill_symmetric_uniform(bulk.data(), bulk.size(), 0.5);
    for (double v : bulk) REQUIRE(v == 0.5 * b.symmetric_uniform());
  }

  TEST_CASE("normal draws have unit variance and normal tails") {
    RngStream rng(StreamId{2024});
    const int n = 2000000;
    double sum = 0.0, sq = 0.0, fourth = 0.0;
    int beyond3 = 0;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      sum += z;
      sq += z * z;
      fourth += z * z * z * z;
      if (std::abs(z) > 3.0) ++beyond3;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(fourth / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
    // P(|Z| > 3) = 0.0026998.
    const double p3 = 0.0026997960632601866;
    CHECK(std::abs(beyond3 / static_cast<double>(n) - p3) < 5.0 * std::sqrt(p3 / n));
  }

  TEST_CASE("gamma and student-t moments") {
    RngStream rng(StreamId{77});
    const int n = 400000;
    double g = 0.0, g2 = 0.0, t2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(4.5);
      g += x;
      g2 += x * x;
      const double t = rng.student_t(9.0);
      t2 += t * t;
    }
    CHECK(std::abs(g / n - 4.5) < 5.0 * std::sqrt(4.5 / n));
    CHECK(std::abs(g2 / n - g / n * (g / n) - 4.5) < 0.1);
    // Var t_9 = 9/7; Var(T^2) = E T^4 - (9/7)^2 with E T^4 = 3 * 81 / 35.
    const double var_t2 = 3.0 * 81.0 / 35.0 - (9.0 / 7.0) * (9.0 / 7.0);
    CHECK(std::abs(t2 / n - 9.0 / 7.0) < 5.0 * std::sqrt(var_t2 / n));
  }
}
