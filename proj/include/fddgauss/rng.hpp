#pragma once

// Counter-based random streams.
//
// All randomness in the toolkit comes from Philox4x32-10 (Salmon et al., SC'11).
// A stream is addressed by (seed, purpose, layer, replicate): the seed becomes the
// Philox key and the other three coordinates are hashed into the upper half of
// the 128-bit counter while the lower half counts blocks, so every weight
// matrix has its own independent sequence and sampling order across threads
// cannot change any value.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

#if defined(__x86_64__) && defined(__GNUC__)
#include <immintrin.h>
#define FDDGAUSS_PHILOX_AVX2 1
#endif

namespace fddgauss {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Distinguishes the independent sample families drawn from one seed.
enum class StreamPurpose : std::uint32_t {
  network = 1,   // finite-network weights
  limit = 2,     // Gaussian-limit draws compared against the network
  floor_a = 3,   // first sample of a matching-floor pair
  floor_b = 4,   // second sample of a matching-floor pair
  input_law = 5, // Monte Carlo over the input-layer weight law
  measure = 6,   // moment measurements for the bound
  user = 7,      // plain-seed entry points
};

struct StreamId {
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::user;
  std::uint64_t layer = 0;
  std::uint64_t replicate = 0;
};

namespace detail {

// 128-layer ziggurat tables for the standard normal (Doornik's formulation).
struct ZigguratTables {
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  double x[kLayers + 1];
  double ratio[kLayers];

  ZigguratTables() {
    double f = std::exp(-0.5 * kR * kR);
    x[0] = kV / f;
    x[1] = kR;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kV / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

class RngStream {
 public:
  // Philox blocks generated per refill; consumption order is unaffected.
  static constexpr int kBatch = 32;

  explicit RngStream(const StreamId& id) {
    key_ = {static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)};
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(id.purpose));
    h = splitmix64(h ^ id.layer);
    h = splitmix64(h ^ (id.replicate * 0xD6E8FEB86659FD93ull));
    hi_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  }

  std::uint32_t next_u32() {
    if (index_ == 4 * kBatch) refill();
    return buffer_[index_++];
  }

  // The earlier 32-bit word forms the high half.
  std::uint64_t next_u64() {
    if (index_ + 2 > 4 * kBatch) {
      const std::uint64_t hi = next_u32();
      return (hi << 32) | next_u32();
    }
    const std::uint64_t word = (std::uint64_t{buffer_[index_]} << 32) | buffer_[index_ + 1];
    index_ += 2;
    return word;
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() { return to_unit(next_u64()); }

  // Uniform on (-1, 1).
  double symmetric_uniform() { return 2.0 * uniform() - 1.0; }

  // Fair random sign; bits of each 64-bit word are used low to high.
  double sign() {
    if (sign_bits_left_ == 0) {
      sign_bits_ = next_u64();
      sign_bits_left_ = 64;
    }
    const bool bit = sign_bits_ & 1u;
    sign_bits_ >>= 1;
    --sign_bits_left_;
    return bit ? 1.0 : -1.0;
  }

  // scale * sign() for count consecutive calls, 64 signs per word.
  void fill_signs(double* out, std::size_t count, double scale) {
    std::size_t i = 0;
    while (i < count && sign_bits_left_ > 0) out[i++] = scale * sign();
    // A clear bit flips the sign of scale.
    const std::uint64_t base = std::bit_cast<std::uint64_t>(scale);
    for (; i + 64 <= count; i += 64) {
      const std::uint64_t word = next_u64();
      for (int b = 0; b < 64; ++b) out[i + b] = std::bit_cast<double>(base ^ ((~(word >> b) & 1u) << 63));
    }
    while (i < count) out[i++] = scale * sign();
  }

  // Standard normal by the ziggurat method. The common path uses one 64-bit
  // word: bits 11..63 give the abscissa and bits 0..6 the layer.
  double normal() { return normal(detail::ziggurat()); }

  // scale * normal() for count consecutive calls.
  void fill_normals(double* out, std::size_t count, double scale) {
    const detail::ZigguratTables& z = detail::ziggurat();
    for (std::size_t i = 0; i < count; ++i) out[i] = scale * normal(z);
  }

  // scale * symmetric_uniform() for count consecutive calls.
  void fill_symmetric_uniform(double* out, std::size_t count, double scale) {
    for (std::size_t i = 0; i < count; ++i) out[i] = scale * symmetric_uniform();
  }

  // Gamma(shape, 1) for shape >= 1 (Marsaglia & Tsang).
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Student-t with nu degrees of freedom (nu > 2 so the gamma shape is >= 1).
  double student_t(double nu) {
    const double chi2 = 2.0 * gamma(0.5 * nu);
    return normal() / std::sqrt(chi2 / nu);
  }

 private:
  static double to_unit(std::uint64_t word) {
    return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(const detail::ZigguratTables& z) {
    const std::uint64_t word = next_u64();
    const double u = 2.0 * to_unit(word) - 1.0;
    const int i = static_cast<int>(word & 0x7F);
    if (std::abs(u) < z.ratio[i]) return u * z.x[i];
    return normal_reject(z, u, i);
  }

  [[gnu::noinline]] double normal_reject(const detail::ZigguratTables& z, double u, int i) {
    if (i == 0) return normal_tail(u < 0.0);
    const double x = u * z.x[i];
    const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
    const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
    if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    return normal(z);
  }

  double normal_tail(bool negative) {
    constexpr double r = detail::ZigguratTables::kR;
    double x, y;
    do {
      x = std::log(uniform()) / r;
      y = std::log(uniform());
    } while (-2.0 * y < x * x);
    return negative ? x - r : r - x;
  }

  // Counter words 0-1 hold the block index, words 2-3 the stream hash.
  void refill() {
    std::uint32_t c[4][kBatch];
    for (int b = 0; b < kBatch; ++b) {
      const std::uint64_t block = block_ + static_cast<std::uint64_t>(b);
      c[0][b] = static_cast<std::uint32_t>(block);
      c[1][b] = static_cast<std::uint32_t>(block >> 32);
      c[2][b] = hi_[0];
      c[3][b] = hi_[1];
    }
#ifdef FDDGAUSS_PHILOX_AVX2
    static const bool avx2 = __builtin_cpu_supports("avx2");
    if (avx2) {
      rounds_avx2(c, key_);
    } else {
      rounds_scalar(c, key_);
    }
#else
    rounds_scalar(c, key_);
#endif
    for (int b = 0; b < kBatch; ++b) {
      for (int j = 0; j < 4; ++j) buffer_[4 * b + j] = c[j][b];
    }
    block_ += kBatch;
    index_ = 0;
  }

  static void rounds_scalar(std::uint32_t (&c)[4][kBatch], Philox4x32::Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      for (int b = 0; b < kBatch; ++b) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0][b];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2][b];
        const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c[1][b] ^ key[0];
        const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c[3][b] ^ key[1];
        c[1][b] = static_cast<std::uint32_t>(p1);
        c[3][b] = static_cast<std::uint32_t>(p0);
        c[0][b] = n0;
        c[2][b] = n2;
      }
    }
  }

#ifdef FDDGAUSS_PHILOX_AVX2
  // Eight blocks per register; even and odd lanes are multiplied separately.
  // All register groups advance together to hide multiply latency.
  [[gnu::target("avx2")]] static void rounds_avx2(std::uint32_t (&c)[4][kBatch], Philox4x32::Key key) {
    constexpr int kGroups = kBatch / 8;
    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(0xD2511F53u));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(0xCD9E8D57u));
    __m256i x[4][kGroups];
    for (int j = 0; j < 4; ++j) {
      for (int g = 0; g < kGroups; ++g) {
        x[j][g] = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(&c[j][8 * g]));
      }
    }
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const __m256i k0 = _mm256_set1_epi32(static_cast<int>(key[0]));
      const __m256i k1 = _mm256_set1_epi32(static_cast<int>(key[1]));
      for (int g = 0; g < kGroups; ++g) {
        const __m256i pe0 = _mm256_mul_epu32(x[0][g], m0);
        const __m256i po0 = _mm256_mul_epu32(_mm256_srli_epi64(x[0][g], 32), m0);
        const __m256i pe1 = _mm256_mul_epu32(x[2][g], m1);
        const __m256i po1 = _mm256_mul_epu32(_mm256_srli_epi64(x[2][g], 32), m1);
        const __m256i hi0 = _mm256_blend_epi32(_mm256_srli_epi64(pe0, 32), po0, 0xAA);
        const __m256i lo0 = _mm256_blend_epi32(pe0, _mm256_slli_epi64(po0, 32), 0xAA);
        const __m256i hi1 = _mm256_blend_epi32(_mm256_srli_epi64(pe1, 32), po1, 0xAA);
        const __m256i lo1 = _mm256_blend_epi32(pe1, _mm256_slli_epi64(po1, 32), 0xAA);
        x[0][g] = _mm256_xor_si256(_mm256_xor_si256(hi1, x[1][g]), k0);
        x[2][g] = _mm256_xor_si256(_mm256_xor_si256(hi0, x[3][g]), k1);
        x[1][g] = lo1;
        x[3][g] = lo0;
      }
    }
    for (int j = 0; j < 4; ++j) {
      for (int g = 0; g < kGroups; ++g) {
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(&c[j][8 * g]), x[j][g]);
      }
    }
  }
#endif

  Philox4x32::Key key_{};
  std::array<std::uint32_t, 2> hi_{};
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4 * kBatch> buffer_{};
  int index_ = 4 * kBatch;
  std::uint64_t sign_bits_ = 0;
  int sign_bits_left_ = 0;
};

}  // namespace fddgauss
