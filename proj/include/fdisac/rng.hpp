#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

// Counter-based random number generation (Philox4x64-10, Random123 family).
//
// Every consumer owns a Stream keyed by (seed, stream_id). Streams with
// distinct keys are statistically independent, so channel realizations and
// Monte-Carlo workers can draw in parallel without shared state and the
// results do not depend on scheduling.

namespace fdisac::rng {

using u64 = std::uint64_t;

struct Philox4x64 {
  static constexpr u64 kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr u64 kMul1 = 0xCA5A826395121157ULL;
  static constexpr u64 kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr u64 kWeyl1 = 0xBB67AE8584CAA73BULL;

  // One 10-round block: 256 random bits from (counter, key).
  static std::array<u64, 4> block(std::array<u64, 4> ctr, std::array<u64, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const auto p0 = mulhilo(kMul0, ctr[0]);
      const auto p1 = mulhilo(kMul1, ctr[2]);
      ctr = {p1.first ^ ctr[1] ^ key[0], p1.second, p0.first ^ ctr[3] ^ key[1], p0.second};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static std::pair<u64, u64> mulhilo(u64 a, u64 b) {
    const auto p = static_cast<unsigned __int128>(a) * b;
    return {static_cast<u64>(p >> 64), static_cast<u64>(p)};
  }
};

// Sequential view over the Philox sequence keyed by (seed, stream).
class Stream {
 public:
  Stream(u64 seed, u64 stream) : key_{seed, stream} {}

  u64 next_u64() {
    if (pos_ == 4) {
      buf_ = Philox4x64::block({counter_++, 0, 0, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double next_uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double next_phase() { return 2.0 * M_PI * next_uniform(); }

  // Standard normal via Box-Muller (pairs cached, draw count deterministic).
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_uniform_pos()));
    const double t = next_phase();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Circularly-symmetric complex normal, unit variance: E|z|^2 = 1.
  std::complex<double> next_cgaussian() {
    const double r = std::sqrt(-std::log(next_uniform_pos()));
    const double t = next_phase();
    return {r * std::cos(t), r * std::sin(t)};
  }

 private:
  std::array<u64, 2> key_;
  std::array<u64, 4> buf_{};
  u64 counter_ = 0;
  int pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fdisac::rng
