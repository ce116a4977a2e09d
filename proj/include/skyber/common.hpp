// Shared primitives: error types, the seeded PRNG, seed mixing and the
// deterministic ordered-parallel helper used by trace synthesis.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace skyber {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised on malformed or mismatched input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

inline constexpr uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-item seed derivation: seed_i = splitmix64 output for state
/// master + i * golden, i.e. the i-th output of a splitmix64 stream started
/// at `master`. Independent of evaluation order.
inline constexpr uint64_t derive_seed(uint64_t master, uint64_t index) {
  uint64_t s = master + index * 0x9E3779B97F4A7C15ULL;
  return splitmix64(s);
}

/// xoshiro256** 1.0 (Blackman and Vigna). State is expanded from a 64-bit
/// seed with splitmix64 so every seed, including 0, gives a valid state.
class Xoshiro256 {
 public:
  using result_type = uint64_t;

  explicit Xoshiro256(uint64_t seed = 0) { reseed(seed); }

  explicit Xoshiro256(std::span<const uint8_t, 32> seed) {
    uint64_t mix = 0;
    for (size_t w = 0; w < 4; ++w) {
      uint64_t v = 0;
      for (size_t b = 0; b < 8; ++b) v |= uint64_t(seed[8 * w + b]) << (8 * b);
      mix ^= v + 0x9E3779B97F4A7C15ULL * (w + 1);
      s_[w] = splitmix64(mix);
    }
  }

  void reseed(uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }

  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~uint64_t{0}; }

  uint64_t operator()() {
    const uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, bound) by rejection (no modulo bias).
  uint32_t below(uint32_t bound) {
    const uint64_t limit = max() - max() % bound;
    uint64_t x;
    do x = (*this)(); while (x >= limit);
    return uint32_t(x % bound);
  }

  /// Uniform double in (0, 1].
  double unit_open0() { return double(((*this)() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal pair by Box-Muller.
  std::pair<double, double> gaussian_pair() {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double r = std::sqrt(-2.0 * std::log(unit_open0()));
    const double a = two_pi * (double((*this)() >> 11) * 0x1.0p-53);
    return {r * std::cos(a), r * std::sin(a)};
  }

  /// Nonzero 32-bit value, used for RPG seeds (the LFSR cannot start at 0).
  uint32_t nonzero_u32() {
    uint32_t v;
    do v = uint32_t((*this)() >> 32); while (v == 0);
    return v;
  }

  void fill(std::span<uint8_t> out) {
    for (size_t i = 0; i < out.size(); i += 8) {
      uint64_t v = (*this)();
      for (size_t b = 0; b < 8 && i + b < out.size(); ++b) out[i + b] = uint8_t(v >> (8 * b));
    }
  }

 private:
  std::array<uint64_t, 4> s_{};
};

/// Runs produce(i) for i in [0, n) on up to `threads` workers and hands the
/// results to consume(i, value) strictly in index order on the calling
/// thread. Output is therefore independent of the thread count.
template <class Produce, class Consume>
void ordered_parallel(size_t n, unsigned threads, Produce&& produce, Consume&& consume) {
  using Value = std::invoke_result_t<Produce&, size_t>;
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) consume(i, produce(i));
    return;
  }
  std::mutex mu;
  std::condition_variable cv;
  std::map<size_t, Value> ready;
  size_t next_claim = 0;
  size_t next_consume = 0;
  const size_t window = size_t(threads) * 2;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return failure || next_claim >= n || next_claim < next_consume + window; });
        if (failure || next_claim >= n) return;
        i = next_claim++;
      }
      try {
        Value v = produce(i);
        std::lock_guard lock(mu);
        ready.emplace(i, std::move(v));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  try {
    while (next_consume < n) {
      std::optional<Value> v;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return failure || ready.count(next_consume) != 0; });
        if (failure) break;
        auto it = ready.find(next_consume);
        v.emplace(std::move(it->second));
        ready.erase(it);
      }
      consume(next_consume, std::move(*v));
      {
        std::lock_guard lock(mu);
        ++next_consume;
      }
      cv.notify_all();
    }
  } catch (...) {
    std::lock_guard lock(mu);
    if (!failure) failure = std::current_exception();
  }
  cv.notify_all();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace skyber
