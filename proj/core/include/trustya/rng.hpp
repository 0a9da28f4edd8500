#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace trustya {

std::uint64_t splitmix64(std::uint64_t x);

// Seed for an independent stream (policy RNG of one seat, name generation...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic random stream. std::mt19937_64 output is fixed by the
// standard; the distributions on top are implemented here so that draws are
// identical across standard libraries. Every raw 64-bit draw is counted.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() {
    ++draws_;
    return engine_();
  }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace trustya
