#pragma once

#include <cstdint>
#include <vector>

namespace innerdyn {

// Counter-based generator: every draw is a pure hash of (key, counter), so
// sample i of stream s depends only on (seed, s, i) and never on thread
// scheduling. The mixer is the 64-bit finalizer from SplitMix64.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t bits(std::uint64_t counter) const { return mix64(key_ + 0x9e3779b97f4a7c15ULL * counter); }

  // Uniform in [0,1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

// An i.i.d. base-kappa digit tape. Reading a 53-bit-precision window at
// offset j yields the j-th point of an exact kappa-adic orbit: shifting the
// window by one digit is exact multiplication by kappa mod 1. Iterating
// theta -> frac(kappa*theta) in floating point instead would discard one
// digit of true state per step and collapse to 0 after ~53 steps.
class DigitTape {
 public:
  DigitTape(const CounterRng& rng, std::uint64_t stream, int kappa, int length)
      : kappa_(kappa), digits_(length) {
    std::uint64_t counter = 0;
    if (kappa == 2) {
      int filled = 0;
      while (filled < length) {
        std::uint64_t w = rng.bits((stream << 20) + counter++);
        for (int b = 0; b < 64 && filled < length; ++b) digits_[filled++] = (w >> b) & 1u;
      }
    } else {
      // Rejection-free threshold sampling of digits in {0..kappa-1}.
      for (int i = 0; i < length; ++i) {
        std::uint64_t w = rng.bits((stream << 20) + counter++);
        digits_[i] = static_cast<std::uint32_t>((static_cast<unsigned __int128>(w) * kappa) >> 64);
      }
    }
    window_digits_ = 1;
    double span = kappa_;
    while (span < 0x1.0p53) {
      span *= kappa_;
      ++window_digits_;
    }
  }

  int max_offset() const { return static_cast<int>(digits_.size()) - window_digits_; }

  // Value in [0,1) read from window_digits_ digits starting at offset.
  double window(int offset) const {
    double v = 0.0;
    for (int i = window_digits_ - 1; i >= 0; --i) v = (v + digits_[offset + i]) / kappa_;
    return v;
  }

  // Sliding window over the tape: advance() shifts by one digit in O(1)
  // integer arithmetic, so a full orbit walk costs one multiply per step.
  class Window {
   public:
    explicit Window(const DigitTape& tape) : tape_(tape) {
      modulus_ = 1;
      for (int i = 0; i < tape.window_digits_; ++i) modulus_ *= tape.kappa_;
      state_ = 0;
      for (int i = 0; i < tape.window_digits_; ++i) state_ = state_ * tape.kappa_ + tape.digits_[i];
      next_ = tape.window_digits_;
    }

    double value() const { return static_cast<double>(state_) / static_cast<double>(modulus_); }

    bool advance() {
      if (next_ >= static_cast<int>(tape_.digits_.size())) return false;
      state_ = state_ * tape_.kappa_ % modulus_ + tape_.digits_[next_++];
      return true;
    }

   private:
    const DigitTape& tape_;
    unsigned __int128 state_;
    unsigned __int128 modulus_;
    int next_;
  };

 private:
  int kappa_;
  int window_digits_;
  std::vector<std::uint32_t> digits_;
};

}
