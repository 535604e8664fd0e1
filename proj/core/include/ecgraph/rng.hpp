#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ecgraph {

// mt19937_64 has a standard-pinned output sequence. The std distributions do
// not, so the transforms below are spelled out; outputs are identical across
// compilers for a given seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift; bias is < 2^-64 * n, irrelevant at our scales
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Deterministic derived stream; used so consumers (shuffle, dropout,
  // augmentation) cannot perturb each other's sequences.
  Rng fork(std::uint64_t salt) const {
    std::uint64_t s = seed_mix_ ^ (salt * 0x9e3779b97f4a7c15ull);
    return Rng(s == 0 ? 1 : s);
  }

  static Rng seeded(std::uint64_t seed) {
    Rng r(seed == 0 ? 0x853c49e6748fea9bull : seed);
    r.seed_mix_ = seed * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull;
    return r;
  }

  template <typename T> void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 gen_;
  std::uint64_t seed_mix_ = 0x9e3779b97f4a7c15ull;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace ecgraph
