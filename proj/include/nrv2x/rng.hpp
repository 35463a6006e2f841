#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nrv2x {

// Deterministic seed derivation: every consumer of randomness owns a stream
// derived from (master seed, textual key, numeric ids). Streams are
// independent of the order modules are constructed in, so adding a module or
// reordering the slot loop does not perturb the draws seen by the others.
//
// Derivation: FNV-1a over the key bytes and ids, mixed with the master seed
// through two rounds of splitmix64. Documented in README.md (reproducibility).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view key) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key,
                                 std::uint64_t id0 = 0, std::uint64_t id1 = 0) {
    std::uint64_t h = fnv1a(key);
    h = splitmix64(h ^ splitmix64(master));
    h = splitmix64(h ^ (id0 * 0x9e3779b97f4a7c15ULL));
    h = splitmix64(h ^ (id1 * 0xc2b2ae3d27d4eb4fULL));
    return h;
}

/// A named random stream. Thin wrapper over mt19937_64 so call sites carry
/// the stream identity in their construction, not in global state.
class RngStream {
  public:
    RngStream() : engine_(0) {}
    RngStream(std::uint64_t master, std::string_view key, std::uint64_t id0 = 0,
              std::uint64_t id1 = 0)
        : engine_(derive_seed(master, key, id0, id1)) {}

    explicit RngStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

    std::mt19937_64& engine() { return engine_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    double gaussian(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    double exponential(double mean) {
        return std::exponential_distribution<double>(1.0 / mean)(engine_);
    }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace nrv2x
