#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace acdsim {

// Stable 64-bit FNV-1a. Used for stream naming and scenario hashing; the
// value must never depend on the standard library's std::hash.
inline constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the named stream `name` under `master_seed`.
inline constexpr std::uint64_t stream_seed(std::uint64_t master_seed,
                                           std::string_view name) noexcept {
  return splitmix64(master_seed ^ fnv1a64(name));
}

/// Seed for episode `episode` of evaluation seed `seed`.
inline constexpr std::uint64_t episode_seed(std::uint64_t seed,
                                            std::uint64_t episode) noexcept {
  return splitmix64(splitmix64(seed) + episode);
}

/// Maps a raw 64-bit engine output to [0, 1) using its top 53 bits.
/// std::uniform_real_distribution is implementation-defined, so draws are
/// converted by hand to keep traces portable.
inline double unit_interval(std::uint64_t raw) noexcept {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

inline std::size_t scale_index(double u, std::size_t n) noexcept {
  auto i = static_cast<std::size_t>(u * static_cast<double>(n));
  return i < n ? i : n - 1;
}

/// Thrown when an enumeration hook meets a continuous draw.
class NotEnumerable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Intercepts discrete draws, e.g. to enumerate every branch of a step.
class DrawHook {
 public:
  virtual ~DrawHook() = default;
  virtual bool bernoulli(std::string_view stream, double p) = 0;
  virtual std::size_t index(std::string_view stream, std::size_t n) = 0;
  virtual double uniform(std::string_view stream) = 0;
};

// Well-known stream names.
namespace streams {
inline constexpr std::string_view kRed = "red";
inline constexpr std::string_view kRedSwitch = "red.switch";
inline constexpr std::string_view kRedStealth = "red.stealth";
inline constexpr std::string_view kGreen = "green";
inline constexpr std::string_view kSensor = "sensor";
inline constexpr std::string_view kBlue = "blue";
}  // namespace streams

/// Named deterministic random streams derived from one master seed.
///
/// Each stream is an independent mt19937_64 seeded with
/// stream_seed(master, name), created on first use. Draw conventions:
///   uniform      one engine output, converted by unit_interval
///   bernoulli    one uniform u, true iff u < p
///   index(n)     one uniform u, floor(u * n)
///   exponential  one uniform u, -log(1 - u) / rate
class RandomStreams {
 public:
  RandomStreams() = default;
  explicit RandomStreams(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return master_; }

  void set_hook(DrawHook* hook) noexcept { hook_ = hook; }
  DrawHook* hook() const noexcept { return hook_; }

  double uniform(std::string_view name) {
    if (hook_) return hook_->uniform(name);
    return unit_interval(engine(name)());
  }

  bool bernoulli(std::string_view name, double p) {
    if (hook_) return hook_->bernoulli(name, p);
    return unit_interval(engine(name)()) < p;
  }

  std::size_t index(std::string_view name, std::size_t n) {
    if (n == 0) throw std::invalid_argument("index draw over an empty range");
    if (hook_) return hook_->index(name, n);
    return scale_index(unit_interval(engine(name)()), n);
  }

  double exponential(std::string_view name, double rate) {
    const double u = uniform(name);
    return -std::log1p(-u) / rate;
  }

 private:
  std::mt19937_64& engine(std::string_view name) {
    auto it = engines_.find(name);
    if (it == engines_.end()) {
      it = engines_.emplace(std::string(name), std::mt19937_64(stream_seed(master_, name)))
               .first;
    }
    return it->second;
  }

  std::uint64_t master_ = 0;
  std::map<std::string, std::mt19937_64, std::less<>> engines_;
  DrawHook* hook_ = nullptr;
};

}  // namespace acdsim
