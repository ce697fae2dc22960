#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace pnctm {

/// splitmix64 finalizer; used to derive well-separated engine seeds from
/// (seed, stream) pairs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream key for phase `phase` of sweep `iteration`, item `index`
/// (document, topic, ...). Distinct triples map to distinct keys with
/// overwhelming probability.
constexpr std::uint64_t stream_key(std::uint64_t iteration, std::uint64_t phase,
                                   std::uint64_t index) noexcept {
  return mix64(mix64(mix64(iteration) ^ (phase * 0x632be59bd9b4e019ULL)) ^ index);
}

/// A seedable random stream. Identical (seed, stream_id) pairs produce
/// bit-identical sequences; distinct stream ids are independent substreams.
class RngStream {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id), engine_(mix64(seed ^ mix64(stream_id))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // UniformRandomBitGenerator interface, so std distributions accept us.
  static constexpr result_type min() noexcept { return engine_type::min(); }
  static constexpr result_type max() noexcept { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  double normal() { return normal_(engine_); }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double chi_squared(double dof) {
    return std::chi_squared_distribution<double>(dof)(engine_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pnctm
