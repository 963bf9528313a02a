#pragma once

#include <cstdint>
#include <span>

#include "pgts/kernels.hpp"

namespace pgts {

// Counter-based, splittable random streams. A stream is identified by
// (seed, id); value #i is a pure function of (seed, id, i), so replays are
// bit-identical no matter how work is scheduled across threads. child()
// derives an independent substream without consuming any state, which is
// how per-episode substreams (instance parameters, reward noise, policy
// noise, self-play noise) are produced.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t id = 0)
      : seed_(seed), id_(id) {}

  RandomStream child(std::uint64_t tag) const {
    return RandomStream(seed_, derive(id_, tag));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t id() const { return id_; }
  std::uint64_t position() const { return pos_; }
  void skip(std::uint64_t n) { pos_ += n; }

  double uniform01() {
    double u;
    kernels::fill_uniform01(seed_, id_, pos_++, 1, &u);
    return u;
  }

  double normal() {
    double z;
    kernels::fill_normal(seed_, id_, pos_++, 1, &z);
    return z;
  }

  void uniforms(std::span<double> out) {
    kernels::fill_uniform01(seed_, id_, pos_, out.size(), out.data());
    pos_ += out.size();
  }

  void normals(std::span<double> out) {
    kernels::fill_normal(seed_, id_, pos_, out.size(), out.data());
    pos_ += out.size();
  }

  // splitmix64 finalizer; avalanching keeps sibling streams uncorrelated.
  static constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t tag) {
    return mix64(parent ^ mix64(tag));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t id_;
  std::uint64_t pos_ = 0;
};

// Fixed substream tags used throughout the simulator.
namespace substream {
inline constexpr std::uint64_t kInstanceTheta = 1;
inline constexpr std::uint64_t kRewardNoise = 2;
inline constexpr std::uint64_t kPolicyNoise = 3;
inline constexpr std::uint64_t kSelfPlayNoise = 4;
inline constexpr std::uint64_t kTau = 5;
}  // namespace substream

// Top-level stream domains, so training, evaluation, and studies never
// overlap even under the same seed.
namespace stream_domain {
inline constexpr std::uint64_t kTraining = 101;
inline constexpr std::uint64_t kEvaluation = 102;
inline constexpr std::uint64_t kVarianceStudy = 103;
}  // namespace stream_domain

}  // namespace pgts
