#pragma once

#include <cstdint>

namespace pdduq {

// Counter-based stream: draw d of sample l is a pure function of
// (seed, l, d), so sample streams never depend on scheduling.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t sample_index);

  std::uint64_t next_u64();
  // Uniform on the open interval (0,1).
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pdduq
