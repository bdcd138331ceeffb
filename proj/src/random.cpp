#include "pdduq/random.hpp"

namespace pdduq {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t sample_index)
    : key_(splitmix64(splitmix64(seed) ^ (sample_index * 0xD1B54A32D192ED03ull))) {}

std::uint64_t SampleStream::next_u64() {
  std::uint64_t c = counter_++;
  return splitmix64(key_ + c * 0x9E3779B97F4A7C15ull);
}

double SampleStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace pdduq
