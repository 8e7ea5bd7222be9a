#include "tpp/apps/sketch.hpp"

#include <bit>
#include <cmath>

namespace tpp {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

BitmapSketch::BitmapSketch(std::size_t bits, uint64_t seed) : bits_(bits), seed_(seed) {
  if (bits == 0) throw TppError(Errc::ConfigError, "sketch needs at least one bit");
  words_.assign((bits + 63) / 64, 0);
}

void BitmapSketch::add(uint64_t key) {
  uint64_t h = splitmix64(key ^ seed_) % bits_;
  words_[h / 64] |= (1ull << (h % 64));
}

std::size_t BitmapSketch::zero_bits() const {
  std::size_t ones = 0;
  for (uint64_t w : words_) ones += std::size_t(std::popcount(w));
  return bits_ - ones;
}

double BitmapSketch::estimate() const {
  std::size_t z = zero_bits();
  if (z == 0) return double(bits_) * std::log(double(bits_));  // saturated
  return double(bits_) * std::log(double(bits_) / double(z));
}

void BitmapSketch::merge(const BitmapSketch& other) {
  if (other.bits_ != bits_ || other.seed_ != seed_)
    throw TppError(Errc::ConfigError, "merging incompatible sketches");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

}  // namespace tpp
