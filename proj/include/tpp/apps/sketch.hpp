#ifndef TPP_APPS_SKETCH_HPP
#define TPP_APPS_SKETCH_HPP

#include <cstdint>
#include <vector>

#include "tpp/errors.hpp"

namespace tpp {

uint64_t splitmix64(uint64_t x);

// Linear-counting bitmap: cardinality ~= b * ln(b / zero_bits).
class BitmapSketch {
 public:
  explicit BitmapSketch(std::size_t bits, uint64_t seed = 0);

  void add(uint64_t key);
  double estimate() const;

  // Bitwise OR; sketches must agree on size and seed to be meaningful.
  void merge(const BitmapSketch& other);

  std::size_t bits() const { return bits_; }
  uint64_t seed() const { return seed_; }
  std::size_t zero_bits() const;
  const std::vector<uint64_t>& words() const { return words_; }

  bool operator==(const BitmapSketch&) const = default;

 private:
  std::size_t bits_;
  uint64_t seed_;
  std::vector<uint64_t> words_;
};

}  // namespace tpp

#endif
