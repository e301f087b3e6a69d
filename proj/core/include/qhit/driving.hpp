#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace qhit {

using Symbol = std::uint32_t;

/// I.i.d. (Bernoulli) driving measure on a full shift over `weights.size()` symbols.
struct DrivingConfig {
  std::vector<double> weights{0.5, 0.5};
  std::uint64_t seed = 0;

  std::size_t alphabet_size() const noexcept { return weights.size(); }

  /// Throws ContractViolation unless the weights are a probability vector
  /// (nonnegative, summing to 1 within 1e-12).
  void validate() const;

  bool operator==(const DrivingConfig&) const = default;
};

/// A two-sided sequence omega in {0..s-1}^Z. Symbols are a pure function of
/// (seed, offset + i), so negative indices (the past of the fiber) cost the
/// same as positive ones and shifting is O(1).
class Realisation {
 public:
  explicit Realisation(const DrivingConfig& config);

  Symbol symbol_at(std::int64_t i) const noexcept;

  /// theta^k omega. The receiver is unchanged.
  Realisation shift(std::int64_t k) const noexcept;

  std::int64_t offset() const noexcept { return offset_; }
  std::uint64_t seed() const noexcept { return stream_->seed; }
  std::size_t alphabet_size() const noexcept { return stream_->cdf.size(); }
  const std::vector<double>& weights() const noexcept { return stream_->weights; }

 private:
  struct Stream {
    std::uint64_t seed;
    std::vector<double> weights;
    std::vector<double> cdf;
  };
  Realisation(std::shared_ptr<const Stream> stream, std::int64_t offset) noexcept
      : stream_(std::move(stream)), offset_(offset) {}

  std::shared_ptr<const Stream> stream_;
  std::int64_t offset_ = 0;
};

/// Seed of replicate k. Replicate 0 keeps the base seed.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t k) noexcept;

/// `count` realisations for nu-ensembles; replicate k uses replicate_seed(seed, k).
std::vector<Realisation> sample_realisations(const DrivingConfig& config, std::size_t count);

}  // namespace qhit
