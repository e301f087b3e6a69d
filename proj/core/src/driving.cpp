#include "qhit/driving.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qhit/error.hpp"
#include "qhit/random.hpp"

namespace qhit {

void DrivingConfig::validate() const {
  if (weights.empty()) throw ContractViolation("driving: alphabet must contain at least one symbol");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractViolation("driving: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ContractViolation("driving: weights sum to " + std::to_string(total) + ", expected 1");
}

Realisation::Realisation(const DrivingConfig& config) {
  config.validate();
  auto stream = std::make_shared<Stream>();
  stream->seed = config.seed;
  stream->weights = config.weights;
  stream->cdf.resize(config.weights.size());
  std::partial_sum(config.weights.begin(), config.weights.end(), stream->cdf.begin());
  // The last symbol absorbs rounding so that every u in [0,1) maps somewhere.
  stream->cdf.back() = 2.0;
  stream_ = std::move(stream);
}

Symbol Realisation::symbol_at(std::int64_t i) const noexcept {
  const auto& cdf = stream_->cdf;
  if (cdf.size() == 1) return 0;
  const double u = to_unit(hash2(stream_->seed, static_cast<std::uint64_t>(offset_ + i)));
  Symbol s = 0;
  while (u >= cdf[s]) ++s;
  return s;
}

Realisation Realisation::shift(std::int64_t k) const noexcept { return Realisation(stream_, offset_ + k); }

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t k) noexcept {
  if (k == 0) return base_seed;
  return mix64(base_seed ^ mix64(0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(k)));
}

std::vector<Realisation> sample_realisations(const DrivingConfig& config, std::size_t count) {
  if (count == 0) throw ContractViolation("sample_realisations: count must be at least 1");
  std::vector<Realisation> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    DrivingConfig c = config;
    c.seed = replicate_seed(config.seed, k);
    out.emplace_back(c);
  }
  return out;
}

}  // namespace qhit
