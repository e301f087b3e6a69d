#include <algorithm>
#include <cmath>

#include "qhit/error.hpp"
#include "qhit/quenched_law.hpp"
#include "qhit/random.hpp"

namespace qhit {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr unsigned kTailBits = 62;
constexpr std::uint64_t kTailDen = std::uint64_t{1} << kTailBits;
constexpr std::uint64_t kTailMask = kTailDen - 1;

unsigned slope_of(const MapSystem& system, Symbol s) { return *system.map(s).modular_slope(); }

}  // namespace

Trajectory Trajectory::floating(const MapSystem& system, const Realisation& omega, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ContractViolation("trajectory: start point must lie in [0, 1]");
  Trajectory t(system, omega, Mode::floating);
  t.x_ = x;
  return t;
}

Trajectory Trajectory::rational(const MapSystem& system, const Realisation& omega, Rational x) {
  if (!system.integer_affine()) throw ContractViolation("trajectory: rational orbits need x -> s x mod 1 maps");
  if (x.den == 0 || x.num >= x.den) throw ContractViolation("trajectory: rational start must lie in [0, 1)");
  Trajectory t(system, omega, Mode::rational);
  t.num_ = x.num;
  t.den_ = x.den;
  return t;
}

Trajectory Trajectory::tailed(const MapSystem& system, const Realisation& omega, double x, std::uint64_t tail_key) {
  if (!system.integer_affine()) throw ContractViolation("trajectory: tailed orbits need x -> s x mod 1 maps");
  if (!(x >= 0.0 && x <= 1.0)) throw ContractViolation("trajectory: start point must lie in [0, 1]");
  Trajectory t(system, omega, Mode::tailed);
  // 53 bits from x, the next 9 bits drawn, everything below carried by the tail.
  auto head = static_cast<std::uint64_t>(std::ldexp(x, 53));
  head = std::min(head, (std::uint64_t{1} << 53) - 1);
  t.num_ = (head << 9) | (mix64(tail_key ^ 0xA0761D6478BD642FULL) & 0x1FF);
  t.den_ = kTailDen;
  t.tail_key_ = tail_key;
  return t;
}

Trajectory Trajectory::sampled(const MapSystem& system, const Realisation& omega, double x, std::uint64_t tail_key) {
  return system.integer_affine() ? tailed(system, omega, x, tail_key) : floating(system, omega, x);
}

double Trajectory::position() const noexcept {
  switch (mode_) {
    case Mode::floating:
      return x_;
    case Mode::tailed:
      return std::ldexp(static_cast<double>(num_), -static_cast<int>(kTailBits));
    case Mode::rational:
      return static_cast<double>(num_) / static_cast<double>(den_);
  }
  return x_;
}

void Trajectory::step() {
  const Symbol s = omega_.symbol_at(static_cast<std::int64_t>(time_));
  switch (mode_) {
    case Mode::floating:
      x_ = apply(system_->map(s), x_);
      break;
    case Mode::tailed: {
      const unsigned slope = slope_of(*system_, s);
      const std::uint64_t carry = hash2(tail_key_, time_) % slope;
      const auto next = static_cast<u128>(num_) * slope + carry;
      num_ = static_cast<std::uint64_t>(next) & kTailMask;
      break;
    }
    case Mode::rational: {
      const unsigned slope = slope_of(*system_, s);
      num_ = static_cast<std::uint64_t>((static_cast<u128>(num_) * slope) % den_);
      break;
    }
  }
  ++time_;
}

}  // namespace qhit
