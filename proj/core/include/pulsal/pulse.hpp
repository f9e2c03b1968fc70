#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulsal/rational.hpp"

namespace pulsal {

enum class Polarity : std::int8_t { negative = -1, positive = 1 };

constexpr int sign(Polarity p) noexcept { return static_cast<int>(p); }
constexpr Polarity flip(Polarity p) noexcept {
  return p == Polarity::positive ? Polarity::negative : Polarity::positive;
}

template <TimeScalar T>
struct BasicPulse {
  T time{};
  Polarity polarity = Polarity::positive;

  friend bool operator==(const BasicPulse&, const BasicPulse&) = default;
};

// Ordered sequence of timed +/-1 events. Every train shares the origin t = 0,
// the common integrator reset instant, so the first inter-pulse interval is
// (0, t_1]. The empty train is the additive identity.
//
// Construction does not validate; use validate() to obtain a report.
template <TimeScalar T>
class BasicPulseTrain {
 public:
  using pulse_type = BasicPulse<T>;

  BasicPulseTrain() = default;
  explicit BasicPulseTrain(std::vector<pulse_type> pulses) : pulses_(std::move(pulses)) {
    // gmp comparisons assume canonical form; callers may hand us 0/7 or 2042/1000000
    if constexpr (std::same_as<T, Rational>) {
      for (auto& p : pulses_) p.time.canonicalize();
    }
  }

  static BasicPulseTrain uniform_polarity(std::span<const T> times, Polarity polarity) {
    std::vector<pulse_type> pulses;
    pulses.reserve(times.size());
    for (const T& t : times) pulses.push_back({t, polarity});
    return BasicPulseTrain(std::move(pulses));
  }
  static BasicPulseTrain uniform_polarity(std::initializer_list<T> times, Polarity polarity) {
    return uniform_polarity(std::span<const T>(times.begin(), times.size()), polarity);
  }

  std::span<const pulse_type> pulses() const noexcept { return pulses_; }
  std::size_t size() const noexcept { return pulses_.size(); }
  bool empty() const noexcept { return pulses_.empty(); }
  const pulse_type& operator[](std::size_t i) const { return pulses_[i]; }
  auto begin() const noexcept { return pulses_.begin(); }
  auto end() const noexcept { return pulses_.end(); }

  std::vector<T> times() const {
    std::vector<T> out;
    out.reserve(pulses_.size());
    for (const auto& p : pulses_) out.push_back(p.time);
    return out;
  }

  /// Start of the interval closed by pulse i: 0 for the first pulse.
  T interval_start(std::size_t i) const { return i == 0 ? T(0) : pulses_[i - 1].time; }
  /// D_i, the duration of the interval closed by pulse i.
  T interval(std::size_t i) const { return pulses_[i].time - interval_start(i); }

  std::size_t count(Polarity p) const {
    return static_cast<std::size_t>(
        std::count_if(pulses_.begin(), pulses_.end(), [p](const auto& x) { return x.polarity == p; }));
  }

  friend bool operator==(const BasicPulseTrain&, const BasicPulseTrain&) = default;

 private:
  std::vector<pulse_type> pulses_;
};

using Pulse = BasicPulse<double>;
using PulseTrain = BasicPulseTrain<double>;
using ExactPulse = BasicPulse<Rational>;
using ExactPulseTrain = BasicPulseTrain<Rational>;

/// Integrate-and-fire converter parameters.
///  theta: threshold (constant area), volt-seconds
///  alpha: leak factor of the kernel exp(alpha (s - t_k)), 1/s
///  tau:   refractory hold after each pulse, s
///  clock: time-stamping quantum, s; absent in exact-time mode
struct IfcParams {
  double theta = 1e-3;
  double alpha = 0.0;
  double tau = 0.0;
  std::optional<double> clock;

  /// Throws InvalidArgument when an invariant does not hold.
  void check() const;
};

enum class ViolationKind { negative_time, non_finite_time, non_increasing, below_refractory };

struct Violation {
  ViolationKind kind;
  std::size_t index;  // pulse index at which the violation was detected
  std::string message;
};

std::string to_string(ViolationKind kind);

std::vector<Violation> validate(const PulseTrain& train, const IfcParams& params);
std::vector<Violation> validate(const ExactPulseTrain& train, const IfcParams& params);

template <TimeScalar T>
BasicPulseTrain<T> negate(const BasicPulseTrain<T>& train) {
  std::vector<BasicPulse<T>> out(train.begin(), train.end());
  for (auto& p : out) p.polarity = flip(p.polarity);
  return BasicPulseTrain<T>(std::move(out));
}

/// Sorted union of the pulse times of every train, duplicates collapsed.
template <TimeScalar T>
std::vector<T> merge_timeline(std::span<const BasicPulseTrain<T>> trains) {
  std::vector<T> times;
  std::size_t total = 0;
  for (const auto& tr : trains) total += tr.size();
  times.reserve(total);
  for (const auto& tr : trains) {
    for (const auto& p : tr) times.push_back(p.time);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

template <TimeScalar T>
std::vector<T> merge_timeline(std::initializer_list<BasicPulseTrain<T>> trains) {
  return merge_timeline(std::span<const BasicPulseTrain<T>>(trains.begin(), trains.size()));
}

// Pulse times stored as integer counts of a clock quantum.
struct ClockedPulse {
  std::int64_t tick = 0;
  Polarity polarity = Polarity::positive;

  friend bool operator==(const ClockedPulse&, const ClockedPulse&) = default;
};

struct ClockedTrain {
  double clock = 1e-6;
  std::vector<ClockedPulse> pulses;

  PulseTrain to_seconds() const;
  /// Exact times tick * clock, with the clock taken as its decimal value.
  ExactPulseTrain to_exact() const;
  ExactPulseTrain to_exact(const Rational& clock_exact) const;

  friend bool operator==(const ClockedTrain&, const ClockedTrain&) = default;
};

}  // namespace pulsal
