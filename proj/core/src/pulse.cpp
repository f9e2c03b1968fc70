#include "pulsal/pulse.hpp"

#include <sstream>

#include "pulsal/error.hpp"

namespace pulsal {

void IfcParams::check() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be >= 0");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be >= 0");
  if (clock && (!(*clock > 0.0) || !std::isfinite(*clock))) {
    throw InvalidArgument("clock must be > 0 when present");
  }
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::negative_time: return "negative time";
    case ViolationKind::non_finite_time: return "non-finite time";
    case ViolationKind::non_increasing: return "non-increasing times";
    case ViolationKind::below_refractory: return "gap below refractory";
  }
  return "unknown";
}

namespace {

template <TimeScalar T>
std::vector<Violation> validate_impl(const BasicPulseTrain<T>& train, const IfcParams& params) {
  std::vector<Violation> report;
  auto add = [&](ViolationKind kind, std::size_t i) {
    std::ostringstream msg;
    msg << to_string(kind) << " at pulse " << i;
    report.push_back({kind, i, msg.str()});
  };
  for (std::size_t i = 0; i < train.size(); ++i) {
    const T& t = train[i].time;
    if constexpr (std::same_as<T, double>) {
      if (!std::isfinite(t)) {
        add(ViolationKind::non_finite_time, i);
        continue;
      }
    }
    if (t < 0) add(ViolationKind::negative_time, i);
    if (i == 0) continue;
    const T gap = t - train[i - 1].time;
    if (gap <= 0) {
      add(ViolationKind::non_increasing, i);
    } else if (params.tau > 0.0 && to_double(gap) < params.tau) {
      add(ViolationKind::below_refractory, i);
    }
  }
  return report;
}

}  // namespace

std::vector<Violation> validate(const PulseTrain& train, const IfcParams& params) {
  return validate_impl(train, params);
}

std::vector<Violation> validate(const ExactPulseTrain& train, const IfcParams& params) {
  return validate_impl(train, params);
}

PulseTrain ClockedTrain::to_seconds() const {
  std::vector<Pulse> out;
  out.reserve(pulses.size());
  for (const auto& p : pulses) out.push_back({static_cast<double>(p.tick) * clock, p.polarity});
  return PulseTrain(std::move(out));
}

ExactPulseTrain ClockedTrain::to_exact() const { return to_exact(rational_from_decimal(clock)); }

ExactPulseTrain ClockedTrain::to_exact(const Rational& clock_exact) const {
  std::vector<ExactPulse> out;
  out.reserve(pulses.size());
  for (const auto& p : pulses) {
    Rational t(mpz_class(std::to_string(p.tick), 10));
    out.push_back({Rational(t * clock_exact), p.polarity});
  }
  return ExactPulseTrain(std::move(out));
}

}  // namespace pulsal
