#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

#include "pulsal/pulse.hpp"

namespace pulsal {

// How operand intervals are turned into area rates.
//  linear:      each interval D contributes the constant rate p / D (the
//               threshold is reached linearly); leak is ignored.
//  compensated: each interval contributes the constant amplitude that a leaky
//               integrator would need to reach theta in D, p*alpha/(1-e^{-alpha D}),
//               and the output accumulator leaks at alpha. Reduces to linear
//               when alpha = 0. Floating-point only.
enum class LeakModel { linear, compensated };

struct AdderOptions {
  double alpha = 0.0;
  double tau = 0.0;
  LeakModel leak = LeakModel::compensated;
};

template <TimeScalar T>
struct AddDiagnostics {
  // Accumulator left after the last event; below one constant area, so no
  // pulse is emitted for it.
  T final_excess{};
  // Largest |excess| observed at any event boundary.
  double max_abs_excess = 0.0;
  std::size_t segments = 0;
};

template <TimeScalar T>
struct AddResult {
  BasicPulseTrain<T> train;
  AddDiagnostics<T> diagnostics;
};

/// Interval-wise simultaneous addition of any number of trains.
///
/// The merged timeline of all operand pulses is swept left to right. Inside
/// each segment every operand contributes the signed rate of the inter-pulse
/// interval enclosing it (zero after its last pulse). The running area, in
/// units of theta, emits a + pulse each time it reaches +1 and a - pulse each
/// time it reaches -1, and is decremented (incremented) by one at the pulse.
template <TimeScalar T>
AddResult<T> add_n_detailed(std::span<const BasicPulseTrain<T>> trains, const AdderOptions& options = {});

template <TimeScalar T>
BasicPulseTrain<T> add_n(std::span<const BasicPulseTrain<T>> trains, const AdderOptions& options = {}) {
  return add_n_detailed(trains, options).train;
}

template <TimeScalar T>
BasicPulseTrain<T> add_n(std::initializer_list<BasicPulseTrain<T>> trains, const AdderOptions& options = {}) {
  return add_n(std::span<const BasicPulseTrain<T>>(trains.begin(), trains.size()), options);
}

/// Closed form for m positive augend pulses followed by one positive addend
/// pulse (t_{u_m} <= t_{d_1}):
///   T_k = t_{u_{k-1}} + (t_{d_1} - t_{u_{k-1}}) A_k / (B_1 + A_k),  k = 1..m
///   T_{m+1} = t_{d_1}
/// Throws PreconditionError when the inputs are not in that shape.
template <TimeScalar T>
BasicPulseTrain<T> add_pair_thm1(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend);

/// Closed form for m positive augend pulses followed by one negative addend
/// pulse (t_{u_m} <= t_{d_1}); yields m - 1 positive pulses at
///   T_k = t_{u_k} + (sum_{i<=k} A_i) A_{k+1} / (B_1 - A_{k+1}),  k = 1..m-1
template <TimeScalar T>
BasicPulseTrain<T> subtract_thm2(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend);

/// The neutral train E.
template <TimeScalar T = Rational>
BasicPulseTrain<T> identity() {
  return {};
}

enum class CorollaryCase {
  not_applicable,
  theorem1,
  corollary1,
  corollary2,
  corollary3,
  theorem2,
  corollary4,
  corollary5,
};

std::string to_string(CorollaryCase c);

struct CorollaryPrediction {
  CorollaryCase which = CorollaryCase::not_applicable;
  std::size_t positive = 0;
  std::size_t negative = 0;

  bool applicable() const noexcept { return which != CorollaryCase::not_applicable; }
};

/// Predicted (positive, negative) output count for the pulse-count
/// configurations with two operands; not_applicable otherwise.
///  same polarity, one addend pulse after all augend pulses      -> m+1
///  same polarity, one augend pulse after all addend pulses      -> m+1
///  addend pulses inside the last augend interval                -> m+n (+ or -)
///  m positive, then one negative                                -> m-1 positive
///  m negative, then one positive                                -> m-1 negative
///  m+1 positive with n>=2 negative inside the last augend gap   -> m-1 positive, n-2 negative
template <TimeScalar T>
CorollaryPrediction corollary_counts(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend);

/// Independent numerical oracle for add_n: walks a uniform grid of width
/// `step` over [0, last pulse], integrates each operand's piecewise-linear
/// cumulative area exactly over every cell and emits a pulse at the end of
/// the cell in which the running sum reaches +/-1.
PulseTrain brute_force_sum(std::span<const PulseTrain> trains, double step);

inline PulseTrain brute_force_sum(std::initializer_list<PulseTrain> trains, double step) {
  return brute_force_sum(std::span<const PulseTrain>(trains.begin(), trains.size()), step);
}

template <TimeScalar T>
PulseTrain to_double_train(const BasicPulseTrain<T>& train) {
  std::vector<Pulse> out;
  out.reserve(train.size());
  for (const auto& p : train) out.push_back({to_double(p.time), p.polarity});
  return PulseTrain(std::move(out));
}

}  // namespace pulsal
