#pragma once

#include <cstddef>
#include <optional>

#include "pulsal/pulse.hpp"
#include "pulsal/signal.hpp"

namespace pulsal {

struct EncoderConfig {
  // Integration grid steps per base step.
  int oversampling = 4;
  // Bisection stops once the crossing bracket is narrower than this (s).
  double tolerance = 1e-12;
  // Base step; defaults to the sample period of sampled sources and 1 us for
  // analytic ones.
  std::optional<double> base_step;

  double grid_step(const SignalSource& signal) const;
  void check() const;
};

struct QuantizeResult {
  ClockedTrain train;
  // Pulses pushed to the next free tick because they rounded onto an
  // already-occupied one.
  std::size_t collisions = 0;
};

/// Rounds each time to the nearest multiple of `clock`, keeping order.
QuantizeResult quantize_times(const PulseTrain& train, double clock);

struct Encoding {
  PulseTrain continuous;
  std::optional<QuantizeResult> quantized;

  /// Quantized times in seconds when a clock is configured, else the
  /// continuous crossing times.
  PulseTrain train() const { return quantized ? quantized->train.to_seconds() : continuous; }
};

/// Leaky integrate-and-fire conversion against +/-theta.
///
/// Between pulses the integrator holds A(t) = int_{t_{k-1}+tau}^{t} f(s) e^{alpha (s - t)} ds,
/// advanced by the trapezoidal rule on a uniform grid. When |A| reaches theta
/// the crossing instant is located by linear interpolation inside the grid
/// step and refined by bisection; a pulse of the matching polarity is emitted,
/// the integrator is reset to 0 and frozen for tau.
Encoding encode(const SignalSource& signal, const IfcParams& params,
                const EncoderConfig& config = {});

/// int_a^b f(s) e^{alpha (s - b)} ds by composite 4-point Gauss-Legendre on
/// panels no wider than `panel`.
double leaky_area(const SignalSource& signal, double a, double b, double alpha, double panel);

/// Max over intervals of |int f e^{alpha(s - t_k)} ds - p_k theta| / theta, with
/// quadrature panels ten times denser than the encoder grid.
double verify_area_constraint(const PulseTrain& train, const SignalSource& signal,
                              const IfcParams& params, const EncoderConfig& config = {});

}  // namespace pulsal
