#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pulsal/algebra.hpp"
#include "pulsal/config.hpp"
#include "pulsal/encoder.hpp"
#include "pulsal/metrics.hpp"
#include "pulsal/pulse.hpp"
#include "pulsal/reconstruction.hpp"
#include "pulsal/signal.hpp"

namespace pulsal {

enum class ExperimentId { fig6, fig7, fig8, fig9, thm4 };

std::string to_string(ExperimentId id);
/// Throws InvalidArgument listing the registered ids.
ExperimentId parse_experiment_id(const std::string& text);

struct SweepSpec {
  std::string parameter;  // "clock" or "theta"
  std::vector<double> values;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::fig6;
  // Operands, in SignalSource::parse syntax.
  std::string augend = "constant:1";
  std::string addend = "constant:10";
  double duration = 0.1;
  IfcParams params{1e-3, 40.0, 0.0, 1e-6};
  std::optional<SweepSpec> sweep;
  std::filesystem::path out_dir;  // empty: no files are written
  std::uint64_t seed = 0;
  LeakModel leak = LeakModel::compensated;
  EncoderConfig encoder;
  WindowedOptions reconstruction;
  // Concurrent sweep points; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  static ExperimentConfig defaults(ExperimentId id);
  /// Overlays recognised keys onto defaults(experiment); unknown keys throw.
  static ExperimentConfig from_config(const KeyValueConfig& cfg);
  /// Throws InvalidArgument when an invariant does not hold.
  void check() const;
};

struct MetricsRecord {
  std::string experiment;
  std::map<std::string, double> parameters;
  SnrReport snr;
  std::size_t augend_pulses = 0;
  std::size_t addend_pulses = 0;
  std::size_t output_pulses = 0;
  std::size_t collisions = 0;
  double sup_error = 0.0;
  double runtime_seconds = 0.0;
  // Experiment-specific scalars (pulse-count law, band density, ...).
  std::map<std::string, double> extra;
};

struct PipelineOptions {
  LeakModel leak = LeakModel::compensated;
  EncoderConfig encoder;
  WindowedOptions reconstruction;
};

// One pass of encode -> pulse-domain add -> reconstruct -> compare.
struct AdditionRun {
  PulseTrain augend;
  PulseTrain addend;
  // Pulse-domain sum, clocked when params.clock is set.
  PulseTrain sum;
  // The sum restricted to the evaluation span.
  PulseTrain evaluated_sum;
  std::size_t collisions = 0;
  AddDiagnostics<double> add_diagnostics;
  // Evaluation span [0, eval_end]: up to the earliest final operand pulse,
  // past which an operand no longer contributes.
  double eval_end = 0.0;
  WindowedReconstruction reconstruction;
  std::vector<double> desired;
  SnrReport snr;
  double sup_error = 0.0;
};

AdditionRun run_addition(const SignalSource& augend, const SignalSource& addend, const IfcParams& params,
                         const PipelineOptions& options = {});

/// Output pulses falling in each reference interval (t_{k-1}, t_k].
std::vector<std::size_t> pulses_per_interval(const PulseTrain& reference, const PulseTrain& output);

struct BandDensity {
  double band_density = 0.0;    // pulses per second where |desired| is in the lowest band
  double global_density = 0.0;  // pulses per second over the whole grid span
  double band_fraction = 0.0;
};

/// Density of `train` restricted to grid cells whose |desired| lies in the
/// lowest `fraction` quantile, against the mean density over the grid.
BandDensity low_amplitude_density(const PulseTrain& train, const std::vector<double>& times,
                                  const std::vector<double>& desired, double fraction = 0.1);

struct Thm4Result {
  ExactPulseTrain simultaneous;
  ExactPulseTrain p12_then_p3;
  ExactPulseTrain p13_then_p2;
};

/// P1 = {8/3, 8}, P2 = {4, 8}, P3 = {8} ms added exactly three ways.
Thm4Result run_thm4();

struct ExperimentResult {
  std::vector<MetricsRecord> records;
  std::optional<Thm4Result> thm4;
  std::vector<std::filesystem::path> files;
};

/// Runs the experiment; sweep points execute concurrently and are merged in
/// sweep order. Files are written under config.out_dir when it is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Long format: one row per record, parameters first.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
void write_metrics_json(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);

}  // namespace pulsal
