#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pulsal {

struct ConstantSignal {
  double volts = 0.0;
};

struct SinusoidSignal {
  double amplitude = 1.0;  // volts
  double frequency = 1.0;  // Hz
  double phase = 0.0;      // rad
};

struct UniformSamples {
  std::vector<double> values;  // volts
  double sample_rate = 1.0;    // Hz
};

// Analog input over the window [0, duration]. Sampled sources are linearly
// interpolated between samples and hold the last sample to the window end.
class SignalSource {
 public:
  using Kind = std::variant<ConstantSignal, SinusoidSignal, UniformSamples>;

  static SignalSource constant(double volts, double duration);
  static SignalSource sinusoid(double amplitude, double frequency, double phase, double duration);
  /// Duration is values.size() / sample_rate.
  static SignalSource sampled(std::vector<double> values, double sample_rate);

  double duration() const noexcept { return duration_; }
  const Kind& kind() const noexcept { return kind_; }
  bool is_sampled() const noexcept { return std::holds_alternative<UniformSamples>(kind_); }
  /// Sample period of a sampled source.
  std::optional<double> sample_period() const;

  double operator()(double t) const;
  std::vector<double> sample(double rate, double end) const;

  /// Parses "constant:<volts>" or "sine:<amplitude>,<frequency>[,<phase>]".
  static SignalSource parse(const std::string& spec, double duration);
  std::string describe() const;

 private:
  SignalSource(Kind kind, double duration);

  Kind kind_;
  double duration_;
};

enum class SignalFileFormat { csv, wav };

struct IngestOptions {
  // WAV only: volts corresponding to digital full scale. Mandatory for WAV.
  std::optional<double> full_scale_volts;
  // Relative jitter of CSV timestamps accepted as uniform sampling.
  double uniformity_tolerance = 1e-6;
};

/// Reads a CSV of (time,value) rows (optional header) or a mono PCM WAV file.
SignalSource ingest_signal(const std::filesystem::path& path, SignalFileFormat format,
                           const IngestOptions& options = {});
SignalFileFormat signal_format_for_path(const std::filesystem::path& path);

/// Writes a mono 16-bit PCM WAV. Used by tests and the CLI.
void write_wav16(const std::filesystem::path& path, const std::vector<double>& samples,
                 unsigned sample_rate, double full_scale_volts);

}  // namespace pulsal
