#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pulsal/pulse.hpp"

namespace pulsal {

// Pulse-train file: a header declaring clock_seconds, theta, alpha, tau,
// then one (tick, polarity) record per line.
//
// text:
//   clock_seconds=1e-06 theta=0.001 alpha=40 tau=0
//   1021 +1
// jsonl:
//   {"clock_seconds":1e-06,"theta":0.001,"alpha":40,"tau":0}
//   {"tick":1021,"polarity":1}
//
// Blank lines and lines starting with '#' are ignored in the text encoding.
enum class PulseFileFormat { text, jsonl };

struct PulseFile {
  ClockedTrain train;
  IfcParams params;  // params.clock always equals train.clock
};

PulseFile read_pulse_file(std::istream& in);
PulseFile read_pulse_file(const std::filesystem::path& path);

void write_pulse_file(std::ostream& out, const PulseFile& file, PulseFileFormat format);
void write_pulse_file(const std::filesystem::path& path, const PulseFile& file,
                      PulseFileFormat format);

/// ".jsonl" and ".json" select jsonl, anything else text.
PulseFileFormat format_for_path(const std::filesystem::path& path);

}  // namespace pulsal
