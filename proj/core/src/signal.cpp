#include "pulsal/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pulsal/error.hpp"

namespace pulsal {

SignalSource::SignalSource(Kind kind, double duration) : kind_(std::move(kind)), duration_(duration) {
  if (!(duration_ > 0.0) || !std::isfinite(duration_)) {
    throw InvalidArgument("signal duration must be > 0");
  }
}

SignalSource SignalSource::constant(double volts, double duration) {
  return SignalSource(ConstantSignal{volts}, duration);
}

SignalSource SignalSource::sinusoid(double amplitude, double frequency, double phase,
                                    double duration) {
  return SignalSource(SinusoidSignal{amplitude, frequency, phase}, duration);
}

SignalSource SignalSource::sampled(std::vector<double> values, double sample_rate) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw InvalidArgument("sample rate must be > 0");
  }
  if (values.empty()) throw InvalidArgument("sampled signal needs at least one sample");
  const double duration = static_cast<double>(values.size()) / sample_rate;
  return SignalSource(UniformSamples{std::move(values), sample_rate}, duration);
}

std::optional<double> SignalSource::sample_period() const {
  if (const auto* s = std::get_if<UniformSamples>(&kind_)) return 1.0 / s->sample_rate;
  return std::nullopt;
}

double SignalSource::operator()(double t) const {
  struct Visitor {
    double t;
    double operator()(const ConstantSignal& c) const { return c.volts; }
    double operator()(const SinusoidSignal& s) const {
      return s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * t + s.phase);
    }
    double operator()(const UniformSamples& s) const {
      const double x = t * s.sample_rate;
      if (x <= 0.0) return s.values.front();
      const auto i = static_cast<std::size_t>(x);
      if (i + 1 >= s.values.size()) return s.values.back();
      const double frac = x - static_cast<double>(i);
      return s.values[i] + frac * (s.values[i + 1] - s.values[i]);
    }
  };
  return std::visit(Visitor{t}, kind_);
}

std::vector<double> SignalSource::sample(double rate, double end) const {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor(end * rate + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back((*this)(static_cast<double>(i) / rate));
  return out;
}

namespace {

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw ParseError("bad number '" + item + "' in signal spec");
    out.push_back(v);
  }
  return out;
}

}  // namespace

SignalSource SignalSource::parse(const std::string& spec, double duration) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParseError("signal spec must be kind:params, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const auto args = split_numbers(spec.substr(colon + 1));
  if (kind == "constant" && args.size() == 1) return constant(args[0], duration);
  if ((kind == "sine" || kind == "sinusoid") && (args.size() == 2 || args.size() == 3)) {
    return sinusoid(args[0], args[1], args.size() == 3 ? args[2] : 0.0, duration);
  }
  throw ParseError("unknown signal spec '" + spec + "'");
}

std::string SignalSource::describe() const {
  std::ostringstream os;
  os.precision(10);
  if (const auto* c = std::get_if<ConstantSignal>(&kind_)) {
    os << "constant:" << c->volts;
  } else if (const auto* s = std::get_if<SinusoidSignal>(&kind_)) {
    os << "sine:" << s->amplitude << ',' << s->frequency << ',' << s->phase;
  } else {
    const auto& u = std::get<UniformSamples>(kind_);
    os << "samples:" << u.values.size() << '@' << u.sample_rate;
  }
  return os.str();
}

// --- ingestion -------------------------------------------------------------

namespace {

SignalSource read_csv(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::vector<double> times, values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected time,value");
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    char* ea = nullptr;
    char* eb = nullptr;
    const double t = std::strtod(a.c_str(), &ea);
    const double v = std::strtod(b.c_str(), &eb);
    if (ea == a.c_str() || eb == b.c_str()) {
      if (times.empty() && values.empty()) continue;  // header row
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": unparseable row");
    }
    if (!std::isfinite(t) || !std::isfinite(v)) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
    }
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) throw ParseError(path.string() + ": need at least two samples");
  const double period = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(period > 0.0)) throw ParseError(path.string() + ": timestamps must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (std::abs(dt - period) > options.uniformity_tolerance * period + 1e-15) {
      throw Error("non_uniform_sampling",
                  path.string() + ": non-uniform sampling at row " + std::to_string(i));
    }
  }
  return SignalSource::sampled(std::move(values), 1.0 / period);
}

template <class T>
T read_le(const unsigned char* p) {
  T v{};
  std::memcpy(&v, p, sizeof(T));
  return v;
}

SignalSource read_wav(const std::filesystem::path& path, const IngestOptions& options) {
  if (!options.full_scale_volts) {
    throw InvalidArgument("WAV ingestion requires full_scale_volts");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ParseError(path.string() + ": not a RIFF/WAVE file");
  }
  std::uint16_t fmt_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto size = read_le<std::uint32_t>(&bytes[pos + 4]);
    const unsigned char* body = &bytes[pos + 8];
    if (pos + 8 + size > bytes.size()) throw ParseError(path.string() + ": truncated chunk");
    if (std::memcmp(&bytes[pos], "fmt ", 4) == 0 && size >= 16) {
      fmt_tag = read_le<std::uint16_t>(body);
      channels = read_le<std::uint16_t>(body + 2);
      rate = read_le<std::uint32_t>(body + 4);
      bits = read_le<std::uint16_t>(body + 14);
    } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }
  if (data == nullptr || rate == 0) throw ParseError(path.string() + ": missing fmt or data chunk");
  if (channels != 1) throw ParseError(path.string() + ": only mono WAV is supported");

  const double fs = *options.full_scale_volts;
  std::vector<double> values;
  if (fmt_tag == 1 && bits == 16) {
    for (std::uint32_t i = 0; i + 1 < data_size; i += 2) {
      values.push_back(fs * read_le<std::int16_t>(data + i) / 32768.0);
    }
  } else if (fmt_tag == 1 && bits == 32) {
    for (std::uint32_t i = 0; i + 3 < data_size; i += 4) {
      values.push_back(fs * read_le<std::int32_t>(data + i) / 2147483648.0);
    }
  } else if (fmt_tag == 3 && bits == 32) {
    for (std::uint32_t i = 0; i + 3 < data_size; i += 4) {
      values.push_back(fs * static_cast<double>(read_le<float>(data + i)));
    }
  } else {
    throw ParseError(path.string() + ": unsupported WAV encoding (need 16/32-bit PCM or 32-bit float)");
  }
  return SignalSource::sampled(std::move(values), static_cast<double>(rate));
}

template <class T>
void put_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

SignalSource ingest_signal(const std::filesystem::path& path, SignalFileFormat format,
                           const IngestOptions& options) {
  return format == SignalFileFormat::csv ? read_csv(path, options) : read_wav(path, options);
}

SignalFileFormat signal_format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav" ? SignalFileFormat::wav : SignalFileFormat::csv;
}

void write_wav16(const std::filesystem::path& path, const std::vector<double>& samples,
                 unsigned sample_rate, double full_scale_volts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, sample_rate);
  put_le<std::uint32_t>(out, sample_rate * 2);
  put_le<std::uint16_t>(out, 2);
  put_le<std::uint16_t>(out, 16);
  out.write("data", 4);
  put_le<std::uint32_t>(out, data_bytes);
  for (double v : samples) {
    const double scaled = std::clamp(v / full_scale_volts, -1.0, 32767.0 / 32768.0) * 32768.0;
    put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(scaled)));
  }
}

}  // namespace pulsal
