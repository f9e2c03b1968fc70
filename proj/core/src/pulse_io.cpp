#include "pulsal/pulse_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pulsal/error.hpp"

namespace pulsal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, const std::string& what) {
  std::string buf(trim(s));
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw ParseError("bad value for " + what + ": '" + buf + "'");
  }
  return v;
}

Polarity parse_polarity(long v, std::size_t line) {
  if (v == 1) return Polarity::positive;
  if (v == -1) return Polarity::negative;
  throw ParseError("line " + std::to_string(line) + ": polarity must be +1 or -1");
}

IfcParams header_params(const std::map<std::string, double>& kv) {
  IfcParams p;
  auto need = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(std::string("header is missing '") + key + "'");
    return it->second;
  };
  p.clock = need("clock_seconds");
  p.theta = need("theta");
  p.alpha = need("alpha");
  p.tau = need("tau");
  try {
    p.check();
  } catch (const Error& e) {
    throw ParseError(std::string("invalid header: ") + e.what());
  }
  return p;
}

void append_checked(ClockedTrain& train, ClockedPulse pulse, std::size_t line) {
  if (pulse.tick < 0) throw ParseError("line " + std::to_string(line) + ": tick must be unsigned");
  if (!train.pulses.empty() && pulse.tick <= train.pulses.back().tick) {
    throw ParseError("line " + std::to_string(line) + ": ticks must be strictly increasing");
  }
  train.pulses.push_back(pulse);
}

PulseFile read_jsonl(std::istream& in) {
  PulseFile file;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) {
      std::map<std::string, double> kv;
      for (const char* key : {"clock_seconds", "theta", "alpha", "tau"}) {
        if (j.contains(key) && j[key].is_number()) kv[key] = j[key].get<double>();
      }
      file.params = header_params(kv);
      file.train.clock = *file.params.clock;
      have_header = true;
      continue;
    }
    if (!j.contains("tick") || !j.contains("polarity") || !j["tick"].is_number_integer() ||
        !j["polarity"].is_number_integer()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected {\"tick\":N,\"polarity\":+-1}");
    }
    append_checked(file.train,
                   {j["tick"].get<std::int64_t>(), parse_polarity(j["polarity"].get<long>(), lineno)},
                   lineno);
  }
  if (!have_header) throw ParseError("missing header line");
  return file;
}

PulseFile read_text(std::istream& in) {
  PulseFile file;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!have_header) {
      std::map<std::string, double> kv;
      std::istringstream fields{std::string(body)};
      std::string field;
      while (fields >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError("header field without '=': '" + field + "'");
        const std::string key = field.substr(0, eq);
        kv[key] = parse_double(std::string_view(field).substr(eq + 1), key);
      }
      file.params = header_params(kv);
      file.train.clock = *file.params.clock;
      have_header = true;
      continue;
    }
    std::istringstream fields{std::string(body)};
    std::string tick_s, pol_s, extra;
    if (!(fields >> tick_s >> pol_s) || (fields >> extra)) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'tick polarity'");
    }
    std::int64_t tick = 0;
    auto [p1, e1] = std::from_chars(tick_s.data(), tick_s.data() + tick_s.size(), tick);
    if (e1 != std::errc{} || p1 != tick_s.data() + tick_s.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": bad tick '" + tick_s + "'");
    }
    long pol = 0;
    const char* pb = pol_s.data() + (pol_s.starts_with('+') ? 1 : 0);
    auto [p2, e2] = std::from_chars(pb, pol_s.data() + pol_s.size(), pol);
    if (e2 != std::errc{} || p2 != pol_s.data() + pol_s.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": bad polarity '" + pol_s + "'");
    }
    append_checked(file.train, {tick, parse_polarity(pol, lineno)}, lineno);
  }
  if (!have_header) throw ParseError("missing header line");
  return file;
}

}  // namespace

PulseFile read_pulse_file(std::istream& in) {
  // Peek at the first significant character to pick the encoding.
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream body(content);
  for (char c : content) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return read_jsonl(body);
    break;
  }
  return read_text(body);
}

PulseFile read_pulse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open pulse file " + path.string());
  return read_pulse_file(in);
}

void write_pulse_file(std::ostream& out, const PulseFile& file, PulseFileFormat format) {
  const auto& p = file.params;
  if (format == PulseFileFormat::jsonl) {
    nlohmann::json header = {{"clock_seconds", file.train.clock},
                             {"theta", p.theta},
                             {"alpha", p.alpha},
                             {"tau", p.tau}};
    out << header.dump() << '\n';
    for (const auto& pulse : file.train.pulses) {
      out << "{\"tick\":" << pulse.tick << ",\"polarity\":" << sign(pulse.polarity) << "}\n";
    }
    return;
  }
  out << std::setprecision(17) << "clock_seconds=" << file.train.clock << " theta=" << p.theta
      << " alpha=" << p.alpha << " tau=" << p.tau << '\n';
  for (const auto& pulse : file.train.pulses) {
    out << pulse.tick << ' ' << (pulse.polarity == Polarity::positive ? "+1" : "-1") << '\n';
  }
}

void write_pulse_file(const std::filesystem::path& path, const PulseFile& file,
                      PulseFileFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write pulse file " + path.string());
  write_pulse_file(out, file, format);
}

PulseFileFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? PulseFileFormat::jsonl : PulseFileFormat::text;
}

}  // namespace pulsal
