// pulsal: encode signals into pulse trains, add trains in the pulse domain,
// reconstruct signals, and run the registered experiments.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulsal/algebra.hpp"
#include "pulsal/config.hpp"
#include "pulsal/encoder.hpp"
#include "pulsal/error.hpp"
#include "pulsal/experiments.hpp"
#include "pulsal/pulse_io.hpp"
#include "pulsal/reconstruction.hpp"
#include "pulsal/signal.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace pulsal;

namespace {

struct Globals {
  std::string config;
  std::string out = ".";
  bool exact = false;
  std::optional<double> clock, theta, alpha, tau;
  std::optional<std::uint64_t> seed;
};

struct EncodeArgs {
  std::string signal;
  std::string input;
  std::string format;
  std::optional<double> full_scale;
  std::optional<double> duration;
  std::string name = "train.txt";
};

struct AddArgs {
  std::vector<std::string> inputs;
  std::string leak = "compensated";
  std::string name = "sum.txt";
};

struct ReconstructArgs {
  std::string input;
  double rate = 1e5;
  std::string reference;
  std::optional<double> end;
  std::string name = "reconstruction.csv";
};

struct ExperimentArgs {
  std::string id;
};

KeyValueConfig load_config(const Globals& g) {
  return g.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config);
}

// defaults < config file < flags
IfcParams resolve_params(const Globals& g, const KeyValueConfig& cfg, IfcParams p) {
  if (auto v = cfg.number("theta")) p.theta = *v;
  if (auto v = cfg.number("alpha")) p.alpha = *v;
  if (auto v = cfg.number("tau")) p.tau = *v;
  if (auto v = cfg.text("clock")) {
    if (*v == "none") {
      p.clock.reset();
    } else {
      p.clock = cfg.number("clock");
    }
  }
  if (g.theta) p.theta = *g.theta;
  if (g.alpha) p.alpha = *g.alpha;
  if (g.tau) p.tau = *g.tau;
  if (g.clock) p.clock = *g.clock;
  p.check();
  return p;
}

Json params_json(const IfcParams& p) {
  Json j{{"theta", p.theta}, {"alpha", p.alpha}, {"tau", p.tau}};
  j["clock"] = p.clock ? Json(*p.clock) : Json(nullptr);
  return j;
}

template <class Train>
Json counts_json(const Train& t) {
  return {{"pulses", t.size()}, {"positive", t.count(Polarity::positive)}, {"negative", t.count(Polarity::negative)}};
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LeakModel parse_leak(const std::string& s) {
  if (s == "compensated") return LeakModel::compensated;
  if (s == "linear") return LeakModel::linear;
  throw InvalidArgument("leak must be 'compensated' or 'linear', got '" + s + "'");
}

int cmd_encode(const Globals& g, const EncodeArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  IfcParams defaults;
  defaults.theta = 1e-3;
  defaults.alpha = 40.0;
  defaults.clock = 1e-6;
  const IfcParams params = resolve_params(g, cfg, defaults);
  if (!params.clock) throw InvalidArgument("encode writes clocked pulse files; a clock is required");

  std::optional<SignalSource> signal;
  std::string spec = a.signal.empty() ? cfg.text("signal").value_or("") : a.signal;
  std::string input = a.input.empty() ? cfg.text("input").value_or("") : a.input;
  if (!input.empty()) {
    IngestOptions io;
    io.full_scale_volts = a.full_scale ? a.full_scale : cfg.number("full_scale_volts");
    SignalFileFormat fmt = signal_format_for_path(input);
    if (a.format == "csv") fmt = SignalFileFormat::csv;
    if (a.format == "wav") fmt = SignalFileFormat::wav;
    signal = ingest_signal(input, fmt, io);
  } else if (!spec.empty()) {
    const double duration = a.duration ? *a.duration : cfg.number("duration").value_or(1.0);
    signal = SignalSource::parse(spec, duration);
  } else {
    throw InvalidArgument("encode needs --signal <spec> or --input <file>");
  }

  const Encoding enc = encode(*signal, params);
  const fs::path out_dir(g.out);
  fs::create_directories(out_dir);
  const fs::path train_path = out_dir / a.name;
  write_pulse_file(train_path, PulseFile{enc.quantized->train, params}, format_for_path(train_path));

  Json diag{{"command", "encode"},
            {"signal", signal->describe()},
            {"duration", signal->duration()},
            {"params", params_json(params)},
            {"output", counts_json(enc.continuous)},
            {"collisions", enc.quantized->collisions},
            {"area_constraint_max_relative_error", verify_area_constraint(enc.continuous, *signal, params)},
            {"train_file", train_path.string()}};
  if (g.seed) diag["seed"] = *g.seed;
  write_json(out_dir / "encode.json", diag);
  std::cout << diag.dump() << '\n';
  return 0;
}

int cmd_add(const Globals& g, const AddArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  std::vector<PulseFile> files;
  for (const auto& path : a.inputs) files.push_back(read_pulse_file(path));
  const PulseFile& head = files.front();
  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].train.clock != head.train.clock || files[i].params.theta != head.params.theta) {
      throw InvalidArgument("operand " + a.inputs[i] + " differs from " + a.inputs[0] + " in clock or theta");
    }
  }
  const IfcParams params = resolve_params(g, cfg, head.params);
  const double clock = params.clock.value_or(head.train.clock);
  const fs::path out_dir(g.out);
  fs::create_directories(out_dir);
  const fs::path sum_path = out_dir / a.name;

  Json diag{{"command", "add"}, {"params", params_json(params)}, {"exact", g.exact}};
  Json operands = Json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    Json o = counts_json(files[i].train.to_seconds());
    o["path"] = a.inputs[i];
    operands.push_back(o);
  }
  diag["operands"] = operands;

  PulseTrain sum;
  if (g.exact) {
    // Exact times are tick * clock with the clock read as a decimal; the
    // rational algebra uses the linear area rule.
    const Rational clock_q = rational_from_decimal(head.train.clock);
    std::vector<ExactPulseTrain> trains;
    for (const auto& f : files) trains.push_back(f.train.to_exact(clock_q));
    const auto res = add_n_detailed<Rational>(trains, AdderOptions{0.0, params.tau, LeakModel::linear});
    Json times = Json::array();
    for (const auto& p : res.train) times.push_back(to_string(p.time));
    diag["exact_times"] = times;
    diag["final_excess"] = to_string(res.diagnostics.final_excess);
    diag["max_abs_excess"] = res.diagnostics.max_abs_excess;
    diag["leak_model"] = "linear";
    sum = to_double_train(res.train);
  } else {
    std::vector<PulseTrain> trains;
    for (const auto& f : files) trains.push_back(f.train.to_seconds());
    const LeakModel leak = parse_leak(cfg.text("leak").value_or(a.leak));
    const auto res = add_n_detailed<double>(trains, AdderOptions{params.alpha, params.tau, leak});
    diag["final_excess"] = res.diagnostics.final_excess;
    diag["max_abs_excess"] = res.diagnostics.max_abs_excess;
    diag["leak_model"] = leak == LeakModel::linear ? "linear" : "compensated";
    sum = res.train;
  }
  const auto q = quantize_times(sum, clock);
  IfcParams out_params = params;
  out_params.clock = clock;
  write_pulse_file(sum_path, PulseFile{q.train, out_params}, format_for_path(sum_path));
  diag["output"] = counts_json(sum);
  diag["collisions"] = q.collisions;
  diag["sum_file"] = sum_path.string();
  if (g.seed) diag["seed"] = *g.seed;
  write_json(out_dir / "add.json", diag);
  std::cout << diag.dump() << '\n';
  return 0;
}

int cmd_reconstruct(const Globals& g, const ReconstructArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  const PulseFile file = read_pulse_file(a.input);
  const IfcParams params = resolve_params(g, cfg, file.params);
  const PulseTrain train = file.train.to_seconds();
  WindowedOptions wo;
  wo.grid_rate = cfg.number("reconstruction.grid_rate").value_or(a.rate);
  if (auto v = cfg.number("reconstruction.knot_factor")) wo.knot_factor = *v;
  if (auto v = cfg.number("reconstruction.gap_factor")) wo.gap_factor = *v;
  if (auto v = cfg.integer("reconstruction.window_cells")) wo.window_cells = static_cast<std::size_t>(*v);
  wo.end = a.end;
  const auto rec = reconstruct_windowed(train, params, wo);

  const fs::path out_dir(g.out);
  fs::create_directories(out_dir);
  const fs::path csv_path = out_dir / a.name;
  {
    std::ofstream csv(csv_path);
    if (!csv) throw Error("io", "cannot write " + csv_path.string());
    csv << "time,value\n";
    char buf[64];
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", rec.times[i], rec.values[i]);
      csv << buf;
    }
  }
  Json diag{{"command", "reconstruct"},
            {"params", params_json(params)},
            {"input", counts_json(train)},
            {"residual_norm", rec.residual_norm},
            {"rank", rec.min_rank},
            {"windows", rec.windows},
            {"rank_deficient_windows", rec.rank_deficient_windows},
            {"knot_spacing", rec.max_knot_spacing},
            {"reconstruction_file", csv_path.string()}};
  const std::string ref = a.reference.empty() ? cfg.text("reference").value_or("") : a.reference;
  if (!ref.empty() && !rec.times.empty()) {
    const SignalSource reference = SignalSource::parse(ref, rec.times.back());
    std::vector<double> d;
    d.reserve(rec.times.size());
    for (double t : rec.times) d.push_back(reference(t));
    diag["sup_error"] = sup_error(d, rec.values);
    if (mean_power(d) > 0.0) {
      const auto s = snr(d, rec.values);
      diag["paper_snr_db"] = s.paper_db;
      diag["error_snr_db"] = s.error_db;
    }
  }
  if (g.seed) diag["seed"] = *g.seed;
  write_json(out_dir / "reconstruct.json", diag);
  std::cout << diag.dump() << '\n';
  return 0;
}

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
  KeyValueConfig cfg = load_config(g);
  if (!a.id.empty()) cfg.set("experiment", a.id);
  if (!cfg.contains("experiment")) throw InvalidArgument("experiment needs an id or an 'experiment' config key");
  ExperimentConfig ec = ExperimentConfig::from_config(cfg);
  if (g.theta) ec.params.theta = *g.theta;
  if (g.alpha) ec.params.alpha = *g.alpha;
  if (g.tau) ec.params.tau = *g.tau;
  if (g.clock) ec.params.clock = *g.clock;
  if (g.seed) ec.seed = *g.seed;
  ec.out_dir = g.out;
  ec.check();
  const auto result = run_experiment(ec);

  Json summary{{"experiment", to_string(ec.id)}, {"seed", ec.seed}};
  Json files = Json::array();
  for (const auto& f : result.files) files.push_back(f.string());
  summary["files"] = files;
  Json recs = Json::array();
  for (const auto& r : result.records) {
    recs.push_back({{"parameters", r.parameters},
                    {"paper_snr_db", r.snr.paper_db},
                    {"paper_saturated", r.snr.paper_saturated},
                    {"error_snr_db", r.snr.error_db},
                    {"output_pulses", r.output_pulses},
                    {"sup_error", r.sup_error}});
  }
  summary["records"] = recs;
  if (result.thm4) {
    const auto list = [](const ExactPulseTrain& t) {
      Json j = Json::array();
      for (const auto& p : t) j.push_back(to_string(p.time));
      return j;
    };
    summary["unit"] = "ms";
    summary["simultaneous"] = list(result.thm4->simultaneous);
    summary["p1_plus_p2_then_p3"] = list(result.thm4->p12_then_p3);
    summary["p1_plus_p3_then_p2"] = list(result.thm4->p13_then_p2);
  }
  std::cout << summary.dump() << '\n';
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-train encoding, pulse-domain addition and reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--exact", g.exact, "exact rational-time arithmetic");
  app.add_option("--clock", g.clock, "time-stamping clock, seconds");
  app.add_option("--theta", g.theta, "IFC threshold");
  app.add_option("--alpha", g.alpha, "leak factor, 1/s");
  app.add_option("--tau", g.tau, "refractory period, seconds");
  app.add_option("--seed", g.seed, "seed recorded with the outputs");

  EncodeArgs ea;
  auto* enc = app.add_subcommand("encode", "encode an analog signal into a pulse file");
  enc->add_option("--signal", ea.signal, "constant:<volts> or sine:<amplitude>,<hz>[,<phase>]");
  enc->add_option("--input", ea.input, "CSV (time,value) or WAV input");
  enc->add_option("--format", ea.format, "input format override")->check(CLI::IsMember({"csv", "wav"}));
  enc->add_option("--full-scale", ea.full_scale, "volts at WAV digital full scale");
  enc->add_option("--duration", ea.duration, "signal duration for --signal, seconds");
  enc->add_option("--name", ea.name, "output file name (.txt or .jsonl)");

  AddArgs aa;
  auto* add = app.add_subcommand("add", "add pulse files in the pulse domain");
  add->add_option("inputs", aa.inputs, "pulse files")->required()->check(CLI::ExistingFile);
  add->add_option("--leak", aa.leak, "area rule")->check(CLI::IsMember({"compensated", "linear"}));
  add->add_option("--name", aa.name, "output file name");

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "reconstruct a signal from a pulse file");
  rec->add_option("input", ra.input, "pulse file")->required()->check(CLI::ExistingFile);
  rec->add_option("--rate", ra.rate, "output sample rate, Hz");
  rec->add_option("--reference", ra.reference, "reference signal spec for sup error and SNR");
  rec->add_option("--end", ra.end, "evaluation end, seconds");
  rec->add_option("--name", ra.name, "output CSV name");

  ExperimentArgs xa;
  auto* exp = app.add_subcommand("experiment", "run a registered experiment");
  exp->add_option("id", xa.id, "fig6 | fig7 | fig8 | fig9 | thm4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*enc) return cmd_encode(g, ea);
    if (*add) return cmd_add(g, aa);
    if (*rec) return cmd_reconstruct(g, ra);
    if (*exp) return cmd_experiment(g, xa);
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 1;
}
