#include "pulsal/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <thread>

#include <json.hpp>

#include "pulsal/error.hpp"
#include "pulsal/pulse_io.hpp"

namespace pulsal {

namespace {

using Json = nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> theta_decades() {
  std::vector<double> out;
  for (int i = 0; i <= 6; ++i) out.push_back(std::pow(10.0, -4.5 + 0.5 * i));
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment",          "augend",
      "addend",              "duration",
      "theta",               "alpha",
      "tau",                 "clock",
      "sweep.parameter",     "sweep.values",
      "out",                 "seed",
      "leak",                "threads",
      "encoder.oversampling", "encoder.tolerance",
      "encoder.base_step",   "reconstruction.grid_rate",
      "reconstruction.knot_factor", "reconstruction.gap_factor",
      "reconstruction.window_cells",
  };
  return keys;
}

double constant_volts(const SignalSource& s) {
  if (const auto* c = std::get_if<ConstantSignal>(&s.kind())) return c->volts;
  return std::nan("");
}

MetricsRecord run_point(const ExperimentConfig& cfg, const IfcParams& params, AdditionRun* keep = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const SignalSource a = SignalSource::parse(cfg.augend, cfg.duration);
  const SignalSource b = SignalSource::parse(cfg.addend, cfg.duration);
  PipelineOptions opts{cfg.leak, cfg.encoder, cfg.reconstruction};
  const AdditionRun run = run_addition(a, b, params, opts);

  MetricsRecord rec;
  rec.experiment = to_string(cfg.id);
  rec.parameters["theta"] = params.theta;
  rec.parameters["alpha"] = params.alpha;
  rec.parameters["tau"] = params.tau;
  rec.parameters["clock"] = params.clock.value_or(0.0);
  rec.parameters["duration"] = cfg.duration;
  rec.snr = run.snr;
  rec.augend_pulses = run.augend.size();
  rec.addend_pulses = run.addend.size();
  rec.output_pulses = run.evaluated_sum.size();
  rec.collisions = run.collisions;
  rec.sup_error = run.sup_error;
  rec.extra["eval_end"] = run.eval_end;
  rec.extra["final_excess"] = run.add_diagnostics.final_excess;
  rec.extra["knot_spacing"] = run.reconstruction.max_knot_spacing;
  rec.extra["rank_deficient_windows"] = static_cast<double>(run.reconstruction.rank_deficient_windows);

  const double va = constant_volts(a), vb = constant_volts(b);
  if (std::isfinite(va) && std::isfinite(vb) && !run.augend.empty()) {
    const auto counts = pulses_per_interval(run.augend, run.evaluated_sum);
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    const double expected = std::round((va + vb) / va);
    rec.extra["expected_per_interval"] = expected;
    rec.extra["count_min"] = static_cast<double>(*lo);
    rec.extra["count_max"] = static_cast<double>(*hi);
    rec.extra["intervals_matching"] = static_cast<double>(
        std::count(counts.begin(), counts.end(), static_cast<std::size_t>(expected)));
    rec.extra["intervals"] = static_cast<double>(counts.size());
  }
  if (cfg.id == ExperimentId::fig9) {
    const auto d = low_amplitude_density(run.evaluated_sum, run.reconstruction.times, run.desired);
    rec.extra["low_band_density"] = d.band_density;
    rec.extra["global_density"] = d.global_density;
    rec.extra["low_band_density_ratio"] = d.global_density > 0.0 ? d.band_density / d.global_density : 0.0;
  }
  rec.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (keep) *keep = run;
  return rec;
}

void write_train(const std::filesystem::path& path, const PulseTrain& train, const IfcParams& params) {
  if (!params.clock) return;
  PulseFile file{quantize_times(train, *params.clock).train, params};
  write_pulse_file(path, file, format_for_path(path));
}

Json rational_list(const ExactPulseTrain& train) {
  Json out = Json::array();
  for (const auto& p : train) out.push_back(to_string(p.time));
  return out;
}

}  // namespace

std::string to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::fig6: return "fig6";
    case ExperimentId::fig7: return "fig7";
    case ExperimentId::fig8: return "fig8";
    case ExperimentId::fig9: return "fig9";
    case ExperimentId::thm4: return "thm4";
  }
  return "?";
}

ExperimentId parse_experiment_id(const std::string& text) {
  for (auto id : {ExperimentId::fig6, ExperimentId::fig7, ExperimentId::fig8, ExperimentId::fig9, ExperimentId::thm4}) {
    if (to_string(id) == text) return id;
  }
  throw InvalidArgument("unknown experiment '" + text + "' (registered: fig6, fig7, fig8, fig9, thm4)");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentId id) {
  ExperimentConfig c;
  c.id = id;
  switch (id) {
    case ExperimentId::fig7:
      c.sweep = SweepSpec{"clock", {1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4}};
      break;
    case ExperimentId::fig8:
      c.sweep = SweepSpec{"theta", theta_decades()};
      break;
    case ExperimentId::fig9:
      c.augend = "sine:10,12";
      c.addend = "sine:13,12";
      c.duration = 0.25;
      break;
    default:
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& cfg) {
  cfg.require_known(known_keys());
  const auto id_text = cfg.text("experiment");
  if (!id_text) throw ParseError("config is missing 'experiment'");
  ExperimentConfig c = defaults(parse_experiment_id(*id_text));
  if (auto v = cfg.text("augend")) c.augend = *v;
  if (auto v = cfg.text("addend")) c.addend = *v;
  if (auto v = cfg.number("duration")) c.duration = *v;
  if (auto v = cfg.number("theta")) c.params.theta = *v;
  if (auto v = cfg.number("alpha")) c.params.alpha = *v;
  if (auto v = cfg.number("tau")) c.params.tau = *v;
  if (auto v = cfg.text("clock")) {
    if (*v == "none") {
      c.params.clock.reset();
    } else {
      c.params.clock = cfg.number("clock");
    }
  }
  if (cfg.contains("sweep.parameter") || cfg.contains("sweep.values")) {
    SweepSpec s = c.sweep.value_or(SweepSpec{});
    if (auto v = cfg.text("sweep.parameter")) s.parameter = *v;
    if (auto v = cfg.numbers("sweep.values")) s.values = *v;
    c.sweep = s;
  }
  if (auto v = cfg.text("out")) c.out_dir = *v;
  if (auto v = cfg.integer("seed")) c.seed = static_cast<std::uint64_t>(*v);
  if (auto v = cfg.text("leak")) {
    if (*v == "compensated") {
      c.leak = LeakModel::compensated;
    } else if (*v == "linear") {
      c.leak = LeakModel::linear;
    } else {
      throw ParseError("leak must be 'compensated' or 'linear', got '" + *v + "'");
    }
  }
  if (auto v = cfg.integer("threads")) c.threads = static_cast<std::size_t>(std::max(0LL, *v));
  if (auto v = cfg.integer("encoder.oversampling")) c.encoder.oversampling = static_cast<int>(*v);
  if (auto v = cfg.number("encoder.tolerance")) c.encoder.tolerance = *v;
  if (auto v = cfg.number("encoder.base_step")) c.encoder.base_step = *v;
  if (auto v = cfg.number("reconstruction.grid_rate")) c.reconstruction.grid_rate = *v;
  if (auto v = cfg.number("reconstruction.knot_factor")) c.reconstruction.knot_factor = *v;
  if (auto v = cfg.number("reconstruction.gap_factor")) c.reconstruction.gap_factor = *v;
  if (auto v = cfg.integer("reconstruction.window_cells")) {
    c.reconstruction.window_cells = static_cast<std::size_t>(std::max(0LL, *v));
  }
  c.check();
  return c;
}

void ExperimentConfig::check() const {
  params.check();
  encoder.check();
  if (!(duration > 0.0)) throw InvalidArgument("duration must be > 0");
  if (!(reconstruction.grid_rate > 0.0)) throw InvalidArgument("reconstruction grid rate must be > 0");
  if (!(reconstruction.knot_factor > 0.0)) throw InvalidArgument("knot factor must be > 0");
  if (reconstruction.gap_factor < 0.0) throw InvalidArgument("gap factor must be >= 0");
  if (reconstruction.window_cells < 2) throw InvalidArgument("window must span at least two knot cells");
  if (sweep) {
    if (sweep->parameter != "clock" && sweep->parameter != "theta") {
      throw InvalidArgument("sweep parameter must be 'clock' or 'theta', got '" + sweep->parameter + "'");
    }
    if (sweep->values.empty()) throw InvalidArgument("sweep needs at least one value");
    for (std::size_t i = 0; i < sweep->values.size(); ++i) {
      if (!(sweep->values[i] > 0.0)) throw InvalidArgument("sweep values must be positive");
      if (i > 0 && !(sweep->values[i] > sweep->values[i - 1])) {
        throw InvalidArgument("sweep values must be strictly increasing");
      }
    }
  }
}

AdditionRun run_addition(const SignalSource& augend, const SignalSource& addend, const IfcParams& params,
                         const PipelineOptions& options) {
  params.check();
  AdditionRun run;
  const Encoding ea = encode(augend, params, options.encoder);
  const Encoding eb = encode(addend, params, options.encoder);
  run.augend = ea.train();
  run.addend = eb.train();

  const std::vector<PulseTrain> operands{run.augend, run.addend};
  auto sum = add_n_detailed<double>(operands, AdderOptions{params.alpha, params.tau, options.leak});
  run.add_diagnostics = sum.diagnostics;
  run.sum = std::move(sum.train);
  if (params.clock) {
    auto q = quantize_times(run.sum, *params.clock);
    run.collisions = q.collisions;
    run.sum = q.train.to_seconds();
  }

  const double duration = std::min(augend.duration(), addend.duration());
  run.eval_end = duration;
  bool any = false;
  for (const auto& op : operands) {
    if (op.empty()) continue;
    run.eval_end = any ? std::min(run.eval_end, op.pulses().back().time) : op.pulses().back().time;
    any = true;
  }
  run.eval_end = std::min(run.eval_end, duration);

  std::vector<Pulse> kept;
  for (const auto& p : run.sum) {
    if (p.time <= run.eval_end + 1e-12) kept.push_back(p);
  }
  run.evaluated_sum = PulseTrain(std::move(kept));

  WindowedOptions wo = options.reconstruction;
  wo.end = run.eval_end;
  run.reconstruction = reconstruct_windowed(run.evaluated_sum, params, wo);
  run.desired.reserve(run.reconstruction.times.size());
  for (double t : run.reconstruction.times) run.desired.push_back(augend(t) + addend(t));
  run.snr = snr(run.desired, run.reconstruction.values);
  run.sup_error = sup_error(run.desired, run.reconstruction.values);
  return run;
}

std::vector<std::size_t> pulses_per_interval(const PulseTrain& reference, const PulseTrain& output) {
  std::vector<std::size_t> counts(reference.size(), 0);
  std::size_t j = 0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double lo = reference.interval_start(k);
    const double hi = reference[k].time;
    while (j < output.size() && output[j].time <= lo) ++j;
    while (j < output.size() && output[j].time <= hi) {
      ++counts[k];
      ++j;
    }
  }
  return counts;
}

BandDensity low_amplitude_density(const PulseTrain& train, const std::vector<double>& times,
                                  const std::vector<double>& desired, double fraction) {
  if (times.size() != desired.size() || times.size() < 2) {
    throw InvalidArgument("low_amplitude_density: need matching grids of at least two samples");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("band fraction must be in (0, 1)");
  std::vector<double> mag(desired.size());
  std::transform(desired.begin(), desired.end(), mag.begin(), [](double v) { return std::abs(v); });
  std::vector<double> sorted = mag;
  const auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(fraction * static_cast<double>(sorted.size()));
  std::nth_element(sorted.begin(), nth, sorted.end());
  const double cut = *nth;

  // Cell i covers [times[i], times[i+1]).
  const double dt = times[1] - times[0];
  std::size_t band_cells = 0, band_pulses = 0, total_pulses = 0;
  std::vector<bool> in_band(times.size(), false);
  for (std::size_t i = 0; i < times.size(); ++i) {
    in_band[i] = mag[i] <= cut;
    if (in_band[i]) ++band_cells;
  }
  for (const auto& p : train) {
    if (p.time < times.front() || p.time > times.back() + dt) continue;
    ++total_pulses;
    const auto i = std::min(times.size() - 1, static_cast<std::size_t>((p.time - times.front()) / dt));
    if (in_band[i]) ++band_pulses;
  }
  BandDensity out;
  const double span = dt * static_cast<double>(times.size());
  out.band_fraction = static_cast<double>(band_cells) / static_cast<double>(times.size());
  out.global_density = static_cast<double>(total_pulses) / span;
  out.band_density = band_cells ? static_cast<double>(band_pulses) / (dt * static_cast<double>(band_cells)) : 0.0;
  return out;
}

Thm4Result run_thm4() {
  const auto ms = [](std::initializer_list<const char*> ts) {
    std::vector<Rational> v;
    for (const char* t : ts) v.push_back(parse_rational(t));
    return ExactPulseTrain::uniform_polarity(std::span<const Rational>(v), Polarity::positive);
  };
  const ExactPulseTrain p1 = ms({"8/3", "8"});
  const ExactPulseTrain p2 = ms({"4", "8"});
  const ExactPulseTrain p3 = ms({"8"});
  Thm4Result r;
  r.simultaneous = add_n<Rational>({p1, p2, p3});
  r.p12_then_p3 = add_n<Rational>({add_n<Rational>({p1, p2}), p3});
  r.p13_then_p2 = add_n<Rational>({add_n<Rational>({p1, p3}), p2});
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.check();
  ExperimentResult result;
  const std::string id = to_string(config.id);
  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

  if (config.id == ExperimentId::thm4) {
    result.thm4 = run_thm4();
    if (!config.out_dir.empty()) {
      const auto& t = *result.thm4;
      Json j{{"experiment", id},
             {"unit", "ms"},
             {"simultaneous", rational_list(t.simultaneous)},
             {"p1_plus_p2_then_p3", rational_list(t.p12_then_p3)},
             {"p1_plus_p3_then_p2", rational_list(t.p13_then_p2)}};
      const auto json_path = config.out_dir / "thm4.json";
      std::ofstream(json_path) << j.dump(2) << '\n';
      const auto csv_path = config.out_dir / "thm4.csv";
      std::ofstream csv(csv_path);
      csv << "ordering,index,time_ms_exact,time_ms\n";
      const std::pair<const char*, const ExactPulseTrain*> rows[] = {
          {"simultaneous", &t.simultaneous}, {"p1_plus_p2_then_p3", &t.p12_then_p3}, {"p1_plus_p3_then_p2", &t.p13_then_p2}};
      for (const auto& [name, train] : rows) {
        for (std::size_t i = 0; i < train->size(); ++i) {
          csv << name << ',' << i << ',' << to_string((*train)[i].time) << ',' << fmt(to_double((*train)[i].time)) << '\n';
        }
      }
      result.files = {json_path, csv_path};
    }
    return result;
  }

  std::vector<IfcParams> points;
  if (config.sweep) {
    for (double v : config.sweep->values) {
      IfcParams p = config.params;
      if (config.sweep->parameter == "clock") p.clock = v;
      if (config.sweep->parameter == "theta") p.theta = v;
      points.push_back(p);
    }
  } else {
    points.push_back(config.params);
  }

  AdditionRun single;
  if (!config.sweep) {
    result.records.push_back(run_point(config, points.front(), &single));
    points.clear();
  }
  const std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  result.records.resize(std::max(result.records.size(), points.size()));
  for (std::size_t first = 0; first < points.size(); first += threads) {
    std::vector<std::future<MetricsRecord>> batch;
    const std::size_t last = std::min(points.size(), first + threads);
    for (std::size_t i = first; i < last; ++i) {
      batch.push_back(std::async(std::launch::async, [&config, &points, i] { return run_point(config, points[i]); }));
    }
    for (std::size_t i = first; i < last; ++i) result.records[i] = batch[i - first].get();
  }
  if (config.sweep) {
    for (auto& r : result.records) r.parameters["sweep_value"] = r.parameters[config.sweep->parameter];
  }

  if (!config.out_dir.empty()) {
    const auto csv_path = config.out_dir / (id + "_metrics.csv");
    const auto json_path = config.out_dir / (id + "_metrics.json");
    write_metrics_csv(csv_path, result.records);
    write_metrics_json(json_path, result.records);
    result.files = {csv_path, json_path};
    if (!config.sweep) {
      // Single-point experiments also dump the waveforms and trains.
      const AdditionRun& run = single;
      const auto sig_path = config.out_dir / (id + "_signals.csv");
      std::ofstream sig(sig_path);
      sig << "time,desired,reconstructed,error\n";
      for (std::size_t i = 0; i < run.desired.size(); ++i) {
        const double r = run.reconstruction.values[i];
        sig << fmt(run.reconstruction.times[i]) << ',' << fmt(run.desired[i]) << ',' << fmt(r) << ','
            << fmt(run.desired[i] - r) << '\n';
      }
      result.files.push_back(sig_path);
      if (config.params.clock) {
        for (const auto& [name, train] : {std::pair{"augend", &run.augend}, std::pair{"addend", &run.addend},
                                          std::pair{"sum", &run.sum}}) {
          const auto path = config.out_dir / (id + "_" + name + ".txt");
          write_train(path, *train, config.params);
          result.files.push_back(path);
        }
      }
    }
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  std::set<std::string> params, extras;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.parameters) params.insert(k);
    for (const auto& [k, v] : r.extra) extras.insert(k);
  }
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << "experiment";
  for (const auto& k : params) out << ',' << k;
  out << ",paper_snr_db,paper_saturated,error_snr_db,error_saturated,augend_pulses,addend_pulses,"
         "output_pulses,collisions,sup_error,runtime_seconds";
  for (const auto& k : extras) out << ',' << k;
  out << '\n';
  const auto cell = [](const std::map<std::string, double>& m, const std::string& k) {
    const auto it = m.find(k);
    return it == m.end() ? std::string() : fmt(it->second);
  };
  for (const auto& r : records) {
    out << r.experiment;
    for (const auto& k : params) out << ',' << cell(r.parameters, k);
    out << ',' << fmt(r.snr.paper_db) << ',' << r.snr.paper_saturated << ',' << fmt(r.snr.error_db) << ','
        << r.snr.error_saturated << ',' << r.augend_pulses << ',' << r.addend_pulses << ',' << r.output_pulses
        << ',' << r.collisions << ',' << fmt(r.sup_error) << ',' << fmt(r.runtime_seconds);
    for (const auto& k : extras) out << ',' << cell(r.extra, k);
    out << '\n';
  }
}

void write_metrics_json(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) {
    arr.push_back({{"experiment", r.experiment},
                   {"parameters", r.parameters},
                   {"paper_snr_db", r.snr.paper_db},
                   {"paper_saturated", r.snr.paper_saturated},
                   {"error_snr_db", r.snr.error_db},
                   {"error_saturated", r.snr.error_saturated},
                   {"augend_pulses", r.augend_pulses},
                   {"addend_pulses", r.addend_pulses},
                   {"output_pulses", r.output_pulses},
                   {"collisions", r.collisions},
                   {"sup_error", r.sup_error},
                   {"runtime_seconds", r.runtime_seconds},
                   {"extra", r.extra}});
  }
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << arr.dump(2) << '\n';
}

}  // namespace pulsal
