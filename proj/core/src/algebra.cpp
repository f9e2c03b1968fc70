#include "pulsal/algebra.hpp"

#include <cmath>
#include <limits>

#include "pulsal/error.hpp"

namespace pulsal {

namespace {

template <TimeScalar T>
T from_double(double x) {
  if constexpr (std::same_as<T, double>) {
    return x;
  } else {
    return Rational(x);
  }
}

template <TimeScalar T>
double abs_double(const T& x) {
  return std::abs(to_double(x));
}

// Per-operand cursor over its inter-pulse intervals.
template <TimeScalar T>
struct Operand {
  const BasicPulseTrain<T>* train;
  std::size_t next = 0;  // index of the pulse closing the current interval
  T rate{};              // signed level over the current interval

  bool done() const { return next >= train->size(); }
};

template <TimeScalar T>
class Adder {
 public:
  Adder(std::span<const BasicPulseTrain<T>> trains, const AdderOptions& options)
      : options_(options), tau_(from_double<T>(options.tau)) {
    compensated_ = options.leak == LeakModel::compensated && options.alpha > 0.0;
    if constexpr (std::same_as<T, Rational>) {
      if (compensated_) {
        throw InvalidArgument("leak compensation needs floating-point times; use the linear model in exact mode");
      }
    }
    if (options.alpha < 0.0 || options.tau < 0.0) throw InvalidArgument("alpha and tau must be >= 0");
    operands_.reserve(trains.size());
    for (const auto& tr : trains) {
      Operand<T> op{&tr};
      refresh(op, T(0), false);
      operands_.push_back(op);
    }
    if constexpr (std::same_as<T, double>) {
      epsilon_ = 1e-10;
    }
  }

  AddResult<T> run() {
    std::vector<T> breakpoints;
    for (const auto& op : operands_) {
      for (const auto& p : *op.train) breakpoints.push_back(p.time);
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    T cur(0);
    for (const T& event : breakpoints) {
      sweep(cur, event, segment_rate());
      cur = event;
      for (auto& op : operands_) {
        while (!op.done() && (*op.train)[op.next].time <= event) {
          ++op.next;
          refresh(op, (*op.train)[op.next - 1].time, true);
        }
      }
      diag_.max_abs_excess = std::max(diag_.max_abs_excess, abs_double(acc_));
      ++diag_.segments;
    }
    diag_.final_excess = acc_;
    return {BasicPulseTrain<T>(std::move(out_)), diag_};
  }

 private:
  void refresh(Operand<T>& op, const T& prev, bool after_pulse) {
    if (op.done()) {
      op.rate = T(0);
      return;
    }
    // The operand integrated only D - tau of its interval, but the level it
    // reports holds over all of D.
    const auto& closing = (*op.train)[op.next];
    const T active = after_pulse ? T(closing.time - prev - tau_) : T(closing.time - prev);
    if (!(active > 0)) {
      op.rate = T(0);
      return;
    }
    const int p = sign(closing.polarity);
    if constexpr (std::same_as<T, double>) {
      if (compensated_) {
        op.rate = p * options_.alpha / -std::expm1(-options_.alpha * active);
        return;
      }
    }
    op.rate = T(p) / active;
  }

  T segment_rate() const {
    T r(0);
    for (const auto& op : operands_) {
      if (!op.done()) r += op.rate;
    }
    return r;
  }

  void emit(const T& t, int polarity) {
    out_.push_back({t, polarity > 0 ? Polarity::positive : Polarity::negative});
    acc_ = T(0);
    hold_until_ = t + tau_;
  }

  // Integrates the constant rate over (cur, end], emitting pulses.
  void sweep(T cur, const T& end, const T& rate) {
    while (cur < end) {
      if (cur < hold_until_) {
        cur = std::min(end, hold_until_);
        continue;
      }
      if constexpr (std::same_as<T, double>) {
        if (compensated_) {
          sweep_leaky(cur, end, rate);
          return;
        }
      }
      if (rate == 0) return;
      const int target = rate > 0 ? 1 : -1;
      const T needed = T(target) - acc_;
      const T reached = acc_ + rate * (end - cur);
      const bool hits = target > 0 ? reached >= T(1) - T(epsilon_) : reached <= T(-1) + T(epsilon_);
      if (!hits) {
        acc_ = reached;
        return;
      }
      T when = cur + needed / rate;
      if (when > end) when = end;
      emit(when, target);
      cur = when;
    }
  }

  void sweep_leaky(double cur, double end, double rate)
    requires std::same_as<T, double>
  {
    const double alpha = options_.alpha;
    while (cur < end) {
      if (cur < hold_until_) {
        cur = std::min(end, hold_until_);
        continue;
      }
      const double asymptote = rate / alpha;
      const double reached = asymptote + (acc_ - asymptote) * std::exp(-alpha * (end - cur));
      const int target = rate > 0 ? 1 : -1;
      const bool hits = rate != 0.0 &&
                        (target > 0 ? reached >= 1.0 - epsilon_ : reached <= -1.0 + epsilon_);
      if (!hits) {
        acc_ = reached;
        return;
      }
      double when = end;
      const double ratio = (target - asymptote) / (acc_ - asymptote);
      if (ratio > 0.0 && ratio < 1.0) when = std::min(end, cur - std::log(ratio) / alpha);
      emit(when, target);
      cur = when;
    }
  }

  AdderOptions options_;
  T tau_;
  bool compensated_ = false;
  double epsilon_ = 0.0;
  std::vector<Operand<T>> operands_;
  T acc_{};
  T hold_until_{};
  std::vector<BasicPulse<T>> out_;
  AddDiagnostics<T> diag_;
};

template <TimeScalar T>
bool all_polarity(const BasicPulseTrain<T>& tr, Polarity p) {
  return std::all_of(tr.begin(), tr.end(), [p](const auto& x) { return x.polarity == p; });
}

template <TimeScalar T>
bool strictly_increasing_positive(const BasicPulseTrain<T>& tr) {
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (!(tr[i].time > tr.interval_start(i))) return false;
  }
  return true;
}

template <TimeScalar T>
void check_single_addend(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend,
                         Polarity addend_polarity, const char* what) {
  if (augend.empty() || !all_polarity(augend, Polarity::positive) || !strictly_increasing_positive(augend)) {
    throw PreconditionError(std::string(what) + ": augend must be non-empty, positive and strictly increasing from 0");
  }
  if (addend.size() != 1 || addend[0].polarity != addend_polarity) {
    throw PreconditionError(std::string(what) + ": addend must be a single pulse of the required polarity");
  }
  if (augend.pulses().back().time > addend[0].time) {
    throw PreconditionError(std::string(what) + ": requires t_{u_m} <= t_{d_1}");
  }
}

}  // namespace

template <TimeScalar T>
AddResult<T> add_n_detailed(std::span<const BasicPulseTrain<T>> trains, const AdderOptions& options) {
  return Adder<T>(trains, options).run();
}

template <TimeScalar T>
BasicPulseTrain<T> add_pair_thm1(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend) {
  check_single_addend(augend, addend, Polarity::positive, "add_pair_thm1");
  const T& td1 = addend[0].time;
  const T b1 = td1;  // B_1 = t_{d_1} - t_{d_0}
  std::vector<BasicPulse<T>> out;
  out.reserve(augend.size() + 1);
  for (std::size_t k = 0; k < augend.size(); ++k) {
    const T prev = augend.interval_start(k);
    const T a_k = augend.interval(k);
    out.push_back({T(prev + (td1 - prev) * a_k / (b1 + a_k)), Polarity::positive});
  }
  out.push_back({td1, Polarity::positive});
  return BasicPulseTrain<T>(std::move(out));
}

template <TimeScalar T>
BasicPulseTrain<T> subtract_thm2(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend) {
  check_single_addend(augend, addend, Polarity::negative, "subtract_thm2");
  const T b1 = addend[0].time;
  std::vector<BasicPulse<T>> out;
  T cumulative(0);
  for (std::size_t k = 0; k + 1 < augend.size(); ++k) {
    cumulative += augend.interval(k);
    const T next = augend.interval(k + 1);
    out.push_back({T(augend[k].time + cumulative * next / (b1 - next)), Polarity::positive});
  }
  return BasicPulseTrain<T>(std::move(out));
}

std::string to_string(CorollaryCase c) {
  switch (c) {
    case CorollaryCase::not_applicable: return "not_applicable";
    case CorollaryCase::theorem1: return "theorem1";
    case CorollaryCase::corollary1: return "corollary1";
    case CorollaryCase::corollary2: return "corollary2";
    case CorollaryCase::corollary3: return "corollary3";
    case CorollaryCase::theorem2: return "theorem2";
    case CorollaryCase::corollary4: return "corollary4";
    case CorollaryCase::corollary5: return "corollary5";
  }
  return "unknown";
}

template <TimeScalar T>
CorollaryPrediction corollary_counts(const BasicPulseTrain<T>& augend, const BasicPulseTrain<T>& addend) {
  CorollaryPrediction none;
  if (augend.empty() || addend.empty() || !strictly_increasing_positive(augend) ||
      !strictly_increasing_positive(addend)) {
    return none;
  }
  const std::size_t m = augend.size();
  const std::size_t n = addend.size();
  const T& u_last = augend.pulses().back().time;
  const T& d_last = addend.pulses().back().time;
  const T& d_first = addend[0].time;
  const T& u_first = augend[0].time;

  auto counts = [](CorollaryCase c, std::size_t count, Polarity p) {
    return p == Polarity::positive ? CorollaryPrediction{c, count, 0} : CorollaryPrediction{c, 0, count};
  };

  for (Polarity p : {Polarity::positive, Polarity::negative}) {
    if (!all_polarity(augend, p) || !all_polarity(addend, p)) continue;
    if (n == 1 && u_last <= d_first) return counts(CorollaryCase::theorem1, m + 1, p);
    if (m == 1 && d_last <= u_first) return counts(CorollaryCase::corollary1, n + 1, p);
    // Addend pulses all fall in the last augend interval (t_{u_{m-1}}, t_{u_m}].
    if (augend.interval_start(m - 1) < d_first && d_last <= u_last) {
      return counts(p == Polarity::positive ? CorollaryCase::corollary2 : CorollaryCase::corollary3, m + n, p);
    }
    return none;
  }

  if (n == 1 && u_last <= d_first) {
    if (all_polarity(augend, Polarity::positive) && addend[0].polarity == Polarity::negative) {
      return {CorollaryCase::theorem2, m - 1, 0};
    }
    if (all_polarity(augend, Polarity::negative) && addend[0].polarity == Polarity::positive) {
      return {CorollaryCase::corollary4, 0, m - 1};
    }
  }

  if (m >= 2 && n >= 2 && all_polarity(augend, Polarity::positive) &&
      all_polarity(addend, Polarity::negative) && augend[m - 2].time <= d_first && d_last <= u_last) {
    return {CorollaryCase::corollary5, m - 2, n - 2};
  }
  return none;
}

PulseTrain brute_force_sum(std::span<const PulseTrain> trains, double step) {
  if (!(step > 0.0)) throw InvalidArgument("grid step must be > 0");
  double end = 0.0;
  for (const auto& tr : trains) {
    if (!tr.empty()) end = std::max(end, tr.pulses().back().time);
  }
  if (end <= 0.0) return {};

  // Cumulative signed area F_i(t) of operand i: sum of the polarities of its
  // pulses at or before t plus a linear ramp across the open interval.
  struct Cursor {
    const PulseTrain* train;
    std::size_t k = 0;
    double closed = 0.0;  // sum of polarities strictly before interval k
  };
  std::vector<Cursor> cursors;
  for (const auto& tr : trains) cursors.push_back({&tr});
  auto area_at = [](Cursor& c, double t) {
    const auto& tr = *c.train;
    while (c.k < tr.size() && tr[c.k].time <= t) {
      c.closed += sign(tr[c.k].polarity);
      ++c.k;
    }
    if (c.k >= tr.size()) return c.closed;
    const double start = tr.interval_start(c.k);
    return c.closed + sign(tr[c.k].polarity) * (t - start) / (tr[c.k].time - start);
  };

  // Uniform grid plus the operand pulse times, so a level that touches the
  // threshold exactly at a breakpoint is not skipped between samples.
  const auto cells = static_cast<std::size_t>(std::ceil(end / step));
  std::vector<double> samples;
  samples.reserve(cells + 1);
  for (std::size_t i = 1; i < cells; ++i) samples.push_back(static_cast<double>(i) * step);
  samples.push_back(end);
  for (const auto& tr : trains) {
    for (const auto& p : tr) samples.push_back(p.time);
  }
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  constexpr double tolerance = 1e-9;
  std::vector<Pulse> out;
  double acc = 0.0;
  double previous_total = 0.0;
  for (const double t : samples) {
    double total = 0.0;
    for (auto& c : cursors) total += area_at(c, t);
    acc += total - previous_total;
    previous_total = total;
    while (acc >= 1.0 - tolerance) {
      out.push_back({t, Polarity::positive});
      acc -= 1.0;
    }
    while (acc <= -1.0 + tolerance) {
      out.push_back({t, Polarity::negative});
      acc += 1.0;
    }
  }
  return PulseTrain(std::move(out));
}

#define PULSAL_INSTANTIATE(T)                                                                          \
  template AddResult<T> add_n_detailed<T>(std::span<const BasicPulseTrain<T>>, const AdderOptions&);   \
  template BasicPulseTrain<T> add_pair_thm1<T>(const BasicPulseTrain<T>&, const BasicPulseTrain<T>&);  \
  template BasicPulseTrain<T> subtract_thm2<T>(const BasicPulseTrain<T>&, const BasicPulseTrain<T>&);  \
  template CorollaryPrediction corollary_counts<T>(const BasicPulseTrain<T>&, const BasicPulseTrain<T>&);

PULSAL_INSTANTIATE(double)
PULSAL_INSTANTIATE(Rational)

#undef PULSAL_INSTANTIATE

}  // namespace pulsal
