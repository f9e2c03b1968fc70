#include "pulsal/encoder.hpp"

#include <array>
#include <cmath>

#include "pulsal/error.hpp"

namespace pulsal {

double EncoderConfig::grid_step(const SignalSource& signal) const {
  double base = 1e-6;
  if (base_step) {
    base = *base_step;
  } else if (auto period = signal.sample_period()) {
    base = *period;
  }
  return base / static_cast<double>(oversampling);
}

void EncoderConfig::check() const {
  if (oversampling < 1) throw InvalidArgument("oversampling must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidArgument("crossing tolerance must be > 0");
  if (base_step && !(*base_step > 0.0)) throw InvalidArgument("base step must be > 0");
}

QuantizeResult quantize_times(const PulseTrain& train, double clock) {
  if (!(clock > 0.0)) throw InvalidArgument("clock must be > 0");
  QuantizeResult out;
  out.train.clock = clock;
  out.train.pulses.reserve(train.size());
  for (const auto& p : train) {
    auto tick = static_cast<std::int64_t>(std::llround(p.time / clock));
    if (!out.train.pulses.empty() && tick <= out.train.pulses.back().tick) {
      tick = out.train.pulses.back().tick + 1;
      ++out.collisions;
    }
    out.train.pulses.push_back({tick, p.polarity});
  }
  return out;
}

namespace {

double checked(const SignalSource& signal, double t) {
  const double v = signal(t);
  if (!std::isfinite(v)) throw InvalidArgument("non-finite signal value at t=" + std::to_string(t));
  return v;
}

}  // namespace

Encoding encode(const SignalSource& signal, const IfcParams& params, const EncoderConfig& config) {
  params.check();
  config.check();

  const double end = signal.duration();
  const double h = config.grid_step(signal);
  const double theta = params.theta;
  const double alpha = params.alpha;
  const double full_decay = std::exp(-alpha * h);

  std::vector<Pulse> pulses;
  double start = 0.0;  // integration restart instant of the current interval

  while (start < end) {
    double acc = 0.0;
    double a = start;
    double fa = checked(signal, a);
    bool fired = false;
    for (std::size_t i = 1; a < end; ++i) {
      double b = start + static_cast<double>(i) * h;
      if (b > end) b = end;
      const double fb = checked(signal, b);
      const double step = b - a;
      const double decay = step == h ? full_decay : std::exp(-alpha * step);
      const double next = acc * decay + 0.5 * step * (fa * decay + fb);

      if (next >= theta || next <= -theta) {
        const double target = next >= theta ? theta : -theta;
        const double acc_a = acc;
        const double left = a;
        const double f_left = fa;
        auto residual = [&](double x) {
          const double dx = x - left;
          const double d = std::exp(-alpha * dx);
          return acc_a * d + 0.5 * dx * (f_left * d + checked(signal, x)) - target;
        };
        double lo = a, hi = b;
        double g_lo = acc_a - target;
        double x = a + (b - a) * (target - acc_a) / (next - acc_a);
        while (hi - lo > config.tolerance) {
          if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
          const double gx = residual(x);
          if (gx == 0.0) {
            lo = hi = x;
            break;
          }
          if ((gx < 0.0) == (g_lo < 0.0)) {
            lo = x;
            g_lo = gx;
          } else {
            hi = x;
          }
          x = 0.5 * (lo + hi);
        }
        const double crossing = 0.5 * (lo + hi);
        pulses.push_back({crossing, target > 0 ? Polarity::positive : Polarity::negative});
        start = crossing + params.tau;
        fired = true;
        break;
      }
      acc = next;
      a = b;
      fa = fb;
    }
    if (!fired) break;
  }

  Encoding out{PulseTrain(std::move(pulses)), std::nullopt};
  if (params.clock) out.quantized = quantize_times(out.continuous, *params.clock);
  return out;
}

double leaky_area(const SignalSource& signal, double a, double b, double alpha, double panel) {
  if (!(b > a)) return 0.0;
  static constexpr std::array<double, 4> nodes{-0.8611363115940526, -0.3399810435848563,
                                               0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> weights{0.3478548451374538, 0.6521451548625461,
                                                 0.6521451548625461, 0.3478548451374538};
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / panel)));
  const double w = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * w;
    double part = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double s = mid + 0.5 * w * nodes[q];
      part += weights[q] * signal(s) * std::exp(alpha * (s - b));
    }
    sum += 0.5 * w * part;
  }
  return sum;
}

double verify_area_constraint(const PulseTrain& train, const SignalSource& signal,
                              const IfcParams& params, const EncoderConfig& config) {
  const double panel = config.grid_step(signal) / 10.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < train.size(); ++k) {
    const double a = k == 0 ? 0.0 : train[k - 1].time + params.tau;
    const double b = train[k].time;
    const double area = leaky_area(signal, a, b, params.alpha, panel);
    const double expected = sign(train[k].polarity) * params.theta;
    worst = std::max(worst, std::abs(area - expected) / params.theta);
  }
  return worst;
}

}  // namespace pulsal
