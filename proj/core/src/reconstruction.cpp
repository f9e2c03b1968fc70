#include "pulsal/reconstruction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "pulsal/error.hpp"

namespace pulsal {

namespace {

constexpr std::array<double, 8> kNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                       -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                       0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                         0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
constexpr double kRankTolerance = 1e-10;

// Cardinal cubic B-spline on [0, 4).
double cardinal_cubic(double u) {
  if (u < 0.0 || u >= 4.0) return 0.0;
  if (u < 1.0) return u * u * u / 6.0;
  if (u < 2.0) return (((-3.0 * u + 12.0) * u - 12.0) * u + 4.0) / 6.0;
  if (u < 3.0) return (((3.0 * u - 24.0) * u + 60.0) * u - 44.0) / 6.0;
  const double v = 4.0 - u;
  return v * v * v / 6.0;
}

}  // namespace

Basis Basis::cubic_bspline(double start, double end, double spacing) {
  if (!(end > start)) throw InvalidArgument("basis window must have end > start");
  if (!(spacing > 0.0)) throw InvalidArgument("knot spacing must be > 0");
  Basis b;
  b.family_ = Family::cubic_bspline;
  b.start_ = start;
  b.end_ = end;
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::ceil((end - start) / spacing - 1e-9)));
  b.spacing_ = (end - start) / static_cast<double>(intervals);
  b.count_ = intervals + 3;
  return b;
}

Basis Basis::monomials(double start, double end, std::vector<int> powers) {
  if (!(end > start)) throw InvalidArgument("basis window must have end > start");
  if (powers.empty()) throw InvalidArgument("monomial basis needs at least one power");
  Basis b;
  b.family_ = Family::monomial;
  b.start_ = start;
  b.end_ = end;
  b.spacing_ = end - start;
  b.count_ = powers.size();
  b.powers_ = std::move(powers);
  return b;
}

double Basis::value(std::size_t j, double t) const {
  if (family_ == Family::monomial) return std::pow(t - start_, powers_[j]);
  // B_j is supported on [start + (j-3) h, start + (j+1) h].
  const double u = (t - start_) / spacing_ - (static_cast<double>(j) - 3.0);
  return cardinal_cubic(u);
}

void Basis::accumulate(double t, double weight, RowRef row) const {
  if (family_ == Family::monomial) {
    for (std::size_t j = 0; j < count_; ++j) row[static_cast<Eigen::Index>(j)] += weight * value(j, t);
    return;
  }
  const double x = (t - start_) / spacing_;
  const auto cell = static_cast<long>(std::clamp(std::floor(x), 0.0, static_cast<double>(count_ - 4)));
  const double u = x - static_cast<double>(cell);  // in [0, 1] inside the window
  // Nonzero splines on this cell are j = cell .. cell+3.
  const double w3 = u * u * u / 6.0;
  const double w0 = (1.0 - u) * (1.0 - u) * (1.0 - u) / 6.0;
  const double w1 = (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0;
  const double w2 = 1.0 - w0 - w1 - w3;
  row[cell] += weight * w0;
  row[cell + 1] += weight * w1;
  row[cell + 2] += weight * w2;
  row[cell + 3] += weight * w3;
}

double Basis::evaluate(const Eigen::VectorXd& coefficients, double t) const {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(count_));
  accumulate(t, 1.0, row);
  return row.dot(coefficients);
}

std::vector<double> Basis::breakpoints(double a, double b) const {
  std::vector<double> out;
  if (family_ == Family::monomial) return out;
  const double first = std::ceil((a - start_) / spacing_);
  for (double k = std::max(first, 0.0);; k += 1.0) {
    const double knot = start_ + k * spacing_;
    if (knot >= b) break;
    if (knot > a) out.push_back(knot);
  }
  return out;
}

namespace {

// Row of S for the interval (a, b] closed by a pulse at b.
void integrate_row(const Basis& basis, double a, double b, double alpha, RowRef row) {
  std::vector<double> cuts = basis.breakpoints(a, b);
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p], hi = cuts[p + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < kNodes.size(); ++q) {
      const double s = mid + half * kNodes[q];
      basis.accumulate(s, half * kWeights[q] * std::exp(alpha * (s - b)), row);
    }
  }
}

struct IntervalRange {
  std::size_t first = 0;  // index of the first closing pulse
  std::size_t last = 0;   // one past the last closing pulse
};

IntervalRange intervals_in(const PulseTrain& train, double start, double end) {
  constexpr double slack = 1e-12;
  IntervalRange r{train.size(), train.size()};
  for (std::size_t k = 0; k < train.size(); ++k) {
    if (train.interval_start(k) >= start - slack && train[k].time <= end + slack) {
      if (r.first == train.size()) r.first = k;
      r.last = k + 1;
    }
  }
  if (r.first == train.size()) r.last = r.first;
  return r;
}

LinearSystem build_range(const PulseTrain& train, const Basis& basis, const IfcParams& params,
                         IntervalRange range) {
  const auto rows = static_cast<Eigen::Index>(range.last - range.first);
  LinearSystem sys{Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(basis.size())), Eigen::VectorXd(rows)};
  for (std::size_t k = range.first; k < range.last; ++k) {
    const auto row = static_cast<Eigen::Index>(k - range.first);
    const double a = k == 0 ? 0.0 : train[k - 1].time + params.tau;
    const double b = train[k].time;
    integrate_row(basis, std::min(a, b), b, params.alpha, sys.matrix.row(row));
    sys.target[row] = sign(train[k].polarity) * params.theta;
  }
  return sys;
}

struct Solve {
  Eigen::VectorXd coefficients;
  double residual = 0.0;
  std::size_t rank = 0;
};

Solve solve_min_norm(const LinearSystem& sys) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kRankTolerance);
  cod.compute(sys.matrix);
  Solve s;
  s.coefficients = cod.solve(sys.target);
  s.residual = (sys.matrix * s.coefficients - sys.target).norm();
  s.rank = static_cast<std::size_t>(cod.rank());
  return s;
}

std::vector<double> grid_times(double start, double end, double rate) {
  std::vector<double> out;
  const auto first = static_cast<long long>(std::ceil(start * rate - 1e-9));
  const auto last = static_cast<long long>(std::floor(end * rate + 1e-9));
  for (long long i = first; i <= last; ++i) out.push_back(static_cast<double>(i) / rate);
  return out;
}

}  // namespace

LinearSystem build_system(const PulseTrain& train, const Basis& basis, const IfcParams& params) {
  params.check();
  const auto range = intervals_in(train, basis.start(), basis.end());
  if (range.first >= range.last) {
    throw PreconditionError("build_system: no inter-pulse interval lies inside the basis window");
  }
  return build_range(train, basis, params, range);
}

ReconstructionResult reconstruct(const PulseTrain& train, const Basis& basis, const IfcParams& params,
                                 double grid_rate) {
  if (!(grid_rate > 0.0)) throw InvalidArgument("grid rate must be > 0");
  ReconstructionResult out;
  out.times = grid_times(basis.start(), basis.end(), grid_rate);
  const auto m = static_cast<Eigen::Index>(basis.size());
  const auto range = intervals_in(train, basis.start(), basis.end());
  if (range.first >= range.last) {
    out.coefficients = Eigen::VectorXd::Zero(m);
    out.values.assign(out.times.size(), 0.0);
    out.rank_deficient = true;
    return out;
  }
  const auto sys = build_range(train, basis, params, range);
  const auto s = solve_min_norm(sys);
  out.coefficients = s.coefficients;
  out.residual_norm = s.residual;
  out.rank = s.rank;
  out.rank_deficient = s.rank < basis.size();
  out.values.reserve(out.times.size());
  for (double t : out.times) out.values.push_back(basis.evaluate(out.coefficients, t));
  return out;
}

double median_interval(const PulseTrain& train) {
  if (train.empty()) return 0.0;
  std::vector<double> gaps;
  gaps.reserve(train.size());
  for (std::size_t k = 0; k < train.size(); ++k) gaps.push_back(train.interval(k));
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

WindowedReconstruction reconstruct_windowed(const PulseTrain& train, const IfcParams& params,
                                            const WindowedOptions& options) {
  params.check();
  if (options.window_cells < 2) throw InvalidArgument("window must span at least two knot cells");
  if (!(options.knot_factor > 0.0)) throw InvalidArgument("knot factor must be > 0");
  WindowedReconstruction out;
  const double end = options.end.value_or(train.empty() ? 0.0 : train.pulses().back().time);
  out.times = grid_times(0.0, end, options.grid_rate);
  out.values.assign(out.times.size(), 0.0);
  if (train.empty() || end <= 0.0) return out;

  double widest = 0.0;
  for (std::size_t k = 0; k < train.size(); ++k) widest = std::max(widest, train.interval(k));
  out.knot_spacing = options.knot_factor * median_interval(train);
  const double train_end = train.pulses().back().time;
  const double spacing = std::min(std::max(out.knot_spacing, options.gap_factor * widest), train_end);
  out.max_knot_spacing = spacing;

  // Windows are laid out in time, each `window_cells` knot cells long with
  // half-window hops; the last one is stretched to the final pulse.
  const double length = std::min(spacing * static_cast<double>(options.window_cells), train_end);
  const double hop = 0.5 * length;
  std::vector<std::pair<double, double>> windows;
  for (double ws = 0.0;; ws += hop) {
    if (ws + length >= train_end - 0.5 * hop) {
      windows.emplace_back(ws, train_end);
      break;
    }
    windows.emplace_back(ws, ws + length);
  }

  const auto times = train.times();
  std::vector<double> weight(out.times.size(), 0.0);
  double residual_sq = 0.0;
  out.min_rank = std::numeric_limits<std::size_t>::max();
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto [ws, we] = windows[w];
    // Intervals (t_{k-1}, t_k] lying inside [ws, we].
    auto lo = std::lower_bound(times.begin(), times.end(), ws - 1e-12);
    std::size_t first = static_cast<std::size_t>(lo - times.begin());
    if (first < train.size() && train.interval_start(first) < ws - 1e-12) ++first;
    const auto hi = std::upper_bound(times.begin(), times.end(), we + 1e-12);
    const std::size_t last = static_cast<std::size_t>(hi - times.begin());

    const Basis basis = Basis::cubic_bspline(ws, we, spacing);
    Solve s;
    if (first < last) {
      s = solve_min_norm(build_range(train, basis, params, {first, last}));
    } else {
      s.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    }
    residual_sq += s.residual * s.residual;
    out.min_rank = std::min(out.min_rank, s.rank);
    if (s.rank < basis.size()) ++out.rank_deficient_windows;

    // Linear cross-fade over the overlap with the neighbours.
    const double fade_in_end = w > 0 ? windows[w - 1].second : ws;
    const double fade_out_start = w + 1 < windows.size() ? windows[w + 1].first : we;
    const bool last_window = w + 1 == windows.size();
    const auto g_first = std::lower_bound(out.times.begin(), out.times.end(), ws);
    for (auto it = g_first; it != out.times.end() && (last_window || *it <= we); ++it) {
      const double t = *it;
      double g = 1.0;
      if (t < fade_in_end) g = (t - ws) / (fade_in_end - ws);
      if (t > fade_out_start && w + 1 < windows.size()) g = std::min(g, (we - t) / (we - fade_out_start));
      g = std::max(g, 1e-12);
      const auto i = static_cast<std::size_t>(it - out.times.begin());
      out.values[i] += g * basis.evaluate(s.coefficients, std::min(t, we));
      weight[i] += g;
    }
  }
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (weight[i] > 0.0) out.values[i] /= weight[i];
  }
  out.residual_norm = std::sqrt(residual_sq);
  out.windows = windows.size();
  return out;
}

double sup_error(const std::vector<double>& reference, const std::vector<double>& reconstructed) {
  if (reference.size() != reconstructed.size()) {
    throw InvalidArgument("sup_error: grids differ (" + std::to_string(reference.size()) + " vs " +
                          std::to_string(reconstructed.size()) + " samples)");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    worst = std::max(worst, std::abs(reference[i] - reconstructed[i]));
  }
  return worst;
}

}  // namespace pulsal
