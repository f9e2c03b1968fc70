#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pulsal/pulse.hpp"

namespace pulsal {

using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

// Basis {phi_j} over a window [start, end].
class Basis {
 public:
  enum class Family { cubic_bspline, monomial };

  /// Uniform cubic B-splines. The spacing is shrunk so an integer number of
  /// knot intervals tiles the window; M = intervals + 3 functions.
  static Basis cubic_bspline(double start, double end, double spacing);
  /// phi_j(s) = (s - start)^{powers[j]}.
  static Basis monomials(double start, double end, std::vector<int> powers);

  Family family() const noexcept { return family_; }
  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return count_; }

  double value(std::size_t j, double t) const;
  /// row[j] += weight * phi_j(t) for every j with phi_j(t) != 0.
  void accumulate(double t, double weight, RowRef row) const;
  double evaluate(const Eigen::VectorXd& coefficients, double t) const;
  /// Points inside (a, b) where the basis is not smooth; quadrature splits there.
  std::vector<double> breakpoints(double a, double b) const;

 private:
  Basis() = default;

  Family family_ = Family::cubic_bspline;
  double start_ = 0.0;
  double end_ = 0.0;
  double spacing_ = 0.0;
  std::size_t count_ = 0;
  std::vector<int> powers_;
};

struct LinearSystem {
  Eigen::MatrixXd matrix;  // K x M
  Eigen::VectorXd target;  // K, p_k * theta
};

/// S_{kj} = int_{t_{k-1}+tau}^{t_k} phi_j(s) e^{alpha (s - t_k)} ds for every
/// interval lying in the basis window (8-point Gauss-Legendre per smooth
/// piece); theta_k = p_k theta. Throws if no interval lies in the window.
LinearSystem build_system(const PulseTrain& train, const Basis& basis, const IfcParams& params);

struct ReconstructionResult {
  Eigen::VectorXd coefficients;
  std::vector<double> times;
  std::vector<double> values;
  double residual_norm = 0.0;
  std::size_t rank = 0;
  bool rank_deficient = false;
  std::optional<double> sup_error;
};

/// Minimum-norm least-squares fit of the basis coefficients, evaluated on a
/// uniform grid of `grid_rate` samples per second over the basis window.
ReconstructionResult reconstruct(const PulseTrain& train, const Basis& basis, const IfcParams& params,
                                 double grid_rate);

struct WindowedOptions {
  double grid_rate = 1e5;
  // Window length in knot cells; consecutive windows overlap by half.
  std::size_t window_cells = 64;
  // Knot spacing as a multiple of the median inter-pulse interval.
  double knot_factor = 2.0;
  // Lower bound on the spacing as a multiple of the widest interval in the
  // train. Without it, knot cells inside a long gap are unconstrained and the
  // fit oscillates. 0 disables the floor.
  double gap_factor = 2.0;
  // Evaluation span; defaults to [0, last pulse].
  std::optional<double> end;
};

struct WindowedReconstruction {
  std::vector<double> times;
  std::vector<double> values;
  double residual_norm = 0.0;
  std::size_t min_rank = 0;
  std::size_t windows = 0;
  std::size_t rank_deficient_windows = 0;
  // Base spacing from the median interval, and the widest spacing used.
  double knot_spacing = 0.0;
  double max_knot_spacing = 0.0;
};

/// Splits the time axis into overlapping windows, fits cubic
/// B-splines in each and linearly cross-fades the overlaps.
WindowedReconstruction reconstruct_windowed(const PulseTrain& train, const IfcParams& params,
                                            const WindowedOptions& options = {});

double median_interval(const PulseTrain& train);

/// max_t |reference(t) - reconstructed(t)|; throws on grid size mismatch.
double sup_error(const std::vector<double>& reference, const std::vector<double>& reconstructed);

}  // namespace pulsal
