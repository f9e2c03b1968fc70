#pragma once

#include <vector>

namespace pulsal {

constexpr double kSnrCapDb = 200.0;

struct SnrReport {
  // 10 log10(P_ds / (P_ds - P_rs)), P = mean square; saturated at the cap
  // when the denominator is not positive.
  double paper_db = 0.0;
  bool paper_saturated = false;
  // 10 log10(P_ds / mean((desired - reconstructed)^2)).
  double error_db = 0.0;
  bool error_saturated = false;
};

double mean_power(const std::vector<double>& x);

/// Throws InvalidArgument on grid mismatch or a zero-power desired signal.
SnrReport snr(const std::vector<double>& desired, const std::vector<double>& reconstructed,
              double cap_db = kSnrCapDb);

}  // namespace pulsal
