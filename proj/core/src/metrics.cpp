#include "pulsal/metrics.hpp"

#include <cmath>
#include <string>

#include "pulsal/error.hpp"

namespace pulsal {

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

SnrReport snr(const std::vector<double>& desired, const std::vector<double>& reconstructed, double cap_db) {
  if (desired.size() != reconstructed.size()) {
    throw InvalidArgument("snr: grids differ (" + std::to_string(desired.size()) + " vs " +
                          std::to_string(reconstructed.size()) + " samples)");
  }
  const double p_ds = mean_power(desired);
  if (!(p_ds > 0.0)) throw InvalidArgument("snr: desired signal has zero power");
  const double p_rs = mean_power(reconstructed);

  double err = 0.0;
  for (std::size_t i = 0; i < desired.size(); ++i) {
    const double e = desired[i] - reconstructed[i];
    err += e * e;
  }
  err /= static_cast<double>(desired.size());

  SnrReport r;
  const double denom = p_ds - p_rs;
  if (denom > 0.0) {
    r.paper_db = std::min(cap_db, 10.0 * std::log10(p_ds / denom));
    r.paper_saturated = r.paper_db >= cap_db;
  } else {
    r.paper_db = cap_db;
    r.paper_saturated = true;
  }
  if (err > 0.0) {
    r.error_db = std::min(cap_db, 10.0 * std::log10(p_ds / err));
    r.error_saturated = r.error_db >= cap_db;
  } else {
    r.error_db = cap_db;
    r.error_saturated = true;
  }
  return r;
}

}  // namespace pulsal
