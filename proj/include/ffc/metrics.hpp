#pragma once

#include <cstddef>
#include <vector>

#include "ffc/trajectory.hpp"

namespace ffc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

// Tracking-error summary. l2 covers every sample; linf skips the first
// transient_samples so the startup transient of a plant rollout does not
// dominate the peak.
struct ErrorReport {
  double l2 = 0.0;
  double linf = 0.0;
  std::size_t linf_index = 0;
  std::size_t sample_count = 0;
  int transient_samples = 0;
};

ErrorReport error_metrics(const std::vector<double>& actual, const std::vector<double>& desired,
                          int transient_samples = 50);

inline ErrorReport error_metrics(const Trajectory& actual, const Trajectory& desired,
                                 int transient_samples = 50) {
  return error_metrics(actual.values, desired.values, transient_samples);
}

std::vector<ErrorReport> error_metrics_multi(const MultiTrajectory& actual,
                                             const MultiTrajectory& desired,
                                             int transient_samples = 50);

}  // namespace ffc
