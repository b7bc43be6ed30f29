#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ffc {

// A single-joint signal sampled at a fixed period. Values are joint angles
// in degrees throughout the library.
struct Trajectory {
  double dt = 0.004;
  std::vector<double> values;

  Trajectory() = default;
  Trajectory(double dt_, std::vector<double> v) : dt(dt_), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  double duration() const { return dt * static_cast<double>(values.size()); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// n-joint signal; channels share dt and length.
struct MultiTrajectory {
  double dt = 0.004;
  std::vector<std::vector<double>> channels;

  std::size_t joint_count() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels[0].size(); }

  Trajectory channel(std::size_t i) const {
    if (i >= channels.size()) throw std::out_of_range("MultiTrajectory::channel");
    return Trajectory{dt, channels[i]};
  }

  void check_consistent() const {
    for (const auto& c : channels)
      if (c.size() != length())
        throw std::invalid_argument("MultiTrajectory: channel lengths differ");
  }

  static MultiTrajectory from_channels(double dt, std::vector<Trajectory> chans) {
    MultiTrajectory m;
    m.dt = dt;
    for (auto& c : chans) m.channels.push_back(std::move(c.values));
    m.check_consistent();
    return m;
  }
};

inline double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline std::vector<double> subtract(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("subtract: length mismatch");
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline std::vector<double> add_scaled(const std::vector<double>& a,
                                      const std::vector<double>& b, double s) {
  if (a.size() != b.size()) throw std::invalid_argument("add_scaled: length mismatch");
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
  return r;
}

// Full-horizon time reversal, index i -> N-1-i.
inline std::vector<double> reversed(const std::vector<double>& v) {
  return {v.rbegin(), v.rend()};
}

inline void require_finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(what + ": non-finite value");
}

}  // namespace ffc
