#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ffc/trajectory.hpp"

namespace ffc {

enum class TrajectoryKind { Sinusoid, Chirp, Trapezoid, Sigmoid, RandomSmooth };

const char* to_string(TrajectoryKind k);
TrajectoryKind trajectory_kind_from_string(const std::string& s);

// Parameters for one desired joint trajectory. Unused fields are ignored by
// kinds that do not need them; angles in degrees, rates in rad/s unless noted.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Sinusoid;
  std::size_t length_samples = 3000;
  double dt = 0.004;
  double offset = 0.0;     // start/hold position [deg]

  double amplitude = 2.0;  // sinusoid/chirp/sigmoid/random_smooth [deg]
  double omega = 3.0;      // sinusoid angular frequency [rad/s]
  double phase = 0.0;      // [rad]

  double chirp_omega0 = 0.628;  // sweep start [rad/s]
  double chirp_omega1 = 1.884;  // sweep end [rad/s]

  double distance = 10.0;   // trapezoid travel [deg], sign = direction
  double vmax = 10.0;       // trapezoid cruise speed [deg/s]
  double amax = 100.0;      // trapezoid ramp acceleration [deg/s^2]
  double start_delay = 0.2; // trapezoid/sigmoid idle lead-in [s]

  double sigmoid_rate = 4.0;  // logistic steepness [1/s]

  double cutoff = 2.0;        // random_smooth low-pass cutoff [rad/s]
  std::uint64_t seed = 0;     // random_smooth only

  void validate() const;
};

// Deterministic generation: a pure function of the spec (seed included).
Trajectory generate(const TrajectorySpec& spec);

struct LimitViolation {
  std::size_t index;
  double value;
};

struct LimitReport {
  bool ok = true;
  double worst_velocity = 0.0;       // [deg/s]
  std::size_t worst_velocity_index = 0;
  double worst_acceleration = 0.0;   // [deg/s^2]
  std::size_t worst_acceleration_index = 0;
  std::vector<LimitViolation> velocity_violations;
  std::vector<LimitViolation> acceleration_violations;
};

// Finite-difference velocity/acceleration check against bounds.
LimitReport validate_limits(const Trajectory& traj, double vmax, double amax);

// Relative weights for drawing trajectory families; zero disables a family.
struct FamilyMix {
  double sinusoid = 1.0;
  double chirp = 0.0;
  double trapezoid = 1.0;
  double sigmoid = 1.0;
  double random_smooth = 0.0;
};

struct SamplerConfig {
  FamilyMix mix;
  double freq_lo = 0.5;        // sinusoid angular frequency range [rad/s]
  double freq_hi = 15.0;
  double freq_step = 0.5;      // drawn from a discrete grid
  double amp_lo = 1.0;         // [deg]
  double amp_hi = 6.0;
  double offset_range = 20.0;  // random start position in +/- range [deg]
  std::size_t length_samples = 3000;
  double dt = 0.004;
};

// Reproducible training-set specs: same (n, seed, config) gives the same set.
std::vector<TrajectorySpec> sample_training_specs(std::size_t n_traj, std::uint64_t seed,
                                                  const SamplerConfig& cfg);
std::vector<Trajectory> sample_training_set(std::size_t n_traj, std::uint64_t seed,
                                            const SamplerConfig& cfg);

// Config-file form of TrajectorySpec, for the gen-traj CLI. An optional
// [defaults] section seeds every spec; then either one [trajectory] section
// or contiguous [joint.N] sections for a multi-channel file. Keys mirror the
// struct fields: kind (sinusoid|chirp|trapezoid|sigmoid|random_smooth),
// length_samples, dt, offset, amplitude, omega, phase, chirp_omega0,
// chirp_omega1, distance, vmax, amax, start_delay, sigmoid_rate, cutoff, seed.
std::vector<TrajectorySpec> parse_trajectory_specs(std::istream& in);
std::vector<TrajectorySpec> load_trajectory_specs(const std::string& path);

}  // namespace ffc
