#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "ffc/linear_model.hpp"
#include "ffc/trajectory.hpp"

namespace ffc {

// Amplitude/rate nonlinearity of the inner loop. A member set to 0 disables
// that stage; with both disabled the plant is exactly the discretized
// linear model (plus delay and quantization).
struct NonlinearityParams {
  double knee = 0.0;        // gain-compression knee amplitude [deg]
  double rate_limit = 0.0;  // input slew limit [deg/s]

  bool enabled() const { return knee > 0.0 || rate_limit > 0.0; }
};

// Parameter perturbation that stands in for the simulator-vs-hardware gap.
// gain_scale is the gain factor reached at input rates well above
// gain_crossover; at low rates the perturbed plant matches the nominal one
// (the gap shows up only for fast trajectories).
struct PerturbationSpec {
  double gain_scale = 1.0;
  double gain_crossover = 4.0;  // [rad/s]
  double omega_scale = 1.0;
  double zeta_scale = 1.0;
  int extra_delay_samples = 0;

  bool identity() const {
    return gain_scale == 1.0 && omega_scale == 1.0 && zeta_scale == 1.0 &&
           extra_delay_samples == 0;
  }
};

struct PlantState {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  std::vector<double> delay_buf;
  std::size_t delay_pos = 0;
  double rate_state = 0.0;  // slew limiter memory
  double comp_state = 0.0;  // gain-compression tracker
  double lp_state = 0.0;    // perturbation high-pass memory
};

// Single-joint sampled-data model of the closed inner loop: input
// nonlinearity, transport delay, ZOH-discretized linear core, output
// quantization. Deterministic; one instance per thread.
class PlantModel {
 public:
  PlantModel() : PlantModel(LinearModel{}) {}
  explicit PlantModel(const LinearModel& linear, int delay_samples = 6,
                      double quant_step = 0.0, NonlinearityParams nonlin = {});

  PlantState initial_state(double hold_position) const;
  double step(PlantState& state, double u) const;

  // Full-horizon run from a commanded hold position (output == input == hold
  // before the trajectory starts).
  Trajectory run(const Trajectory& u, double hold_position) const;

  const LinearModel& linear() const { return linear_; }
  const StateSpace& discrete() const { return ss_; }
  int delay_samples() const { return delay_; }
  double quant_step() const { return quant_; }
  double dt() const { return linear_.dt; }
  const NonlinearityParams& nonlinearity() const { return nonlin_; }
  const PerturbationSpec& perturbation() const { return pert_; }

  friend PlantModel make_physical_variant(const PlantModel& plant,
                                          const PerturbationSpec& pert);

 private:
  LinearModel linear_;
  StateSpace ss_;
  int delay_ = 0;
  double quant_ = 0.0;
  NonlinearityParams nonlin_;
  PerturbationSpec pert_;     // identity on nominal plants
  double lp_alpha_ = 0.0;     // discrete pole of the perturbation high-pass
  bool gain_stage_ = false;
};

// Perturbed "physical" twin of a nominal plant. Throws if the perturbed
// parameters leave the valid (stable, underdamped) region.
PlantModel make_physical_variant(const PlantModel& plant, const PerturbationSpec& pert);

// Decoupled multi-joint plant.
class MultiAxisPlant {
 public:
  MultiAxisPlant() = default;
  explicit MultiAxisPlant(std::vector<PlantModel> joints) : joints_(std::move(joints)) {}
  static MultiAxisPlant uniform(const PlantModel& joint, std::size_t n);

  std::size_t joint_count() const { return joints_.size(); }
  const PlantModel& joint(std::size_t i) const { return joints_.at(i); }
  PlantModel& joint(std::size_t i) { return joints_.at(i); }

  MultiTrajectory run_multi(const MultiTrajectory& u,
                            const std::vector<double>& hold_positions) const;
  // Hold positions default to each channel's first sample.
  MultiTrajectory run_multi(const MultiTrajectory& u) const;

 private:
  std::vector<PlantModel> joints_;
};

struct StepMetrics {
  double amplitude = 0.0;
  double settled = 0.0;         // final output value
  double peak = 0.0;            // max output
  double peak_time = 0.0;       // [s]
  double normalized_peak = 0.0; // peak / amplitude
  double rise_time = 0.0;       // 10% -> 90% of amplitude [s]
  double settle_time = 0.0;     // last exit from the 2% band [s]
  bool degenerate = false;      // zero-amplitude step
};

// Simulated step responses from a zero hold position, one entry per
// amplitude, reported in input order.
std::vector<StepMetrics> step_response_report(const PlantModel& plant,
                                              const std::vector<double>& amplitudes,
                                              double horizon_s = 4.0);

}  // namespace ffc
