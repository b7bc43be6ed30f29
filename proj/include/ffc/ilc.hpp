#pragma once

#include <string>
#include <vector>

#include "ffc/plant.hpp"
#include "ffc/trajectory.hpp"

namespace ffc {

enum class GradientSource { ModelFree, AnalyticLifted };

struct LineSearchConfig {
  double alpha_init = 1.0;
  double shrink = 0.5;   // geometric backtracking factor, in (0, 1)
  int max_probes = 12;   // plant evaluations per search
  bool parabolic = true; // 3-point parabolic vertex refinement
};

struct IlcConfig {
  int max_iters = 20;
  double target_error = 0.0;  // l2 threshold [deg]; 0 = run to max_iters/stall
  LineSearchConfig line_search;
  GradientSource gradient_source = GradientSource::ModelFree;
  double stall_tol = 1e-9;  // direction norm below this counts as converged

  void validate() const;
};

enum class IlcStatus { ReachedTarget, MaxIters, Stalled, ZeroDirection };

const char* to_string(IlcStatus s);

// Per-iteration record of a refinement run. error_history[k] is the l2
// tracking error of u_history[k]; alpha_history has one entry per accepted
// step, so u_history.size() == alpha_history.size() + 1.
struct IlcRun {
  std::vector<Trajectory> u_history;
  std::vector<double> error_history;
  std::vector<double> alpha_history;
  IlcStatus status = IlcStatus::MaxIters;
  int plant_evals = 0;

  const Trajectory& final_input() const { return u_history.back(); }
  double final_error() const { return error_history.back(); }
};

// Descent direction by the model-free double-run procedure: run the plant
// once on u_k, once on u_k plus the time-reversed error, difference the
// outputs and reverse again. Equals the lifted-transpose product on a
// linear plant; needs no model of the plant otherwise.
Trajectory adjoint_direction_modelfree(const PlantModel& plant, const Trajectory& u_k,
                                       const Trajectory& y_k, const Trajectory& y_d,
                                       double initial_position);

// Analytic counterpart: applies the transpose of the lifted impulse-response
// matrix of (linear model + transport delay) by backward-in-time propagation.
Trajectory adjoint_direction_lifted(const LinearModel& model, int delay_samples,
                                    const Trajectory& e_y);

struct LineSearchResult {
  double alpha = 0.0;
  double error = 0.0;
  Trajectory y;     // plant output at the accepted step (empty when alpha == 0)
  bool stalled = false;
  int evals = 0;
};

// Backtracks geometrically from alpha_init until the l2 error drops, then
// optionally refines with a parabolic fit through the probed points. The
// best probed step is returned, never merely the last.
LineSearchResult line_search(const PlantModel& plant, const Trajectory& u_k,
                             const Trajectory& direction, const Trajectory& y_d,
                             double initial_position, double current_error,
                             const LineSearchConfig& cfg);

// Gradient-descent refinement of the command input for one desired
// trajectory: u0 = y_d, then u <- u - alpha * direction until the target
// error, iteration budget, or a stall. The initial hold position defaults
// to y_d's first sample.
IlcRun refine(const PlantModel& plant, const Trajectory& y_d, const IlcConfig& cfg);
IlcRun refine(const PlantModel& plant, const Trajectory& y_d, const IlcConfig& cfg,
              double initial_position);

// Channel-wise refinement; joints are independent and run concurrently.
std::vector<IlcRun> refine_multi(const MultiAxisPlant& plant, const MultiTrajectory& y_d,
                                 const IlcConfig& cfg);

}  // namespace ffc
