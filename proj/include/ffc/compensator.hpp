#pragma once

#include <cstddef>
#include <vector>

#include "ffc/metrics.hpp"
#include "ffc/mlp.hpp"
#include "ffc/plant.hpp"
#include "ffc/trajectory.hpp"

namespace ffc {

struct CompensationReport {
  std::size_t nn_invocations = 0;
  std::size_t head_passthrough = 0;
  std::size_t tail_passthrough = 0;
};

// Turns a desired trajectory into a refined plant input by stitching network
// output windows. The first 25 samples cannot form a full input window and
// pass through unchanged, as does any tail the last full window cannot
// reach. With the default stride (the output window, 25) segments tile the
// horizon and every covered sample is written exactly once, mirroring the
// dataset geometry; a smaller stride overlaps segments and covered samples
// take the uniform average of all windows reaching them.
Trajectory compensate(const MlpModel& model, const Trajectory& q_d,
                      CompensationReport* report = nullptr,
                      int stride = static_cast<int>(kOutputWindow));

// One model per joint, applied channel-wise.
MultiTrajectory compensate_multi(const std::vector<MlpModel>& models, const MultiTrajectory& q_d,
                                 std::vector<CompensationReport>* reports = nullptr,
                                 int stride = static_cast<int>(kOutputWindow));

// Pure feedforward rollout: u = compensate(q_d), y = plant(u). No feedback
// path; everything is precomputable.
struct PipelineEval {
  MultiTrajectory u;
  MultiTrajectory y;
  std::vector<ErrorReport> errors;
  std::vector<CompensationReport> compensation;
};

PipelineEval closed_pipeline_eval(const MultiAxisPlant& plant, const std::vector<MlpModel>& models,
                                  const MultiTrajectory& q_d, int transient_samples = 50);

}  // namespace ffc
