#include "ffc/compensator.hpp"

#include <stdexcept>

namespace ffc {

Trajectory compensate(const MlpModel& model, const Trajectory& q_d, CompensationReport* report,
                      int stride) {
  if (model.input_size() != static_cast<int>(kInputWindow) ||
      model.output_size() != static_cast<int>(kOutputWindow))
    throw std::invalid_argument("compensate: model window geometry mismatch");
  if (stride < 1 || stride > static_cast<int>(kOutputWindow))
    throw std::invalid_argument("compensate: stride must be in [1, 25]");
  require_finite(q_d.values, "compensate input");
  const std::size_t n = q_d.values.size();
  Trajectory u = q_d;  // pass-through default; covered spans are overwritten

  CompensationReport rep;
  if (n < kInputWindow) {
    rep.head_passthrough = n;
    if (report) *report = rep;
    return u;
  }
  rep.head_passthrough = kHalfWindow;

  std::vector<std::size_t> anchors;
  for (std::size_t t = kHalfWindow; t + kHalfWindow <= n; t += static_cast<std::size_t>(stride))
    anchors.push_back(t);
  rep.nn_invocations = anchors.size();
  rep.tail_passthrough = n - (anchors.back() + kOutputWindow);

  // All windows evaluate as one batch; each column is still one invocation.
  Eigen::MatrixXd X(kInputWindow, static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t k = 0; k < anchors.size(); ++k)
    for (std::size_t i = 0; i < kInputWindow; ++i)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = normalize_value(
          q_d.values[anchors[k] - kHalfWindow + i], model.norm_shift, model.norm_scale);
  const Eigen::MatrixXd pred = forward(model, X);

  std::vector<double> sum(n, 0.0);
  std::vector<int> hits(n, 0);
  for (std::size_t k = 0; k < anchors.size(); ++k)
    for (std::size_t i = 0; i < kOutputWindow; ++i) {
      sum[anchors[k] + i] +=
          denormalize_value(pred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)),
                            model.norm_shift, model.norm_scale);
      hits[anchors[k] + i] += 1;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (hits[i] > 0) u.values[i] = sum[i] / hits[i];
  if (report) *report = rep;
  return u;
}

MultiTrajectory compensate_multi(const std::vector<MlpModel>& models, const MultiTrajectory& q_d,
                                 std::vector<CompensationReport>* reports, int stride) {
  q_d.check_consistent();
  if (models.size() != q_d.channels.size())
    throw std::invalid_argument("compensate_multi: model count does not match joint count");
  MultiTrajectory out;
  out.dt = q_d.dt;
  if (reports) reports->clear();
  for (std::size_t j = 0; j < models.size(); ++j) {
    CompensationReport rep;
    out.channels.push_back(compensate(models[j], q_d.channel(j), &rep, stride).values);
    if (reports) reports->push_back(rep);
  }
  return out;
}

PipelineEval closed_pipeline_eval(const MultiAxisPlant& plant, const std::vector<MlpModel>& models,
                                  const MultiTrajectory& q_d, int transient_samples) {
  PipelineEval ev;
  ev.u = compensate_multi(models, q_d, &ev.compensation);
  // Hold positions come from the desired trajectory: the plant starts parked
  // where the task starts, not wherever the compensated input begins.
  std::vector<double> holds;
  for (const auto& c : q_d.channels) {
    if (c.empty()) throw std::invalid_argument("closed_pipeline_eval: empty channel");
    holds.push_back(c.front());
  }
  ev.y = plant.run_multi(ev.u, holds);
  ev.errors = error_metrics_multi(ev.y, q_d, transient_samples);
  return ev;
}

}  // namespace ffc
