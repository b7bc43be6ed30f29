#include "ffc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ffc {

PlantModel::PlantModel(const LinearModel& linear, int delay_samples, double quant_step,
                       NonlinearityParams nonlin)
    : linear_(linear), ss_(discretize(linear)), delay_(delay_samples),
      quant_(quant_step), nonlin_(nonlin) {
  if (delay_ < 0) throw std::invalid_argument("PlantModel: negative delay");
  if (quant_ < 0.0) throw std::invalid_argument("PlantModel: negative quant_step");
  if (nonlin_.knee < 0.0 || nonlin_.rate_limit < 0.0)
    throw std::invalid_argument("PlantModel: negative nonlinearity parameter");
}

PlantState PlantModel::initial_state(double hold_position) const {
  PlantState s;
  s.x = ss_.equilibrium(hold_position);
  s.delay_buf.assign(static_cast<std::size_t>(delay_), hold_position);
  s.delay_pos = 0;
  s.rate_state = hold_position;
  s.comp_state = hold_position;
  s.lp_state = hold_position;
  return s;
}

double PlantModel::step(PlantState& state, double u) const {
  double v = u;

  if (gain_stage_) {
    state.lp_state += lp_alpha_ * (v - state.lp_state);
    v += (pert_.gain_scale - 1.0) * (v - state.lp_state);
  }

  if (nonlin_.rate_limit > 0.0) {
    const double max_step = nonlin_.rate_limit * linear_.dt;
    const double dv = std::clamp(v - state.rate_state, -max_step, max_step);
    state.rate_state += dv;
    v = state.rate_state;
  }

  if (nonlin_.knee > 0.0) {
    const double e = v - state.comp_state;
    const double g = nonlin_.knee / (nonlin_.knee + std::abs(e));
    state.comp_state += g * e;
    v = state.comp_state;
  }

  if (delay_ > 0) {
    const double delayed = state.delay_buf[state.delay_pos];
    state.delay_buf[state.delay_pos] = v;
    state.delay_pos = (state.delay_pos + 1) % state.delay_buf.size();
    v = delayed;
  }

  double y = ss_.C * state.x;
  state.x = ss_.A * state.x + ss_.B * v;

  if (quant_ > 0.0) y = quant_ * std::round(y / quant_);
  return y;
}

Trajectory PlantModel::run(const Trajectory& u, double hold_position) const {
  if (u.empty()) throw std::invalid_argument("PlantModel::run: empty input");
  if (u.dt != linear_.dt)
    throw std::invalid_argument("PlantModel::run: input dt differs from plant dt");
  require_finite(u.values, "PlantModel::run input");

  PlantState state = initial_state(hold_position);
  Trajectory y;
  y.dt = u.dt;
  y.values.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) y.values[k] = step(state, u.values[k]);
  return y;
}

PlantModel make_physical_variant(const PlantModel& plant, const PerturbationSpec& pert) {
  if (!std::isfinite(pert.gain_scale) || !std::isfinite(pert.omega_scale) ||
      !std::isfinite(pert.zeta_scale) || !std::isfinite(pert.gain_crossover))
    throw std::invalid_argument("make_physical_variant: non-finite perturbation");
  if (pert.gain_scale <= 0.0)
    throw std::invalid_argument("make_physical_variant: gain_scale must be > 0");
  if (pert.extra_delay_samples < 0)
    throw std::invalid_argument("make_physical_variant: negative extra delay");

  LinearModel lin = plant.linear_;
  lin.omega *= pert.omega_scale;
  lin.zeta *= pert.zeta_scale;

  PlantModel out(lin, plant.delay_ + pert.extra_delay_samples, plant.quant_,
                 plant.nonlin_);  // discretize() rejects unstable/invalid dynamics
  out.pert_ = pert;
  if (pert.gain_scale != 1.0) {
    if (pert.gain_crossover <= 0.0)
      throw std::invalid_argument("make_physical_variant: gain_crossover must be > 0");
    out.gain_stage_ = true;
    out.lp_alpha_ = 1.0 - std::exp(-pert.gain_crossover * lin.dt);
  }
  return out;
}

MultiAxisPlant MultiAxisPlant::uniform(const PlantModel& joint, std::size_t n) {
  return MultiAxisPlant(std::vector<PlantModel>(n, joint));
}

MultiTrajectory MultiAxisPlant::run_multi(const MultiTrajectory& u,
                                          const std::vector<double>& hold_positions) const {
  u.check_consistent();
  if (u.joint_count() != joints_.size())
    throw std::invalid_argument("run_multi: channel count mismatch");
  if (hold_positions.size() != joints_.size())
    throw std::invalid_argument("run_multi: hold position count mismatch");

  MultiTrajectory y;
  y.dt = u.dt;
  y.channels.resize(joints_.size());
  for (std::size_t j = 0; j < joints_.size(); ++j)
    y.channels[j] = joints_[j].run(Trajectory{u.dt, u.channels[j]}, hold_positions[j]).values;
  return y;
}

MultiTrajectory MultiAxisPlant::run_multi(const MultiTrajectory& u) const {
  std::vector<double> holds;
  holds.reserve(u.joint_count());
  for (const auto& c : u.channels) {
    if (c.empty()) throw std::invalid_argument("run_multi: empty channel");
    holds.push_back(c.front());
  }
  return run_multi(u, holds);
}

std::vector<StepMetrics> step_response_report(const PlantModel& plant,
                                              const std::vector<double>& amplitudes,
                                              double horizon_s) {
  const std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(horizon_s / plant.dt()));
  std::vector<StepMetrics> report;
  report.reserve(amplitudes.size());

  for (double amp : amplitudes) {
    if (amp < 0.0) throw std::invalid_argument("step_response_report: negative amplitude");
    StepMetrics m;
    m.amplitude = amp;
    if (amp == 0.0) {
      m.degenerate = true;
      report.push_back(m);
      continue;
    }
    Trajectory u{plant.dt(), std::vector<double>(n, amp)};
    const Trajectory y = plant.run(u, 0.0);

    m.settled = y.values.back();
    std::size_t peak_idx = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (y.values[k] > y.values[peak_idx]) peak_idx = k;
    m.peak = y.values[peak_idx];
    m.peak_time = plant.dt() * static_cast<double>(peak_idx);
    m.normalized_peak = m.peak / amp;

    double t10 = -1.0, t90 = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (t10 < 0.0 && y.values[k] >= 0.1 * amp) t10 = plant.dt() * static_cast<double>(k);
      if (t90 < 0.0 && y.values[k] >= 0.9 * amp) {
        t90 = plant.dt() * static_cast<double>(k);
        break;
      }
    }
    m.rise_time = (t10 >= 0.0 && t90 >= 0.0) ? t90 - t10 : -1.0;

    m.settle_time = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      if (std::abs(y.values[k] - amp) > 0.02 * amp) {
        m.settle_time = plant.dt() * static_cast<double>(k + 1);
        break;
      }
    }
    report.push_back(m);
  }
  return report;
}

}  // namespace ffc
