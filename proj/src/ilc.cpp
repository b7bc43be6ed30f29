#include "ffc/ilc.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace ffc {

void IlcConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("IlcConfig: max_iters must be >= 1");
  if (target_error < 0.0) throw std::invalid_argument("IlcConfig: negative target_error");
  if (line_search.alpha_init <= 0.0)
    throw std::invalid_argument("IlcConfig: alpha_init must be > 0");
  if (line_search.shrink <= 0.0 || line_search.shrink >= 1.0)
    throw std::invalid_argument("IlcConfig: shrink must be in (0, 1)");
  if (line_search.max_probes < 1)
    throw std::invalid_argument("IlcConfig: max_probes must be >= 1");
}

const char* to_string(IlcStatus s) {
  switch (s) {
    case IlcStatus::ReachedTarget: return "reached_target";
    case IlcStatus::MaxIters: return "max_iters";
    case IlcStatus::Stalled: return "stalled";
    case IlcStatus::ZeroDirection: return "zero_direction";
  }
  return "unknown";
}

Trajectory adjoint_direction_modelfree(const PlantModel& plant, const Trajectory& u_k,
                                       const Trajectory& y_k, const Trajectory& y_d,
                                       double initial_position) {
  if (u_k.size() != y_k.size() || u_k.size() != y_d.size())
    throw std::invalid_argument("adjoint_direction_modelfree: length mismatch");

  const std::vector<double> e_y = subtract(y_k.values, y_d.values);
  const std::vector<double> e_rev = reversed(e_y);

  Trajectory u_aug{u_k.dt, add_scaled(u_k.values, e_rev, 1.0)};
  const Trajectory y_aug = plant.run(u_aug, initial_position);

  const std::vector<double> e_prime = subtract(y_aug.values, y_k.values);
  return Trajectory{u_k.dt, reversed(e_prime)};
}

Trajectory adjoint_direction_lifted(const LinearModel& model, int delay_samples,
                                    const Trajectory& e_y) {
  require_finite(e_y.values, "adjoint_direction_lifted input");
  if (delay_samples < 0)
    throw std::invalid_argument("adjoint_direction_lifted: negative delay");

  const std::size_t n = e_y.size();
  // (D G)^T e = G^T (D^T e): transpose of the delay advances the signal.
  std::vector<double> advanced(n, 0.0);
  for (std::size_t i = 0; i + delay_samples < n; ++i)
    advanced[i] = e_y.values[i + delay_samples];

  // G^T e computed stably as reverse(G(reverse(e))) from zero state.
  const StateSpace ss = discretize(model);
  const std::vector<double> v = simulate(ss, reversed(advanced));
  return Trajectory{model.dt, reversed(v)};
}

namespace {

double tracking_error(const Trajectory& y, const Trajectory& y_d) {
  return l2_norm(subtract(y.values, y_d.values));
}

// Vertex of the parabola through (0, f0), (a1, f1), (a2, f2).
double parabola_vertex(double a1, double f0, double f1, double a2, double f2) {
  const double d1 = (f1 - f0) / a1;
  const double d2 = (f2 - f0) / a2;
  const double curv = (d2 - d1) / (a2 - a1);  // leading coefficient
  if (!(curv > 0.0) || !std::isfinite(curv)) return -1.0;
  const double slope0 = d1 - curv * a1;
  const double vertex = -slope0 / (2.0 * curv);
  return std::isfinite(vertex) ? vertex : -1.0;
}

}  // namespace

LineSearchResult line_search(const PlantModel& plant, const Trajectory& u_k,
                             const Trajectory& direction, const Trajectory& y_d,
                             double initial_position, double current_error,
                             const LineSearchConfig& cfg) {
  LineSearchResult res;
  res.error = current_error;
  if (l2_norm(direction.values) == 0.0) return res;

  struct Probe {
    double alpha;
    double error;
    Trajectory y;
  };
  std::vector<Probe> probes;

  auto eval = [&](double alpha) -> const Probe& {
    Trajectory u_trial{u_k.dt, add_scaled(u_k.values, direction.values, -alpha)};
    Trajectory y = plant.run(u_trial, initial_position);
    ++res.evals;
    probes.push_back(Probe{alpha, tracking_error(y, y_d), std::move(y)});
    return probes.back();
  };

  // Backtrack until a descending step appears.
  double alpha = cfg.alpha_init;
  bool descended = false;
  while (res.evals < cfg.max_probes) {
    if (eval(alpha).error < current_error) {
      descended = true;
      break;
    }
    alpha *= cfg.shrink;
  }
  if (!descended) {
    res.stalled = true;
    return res;
  }

  // Parabolic refinement on squared errors (exact for a linear plant). The
  // second sample point is the last rejected probe when backtracking took
  // more than one step, otherwise one extra shrunk probe.
  if (cfg.parabolic && res.evals < cfg.max_probes) {
    const double a1 = probes.back().alpha;
    const double f1 = probes.back().error * probes.back().error;
    double a2, f2;
    if (probes.size() >= 2) {
      a2 = probes[probes.size() - 2].alpha;
      f2 = probes[probes.size() - 2].error * probes[probes.size() - 2].error;
    } else {
      a2 = a1 * cfg.shrink;
      const double e2 = eval(a2).error;
      f2 = e2 * e2;
    }
    const double v = parabola_vertex(a1, current_error * current_error, f1, a2, f2);
    if (v > 0.0 && res.evals < cfg.max_probes) eval(v);
  }

  // Max-descent contract: best probe wins.
  const Probe* best = nullptr;
  for (const auto& p : probes)
    if (p.error < current_error && (!best || p.error < best->error)) best = &p;
  if (!best) {
    res.stalled = true;
    return res;
  }
  res.alpha = best->alpha;
  res.error = best->error;
  res.y = best->y;
  return res;
}

IlcRun refine(const PlantModel& plant, const Trajectory& y_d, const IlcConfig& cfg) {
  if (y_d.empty()) throw std::invalid_argument("refine: empty target");
  return refine(plant, y_d, cfg, y_d.values.front());
}

IlcRun refine(const PlantModel& plant, const Trajectory& y_d, const IlcConfig& cfg,
              double initial_position) {
  cfg.validate();
  require_finite(y_d.values, "refine target");

  IlcRun run;
  Trajectory u = y_d;  // first guess: the desired output itself
  Trajectory y = plant.run(u, initial_position);
  ++run.plant_evals;
  double err = tracking_error(y, y_d);
  run.u_history.push_back(u);
  run.error_history.push_back(err);
  run.status = IlcStatus::MaxIters;

  for (int k = 0; k < cfg.max_iters; ++k) {
    if (err <= cfg.target_error) {
      run.status = IlcStatus::ReachedTarget;
      break;
    }

    Trajectory dir;
    if (cfg.gradient_source == GradientSource::ModelFree) {
      dir = adjoint_direction_modelfree(plant, u, y, y_d, initial_position);
      ++run.plant_evals;
    } else {
      Trajectory e_y{y.dt, subtract(y.values, y_d.values)};
      dir = adjoint_direction_lifted(plant.linear(), plant.delay_samples(), e_y);
    }

    if (l2_norm(dir.values) < cfg.stall_tol) {
      run.status = IlcStatus::ZeroDirection;
      break;
    }

    LineSearchResult ls =
        line_search(plant, u, dir, y_d, initial_position, err, cfg.line_search);
    run.plant_evals += ls.evals;
    if (ls.stalled) {
      run.status = IlcStatus::Stalled;
      break;
    }

    u = Trajectory{u.dt, add_scaled(u.values, dir.values, -ls.alpha)};
    y = ls.y;
    err = ls.error;
    run.u_history.push_back(u);
    run.error_history.push_back(err);
    run.alpha_history.push_back(ls.alpha);
  }

  if (run.error_history.back() <= cfg.target_error &&
      run.status == IlcStatus::MaxIters)
    run.status = IlcStatus::ReachedTarget;
  return run;
}

std::vector<IlcRun> refine_multi(const MultiAxisPlant& plant, const MultiTrajectory& y_d,
                                 const IlcConfig& cfg) {
  y_d.check_consistent();
  if (y_d.joint_count() != plant.joint_count())
    throw std::invalid_argument("refine_multi: channel count mismatch");

  std::vector<std::future<IlcRun>> futures;
  futures.reserve(y_d.joint_count());
  for (std::size_t j = 0; j < y_d.joint_count(); ++j) {
    futures.push_back(std::async(std::launch::async, [&, j] {
      return refine(plant.joint(j), y_d.channel(j), cfg);
    }));
  }
  std::vector<IlcRun> runs;
  runs.reserve(futures.size());
  for (auto& f : futures) runs.push_back(f.get());
  return runs;
}

}  // namespace ffc
