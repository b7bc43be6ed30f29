#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ffc/ilc.hpp"
#include "ffc/rng.hpp"
#include "oracles.hpp"

using namespace ffc;

namespace {

Trajectory random_traj(std::size_t n, Rng& rng, double scale = 2.0) {
  Trajectory t;
  t.values.resize(n);
  for (auto& v : t.values) v = rng.uniform(-scale, scale);
  return t;
}

Trajectory sinusoid(std::size_t n, double w, double amp, double dt = 0.004) {
  Trajectory t;
  t.dt = dt;
  t.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) t.values[k] = amp * std::sin(w * dt * double(k));
  return t;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

}  // namespace

TEST_CASE("model-free adjoint equals the lifted-transpose product") {
  const LinearModel m;
  const int delay = 6;
  const PlantModel plant{m, delay};
  const std::size_t n = 120;
  const Eigen::MatrixXd T = oracles::lifted_matrix(m, delay, n);

  Rng rng(101);
  for (int trial = 0; trial < 4; ++trial) {
    Trajectory u = random_traj(n, rng);
    Trajectory y_d = random_traj(n, rng);
    const double hold = rng.uniform(-1.0, 1.0);
    const Trajectory y = plant.run(u, hold);

    const Trajectory dir = adjoint_direction_modelfree(plant, u, y, y_d, hold);

    const Eigen::VectorXd e = to_vec(subtract(y.values, y_d.values));
    const Eigen::VectorXd want = T.transpose() * e;
    const double rel = (to_vec(dir.values) - want).norm() / want.norm();
    CHECK(rel < 1e-10);
  }
}

TEST_CASE("analytic lifted adjoint equals the Toeplitz transpose") {
  const LinearModel m;
  const int delay = 6;
  const std::size_t n = 150;
  const Eigen::MatrixXd T = oracles::lifted_matrix(m, delay, n);

  Rng rng(7);
  const Trajectory e = random_traj(n, rng);
  const Trajectory dir = adjoint_direction_lifted(m, delay, e);
  const Eigen::VectorXd want = T.transpose() * to_vec(e.values);
  const double rel = (to_vec(dir.values) - want).norm() / want.norm();
  CHECK(rel < 1e-12);
}

TEST_CASE("adjoint direction rejects mismatched lengths") {
  const PlantModel plant;
  Rng rng(1);
  const Trajectory u = random_traj(64, rng);
  const Trajectory y = plant.run(u, 0.0);
  const Trajectory y_d = random_traj(63, rng);
  CHECK_THROWS_AS(adjoint_direction_modelfree(plant, u, y, y_d, 0.0), std::invalid_argument);
}

TEST_CASE("line search finds the exact quadratic minimizer on a linear plant") {
  const LinearModel m;
  const int delay = 6;
  const PlantModel plant{m, delay};
  const std::size_t n = 80;
  const Eigen::MatrixXd T = oracles::lifted_matrix(m, delay, n);

  Rng rng(19);
  const Trajectory u = random_traj(n, rng);
  Trajectory y_d = random_traj(n, rng);
  y_d.values[0] = 0.0;  // zero hold: the affine part of the response vanishes

  const Eigen::VectorXd uv = to_vec(u.values);
  const Eigen::VectorXd e0 = T * uv - to_vec(y_d.values);
  const Eigen::VectorXd d = T.transpose() * e0;
  const Eigen::VectorXd Td = T * d;
  const double alpha_star = Td.dot(e0) / Td.squaredNorm();

  Trajectory dir{u.dt, std::vector<double>(d.data(), d.data() + n)};
  LineSearchConfig cfg;
  cfg.alpha_init = 0.8 * alpha_star;  // first probe already descends
  const double err0 = e0.norm();
  const LineSearchResult ls = line_search(plant, u, dir, y_d, 0.0, err0, cfg);

  REQUIRE_FALSE(ls.stalled);
  CHECK(ls.evals <= cfg.max_probes);
  CHECK(ls.alpha == doctest::Approx(alpha_star).epsilon(1e-6));
  const double err_star = (e0 - alpha_star * Td).norm();
  CHECK(ls.error == doctest::Approx(err_star).epsilon(1e-8));
  CHECK(ls.error < err0);
}

TEST_CASE("line search stalls when no probe descends") {
  const PlantModel plant;
  const std::size_t n = 60;
  Rng rng(3);
  const Trajectory u = random_traj(n, rng);
  const Trajectory y_d = u;  // any step away from the current input can only help or hurt
  const Trajectory y = plant.run(u, 0.0);
  const double err = l2_norm(subtract(y.values, y_d.values));

  Trajectory dir = random_traj(n, rng, 100.0);  // huge arbitrary direction
  LineSearchConfig cfg;
  cfg.alpha_init = 1e6;
  cfg.max_probes = 1;  // a single enormous probe cannot descend
  const LineSearchResult ls = line_search(plant, u, dir, y_d, 0.0, err, cfg);
  CHECK(ls.stalled);
  CHECK(ls.evals == 1);
}

TEST_CASE("refinement error history is strictly decreasing on a sinusoid") {
  const PlantModel plant{LinearModel{}, 6};
  const Trajectory y_d = sinusoid(1500, 3.0, 10.0);

  IlcConfig cfg;
  cfg.max_iters = 10;
  const IlcRun run = refine(plant, y_d, cfg);

  REQUIRE(run.error_history.size() >= 2);
  CHECK(run.u_history.size() == run.error_history.size());
  CHECK(run.u_history.size() == run.alpha_history.size() + 1);
  for (std::size_t k = 1; k < run.error_history.size(); ++k)
    CHECK(run.error_history[k] < run.error_history[k - 1]);
  // Ten iterations cut the initial tracking error by well over 90%.
  CHECK(run.final_error() < 0.1 * run.error_history.front());
  CHECK(run.plant_evals > 0);
}

TEST_CASE("model-free and lifted gradients refine equally well on a linear plant") {
  const PlantModel plant{LinearModel{}, 6};
  const Trajectory y_d = sinusoid(800, 5.0, 4.0);

  IlcConfig cfg;
  cfg.max_iters = 6;
  cfg.gradient_source = GradientSource::ModelFree;
  const IlcRun a = refine(plant, y_d, cfg);
  cfg.gradient_source = GradientSource::AnalyticLifted;
  const IlcRun b = refine(plant, y_d, cfg);

  REQUIRE(a.error_history.size() == b.error_history.size());
  for (std::size_t k = 0; k < a.error_history.size(); ++k)
    CHECK(a.error_history[k] == doctest::Approx(b.error_history[k]).epsilon(1e-7));
  // The lifted path skips the extra adjoint plant run per iteration.
  CHECK(b.plant_evals < a.plant_evals);
}

TEST_CASE("constant target at the hold position stops on a zero direction") {
  const PlantModel plant{LinearModel{}, 6};
  Trajectory y_d{0.004, std::vector<double>(200, 2.5)};
  IlcConfig cfg;
  const IlcRun run = refine(plant, y_d, cfg);
  // The equilibrium output matches to rounding, so the adjoint direction is
  // numerically zero and the run stops without taking a step.
  CHECK(run.status == IlcStatus::ZeroDirection);
  CHECK(run.error_history.size() == 1);
  CHECK(run.alpha_history.empty());
  CHECK(run.final_error() < 1e-9);
}

TEST_CASE("target_error threshold stops the run early") {
  const PlantModel plant{LinearModel{}, 6};
  const Trajectory y_d = sinusoid(1000, 3.0, 8.0);

  IlcConfig probe;
  probe.max_iters = 1;
  const double initial = refine(plant, y_d, probe).error_history.front();

  IlcConfig cfg;
  cfg.max_iters = 50;
  cfg.target_error = 0.5 * initial;
  const IlcRun run = refine(plant, y_d, cfg);
  CHECK(run.status == IlcStatus::ReachedTarget);
  CHECK(run.final_error() <= cfg.target_error);
  CHECK(run.error_history.size() < 50);
}

TEST_CASE("config validation rejects bad settings") {
  const PlantModel plant;
  const Trajectory y_d = sinusoid(100, 3.0, 1.0);
  IlcConfig cfg;

  cfg.max_iters = 0;
  CHECK_THROWS_AS(refine(plant, y_d, cfg), std::invalid_argument);
  cfg = IlcConfig{};
  cfg.target_error = -1.0;
  CHECK_THROWS_AS(refine(plant, y_d, cfg), std::invalid_argument);
  cfg = IlcConfig{};
  cfg.line_search.alpha_init = 0.0;
  CHECK_THROWS_AS(refine(plant, y_d, cfg), std::invalid_argument);
  cfg = IlcConfig{};
  cfg.line_search.shrink = 1.0;
  CHECK_THROWS_AS(refine(plant, y_d, cfg), std::invalid_argument);
  cfg = IlcConfig{};
  cfg.line_search.max_probes = 0;
  CHECK_THROWS_AS(refine(plant, y_d, cfg), std::invalid_argument);
  CHECK_THROWS_AS(refine(plant, Trajectory{0.004, {}}, IlcConfig{}), std::invalid_argument);
}

TEST_CASE("refine_multi matches per-joint refinement") {
  LinearModel m2;
  m2.omega = 12.0;
  m2.a = 20.0;
  m2.zeta = 0.45;
  const MultiAxisPlant plant{{PlantModel{LinearModel{}, 6}, PlantModel{m2, 6}}};

  MultiTrajectory y_d;
  y_d.dt = 0.004;
  y_d.channels.push_back(sinusoid(600, 3.0, 5.0).values);
  y_d.channels.push_back(sinusoid(600, 4.0, 3.0).values);

  IlcConfig cfg;
  cfg.max_iters = 4;
  const std::vector<IlcRun> runs = refine_multi(plant, y_d, cfg);
  REQUIRE(runs.size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    const IlcRun solo = refine(plant.joint(j), y_d.channel(j), cfg);
    REQUIRE(runs[j].error_history.size() == solo.error_history.size());
    for (std::size_t k = 0; k < solo.error_history.size(); ++k)
      CHECK(runs[j].error_history[k] == solo.error_history[k]);
    CHECK(runs[j].final_input().values == solo.final_input().values);
  }

  MultiTrajectory wrong = y_d;
  wrong.channels.pop_back();
  CHECK_THROWS_AS(refine_multi(plant, wrong, cfg), std::invalid_argument);
}

TEST_CASE("refinement copes with the nonlinear stages") {
  NonlinearityParams nl;
  nl.knee = 40.0;
  nl.rate_limit = 400.0;
  const PlantModel plant{LinearModel{}, 6, 0.01, nl};
  const Trajectory y_d = sinusoid(1200, 4.0, 6.0);

  IlcConfig cfg;
  cfg.max_iters = 8;
  const IlcRun run = refine(plant, y_d, cfg);
  // Monotone by construction (accepted steps only), still large net descent.
  for (std::size_t k = 1; k < run.error_history.size(); ++k)
    CHECK(run.error_history[k] < run.error_history[k - 1]);
  CHECK(run.final_error() < 0.35 * run.error_history.front());
}
