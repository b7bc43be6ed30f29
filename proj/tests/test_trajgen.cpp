#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ffc/trajgen.hpp"

using namespace ffc;

TEST_CASE("sinusoid matches the closed form") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Sinusoid;
  s.length_samples = 500;
  s.offset = 3.0;
  s.amplitude = 2.5;
  s.omega = 4.0;
  s.phase = 0.7;
  const Trajectory t = generate(s);
  REQUIRE(t.size() == 500);
  CHECK(t.dt == s.dt);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double want = 3.0 + 2.5 * std::sin(4.0 * 0.004 * double(k) + 0.7);
    CHECK(t.values[k] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("chirp phase follows the linear sweep") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Chirp;
  s.length_samples = 2000;
  s.amplitude = 1.5;
  s.chirp_omega0 = 0.628;
  s.chirp_omega1 = 1.884;
  const Trajectory t = generate(s);
  const double T = s.dt * double(s.length_samples - 1);
  const double rate = (s.chirp_omega1 - s.chirp_omega0) / T;
  for (std::size_t k = 0; k < t.size(); k += 37) {
    const double tk = s.dt * double(k);
    const double theta = s.chirp_omega0 * tk + 0.5 * rate * tk * tk;
    CHECK(t.values[k] == doctest::Approx(1.5 * std::sin(theta)).epsilon(1e-12));
  }
  // Instantaneous frequency at the end of the sweep is the requested omega1.
  CHECK(s.chirp_omega0 + rate * T == doctest::Approx(1.884));
}

TEST_CASE("trapezoid is rest-to-rest and respects its own limits") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Trapezoid;
  s.length_samples = 1000;
  s.offset = -4.0;
  s.distance = 10.0;
  s.vmax = 10.0;
  s.amax = 100.0;
  s.start_delay = 0.2;
  const Trajectory t = generate(s);

  CHECK(t.values.front() == doctest::Approx(-4.0));
  CHECK(t.values.back() == doctest::Approx(6.0));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.values[k] >= t.values[k - 1] - 1e-12);

  const LimitReport rep = validate_limits(t, s.vmax * 1.001, s.amax * 1.001);
  CHECK(rep.ok);
  CHECK(std::abs(rep.worst_velocity) == doctest::Approx(s.vmax).epsilon(1e-3));
  CHECK(std::abs(rep.worst_acceleration) <= s.amax * 1.001);
}

TEST_CASE("short trapezoid falls back to a triangular profile") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Trapezoid;
  s.length_samples = 600;
  s.distance = -0.5;  // too short to reach vmax
  s.vmax = 10.0;
  s.amax = 100.0;
  const Trajectory t = generate(s);
  CHECK(t.values.front() == doctest::Approx(0.0));
  CHECK(t.values.back() == doctest::Approx(-0.5));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.values[k] <= t.values[k - 1] + 1e-12);
  // Peak speed of the triangular profile is sqrt(d * a), well under vmax.
  const LimitReport rep = validate_limits(t, std::sqrt(0.5 * 100.0) * 1.01, s.amax * 1.01);
  CHECK(rep.ok);
}

TEST_CASE("sigmoid runs from the offset to offset plus amplitude") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Sigmoid;
  s.length_samples = 3000;
  s.offset = 1.0;
  s.amplitude = 8.0;
  s.sigmoid_rate = 4.0;
  s.start_delay = 0.2;
  const Trajectory t = generate(s);
  CHECK(t.values.front() == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(t.values.back() == doctest::Approx(9.0).epsilon(1e-4));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.values[k] >= t.values[k - 1]);
  // Logistic midpoint sits at start_delay + half the effective transition.
  const double t0 = 0.2 + 0.5 * std::min(12.0, 12.0 / 4.0);
  const std::size_t k0 = std::size_t(t0 / s.dt);
  CHECK(t.values[k0] == doctest::Approx(1.0 + 4.0).epsilon(1e-2));
}

TEST_CASE("random_smooth anchors at the offset and hits its amplitude") {
  TrajectorySpec s;
  s.kind = TrajectoryKind::RandomSmooth;
  s.length_samples = 2000;
  s.offset = -2.0;
  s.amplitude = 5.0;
  s.cutoff = 2.0;
  s.seed = 99;
  const Trajectory a = generate(s);
  CHECK(a.values.front() == doctest::Approx(-2.0));
  double peak = 0.0;
  for (double v : a.values) peak = std::max(peak, std::abs(v + 2.0));
  CHECK(peak == doctest::Approx(5.0).epsilon(1e-12));

  const Trajectory b = generate(s);
  CHECK(a.values == b.values);  // pure function of the spec
  s.seed = 100;
  const Trajectory c = generate(s);
  CHECK(a.values != c.values);
}

TEST_CASE("spec validation rejects nonsense") {
  TrajectorySpec s;
  s.length_samples = 0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = TrajectorySpec{};
  s.dt = 0.0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = TrajectorySpec{};
  s.kind = TrajectoryKind::Trapezoid;
  s.vmax = 0.0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = TrajectorySpec{};
  s.kind = TrajectoryKind::Chirp;
  s.chirp_omega0 = 0.0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = TrajectorySpec{};
  s.kind = TrajectoryKind::RandomSmooth;
  s.cutoff = -1.0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = TrajectorySpec{};
  s.amplitude = std::nan("");
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
}

TEST_CASE("validate_limits reproduces exact finite differences") {
  // Pure quadratic: second difference is the acceleration everywhere.
  const double A = 50.0;
  Trajectory t;
  t.dt = 0.004;
  t.values.resize(200);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double tk = t.dt * double(k);
    t.values[k] = 0.5 * A * tk * tk;
  }
  const LimitReport rep = validate_limits(t, 1e9, 1e9);
  CHECK(rep.ok);
  CHECK(rep.worst_acceleration == doctest::Approx(A).epsilon(1e-9));
  // The largest finite-difference velocity is the trailing one-sided one.
  const std::size_t n = t.size();
  const double v_last = (t.values[n - 1] - t.values[n - 2]) / t.dt;
  CHECK(rep.worst_velocity == doctest::Approx(v_last).epsilon(1e-12));
  CHECK(rep.worst_velocity_index == n - 1);

  // Tighten the bounds until both kinds of violations appear.
  const LimitReport bad = validate_limits(t, 0.5 * v_last, 0.5 * A);
  CHECK_FALSE(bad.ok);
  CHECK(bad.velocity_violations.size() > 0);
  CHECK(bad.acceleration_violations.size() == t.size() - 2);
  for (const auto& v : bad.acceleration_violations)
    CHECK(std::abs(v.value) > 0.5 * A);

  CHECK_THROWS_AS(validate_limits(t, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(validate_limits(t, 1.0, -2.0), std::invalid_argument);
  // Too short to differentiate: trivially ok.
  Trajectory tiny{0.004, {1.0, 2.0}};
  CHECK(validate_limits(tiny, 1e-9, 1e-9).ok);
}

TEST_CASE("training sampler is reproducible and respects the family mix") {
  SamplerConfig cfg;
  const auto a = sample_training_specs(40, 7, cfg);
  const auto b = sample_training_specs(40, 7, cfg);
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].kind == b[i].kind);
    CHECK(a[i].offset == b[i].offset);
    CHECK(a[i].amplitude == b[i].amplitude);
    CHECK(a[i].omega == b[i].omega);
    CHECK(a[i].seed == b[i].seed);
  }
  const auto c = sample_training_specs(40, 8, cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    any_diff = any_diff || a[i].offset != c[i].offset;
  CHECK(any_diff);

  // Disabled families never appear (default mix has no chirp/random_smooth).
  for (const auto& s : a) {
    CHECK(s.kind != TrajectoryKind::Chirp);
    CHECK(s.kind != TrajectoryKind::RandomSmooth);
    CHECK(std::abs(s.offset) <= cfg.offset_range);
    if (s.kind == TrajectoryKind::Sinusoid) {
      CHECK(s.omega >= cfg.freq_lo);
      CHECK(s.omega <= cfg.freq_hi);
      // On the discrete grid: an integer number of steps above freq_lo.
      const double steps = (s.omega - cfg.freq_lo) / cfg.freq_step;
      CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-9));
    }
  }

  SamplerConfig sine_only;
  sine_only.mix = FamilyMix{1.0, 0.0, 0.0, 0.0, 0.0};
  for (const auto& s : sample_training_specs(25, 3, sine_only))
    CHECK(s.kind == TrajectoryKind::Sinusoid);

  CHECK_THROWS_AS(sample_training_specs(0, 1, cfg), std::invalid_argument);
  SamplerConfig empty;
  empty.mix = FamilyMix{0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(sample_training_specs(5, 1, empty), std::invalid_argument);
}

TEST_CASE("sampled trajectories match their specs") {
  SamplerConfig cfg;
  const auto specs = sample_training_specs(10, 21, cfg);
  const auto trajs = sample_training_set(10, 21, cfg);
  REQUIRE(trajs.size() == specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Trajectory t = generate(specs[i]);
    CHECK(t.values == trajs[i].values);
  }
}

TEST_CASE("trajectory spec files parse with defaults cascading") {
  std::istringstream in(
      "[defaults]\n"
      "dt = 0.004\n"
      "length_samples = 1200\n"
      "amplitude = 3\n"
      "\n"
      "[joint.1]\n"
      "kind = sinusoid\n"
      "omega = 5\n"
      "\n"
      "[joint.2]\n"
      "kind = trapezoid\n"
      "distance = -8\n"
      "vmax = 12\n"
      "amax = 200\n");
  const auto specs = parse_trajectory_specs(in);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].kind == TrajectoryKind::Sinusoid);
  CHECK(specs[0].length_samples == 1200);
  CHECK(specs[0].amplitude == 3.0);
  CHECK(specs[0].omega == 5.0);
  CHECK(specs[1].kind == TrajectoryKind::Trapezoid);
  CHECK(specs[1].length_samples == 1200);
  CHECK(specs[1].distance == -8.0);
  CHECK(specs[1].vmax == 12.0);
}

TEST_CASE("single [trajectory] section form") {
  std::istringstream in(
      "[trajectory]\n"
      "kind = chirp\n"
      "chirp_omega0 = 0.628\n"
      "chirp_omega1 = 1.884\n"
      "amplitude = 2\n");
  const auto specs = parse_trajectory_specs(in);
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].kind == TrajectoryKind::Chirp);
  CHECK(specs[0].chirp_omega0 == 0.628);
}

TEST_CASE("spec file errors are diagnosed") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_trajectory_specs(in);
  };
  CHECK_THROWS_WITH_AS(parse("[joint.1]\nomega = fast\n"),
                       doctest::Contains("expected a number"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse("[joint.1]\nwibble = 3\n"), doctest::Contains("unknown key"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse("[joint.1]\nomega=3\n[joint.3]\nomega=4\n"),
                       doctest::Contains("contiguous"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse("[joint.1]\nomega=3\n[joint.1]\nomega=4\n"),
                       doctest::Contains("duplicate"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse("[trajectory]\nomega=3\n[joint.1]\nomega=4\n"),
                       doctest::Contains("cannot mix"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse("[garbage]\nx=1\n"), doctest::Contains("unknown section"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse("[joint.1]\nomega=3\n[defaults]\ndt=0.01\n"),
                       doctest::Contains("must come first"), std::runtime_error);
  CHECK_THROWS_AS(parse("[trajectory]\nkind = warp\n"), std::runtime_error);
}

TEST_CASE("kind names round-trip") {
  for (auto k : {TrajectoryKind::Sinusoid, TrajectoryKind::Chirp, TrajectoryKind::Trapezoid,
                 TrajectoryKind::Sigmoid, TrajectoryKind::RandomSmooth})
    CHECK(trajectory_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(trajectory_kind_from_string("square"), std::invalid_argument);
}
