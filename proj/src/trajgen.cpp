#include "ffc/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ffc/ini.hpp"
#include "ffc/rng.hpp"

namespace ffc {

const char* to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::Sinusoid: return "sinusoid";
    case TrajectoryKind::Chirp: return "chirp";
    case TrajectoryKind::Trapezoid: return "trapezoid";
    case TrajectoryKind::Sigmoid: return "sigmoid";
    case TrajectoryKind::RandomSmooth: return "random_smooth";
  }
  return "unknown";
}

TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "sinusoid") return TrajectoryKind::Sinusoid;
  if (s == "chirp") return TrajectoryKind::Chirp;
  if (s == "trapezoid") return TrajectoryKind::Trapezoid;
  if (s == "sigmoid") return TrajectoryKind::Sigmoid;
  if (s == "random_smooth") return TrajectoryKind::RandomSmooth;
  throw std::invalid_argument("unknown trajectory kind: " + s);
}

void TrajectorySpec::validate() const {
  if (length_samples < 1) throw std::invalid_argument("TrajectorySpec: length must be >= 1");
  if (dt <= 0.0 || !std::isfinite(dt)) throw std::invalid_argument("TrajectorySpec: bad dt");
  for (double v : {offset, amplitude, omega, phase, chirp_omega0, chirp_omega1, distance,
                   vmax, amax, start_delay, sigmoid_rate, cutoff})
    if (!std::isfinite(v)) throw std::invalid_argument("TrajectorySpec: non-finite parameter");
  if (kind == TrajectoryKind::Trapezoid && (vmax <= 0.0 || amax <= 0.0))
    throw std::invalid_argument("TrajectorySpec: trapezoid needs vmax, amax > 0");
  if (kind == TrajectoryKind::Chirp && (chirp_omega0 <= 0.0 || chirp_omega1 <= 0.0))
    throw std::invalid_argument("TrajectorySpec: chirp frequencies must be > 0");
  if (kind == TrajectoryKind::RandomSmooth && cutoff <= 0.0)
    throw std::invalid_argument("TrajectorySpec: random_smooth needs cutoff > 0");
}

namespace {

// Position along a trapezoidal velocity profile at time t (rest-to-rest,
// signed distance D, cruise vmax, ramp amax).
double trapezoid_position(double t, double D, double vmax, double amax) {
  const double s = D >= 0.0 ? 1.0 : -1.0;
  const double d = std::abs(D);
  double t_ramp = vmax / amax;
  double d_ramp = 0.5 * amax * t_ramp * t_ramp;
  double v_peak = vmax;
  if (2.0 * d_ramp > d) {  // triangular profile, vmax never reached
    t_ramp = std::sqrt(d / amax);
    d_ramp = 0.5 * d;
    v_peak = amax * t_ramp;
  }
  const double t_cruise = (d - 2.0 * d_ramp) / v_peak;
  const double t_total = 2.0 * t_ramp + t_cruise;

  double p;
  if (t <= 0.0) {
    p = 0.0;
  } else if (t < t_ramp) {
    p = 0.5 * amax * t * t;
  } else if (t < t_ramp + t_cruise) {
    p = d_ramp + v_peak * (t - t_ramp);
  } else if (t < t_total) {
    const double tr = t_total - t;
    p = d - 0.5 * amax * tr * tr;
  } else {
    p = d;
  }
  return s * p;
}

std::vector<double> smooth_noise(std::size_t n, double dt, double cutoff,
                                 std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();

  // Forward-backward one-pole low pass: zero phase lag.
  const double alpha = 1.0 - std::exp(-cutoff * dt);
  for (int pass = 0; pass < 2; ++pass) {
    double s = 0.0;
    if (pass == 0) {
      for (std::size_t k = 0; k < n; ++k) {
        s += alpha * (x[k] - s);
        x[k] = s;
      }
    } else {
      for (std::size_t k = n; k-- > 0;) {
        s += alpha * (x[k] - s);
        x[k] = s;
      }
    }
  }
  return x;
}

}  // namespace

Trajectory generate(const TrajectorySpec& spec) {
  spec.validate();
  Trajectory out;
  out.dt = spec.dt;
  out.values.resize(spec.length_samples);
  const std::size_t n = spec.length_samples;

  switch (spec.kind) {
    case TrajectoryKind::Sinusoid: {
      for (std::size_t k = 0; k < n; ++k) {
        const double t = spec.dt * static_cast<double>(k);
        out.values[k] = spec.offset + spec.amplitude * std::sin(spec.omega * t + spec.phase);
      }
      break;
    }
    case TrajectoryKind::Chirp: {
      // Linear sweep: theta(t) = w0 t + (w1 - w0) t^2 / (2 T).
      const double T = spec.dt * static_cast<double>(n - 1 > 0 ? n - 1 : 1);
      const double rate = (spec.chirp_omega1 - spec.chirp_omega0) / T;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = spec.dt * static_cast<double>(k);
        const double theta = spec.phase + spec.chirp_omega0 * t + 0.5 * rate * t * t;
        out.values[k] = spec.offset + spec.amplitude * std::sin(theta);
      }
      break;
    }
    case TrajectoryKind::Trapezoid: {
      for (std::size_t k = 0; k < n; ++k) {
        const double t = spec.dt * static_cast<double>(k) - spec.start_delay;
        out.values[k] = spec.offset + trapezoid_position(t, spec.distance, spec.vmax, spec.amax);
      }
      break;
    }
    case TrajectoryKind::Sigmoid: {
      // Centered so the curve starts essentially flat at the offset.
      const double T = spec.dt * static_cast<double>(n);
      const double t0 = spec.start_delay + 0.5 * std::min(T, 12.0 / spec.sigmoid_rate);
      for (std::size_t k = 0; k < n; ++k) {
        const double t = spec.dt * static_cast<double>(k);
        out.values[k] =
            spec.offset + spec.amplitude / (1.0 + std::exp(-spec.sigmoid_rate * (t - t0)));
      }
      break;
    }
    case TrajectoryKind::RandomSmooth: {
      auto x = smooth_noise(n, spec.dt, spec.cutoff, spec.seed);
      // Anchor the start at the offset and scale to the requested amplitude.
      const double x0 = x[0];
      double peak = 0.0;
      for (double& v : x) {
        v -= x0;
        peak = std::max(peak, std::abs(v));
      }
      const double scale = peak > 0.0 ? spec.amplitude / peak : 0.0;
      for (std::size_t k = 0; k < n; ++k) out.values[k] = spec.offset + scale * x[k];
      break;
    }
  }
  return out;
}

LimitReport validate_limits(const Trajectory& traj, double vmax, double amax) {
  if (vmax <= 0.0 || amax <= 0.0)
    throw std::invalid_argument("validate_limits: bounds must be > 0");
  LimitReport rep;
  const auto& x = traj.values;
  const std::size_t n = x.size();
  const double dt = traj.dt;
  if (n < 3) return rep;

  for (std::size_t k = 0; k < n; ++k) {
    double v;
    if (k == 0)
      v = (x[1] - x[0]) / dt;
    else if (k == n - 1)
      v = (x[n - 1] - x[n - 2]) / dt;
    else
      v = (x[k + 1] - x[k - 1]) / (2.0 * dt);
    if (std::abs(v) > std::abs(rep.worst_velocity)) {
      rep.worst_velocity = v;
      rep.worst_velocity_index = k;
    }
    if (std::abs(v) > vmax) rep.velocity_violations.push_back({k, v});

    if (k > 0 && k + 1 < n) {
      const double a = (x[k + 1] - 2.0 * x[k] + x[k - 1]) / (dt * dt);
      if (std::abs(a) > std::abs(rep.worst_acceleration)) {
        rep.worst_acceleration = a;
        rep.worst_acceleration_index = k;
      }
      if (std::abs(a) > amax) rep.acceleration_violations.push_back({k, a});
    }
  }
  rep.ok = rep.velocity_violations.empty() && rep.acceleration_violations.empty();
  return rep;
}

std::vector<TrajectorySpec> sample_training_specs(std::size_t n_traj, std::uint64_t seed,
                                                  const SamplerConfig& cfg) {
  if (n_traj < 1) throw std::invalid_argument("sample_training_specs: n_traj must be >= 1");
  const double total = cfg.mix.sinusoid + cfg.mix.chirp + cfg.mix.trapezoid +
                       cfg.mix.sigmoid + cfg.mix.random_smooth;
  if (total <= 0.0) throw std::invalid_argument("sample_training_specs: empty family mix");

  const std::size_t n_freqs =
      static_cast<std::size_t>(std::floor((cfg.freq_hi - cfg.freq_lo) / cfg.freq_step)) + 1;

  Rng rng(seed);
  std::vector<TrajectorySpec> specs;
  specs.reserve(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) {
    TrajectorySpec s;
    s.length_samples = cfg.length_samples;
    s.dt = cfg.dt;
    s.offset = rng.uniform(-cfg.offset_range, cfg.offset_range);
    s.amplitude = rng.uniform(cfg.amp_lo, cfg.amp_hi);

    double pick = rng.uniform(0.0, total);
    if ((pick -= cfg.mix.sinusoid) < 0.0) {
      s.kind = TrajectoryKind::Sinusoid;
      s.omega = cfg.freq_lo + cfg.freq_step * static_cast<double>(rng.bounded(n_freqs));
      s.phase = rng.uniform(0.0, 6.283185307179586);
    } else if ((pick -= cfg.mix.chirp) < 0.0) {
      s.kind = TrajectoryKind::Chirp;
      s.chirp_omega0 = rng.uniform(cfg.freq_lo, 0.5 * (cfg.freq_lo + cfg.freq_hi));
      s.chirp_omega1 = rng.uniform(s.chirp_omega0, cfg.freq_hi);
    } else if ((pick -= cfg.mix.trapezoid) < 0.0) {
      s.kind = TrajectoryKind::Trapezoid;
      s.distance = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(4.0, 25.0);
      s.vmax = rng.uniform(5.0, 40.0);
      s.amax = rng.uniform(100.0, 600.0);
      s.start_delay = rng.uniform(0.1, 0.5);
    } else if ((pick -= cfg.mix.sigmoid) < 0.0) {
      s.kind = TrajectoryKind::Sigmoid;
      s.amplitude = rng.uniform(2.0, 20.0);
      s.sigmoid_rate = rng.uniform(1.0, 8.0);
      s.start_delay = rng.uniform(0.1, 0.5);
    } else {
      s.kind = TrajectoryKind::RandomSmooth;
      s.cutoff = rng.uniform(1.0, 4.0);
      s.seed = rng.next_u64();
    }
    specs.push_back(s);
  }
  return specs;
}

std::vector<Trajectory> sample_training_set(std::size_t n_traj, std::uint64_t seed,
                                            const SamplerConfig& cfg) {
  const auto specs = sample_training_specs(n_traj, seed, cfg);
  std::vector<Trajectory> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(generate(s));
  return out;
}

namespace {

[[noreturn]] void spec_fail(int line, const std::string& msg) {
  throw std::runtime_error("trajectory spec line " + std::to_string(line) + ": " + msg);
}

double spec_number(const std::string& v, int line) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    spec_fail(line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) spec_fail(line, "trailing characters after number '" + v + "'");
  return d;
}

void spec_key(TrajectorySpec& s, const std::string& key, const std::string& value, int line) {
  if (key == "kind") {
    try {
      s.kind = trajectory_kind_from_string(value);
    } catch (const std::exception& e) {
      spec_fail(line, e.what());
    }
  } else if (key == "length_samples") {
    const double d = spec_number(value, line);
    if (d < 1.0 || d != std::floor(d)) spec_fail(line, "length_samples must be a positive integer");
    s.length_samples = static_cast<std::size_t>(d);
  } else if (key == "seed") {
    const double d = spec_number(value, line);
    if (d < 0.0 || d != std::floor(d)) spec_fail(line, "seed must be a non-negative integer");
    s.seed = static_cast<std::uint64_t>(d);
  } else if (key == "dt") s.dt = spec_number(value, line);
  else if (key == "offset") s.offset = spec_number(value, line);
  else if (key == "amplitude") s.amplitude = spec_number(value, line);
  else if (key == "omega") s.omega = spec_number(value, line);
  else if (key == "phase") s.phase = spec_number(value, line);
  else if (key == "chirp_omega0") s.chirp_omega0 = spec_number(value, line);
  else if (key == "chirp_omega1") s.chirp_omega1 = spec_number(value, line);
  else if (key == "distance") s.distance = spec_number(value, line);
  else if (key == "vmax") s.vmax = spec_number(value, line);
  else if (key == "amax") s.amax = spec_number(value, line);
  else if (key == "start_delay") s.start_delay = spec_number(value, line);
  else if (key == "sigmoid_rate") s.sigmoid_rate = spec_number(value, line);
  else if (key == "cutoff") s.cutoff = spec_number(value, line);
  else spec_fail(line, "unknown key '" + key + "'");
}

}  // namespace

std::vector<TrajectorySpec> parse_trajectory_specs(std::istream& in) {
  TrajectorySpec defaults;
  std::map<int, TrajectorySpec> joints;
  bool single = false;
  TrajectorySpec single_spec;
  int current = 0;  // 0 = defaults, -1 = [trajectory]
  for (const auto& e : parse_ini(in)) {
    if (e.is_section_header()) {
      if (e.section == "defaults") {
        if (single || !joints.empty()) spec_fail(e.line, "[defaults] must come first");
        current = 0;
      } else if (e.section == "trajectory") {
        if (single || !joints.empty()) spec_fail(e.line, "[trajectory] must be the only spec section");
        single = true;
        single_spec = defaults;
        current = -1;
      } else if (e.section.rfind("joint.", 0) == 0) {
        if (single) spec_fail(e.line, "cannot mix [trajectory] and [joint.N]");
        const double d = spec_number(e.section.substr(6), e.line);
        if (d < 1.0 || d != std::floor(d)) spec_fail(e.line, "joint numbers start at 1");
        const int no = static_cast<int>(d);
        if (joints.count(no)) spec_fail(e.line, "duplicate section [" + e.section + "]");
        joints[no] = defaults;
        current = no;
      } else {
        spec_fail(e.line, "unknown section [" + e.section + "]");
      }
      continue;
    }
    TrajectorySpec& target = current == 0 ? defaults : current == -1 ? single_spec : joints[current];
    spec_key(target, e.key, e.value, e.line);
  }

  std::vector<TrajectorySpec> out;
  if (single) {
    out.push_back(single_spec);
  } else if (joints.empty()) {
    out.push_back(defaults);  // defaults-only file = one channel
  } else {
    int expect = 1;
    for (const auto& [no, s] : joints) {
      if (no != expect)
        throw std::runtime_error(
            "trajectory spec: joint sections must be contiguous from 1, missing joint." +
            std::to_string(expect));
      out.push_back(s);
      ++expect;
    }
  }
  for (const auto& s : out) s.validate();
  return out;
}

std::vector<TrajectorySpec> load_trajectory_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory spec: " + path);
  return parse_trajectory_specs(in);
}

}  // namespace ffc
