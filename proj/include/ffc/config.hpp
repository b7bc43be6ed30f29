#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ffc/plant.hpp"

namespace ffc {

// One [joint.N] section of a plant config file.
struct JointConfig {
  LinearModel model;
  int delay_samples = 6;
  double quant_step = 0.0;
  NonlinearityParams nonlin;
  PerturbationSpec perturbation;
};

struct PlantConfig {
  std::vector<JointConfig> joints;
};

// INI-style grammar. '#' and ';' start comments, blank lines are skipped.
// A [defaults] section seeds every joint; [joint.N] sections (N = 1..n,
// contiguous) override per joint. Keys: a, zeta, omega, dt, delay_samples,
// quant_step, nonlin.knee, nonlin.rate_limit, perturbation.gain_scale,
// perturbation.gain_crossover, perturbation.omega_scale,
// perturbation.zeta_scale, perturbation.extra_delay_samples. Unknown keys
// and malformed lines throw with a line number.
PlantConfig parse_plant_config(std::istream& in);
PlantConfig load_plant_config(const std::string& path);

PlantModel make_plant(const JointConfig& jc);
// Nominal multi-axis plant; perturbation sections are ignored here.
MultiAxisPlant make_multi_plant(const PlantConfig& cfg);
// Perturbed twin built from each joint's perturbation section.
MultiAxisPlant make_physical_multi_plant(const PlantConfig& cfg);

}  // namespace ffc
