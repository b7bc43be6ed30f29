#include "ffc/config.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "ffc/ini.hpp"

namespace ffc {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("plant config line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& v, int line) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) fail(line, "trailing characters after number '" + v + "'");
  return d;
}

int parse_int(const std::string& v, int line) {
  const double d = parse_number(v, line);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) fail(line, "expected an integer, got '" + v + "'");
  return i;
}

void apply_key(JointConfig& jc, const std::string& key, const std::string& value, int line) {
  if (key == "a") jc.model.a = parse_number(value, line);
  else if (key == "zeta") jc.model.zeta = parse_number(value, line);
  else if (key == "omega") jc.model.omega = parse_number(value, line);
  else if (key == "dt") jc.model.dt = parse_number(value, line);
  else if (key == "delay_samples") jc.delay_samples = parse_int(value, line);
  else if (key == "quant_step") jc.quant_step = parse_number(value, line);
  else if (key == "nonlin.knee") jc.nonlin.knee = parse_number(value, line);
  else if (key == "nonlin.rate_limit") jc.nonlin.rate_limit = parse_number(value, line);
  else if (key == "perturbation.gain_scale") jc.perturbation.gain_scale = parse_number(value, line);
  else if (key == "perturbation.gain_crossover")
    jc.perturbation.gain_crossover = parse_number(value, line);
  else if (key == "perturbation.omega_scale")
    jc.perturbation.omega_scale = parse_number(value, line);
  else if (key == "perturbation.zeta_scale")
    jc.perturbation.zeta_scale = parse_number(value, line);
  else if (key == "perturbation.extra_delay_samples")
    jc.perturbation.extra_delay_samples = parse_int(value, line);
  else fail(line, "unknown key '" + key + "'");
}

}  // namespace

PlantConfig parse_plant_config(std::istream& in) {
  JointConfig defaults;
  std::map<int, JointConfig> joints;
  int current_joint = 0;  // 0 = [defaults]
  for (const auto& e : parse_ini(in)) {
    if (e.is_section_header()) {
      if (e.section == "defaults") {
        if (!joints.empty()) fail(e.line, "[defaults] must precede joint sections");
        current_joint = 0;
      } else if (e.section.rfind("joint.", 0) == 0) {
        current_joint = parse_int(e.section.substr(6), e.line);
        if (current_joint < 1) fail(e.line, "joint numbers start at 1");
        if (joints.count(current_joint)) fail(e.line, "duplicate section [" + e.section + "]");
        joints[current_joint] = defaults;  // defaults seed each joint at open
      } else {
        fail(e.line, "unknown section [" + e.section + "]");
      }
      continue;
    }
    apply_key(current_joint == 0 ? defaults : joints[current_joint], e.key, e.value, e.line);
  }

  PlantConfig cfg;
  if (joints.empty()) {
    // A defaults-only file describes a single nominal joint.
    cfg.joints.push_back(defaults);
    return cfg;
  }
  int expect = 1;
  for (const auto& [no, jc] : joints) {
    if (no != expect)
      throw std::runtime_error(
          "plant config: joint sections must be contiguous from 1, missing joint." +
          std::to_string(expect));
    cfg.joints.push_back(jc);
    ++expect;
  }
  return cfg;
}

PlantConfig load_plant_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plant config: " + path);
  return parse_plant_config(in);
}

PlantModel make_plant(const JointConfig& jc) {
  return PlantModel(jc.model, jc.delay_samples, jc.quant_step, jc.nonlin);
}

MultiAxisPlant make_multi_plant(const PlantConfig& cfg) {
  std::vector<PlantModel> joints;
  for (const auto& jc : cfg.joints) joints.push_back(make_plant(jc));
  return MultiAxisPlant(std::move(joints));
}

MultiAxisPlant make_physical_multi_plant(const PlantConfig& cfg) {
  std::vector<PlantModel> joints;
  for (const auto& jc : cfg.joints)
    joints.push_back(make_physical_variant(make_plant(jc), jc.perturbation));
  return MultiAxisPlant(std::move(joints));
}

}  // namespace ffc
