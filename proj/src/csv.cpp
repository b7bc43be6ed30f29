#include "ffc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ffc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::string& path, const MultiTrajectory& traj) {
  traj.check_consistent();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t";
  for (std::size_t j = 0; j < traj.joint_count(); ++j) out << ",j" << (j + 1);
  out << "\n";
  for (std::size_t k = 0; k < traj.length(); ++k) {
    out << format_double(traj.dt * static_cast<double>(k));
    for (std::size_t j = 0; j < traj.joint_count(); ++j)
      out << "," << format_double(traj.channels[j][k]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

MultiTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file: " + path);
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw std::runtime_error("bad trajectory header (expected t,j1,..): " + path);
  const std::size_t n_joints = header.size() - 1;
  if (n_joints == 0) throw std::runtime_error("trajectory has no joint columns: " + path);

  MultiTrajectory traj;
  traj.channels.assign(n_joints, {});
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("row width mismatch in " + path);
    times.push_back(std::stod(fields[0]));
    for (std::size_t j = 0; j < n_joints; ++j)
      traj.channels[j].push_back(std::stod(fields[j + 1]));
  }
  if (times.size() < 2) {
    traj.dt = 0.004;
    if (times.empty()) throw std::runtime_error("trajectory has no samples: " + path);
    return traj;
  }
  traj.dt = times[1] - times[0];
  if (traj.dt <= 0) throw std::runtime_error("non-increasing time column: " + path);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double expect = times[0] + traj.dt * static_cast<double>(k);
    if (std::abs(times[k] - expect) > 1e-6 * std::max(1.0, std::abs(expect)) + 1e-9)
      throw std::runtime_error("non-uniform sampling in " + path);
  }
  return traj;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ffc
