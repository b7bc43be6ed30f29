#pragma once

#include <string>
#include <vector>

#include "ffc/trajectory.hpp"

namespace ffc {

// Trajectory CSV interchange: header "t,j1,..,jn", one row per sample,
// time in seconds at fixed dt, angles in degrees.
void write_trajectory_csv(const std::string& path, const MultiTrajectory& traj);
MultiTrajectory read_trajectory_csv(const std::string& path);

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  MultiTrajectory m;
  m.dt = traj.dt;
  m.channels.push_back(traj.values);
  write_trajectory_csv(path, m);
}

// Generic small table writer: header row, then numeric rows.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

std::string format_double(double v);

}  // namespace ffc
