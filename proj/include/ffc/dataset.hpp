#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ffc/trajectory.hpp"

namespace ffc {

// Window geometry: the network sees 25 past + 25 future desired samples and
// predicts the next 25 input samples, anchored at t.
inline constexpr std::size_t kHalfWindow = 25;
inline constexpr std::size_t kInputWindow = 2 * kHalfWindow;  // 50
inline constexpr std::size_t kOutputWindow = kHalfWindow;     // 25

// One supervised sample: x = q_d[t-25, t+25), y = u[t, t+25).
struct WindowPair {
  std::array<double, kInputWindow> x;
  std::array<double, kOutputWindow> y;
  int joint_index = 0;
  int source_id = 0;
  int t_index = 0;
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct JointDataset {
  int joint_index = 0;
  std::vector<WindowPair> pairs;
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  double norm_shift = 0.0;
  double norm_scale = 1.0;
  bool norm_degenerate = false;
};

struct Dataset {
  int stride = 25;
  std::uint64_t seed = 0;
  bool split_by_trajectory = true;
  std::vector<JointDataset> joints;
};

// Slides the window pair over one (desired, refined-input) trajectory pair.
// Anchors keep both windows fully in range; nothing is padded. Throws when
// the trajectories are shorter than one full window.
std::vector<WindowPair> extract_windows(const Trajectory& q_d, const Trajectory& u_refined,
                                        int stride, int joint_index = 0, int source_id = 0);

// Per-joint sources: pairs_per_joint[j] lists the (q_d, u) pairs of joint j.
using TrajectoryPair = std::pair<Trajectory, Trajectory>;

Dataset build_dataset(const std::vector<std::vector<TrajectoryPair>>& pairs_per_joint,
                      int stride, std::uint64_t seed, const SplitFractions& split,
                      bool split_by_trajectory = true);

// Computes per-joint affine constants (train mean, train max-abs deviation)
// from the train split only. Constant train data gets unit scale and the
// degenerate flag.
void compute_normalization(Dataset& ds);

inline double normalize_value(double v, double shift, double scale) {
  return (v - shift) / scale;
}
inline double denormalize_value(double v, double shift, double scale) {
  return v * scale + shift;
}

// Directory persistence: manifest.json plus one raw binary block per joint of
// 75-value little-endian float64 records (50 inputs then 25 targets).
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace ffc
