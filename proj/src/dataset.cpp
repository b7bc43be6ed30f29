#include "ffc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ffc/io_util.hpp"
#include "ffc/rng.hpp"

namespace ffc {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<WindowPair> extract_windows(const Trajectory& q_d, const Trajectory& u_refined,
                                        int stride, int joint_index, int source_id) {
  if (q_d.values.size() != u_refined.values.size())
    throw std::invalid_argument("extract_windows: trajectory length mismatch");
  if (stride < 1) throw std::invalid_argument("extract_windows: stride must be >= 1");
  const std::size_t n = q_d.values.size();
  std::vector<WindowPair> out;
  if (n < kInputWindow) return out;
  for (std::size_t t = kHalfWindow; t + kHalfWindow <= n; t += static_cast<std::size_t>(stride)) {
    WindowPair wp;
    wp.joint_index = joint_index;
    wp.source_id = source_id;
    wp.t_index = static_cast<int>(t);
    for (std::size_t i = 0; i < kInputWindow; ++i) wp.x[i] = q_d.values[t - kHalfWindow + i];
    for (std::size_t i = 0; i < kOutputWindow; ++i) wp.y[i] = u_refined.values[t + i];
    out.push_back(wp);
  }
  return out;
}

namespace {

void check_split(const SplitFractions& s) {
  if (s.train < 0.0 || s.validation < 0.0 || s.test < 0.0)
    throw std::invalid_argument("split fractions must be non-negative");
  if (std::abs(s.train + s.validation + s.test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
}

// Validation and test get floor(fraction * n); the remainder goes to train.
void partition_counts(std::size_t n, const SplitFractions& s, std::size_t& n_val,
                      std::size_t& n_test) {
  n_val = static_cast<std::size_t>(std::floor(s.validation * static_cast<double>(n)));
  n_test = static_cast<std::size_t>(std::floor(s.test * static_cast<double>(n)));
  if (n_val + n_test > n) throw std::logic_error("partition_counts overflow");
}

}  // namespace

Dataset build_dataset(const std::vector<std::vector<TrajectoryPair>>& pairs_per_joint,
                      int stride, std::uint64_t seed, const SplitFractions& split,
                      bool split_by_trajectory) {
  check_split(split);
  Dataset ds;
  ds.stride = stride;
  ds.seed = seed;
  ds.split_by_trajectory = split_by_trajectory;
  for (std::size_t j = 0; j < pairs_per_joint.size(); ++j) {
    JointDataset jd;
    jd.joint_index = static_cast<int>(j);
    const auto& sources = pairs_per_joint[j];
    std::vector<std::size_t> first_pair_of_source;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      first_pair_of_source.push_back(jd.pairs.size());
      auto w = extract_windows(sources[s].first, sources[s].second, stride,
                               static_cast<int>(j), static_cast<int>(s));
      jd.pairs.insert(jd.pairs.end(), w.begin(), w.end());
    }
    first_pair_of_source.push_back(jd.pairs.size());

    // Joint index enters the stream so per-joint shuffles are decorrelated.
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (j + 1)));
    if (split_by_trajectory) {
      std::vector<std::size_t> order(sources.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      std::size_t n_val = 0, n_test = 0;
      partition_counts(order.size(), split, n_val, n_test);
      const std::size_t n_train = order.size() - n_val - n_test;
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t s = order[k];
        auto& dest = (k < n_train) ? jd.train_idx
                   : (k < n_train + n_val) ? jd.val_idx
                                           : jd.test_idx;
        for (std::size_t p = first_pair_of_source[s]; p < first_pair_of_source[s + 1]; ++p)
          dest.push_back(p);
      }
    } else {
      std::vector<std::size_t> order(jd.pairs.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      std::size_t n_val = 0, n_test = 0;
      partition_counts(order.size(), split, n_val, n_test);
      const std::size_t n_train = order.size() - n_val - n_test;
      jd.train_idx.assign(order.begin(), order.begin() + n_train);
      jd.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
      jd.test_idx.assign(order.begin() + n_train + n_val, order.end());
    }
    std::sort(jd.train_idx.begin(), jd.train_idx.end());
    std::sort(jd.val_idx.begin(), jd.val_idx.end());
    std::sort(jd.test_idx.begin(), jd.test_idx.end());
    ds.joints.push_back(std::move(jd));
  }
  compute_normalization(ds);
  return ds;
}

void compute_normalization(Dataset& ds) {
  for (auto& jd : ds.joints) {
    // One affine map per joint, pooled over train inputs and targets, so that
    // network outputs denormalize with the same constants as its inputs.
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t idx : jd.train_idx) {
      const auto& wp = jd.pairs[idx];
      for (double v : wp.x) sum += v;
      for (double v : wp.y) sum += v;
      count += kInputWindow + kOutputWindow;
    }
    if (count == 0) {
      jd.norm_shift = 0.0;
      jd.norm_scale = 1.0;
      jd.norm_degenerate = true;
      continue;
    }
    jd.norm_shift = sum / static_cast<double>(count);
    double max_dev = 0.0;
    for (std::size_t idx : jd.train_idx) {
      const auto& wp = jd.pairs[idx];
      for (double v : wp.x) max_dev = std::max(max_dev, std::abs(v - jd.norm_shift));
      for (double v : wp.y) max_dev = std::max(max_dev, std::abs(v - jd.norm_shift));
    }
    jd.norm_degenerate = max_dev == 0.0;
    jd.norm_scale = jd.norm_degenerate ? 1.0 : max_dev;
  }
}

namespace {

json idx_to_json(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (auto i : v) a.push_back(i);
  return a;
}

std::vector<std::size_t> idx_from_json(const json& a) {
  std::vector<std::size_t> v;
  for (const auto& e : a) v.push_back(e.get<std::size_t>());
  return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["format_version"] = 1;
  manifest["stride"] = ds.stride;
  manifest["seed"] = ds.seed;
  manifest["split_by_trajectory"] = ds.split_by_trajectory;
  manifest["input_window"] = kInputWindow;
  manifest["output_window"] = kOutputWindow;
  json joints = json::array();
  for (const auto& jd : ds.joints) {
    const std::string file = "joint_" + std::to_string(jd.joint_index) + ".bin";
    std::ofstream os(fs::path(dir) / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write dataset block: " + file);
    json src = json::array(), tix = json::array();
    for (const auto& wp : jd.pairs) {
      for (double v : wp.x) write_f64_le(os, v);
      for (double v : wp.y) write_f64_le(os, v);
      src.push_back(wp.source_id);
      tix.push_back(wp.t_index);
    }
    os.close();
    if (!os) throw std::runtime_error("write failed for dataset block: " + file);
    json jj;
    jj["joint_index"] = jd.joint_index;
    jj["file"] = file;
    jj["count"] = jd.pairs.size();
    jj["source_ids"] = std::move(src);
    jj["t_indices"] = std::move(tix);
    jj["train_idx"] = idx_to_json(jd.train_idx);
    jj["val_idx"] = idx_to_json(jd.val_idx);
    jj["test_idx"] = idx_to_json(jd.test_idx);
    jj["norm_shift"] = jd.norm_shift;
    jj["norm_scale"] = jd.norm_scale;
    jj["norm_degenerate"] = jd.norm_degenerate;
    joints.push_back(std::move(jj));
  }
  manifest["joints"] = std::move(joints);
  std::ofstream ms(fs::path(dir) / "manifest.json");
  if (!ms) throw std::runtime_error("cannot write dataset manifest");
  ms << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream ms(fs::path(dir) / "manifest.json");
  if (!ms) throw std::runtime_error("cannot open dataset manifest in " + dir);
  json manifest = json::parse(ms);
  if (manifest.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported dataset format version");
  if (manifest.at("input_window").get<std::size_t>() != kInputWindow ||
      manifest.at("output_window").get<std::size_t>() != kOutputWindow)
    throw std::runtime_error("dataset window geometry mismatch");
  Dataset ds;
  ds.stride = manifest.at("stride").get<int>();
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  ds.split_by_trajectory = manifest.at("split_by_trajectory").get<bool>();
  for (const auto& jj : manifest.at("joints")) {
    JointDataset jd;
    jd.joint_index = jj.at("joint_index").get<int>();
    jd.norm_shift = jj.at("norm_shift").get<double>();
    jd.norm_scale = jj.at("norm_scale").get<double>();
    jd.norm_degenerate = jj.at("norm_degenerate").get<bool>();
    jd.train_idx = idx_from_json(jj.at("train_idx"));
    jd.val_idx = idx_from_json(jj.at("val_idx"));
    jd.test_idx = idx_from_json(jj.at("test_idx"));
    const auto count = jj.at("count").get<std::size_t>();
    const auto& src = jj.at("source_ids");
    const auto& tix = jj.at("t_indices");
    std::ifstream is(fs::path(dir) / jj.at("file").get<std::string>(), std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset block for joint " +
                                      std::to_string(jd.joint_index));
    jd.pairs.resize(count);
    for (std::size_t p = 0; p < count; ++p) {
      auto& wp = jd.pairs[p];
      for (auto& v : wp.x) v = read_f64_le(is);
      for (auto& v : wp.y) v = read_f64_le(is);
      wp.joint_index = jd.joint_index;
      wp.source_id = src.at(p).get<int>();
      wp.t_index = tix.at(p).get<int>();
    }
    char extra;
    if (is.read(&extra, 1)) throw std::runtime_error("dataset block longer than manifest count");
    ds.joints.push_back(std::move(jd));
  }
  return ds;
}

}  // namespace ffc
