#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ffc/compensator.hpp"
#include "ffc/config.hpp"
#include "ffc/ilc.hpp"
#include "ffc/mlp.hpp"
#include "ffc/trajgen.hpp"

namespace ffc {

// Corpus and training knobs for the end-to-end pipeline
// (sample -> ILC-refine -> window -> train).
struct PipelineConfig {
  std::size_t trajectories_per_joint = 24;
  SamplerConfig sampler;
  IlcConfig ilc;
  int dataset_stride = 25;
  SplitFractions split;
  bool split_by_trajectory = true;
  std::vector<int> hidden = {100, 100};
  double l2_lambda = 1e-6;
  TrainConfig train;
  std::uint64_t seed = 1;
};

// Defaults tuned for a single desktop core; quick shrinks the corpus and
// epoch budget for smoke runs.
PipelineConfig default_pipeline_config(bool quick = false);

// Three nominal joints with distinct (a, zeta, omega), shared dt/delay, and
// a rate-dependent gain perturbation for the physical variants. Used when
// no plant config file is given.
PlantConfig default_plant_config();

struct TrainedStack {
  Dataset dataset;
  std::vector<MlpModel> models;       // one per joint
  std::vector<TrainResult> training;  // per joint
};

// Samples a per-joint corpus of desired trajectories, refines each against
// its joint's plant, windows the (desired, refined-input) pairs and trains
// one network per joint. Deterministic in cfg.seed.
TrainedStack build_and_train(const MultiAxisPlant& plant, const PipelineConfig& cfg,
                             std::ostream* log = nullptr);

// ILC-refined (desired, input) pairs for one joint.
std::vector<TrajectoryPair> refined_corpus(const PlantModel& plant,
                                           const std::vector<Trajectory>& desired,
                                           const IlcConfig& ilc);

// The sampling + refinement stage of build_and_train, one corpus per joint.
std::vector<std::vector<TrajectoryPair>> sample_refined_corpus(const MultiAxisPlant& plant,
                                                               const PipelineConfig& cfg,
                                                               std::ostream* log = nullptr);

// Output-layer-only retraining against a physical plant variant. The given
// desired trajectories are refined on `physical`; normalization constants
// stay those of the sim-trained model so the frozen hidden features see the
// same scale. Hidden layers of the result are bit-identical to `model`.
MlpModel transfer_retrain(const MlpModel& model, const PlantModel& physical,
                          const std::vector<Trajectory>& desired, const IlcConfig& ilc,
                          TrainConfig train_cfg, std::ostream* log = nullptr);

// Single-joint tracking rollout; model == nullptr runs uncompensated (u = q_d).
struct Rollout {
  Trajectory u, y;
  ErrorReport error;
};
Rollout rollout_tracking(const PlantModel& plant, const MlpModel* model, const Trajectory& q_d,
                         int transient_samples = 50);

// Held-out evaluation trajectories shared by the generalization studies;
// the joint index varies amplitude/offset/phase away from training draws.
TrajectorySpec eval_chirp_spec(int joint);
TrajectorySpec eval_sinusoid_spec(int joint, double omega);

struct ExperimentOptions {
  std::string plant_config;  // path; empty = default_plant_config()
  std::string out_dir = "runs";
  std::uint64_t seed = 1;
  bool quick = false;   // reduced corpus/epochs
  bool radians = false; // report metrics in radians instead of degrees
};

// One line of the cross-experiment summary schema.
struct SummaryRow {
  std::string experiment;
  int joint = 0;
  std::string metric;
  double uncompensated = 0.0;
  double compensated = 0.0;
  double ratio = 0.0;  // compensated / uncompensated
};

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

using ExperimentFn =
    std::function<std::vector<SummaryRow>(const ExperimentOptions&, std::ostream&)>;

struct ExperimentInfo {
  ExperimentFn run;
  std::string description;
};

// descent, sinusoid_suite, chirp_generalization, trapezoid_corner, transfer,
// cross_plant, architecture_search.
const std::map<std::string, ExperimentInfo>& experiment_registry();

// Runs one registered experiment into <out_dir>/<name>/, writes summary.csv
// there and returns the rows. Unknown names throw with the known list.
std::vector<SummaryRow> run_experiment(const std::string& name, const ExperimentOptions& opts,
                                       std::ostream& log);

// Job runner: executes several experiments concurrently, each logging to
// <out_dir>/<name>/log.txt. A failure is captured per job, not thrown.
struct ExperimentOutcome {
  std::string name;
  std::vector<SummaryRow> rows;
  std::string error;  // empty on success
};
std::vector<ExperimentOutcome> run_experiments(const std::vector<std::string>& names,
                                               const ExperimentOptions& opts);

// Emits a gnuplot overlay script next to each rollout CSV found in rundir
// (files named *_qd.csv with siblings *_u.csv / *_y.csv); scripts reference
// only paths inside rundir. Returns the number of scripts written.
int export_plots(const std::string& rundir, std::ostream& log);

}  // namespace ffc
