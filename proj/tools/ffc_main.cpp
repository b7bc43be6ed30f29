#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffc/compensator.hpp"
#include "ffc/config.hpp"
#include "ffc/csv.hpp"
#include "ffc/dataset.hpp"
#include "ffc/experiments.hpp"
#include "ffc/ilc.hpp"
#include "ffc/metrics.hpp"
#include "ffc/mlp.hpp"
#include "ffc/plant.hpp"
#include "ffc/trajgen.hpp"

namespace fs = std::filesystem;
using namespace ffc;

namespace {

// Joints are numbered from 1 on the command line, matching the [joint.N]
// config sections and the summary CSVs.
std::string model_file(const std::string& dir, std::size_t joint_1based) {
  return (fs::path(dir) / ("joint_" + std::to_string(joint_1based) + ".model.bin")).string();
}

std::vector<MlpModel> load_models_dir(const std::string& dir, std::size_t n_joints) {
  std::vector<MlpModel> models;
  for (std::size_t j = 1; j <= n_joints; ++j) models.push_back(load_model(model_file(dir, j)));
  return models;
}

MultiAxisPlant plant_from_file(const std::string& path) {
  return make_multi_plant(load_plant_config(path));
}

void print_metrics(const std::vector<ErrorReport>& reports) {
  for (std::size_t j = 0; j < reports.size(); ++j)
    std::cout << "joint " << (j + 1) << ": l2 " << format_double(reports[j].l2) << " deg, linf "
              << format_double(reports[j].linf) << " deg (transient "
              << reports[j].transient_samples << " samples)\n";
}

void write_metrics_csv(const std::string& path, const std::vector<ErrorReport>& reports) {
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < reports.size(); ++j)
    rows.push_back({static_cast<double>(j + 1), reports[j].l2, reports[j].linf,
                    static_cast<double>(reports[j].transient_samples)});
  write_table_csv(path, {"joint", "l2", "linf", "transient_samples"}, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learned feedforward compensation for a simulated robot inner loop"};
  app.require_subcommand(1);
  const PipelineConfig defaults = default_pipeline_config(false);

  // gen-traj
  auto* gen = app.add_subcommand("gen-traj", "generate desired trajectories from a spec config");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "trajectory spec config")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output trajectory CSV")->required();
  gen->callback([&] {
    const auto specs = load_trajectory_specs(gen_spec);
    std::vector<Trajectory> chans;
    for (const auto& s : specs) {
      if (s.dt != specs[0].dt) throw std::runtime_error("gen-traj: channels must share dt");
      chans.push_back(generate(s));
    }
    write_trajectory_csv(gen_out, MultiTrajectory::from_channels(specs[0].dt, chans));
    std::cout << "wrote " << gen_out << " (" << specs.size() << " channel(s))\n";
  });

  // ilc
  auto* ilc = app.add_subcommand("ilc", "refine a command input for one desired trajectory");
  std::string ilc_plant, ilc_target, ilc_out, ilc_grad = "modelfree";
  int ilc_iters = 20, ilc_save_every = 0;
  double ilc_target_error = 0.0, ilc_alpha = 1.0;
  ilc->add_option("--plant", ilc_plant, "plant config")->required()->check(CLI::ExistingFile);
  ilc->add_option("--target", ilc_target, "desired trajectory CSV")->required()->check(CLI::ExistingFile);
  ilc->add_option("--iters", ilc_iters, "iteration budget");
  ilc->add_option("--gradient", ilc_grad, "gradient source")
      ->check(CLI::IsMember({"modelfree", "lifted"}));
  ilc->add_option("--target-error", ilc_target_error, "stop at this l2 error [deg]");
  ilc->add_option("--alpha-init", ilc_alpha, "line search starting step");
  ilc->add_option("--save-every", ilc_save_every,
                  "also write every k-th intermediate input (0 = first/final only)");
  ilc->add_option("--out", ilc_out, "run directory")->required();
  ilc->callback([&] {
    const MultiAxisPlant plant = plant_from_file(ilc_plant);
    const MultiTrajectory qd = read_trajectory_csv(ilc_target);
    IlcConfig cfg;
    cfg.max_iters = ilc_iters;
    cfg.target_error = ilc_target_error;
    cfg.line_search.alpha_init = ilc_alpha;
    cfg.gradient_source =
        ilc_grad == "lifted" ? GradientSource::AnalyticLifted : GradientSource::ModelFree;
    const auto runs = refine_multi(plant, qd, cfg);

    fs::create_directories(ilc_out);
    std::size_t iters = 0;
    for (const auto& r : runs) iters = std::max(iters, r.u_history.size());
    const auto write_iter = [&](std::size_t k, const std::string& name) {
      MultiTrajectory uk;
      uk.dt = qd.dt;
      for (const auto& r : runs)
        uk.channels.push_back(r.u_history[std::min(k, r.u_history.size() - 1)].values);
      write_trajectory_csv((fs::path(ilc_out) / name).string(), uk);
    };
    write_iter(0, "u_initial.csv");
    if (ilc_save_every > 0)
      for (std::size_t k = ilc_save_every; k + 1 < iters; k += ilc_save_every) {
        char name[32];
        std::snprintf(name, sizeof name, "u_iter_%05zu.csv", k);
        write_iter(k, name);
      }
    write_iter(iters - 1, "u_refined.csv");
    std::vector<std::string> header{"iter"};
    for (std::size_t j = 1; j <= runs.size(); ++j) header.push_back("j" + std::to_string(j));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < iters; ++k) {
      std::vector<double> rw{static_cast<double>(k)};
      for (const auto& r : runs)
        rw.push_back(r.error_history[std::min(k, r.error_history.size() - 1)]);
      rows.push_back(std::move(rw));
    }
    write_table_csv((fs::path(ilc_out) / "error_history.csv").string(), header, rows);
    for (std::size_t j = 0; j < runs.size(); ++j)
      std::cout << "joint " << (j + 1) << ": l2 " << format_double(runs[j].error_history.front())
                << " -> " << format_double(runs[j].final_error()) << " deg in "
                << runs[j].u_history.size() - 1 << " steps (" << to_string(runs[j].status)
                << ", " << runs[j].plant_evals << " plant runs)\n";
  });

  // build-dataset
  auto* bd = app.add_subcommand("build-dataset",
                                "sample a corpus, ILC-refine it and window it into a dataset");
  std::string bd_plant, bd_out;
  std::size_t bd_ntraj = defaults.trajectories_per_joint;
  std::uint64_t bd_seed = 1;
  int bd_stride = defaults.dataset_stride, bd_iters = defaults.ilc.max_iters;
  bool bd_by_window = false;
  bd->add_option("--plant", bd_plant, "plant config")->required()->check(CLI::ExistingFile);
  bd->add_option("--out", bd_out, "dataset directory")->required();
  bd->add_option("--traj-per-joint", bd_ntraj, "trajectories per joint");
  bd->add_option("--seed", bd_seed, "corpus/split seed");
  bd->add_option("--stride", bd_stride, "window anchor stride");
  bd->add_option("--ilc-iters", bd_iters, "refinement iterations per trajectory");
  bd->add_flag("--split-by-window", bd_by_window,
               "split windows independently instead of by trajectory");
  bd->callback([&] {
    const MultiAxisPlant plant = plant_from_file(bd_plant);
    PipelineConfig pc = default_pipeline_config();
    pc.trajectories_per_joint = bd_ntraj;
    pc.seed = bd_seed;
    pc.dataset_stride = bd_stride;
    pc.ilc.max_iters = bd_iters;
    pc.split_by_trajectory = !bd_by_window;
    const auto corpus = sample_refined_corpus(plant, pc, &std::cout);
    const Dataset ds =
        build_dataset(corpus, pc.dataset_stride, pc.seed, pc.split, pc.split_by_trajectory);
    save_dataset(ds, bd_out);
    for (const auto& jd : ds.joints)
      std::cout << "joint " << (jd.joint_index + 1) << ": " << jd.pairs.size() << " windows ("
                << jd.train_idx.size() << " train / " << jd.val_idx.size() << " val / "
                << jd.test_idx.size() << " test)\n";
    std::cout << "wrote dataset to " << bd_out << "\n";
  });

  // train
  auto* tr = app.add_subcommand("train", "train one joint's network from a dataset directory");
  std::string tr_dataset, tr_out;
  std::size_t tr_joint = 1;
  std::vector<int> tr_hidden = defaults.hidden;
  int tr_epochs = defaults.train.max_epochs, tr_batch = defaults.train.batch_size,
      tr_patience = defaults.train.patience;
  double tr_lr = defaults.train.adam.lr, tr_decay = defaults.train.lr_decay,
         tr_l2 = defaults.l2_lambda;
  std::uint64_t tr_seed = 1;
  tr->add_option("--dataset", tr_dataset, "dataset directory")->required();
  tr->add_option("--joint", tr_joint, "joint number (from 1)");
  tr->add_option("--out", tr_out, "model file")->required();
  tr->add_option("--hidden", tr_hidden, "hidden layer sizes")->delimiter(',');
  tr->add_option("--epochs", tr_epochs, "epoch budget");
  tr->add_option("--batch", tr_batch, "minibatch size");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--lr-decay", tr_decay, "per-epoch learning rate factor");
  tr->add_option("--l2", tr_l2, "weight regularization coefficient");
  tr->add_option("--patience", tr_patience, "early stopping patience [epochs]");
  tr->add_option("--seed", tr_seed, "init/shuffle seed");
  tr->callback([&] {
    const Dataset ds = load_dataset(tr_dataset);
    if (tr_joint < 1 || tr_joint > ds.joints.size())
      throw std::runtime_error("train: dataset has " + std::to_string(ds.joints.size()) +
                               " joint(s)");
    const auto& jd = ds.joints[tr_joint - 1];
    Eigen::MatrixXd Xtr, Ytr, Xval, Yval;
    dataset_matrices(jd, jd.train_idx, Xtr, Ytr);
    dataset_matrices(jd, jd.val_idx, Xval, Yval);
    std::vector<int> dims{static_cast<int>(kInputWindow)};
    for (int h : tr_hidden) dims.push_back(h);
    dims.push_back(static_cast<int>(kOutputWindow));
    Rng rng(tr_seed);
    MlpModel m = make_mlp(dims, tr_l2, rng);
    m.joint_index = jd.joint_index;
    m.norm_shift = jd.norm_shift;
    m.norm_scale = jd.norm_scale;
    TrainConfig tc;
    tc.max_epochs = tr_epochs;
    tc.batch_size = tr_batch;
    tc.adam.lr = tr_lr;
    tc.lr_decay = tr_decay;
    tc.patience = tr_patience;
    tc.seed = tr_seed;
    const TrainResult res = train(m, Xtr, Ytr, Xval, Yval, tc);
    save_model(m, tr_out);
    std::cout << "trained " << res.epochs_run << " epochs, best val mse "
              << format_double(res.best_val_loss) << " (epoch " << (res.best_epoch + 1)
              << "), wrote " << tr_out << "\n";
  });

  // retrain
  auto* rt = app.add_subcommand("retrain",
                                "retrain only the output layer on a physical-plant dataset");
  std::string rt_model, rt_dataset, rt_out;
  std::size_t rt_joint = 0;  // 0 = take the model's own joint
  int rt_epochs = 120;
  double rt_lr = 1e-3;
  std::uint64_t rt_seed = 1;
  rt->add_option("--model", rt_model, "sim-trained model file")->required()->check(CLI::ExistingFile);
  rt->add_option("--dataset", rt_dataset, "dataset directory built on the physical plant")
      ->required();
  rt->add_option("--out", rt_out, "output model file")->required();
  rt->add_option("--joint", rt_joint, "joint number (from 1; default: the model's)");
  rt->add_option("--epochs", rt_epochs, "epoch budget");
  rt->add_option("--lr", rt_lr, "learning rate");
  rt->add_option("--seed", rt_seed, "shuffle seed");
  rt->callback([&] {
    MlpModel m = load_model(rt_model);
    const Dataset ds = load_dataset(rt_dataset);
    const std::size_t j = rt_joint == 0 ? static_cast<std::size_t>(m.joint_index) : rt_joint - 1;
    if (j >= ds.joints.size())
      throw std::runtime_error("retrain: dataset has " + std::to_string(ds.joints.size()) +
                               " joint(s)");
    JointDataset jd = ds.joints[j];
    // Keep the sim-trained scale: the frozen hidden layers expect it.
    jd.norm_shift = m.norm_shift;
    jd.norm_scale = m.norm_scale;
    Eigen::MatrixXd Xtr, Ytr, Xval, Yval;
    dataset_matrices(jd, jd.train_idx, Xtr, Ytr);
    dataset_matrices(jd, jd.val_idx, Xval, Yval);
    TrainConfig tc;
    tc.max_epochs = rt_epochs;
    tc.adam.lr = rt_lr;
    tc.seed = rt_seed;
    const TrainResult res = retrain_output_layer(m, Xtr, Ytr, Xval, Yval, tc);
    save_model(m, rt_out);
    std::cout << "retrained output layer for " << res.epochs_run << " epochs, best val mse "
              << format_double(res.best_val_loss) << ", wrote " << rt_out << "\n";
  });

  // compensate
  auto* co = app.add_subcommand("compensate", "apply per-joint networks to a desired trajectory");
  std::string co_models, co_traj, co_out;
  int co_stride = static_cast<int>(kOutputWindow);
  co->add_option("--models", co_models, "directory with joint_<n>.model.bin files")->required();
  co->add_option("--traj", co_traj, "desired trajectory CSV")->required()->check(CLI::ExistingFile);
  co->add_option("--out", co_out, "compensated input CSV")->required();
  co->add_option("--stride", co_stride, "anchor stride (< 25 overlaps and averages)");
  co->callback([&] {
    const MultiTrajectory qd = read_trajectory_csv(co_traj);
    const auto models = load_models_dir(co_models, qd.joint_count());
    std::vector<CompensationReport> reps;
    const MultiTrajectory u = compensate_multi(models, qd, &reps, co_stride);
    write_trajectory_csv(co_out, u);
    for (std::size_t j = 0; j < reps.size(); ++j)
      std::cout << "joint " << (j + 1) << ": " << reps[j].nn_invocations << " invocations, "
                << reps[j].head_passthrough << " head + " << reps[j].tail_passthrough
                << " tail samples passed through\n";
  });

  // rollout
  auto* ro = app.add_subcommand("rollout", "drive the plant with a compensated (or raw) input");
  std::string ro_plant, ro_models, ro_traj, ro_out;
  int ro_transient = 50;
  ro->add_option("--plant", ro_plant, "plant config")->required()->check(CLI::ExistingFile);
  ro->add_option("--models", ro_models, "model directory; omit for an uncompensated rollout");
  ro->add_option("--traj", ro_traj, "desired trajectory CSV")->required()->check(CLI::ExistingFile);
  ro->add_option("--out", ro_out, "run directory")->required();
  ro->add_option("--transient", ro_transient, "samples excluded from linf");
  ro->callback([&] {
    const MultiAxisPlant plant = plant_from_file(ro_plant);
    const MultiTrajectory qd = read_trajectory_csv(ro_traj);
    if (qd.joint_count() != plant.joint_count())
      throw std::runtime_error("rollout: trajectory has " + std::to_string(qd.joint_count()) +
                               " channel(s), plant has " + std::to_string(plant.joint_count()));
    MultiTrajectory u;
    std::vector<ErrorReport> errors;
    MultiTrajectory y;
    if (ro_models.empty()) {
      u = qd;
      y = plant.run_multi(u);
      errors = error_metrics_multi(y, qd, ro_transient);
    } else {
      const auto models = load_models_dir(ro_models, qd.joint_count());
      const PipelineEval ev = closed_pipeline_eval(plant, models, qd, ro_transient);
      u = ev.u;
      y = ev.y;
      errors = ev.errors;
    }
    fs::create_directories(ro_out);
    write_trajectory_csv((fs::path(ro_out) / "rollout_qd.csv").string(), qd);
    write_trajectory_csv((fs::path(ro_out) / "rollout_u.csv").string(), u);
    write_trajectory_csv((fs::path(ro_out) / "rollout_y.csv").string(), y);
    MultiTrajectory err;
    err.dt = qd.dt;
    for (std::size_t j = 0; j < qd.joint_count(); ++j)
      err.channels.push_back(subtract(y.channels[j], qd.channels[j]));
    write_trajectory_csv((fs::path(ro_out) / "rollout_err.csv").string(), err);
    write_metrics_csv((fs::path(ro_out) / "metrics.csv").string(), errors);
    print_metrics(errors);
  });

  // eval
  auto* ev = app.add_subcommand("eval", "run registered experiments");
  std::vector<std::string> ev_names;
  std::string ev_config, ev_out = "runs";
  std::uint64_t ev_seed = 1;
  bool ev_quick = false, ev_radians = false, ev_list = false;
  ev->add_option("--experiment", ev_names, "experiment name(s), or 'all'")->delimiter(',');
  ev->add_option("--config", ev_config, "plant config (default: built-in three-joint plant)")
      ->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "output root; each experiment gets a subdirectory");
  ev->add_option("--seed", ev_seed, "pipeline seed");
  ev->add_flag("--quick", ev_quick, "reduced corpus/epochs");
  ev->add_flag("--radians", ev_radians, "report angles in radians");
  ev->add_flag("--list", ev_list, "list registered experiments and exit");
  ev->callback([&] {
    if (ev_list) {
      for (const auto& [name, info] : experiment_registry())
        std::cout << name << ": " << info.description << "\n";
      return;
    }
    if (ev_names.empty()) throw std::runtime_error("eval: --experiment required (or --list)");
    std::vector<std::string> names = ev_names;
    if (names.size() == 1 && names[0] == "all") {
      names.clear();
      for (const auto& [name, info] : experiment_registry()) names.push_back(name);
    }
    ExperimentOptions opts;
    opts.plant_config = ev_config;
    opts.out_dir = ev_out;
    opts.seed = ev_seed;
    opts.quick = ev_quick;
    opts.radians = ev_radians;
    const char* unit_name = ev_radians ? "rad" : "deg";
    if (names.size() == 1) {
      const auto rows = run_experiment(names[0], opts, std::cout);
      for (const auto& r : rows)
        std::cout << r.metric << " joint " << r.joint << ": " << format_double(r.uncompensated)
                  << " -> " << format_double(r.compensated) << " " << unit_name << " (ratio "
                  << format_double(r.ratio) << ")\n";
      return;
    }
    const auto outcomes = run_experiments(names, opts);
    bool failed = false;
    for (const auto& oc : outcomes) {
      if (!oc.error.empty()) {
        std::cout << oc.name << ": FAILED: " << oc.error << "\n";
        failed = true;
        continue;
      }
      std::cout << oc.name << ": " << oc.rows.size() << " summary rows, see "
                << (fs::path(ev_out) / oc.name).string() << "\n";
    }
    if (failed) throw std::runtime_error("one or more experiments failed");
  });

  // step-report
  auto* st = app.add_subcommand("step-report", "step-response metrics for one joint");
  std::string st_plant, st_out;
  std::size_t st_joint = 1;
  std::vector<double> st_amps{1.0, 5.0, 10.0, 20.0};
  double st_horizon = 4.0;
  st->add_option("--plant", st_plant, "plant config")->required()->check(CLI::ExistingFile);
  st->add_option("--joint", st_joint, "joint number (from 1)");
  st->add_option("--amplitudes", st_amps, "step amplitudes [deg]")->delimiter(',');
  st->add_option("--horizon", st_horizon, "simulation horizon [s]");
  st->add_option("--out", st_out, "optional CSV path");
  st->callback([&] {
    const MultiAxisPlant plant = plant_from_file(st_plant);
    if (st_joint < 1 || st_joint > plant.joint_count())
      throw std::runtime_error("step-report: plant has " + std::to_string(plant.joint_count()) +
                               " joint(s)");
    const auto report = step_response_report(plant.joint(st_joint - 1), st_amps, st_horizon);
    std::cout << "amplitude settled peak normalized_peak rise_time settle_time\n";
    std::vector<std::vector<double>> rows;
    for (const auto& m : report) {
      std::cout << format_double(m.amplitude) << " " << format_double(m.settled) << " "
                << format_double(m.peak) << " " << format_double(m.normalized_peak) << " "
                << format_double(m.rise_time) << " " << format_double(m.settle_time)
                << (m.degenerate ? " (degenerate)" : "") << "\n";
      rows.push_back({m.amplitude, m.settled, m.peak, m.normalized_peak, m.rise_time,
                      m.settle_time, m.degenerate ? 1.0 : 0.0});
    }
    if (!st_out.empty())
      write_table_csv(st_out,
                      {"amplitude", "settled", "peak", "normalized_peak", "rise_time",
                       "settle_time", "degenerate"},
                      rows);
  });

  // export-plots
  auto* ep = app.add_subcommand("export-plots", "emit gnuplot scripts for rollout CSVs");
  std::string ep_dir;
  ep->add_option("--rundir", ep_dir, "run directory")->required();
  ep->callback([&] {
    const int n = export_plots(ep_dir, std::cout);
    std::cout << "wrote " << n << " plot script(s)\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
