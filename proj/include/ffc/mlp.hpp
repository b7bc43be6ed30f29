#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ffc/dataset.hpp"
#include "ffc/rng.hpp"

namespace ffc {

// Fully connected network, ReLU hidden layers, linear output. Layer l maps
// dims[l] -> dims[l+1]; weights are stored as (out x in) matrices so a batch
// of columns propagates as W * A + b.
struct MlpModel {
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  double l2_lambda = 1e-4;
  double norm_shift = 0.0;
  double norm_scale = 1.0;
  int joint_index = 0;

  int layer_count() const { return static_cast<int>(W.size()); }
  int input_size() const { return dims.front(); }
  int output_size() const { return dims.back(); }
};

// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
MlpModel make_mlp(const std::vector<int>& dims, double l2_lambda, Rng& rng);

// X is (input_size x batch); returns (output_size x batch).
Eigen::MatrixXd forward(const MlpModel& m, const Eigen::MatrixXd& X);

struct Gradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

// Loss = mean squared error over batch * output_size, plus l2_lambda times
// the sum of squared weights (biases excluded). Returns the loss and fills
// the exact gradient of that same scalar.
double loss_and_grad(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     Gradients& grads);
double loss_value(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);
double mse_value(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  std::int64_t step = 0;
};

AdamState make_adam_state(const MlpModel& m);

// theta -= lr * m_hat / (sqrt(v_hat) + eps). Layers with freeze_mask[l] true
// are left untouched, moments included.
void adam_step(MlpModel& m, AdamState& st, const Gradients& grads, const AdamConfig& cfg,
               const std::vector<bool>& freeze_mask = {});

struct TrainConfig {
  int max_epochs = 200;
  int batch_size = 256;
  AdamConfig adam;
  double lr_decay = 1.0;  // multiplies the learning rate once per epoch
  int patience = 20;
  double min_delta = 0.0;
  std::uint64_t seed = 1;
  std::vector<bool> freeze_mask;
};

struct TrainResult {
  std::vector<double> train_loss;  // per-epoch mean minibatch loss
  std::vector<double> val_loss;    // per-epoch validation MSE
  int best_epoch = -1;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
};

// Minibatch Adam with per-epoch reshuffling and early stopping on validation
// MSE; the weights that scored best on validation are restored on return.
TrainResult train(MlpModel& m, const Eigen::MatrixXd& Xtr, const Eigen::MatrixXd& Ytr,
                  const Eigen::MatrixXd& Xval, const Eigen::MatrixXd& Yval,
                  const TrainConfig& cfg);

// Transfer step: freezes every layer except the last and trains on the new
// pairs. Hidden layers come back bit-identical.
TrainResult retrain_output_layer(MlpModel& m, const Eigen::MatrixXd& Xtr,
                                 const Eigen::MatrixXd& Ytr, const Eigen::MatrixXd& Xval,
                                 const Eigen::MatrixXd& Yval, TrainConfig cfg);

void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

// Packs the selected window pairs of one joint into normalized column-major
// batches using that joint's constants.
void dataset_matrices(const JointDataset& jd, const std::vector<std::size_t>& idx,
                      Eigen::MatrixXd& X, Eigen::MatrixXd& Y);

}  // namespace ffc
