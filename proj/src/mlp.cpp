#include "ffc/mlp.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ffc/io_util.hpp"

namespace ffc {

MlpModel make_mlp(const std::vector<int>& dims, double l2_lambda, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("make_mlp: layer sizes must be positive");
  if (!(l2_lambda >= 0.0)) throw std::invalid_argument("make_mlp: l2_lambda must be >= 0");
  MlpModel m;
  m.dims = dims;
  m.l2_lambda = l2_lambda;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    Eigen::MatrixXd W(fan_out, fan_in);
    // Row-major fill order keeps init reproducible independent of Eigen's
    // internal storage.
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) W(r, c) = rng.uniform(-limit, limit);
    m.W.push_back(std::move(W));
    m.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return m;
}

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = X, acts[l+1] = activation after layer l
};

Eigen::MatrixXd forward_cached(const MlpModel& m, const Eigen::MatrixXd& X, ForwardCache* cache) {
  if (X.rows() != m.input_size())
    throw std::invalid_argument("forward: input row count does not match model");
  Eigen::MatrixXd a = X;
  if (cache) cache->acts.push_back(a);
  const int L = m.layer_count();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = (m.W[l] * a).colwise() + m.b[l];
    if (l + 1 < L) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (cache) cache->acts.push_back(a);
  }
  return a;
}

double weight_penalty(const MlpModel& m) {
  double s = 0.0;
  for (const auto& W : m.W) s += W.squaredNorm();
  return m.l2_lambda * s;
}

}  // namespace

Eigen::MatrixXd forward(const MlpModel& m, const Eigen::MatrixXd& X) {
  return forward_cached(m, X, nullptr);
}

double mse_value(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.cols() != Y.cols() || Y.rows() != m.output_size())
    throw std::invalid_argument("mse_value: shape mismatch");
  if (X.cols() == 0) return 0.0;
  const Eigen::MatrixXd pred = forward(m, X);
  return (pred - Y).squaredNorm() / static_cast<double>(Y.size());
}

double loss_value(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  return mse_value(m, X, Y) + weight_penalty(m);
}

double loss_and_grad(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     Gradients& grads) {
  if (X.cols() != Y.cols() || Y.rows() != m.output_size() || X.cols() == 0)
    throw std::invalid_argument("loss_and_grad: shape mismatch or empty batch");
  const int L = m.layer_count();
  ForwardCache cache;
  const Eigen::MatrixXd pred = forward_cached(m, X, &cache);

  const double n = static_cast<double>(Y.size());
  const double mse = (pred - Y).squaredNorm() / n;

  grads.dW.assign(L, Eigen::MatrixXd());
  grads.db.assign(L, Eigen::VectorXd());
  Eigen::MatrixXd delta = (2.0 / n) * (pred - Y);
  for (int l = L - 1; l >= 0; --l) {
    grads.dW[l] = delta * cache.acts[l].transpose() + 2.0 * m.l2_lambda * m.W[l];
    grads.db[l] = delta.rowwise().sum();
    if (l > 0) {
      // ReLU mask: the cached activation is already max(z, 0), so positive
      // entries mark where the gradient passes.
      delta = (m.W[l].transpose() * delta).array() *
              (cache.acts[l].array() > 0.0).cast<double>();
    }
  }
  return mse + weight_penalty(m);
}

AdamState make_adam_state(const MlpModel& m) {
  AdamState st;
  for (int l = 0; l < m.layer_count(); ++l) {
    st.mW.push_back(Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols()));
    st.vW.push_back(Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols()));
    st.mb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
    st.vb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
  }
  return st;
}

void adam_step(MlpModel& m, AdamState& st, const Gradients& grads, const AdamConfig& cfg,
               const std::vector<bool>& freeze_mask) {
  const int L = m.layer_count();
  if (static_cast<int>(grads.dW.size()) != L)
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  if (!freeze_mask.empty() && static_cast<int>(freeze_mask.size()) != L)
    throw std::invalid_argument("adam_step: freeze mask layer count mismatch");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (int l = 0; l < L; ++l) {
    if (!freeze_mask.empty() && freeze_mask[l]) continue;
    st.mW[l] = cfg.beta1 * st.mW[l] + (1.0 - cfg.beta1) * grads.dW[l];
    st.vW[l] = cfg.beta2 * st.vW[l] + (1.0 - cfg.beta2) * grads.dW[l].cwiseProduct(grads.dW[l]);
    st.mb[l] = cfg.beta1 * st.mb[l] + (1.0 - cfg.beta1) * grads.db[l];
    st.vb[l] = cfg.beta2 * st.vb[l] + (1.0 - cfg.beta2) * grads.db[l].cwiseProduct(grads.db[l]);
    m.W[l].array() -=
        cfg.lr * (st.mW[l].array() / bc1) / ((st.vW[l].array() / bc2).sqrt() + cfg.eps);
    m.b[l].array() -=
        cfg.lr * (st.mb[l].array() / bc1) / ((st.vb[l].array() / bc2).sqrt() + cfg.eps);
  }
}

TrainResult train(MlpModel& m, const Eigen::MatrixXd& Xtr, const Eigen::MatrixXd& Ytr,
                  const Eigen::MatrixXd& Xval, const Eigen::MatrixXd& Yval,
                  const TrainConfig& cfg) {
  if (cfg.max_epochs < 1 || cfg.batch_size < 1 || cfg.patience < 1)
    throw std::invalid_argument("train: epochs, batch size and patience must be positive");
  if (Xtr.cols() == 0) throw std::invalid_argument("train: empty training set");
  const bool have_val = Xval.cols() > 0;

  Rng rng(cfg.seed);
  const Eigen::Index ntr = Xtr.cols();
  std::vector<std::size_t> order(static_cast<std::size_t>(ntr));
  std::iota(order.begin(), order.end(), std::size_t{0});

  AdamState st = make_adam_state(m);
  Gradients grads;
  TrainResult res;
  res.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> bestW = m.W;
  std::vector<Eigen::VectorXd> bestb = m.b;
  int stale = 0;

  Eigen::MatrixXd Xb, Yb;
  AdamConfig adam = cfg.adam;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < ntr; start += cfg.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, ntr - start);
      Xb.resize(Xtr.rows(), bs);
      Yb.resize(Ytr.rows(), bs);
      for (Eigen::Index i = 0; i < bs; ++i) {
        const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(start + i)]);
        Xb.col(i) = Xtr.col(src);
        Yb.col(i) = Ytr.col(src);
      }
      const double batch_loss = loss_and_grad(m, Xb, Yb, grads);
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batches));
      epoch_loss += batch_loss;
      adam_step(m, st, grads, adam, cfg.freeze_mask);
      ++batches;
    }
    adam.lr *= cfg.lr_decay;
    res.train_loss.push_back(epoch_loss / batches);
    res.epochs_run = epoch + 1;

    const double val = have_val ? mse_value(m, Xval, Yval) : res.train_loss.back();
    res.val_loss.push_back(val);
    if (val < res.best_val_loss - cfg.min_delta) {
      res.best_val_loss = val;
      res.best_epoch = epoch;
      bestW = m.W;
      bestb = m.b;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      res.early_stopped = true;
      break;
    }
  }
  m.W = std::move(bestW);
  m.b = std::move(bestb);
  return res;
}

TrainResult retrain_output_layer(MlpModel& m, const Eigen::MatrixXd& Xtr,
                                 const Eigen::MatrixXd& Ytr, const Eigen::MatrixXd& Xval,
                                 const Eigen::MatrixXd& Yval, TrainConfig cfg) {
  cfg.freeze_mask.assign(static_cast<std::size_t>(m.layer_count()), true);
  cfg.freeze_mask.back() = false;
  return train(m, Xtr, Ytr, Xval, Yval, cfg);
}

namespace {
constexpr char kMagic[8] = {'F', 'F', 'C', 'M', 'L', 'P', '0', '1'};
}

void save_model(const MlpModel& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write model file: " + path);
  os.write(kMagic, sizeof kMagic);
  write_u32_le(os, 1);  // version
  write_u32_le(os, static_cast<std::uint32_t>(m.dims.size()));
  for (int d : m.dims) write_u32_le(os, static_cast<std::uint32_t>(d));
  write_u32_le(os, static_cast<std::uint32_t>(m.joint_index));
  write_f64_le(os, m.l2_lambda);
  write_f64_le(os, m.norm_shift);
  write_f64_le(os, m.norm_scale);
  for (int l = 0; l < m.layer_count(); ++l) {
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) write_f64_le(os, m.W[l](r, c));
    for (Eigen::Index r = 0; r < m.b[l].size(); ++r) write_f64_le(os, m.b[l](r));
  }
  os.close();
  if (!os) throw std::runtime_error("write failed for model file: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file: " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("not a model file: " + path);
  if (read_u32_le(is) != 1) throw std::runtime_error("unsupported model version");
  const auto ndims = read_u32_le(is);
  if (ndims < 2 || ndims > 64) throw std::runtime_error("model dims out of range");
  MlpModel m;
  for (std::uint32_t i = 0; i < ndims; ++i)
    m.dims.push_back(static_cast<int>(read_u32_le(is)));
  m.joint_index = static_cast<int>(read_u32_le(is));
  m.l2_lambda = read_f64_le(is);
  m.norm_shift = read_f64_le(is);
  m.norm_scale = read_f64_le(is);
  for (std::uint32_t l = 0; l + 1 < ndims; ++l) {
    Eigen::MatrixXd W(m.dims[l + 1], m.dims[l]);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = read_f64_le(is);
    Eigen::VectorXd b(m.dims[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = read_f64_le(is);
    m.W.push_back(std::move(W));
    m.b.push_back(std::move(b));
  }
  char extra;
  if (is.read(&extra, 1)) throw std::runtime_error("model file has trailing bytes");
  return m;
}

void dataset_matrices(const JointDataset& jd, const std::vector<std::size_t>& idx,
                      Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
  X.resize(kInputWindow, static_cast<Eigen::Index>(idx.size()));
  Y.resize(kOutputWindow, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& wp = jd.pairs.at(idx[k]);
    for (std::size_t i = 0; i < kInputWindow; ++i)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          normalize_value(wp.x[i], jd.norm_shift, jd.norm_scale);
    for (std::size_t i = 0; i < kOutputWindow; ++i)
      Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          normalize_value(wp.y[i], jd.norm_shift, jd.norm_scale);
  }
}

}  // namespace ffc
