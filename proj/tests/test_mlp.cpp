#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "ffc/mlp.hpp"
#include "oracles.hpp"

using namespace ffc;
namespace fs = std::filesystem;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double s = 1.0) {
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = rng.uniform(-s, s);
  return M;
}

struct TempFile {
  fs::path path;
  TempFile() {
    path = fs::temp_directory_path() /
           ("ffc_mlp_" + std::to_string(Rng(std::random_device{}()).next_u64()) + ".bin");
  }
  ~TempFile() { fs::remove(path); }
};

// Collect every parameter reference for finite differencing.
std::vector<double*> parameter_refs(MlpModel& m) {
  std::vector<double*> refs;
  for (int l = 0; l < m.layer_count(); ++l) {
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) refs.push_back(&m.W[l](r, c));
    for (Eigen::Index r = 0; r < m.b[l].size(); ++r) refs.push_back(&m.b[l](r));
  }
  return refs;
}

std::vector<double> flatten_grads(const Gradients& g) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < g.dW.size(); ++l) {
    for (Eigen::Index r = 0; r < g.dW[l].rows(); ++r)
      for (Eigen::Index c = 0; c < g.dW[l].cols(); ++c) flat.push_back(g.dW[l](r, c));
    for (Eigen::Index r = 0; r < g.db[l].size(); ++r) flat.push_back(g.db[l](r));
  }
  return flat;
}

}  // namespace

TEST_CASE("make_mlp validates and draws He-uniform weights") {
  Rng rng(1);
  CHECK_THROWS_AS(make_mlp({5}, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_mlp({5, 0, 2}, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_mlp({5, 3}, -1.0, rng), std::invalid_argument);

  const MlpModel m = make_mlp({8, 16, 4}, 1e-4, rng);
  REQUIRE(m.layer_count() == 2);
  CHECK(m.W[0].rows() == 16);
  CHECK(m.W[0].cols() == 8);
  CHECK(m.W[1].rows() == 4);
  CHECK(m.W[1].cols() == 16);
  for (int l = 0; l < 2; ++l) {
    const double limit = std::sqrt(6.0 / m.W[l].cols());
    CHECK(m.W[l].cwiseAbs().maxCoeff() <= limit);
    CHECK(m.b[l].cwiseAbs().maxCoeff() == 0.0);
  }
  // Same seed reproduces the same init.
  Rng r1(77), r2(77);
  const MlpModel a = make_mlp({6, 5, 3}, 0.0, r1);
  const MlpModel b = make_mlp({6, 5, 3}, 0.0, r2);
  for (int l = 0; l < 2; ++l) CHECK(a.W[l] == b.W[l]);
}

TEST_CASE("forward pass matches a scalar-loop evaluation") {
  Rng rng(5);
  const MlpModel m = make_mlp({7, 11, 9, 4}, 0.0, rng);
  const Eigen::MatrixXd X = random_matrix(7, 6, rng, 2.0);
  const Eigen::MatrixXd Y = forward(m, X);
  REQUIRE(Y.rows() == 4);
  REQUIRE(Y.cols() == 6);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    std::vector<double> x(7);
    for (Eigen::Index r = 0; r < 7; ++r) x[size_t(r)] = X(r, c);
    const std::vector<double> want = oracles::naive_mlp_forward(m, x);
    for (Eigen::Index r = 0; r < 4; ++r)
      CHECK(Y(r, c) == doctest::Approx(want[size_t(r)]).epsilon(1e-13));
  }
  Eigen::MatrixXd wrong = random_matrix(6, 3, rng);
  CHECK_THROWS_AS(forward(m, wrong), std::invalid_argument);
}

TEST_CASE("loss decomposes into MSE plus the weight penalty") {
  MlpModel m;
  m.dims = {1, 1};
  m.W.push_back(Eigen::MatrixXd::Constant(1, 1, 2.0));
  m.b.push_back(Eigen::VectorXd::Constant(1, 0.5));
  m.l2_lambda = 0.1;
  Eigen::MatrixXd X(1, 1), Y(1, 1);
  X << 1.0;
  Y << 3.0;
  // pred = 2*1 + 0.5 = 2.5; mse = 0.25; penalty = 0.1 * 4 = 0.4.
  CHECK(mse_value(m, X, Y) == doctest::Approx(0.25));
  CHECK(loss_value(m, X, Y) == doctest::Approx(0.65));
  Gradients g;
  CHECK(loss_and_grad(m, X, Y, g) == doctest::Approx(0.65));
  // d/dW [ (Wx+b-y)^2 + l2 W^2 ] = 2*(-0.5)*1 + 2*0.1*2 = -0.6; d/db = -1.
  CHECK(g.dW[0](0, 0) == doctest::Approx(-0.6));
  CHECK(g.db[0](0) == doctest::Approx(-1.0));

  const Eigen::MatrixXd empty(1, 0);
  CHECK(mse_value(m, empty, empty) == 0.0);
  CHECK_THROWS_AS(loss_and_grad(m, empty, empty, g), std::invalid_argument);
}

namespace {

// Smallest hidden pre-activation magnitude over the batch. The loss is
// piecewise quadratic in any one parameter, so a central difference is exact
// as long as the step never flips a ReLU; batches too close to a kink are
// redrawn instead of tolerated.
double min_preactivation(const MlpModel& m, const Eigen::MatrixXd& X) {
  double lo = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd a = X;
  for (int l = 0; l + 1 < m.layer_count(); ++l) {
    const Eigen::MatrixXd z = (m.W[l] * a).colwise() + m.b[l];
    lo = std::min(lo, z.cwiseAbs().minCoeff());
    a = z.cwiseMax(0.0);
  }
  return lo;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    MlpModel m = make_mlp({5, 8, 7, 3}, 1e-4, rng);

    Eigen::MatrixXd X;
    do {
      X = random_matrix(5, 3, rng, 1.5);
    } while (min_preactivation(m, X) < 1e-3);
    // Targets near the model's own outputs keep the loss small, which keeps
    // the rounding noise of f(θ+h) - f(θ-h) far below the gradients.
    const Eigen::MatrixXd Y = forward(m, X) + random_matrix(3, 3, rng, 0.05);

    Gradients g;
    loss_and_grad(m, X, Y, g);
    const std::vector<double> analytic = flatten_grads(g);
    const std::vector<double*> refs = parameter_refs(m);
    REQUIRE(analytic.size() == refs.size());

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t p = 0; p < refs.size(); ++p) {
      const double saved = *refs[p];
      *refs[p] = saved + h;
      const double fp = loss_value(m, X, Y);
      *refs[p] = saved - h;
      const double fm = loss_value(m, X, Y);
      *refs[p] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double tol = 1e-8 + 1e-6 * std::max(std::abs(numeric), std::abs(analytic[p]));
      worst = std::max(worst, std::abs(numeric - analytic[p]) / tol);
    }
    CHECK(worst < 1.0);  // every parameter within 1e-6 relative (1e-8 floor)
  }
}

TEST_CASE("regularizer-only gradient is exactly 2 lambda W") {
  Rng rng(31);
  MlpModel m = make_mlp({4, 6, 2}, 0.05, rng);
  // Zero data loss: targets equal predictions, so only the penalty remains.
  const Eigen::MatrixXd X = random_matrix(4, 3, rng);
  const Eigen::MatrixXd Y = forward(m, X);
  Gradients g;
  const double loss = loss_and_grad(m, X, Y, g);
  CHECK(loss == doctest::Approx(0.05 * (m.W[0].squaredNorm() + m.W[1].squaredNorm())));
  for (int l = 0; l < m.layer_count(); ++l) {
    CHECK((g.dW[l] - 0.1 * m.W[l]).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(g.db[l].cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("one Adam step matches the hand-computed update") {
  MlpModel m;
  m.dims = {1, 1};
  m.W.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0));
  m.b.push_back(Eigen::VectorXd::Constant(1, -2.0));
  AdamState st = make_adam_state(m);
  Gradients g;
  g.dW.push_back(Eigen::MatrixXd::Constant(1, 1, 0.3));
  g.db.push_back(Eigen::VectorXd::Constant(1, -0.7));
  AdamConfig cfg;

  adam_step(m, st, g, cfg);
  CHECK(st.step == 1);
  // After bias correction the first step is lr * g / (|g| + eps).
  const double dw = cfg.lr * 0.3 / (0.3 + cfg.eps);
  const double db = cfg.lr * (-0.7) / (0.7 + cfg.eps);
  CHECK(m.W[0](0, 0) == doctest::Approx(1.0 - dw).epsilon(1e-12));
  CHECK(m.b[0](0) == doctest::Approx(-2.0 - db).epsilon(1e-12));

  // A frozen layer is untouched, moments included.
  MlpModel f = m;
  AdamState stf = make_adam_state(f);
  adam_step(f, stf, g, cfg, {true});
  CHECK(f.W[0](0, 0) == m.W[0](0, 0));
  CHECK(stf.mW[0](0, 0) == 0.0);

  Gradients wrong;
  CHECK_THROWS_AS(adam_step(m, st, wrong, cfg), std::invalid_argument);
  CHECK_THROWS_AS(adam_step(m, st, g, cfg, {true, false}), std::invalid_argument);
}

TEST_CASE("training fits a linear map and restores the best weights") {
  Rng rng(21);
  const Eigen::MatrixXd M = random_matrix(3, 6, rng);
  const Eigen::MatrixXd Xtr = random_matrix(6, 400, rng);
  const Eigen::MatrixXd Ytr = M * Xtr;
  const Eigen::MatrixXd Xval = random_matrix(6, 80, rng);
  const Eigen::MatrixXd Yval = M * Xval;

  MlpModel m = make_mlp({6, 24, 3}, 0.0, rng);
  const double before = mse_value(m, Xval, Yval);

  TrainConfig cfg;
  cfg.max_epochs = 60;
  cfg.batch_size = 64;
  cfg.patience = 60;
  cfg.seed = 3;
  const TrainResult res = train(m, Xtr, Ytr, Xval, Yval, cfg);

  REQUIRE(res.epochs_run > 0);
  CHECK(res.val_loss.size() == std::size_t(res.epochs_run));
  CHECK(res.best_val_loss < 0.05 * before);
  CHECK(res.best_val_loss == *std::min_element(res.val_loss.begin(), res.val_loss.end()));
  // The returned weights are the ones that scored best_val_loss.
  CHECK(mse_value(m, Xval, Yval) == res.best_val_loss);
}

TEST_CASE("training is deterministic in the seed") {
  Rng ra(33), rb(33), rc(33);
  MlpModel a = make_mlp({4, 10, 2}, 1e-5, ra);
  MlpModel b = make_mlp({4, 10, 2}, 1e-5, rb);
  MlpModel c = make_mlp({4, 10, 2}, 1e-5, rc);
  Rng rng(4);
  const Eigen::MatrixXd X = random_matrix(4, 120, rng);
  const Eigen::MatrixXd Y = random_matrix(2, 120, rng);

  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.batch_size = 32;
  cfg.patience = 10;
  cfg.seed = 5;
  train(a, X, Y, X, Y, cfg);
  train(b, X, Y, X, Y, cfg);
  cfg.seed = 6;  // different shuffle order
  train(c, X, Y, X, Y, cfg);

  for (int l = 0; l < a.layer_count(); ++l) {
    CHECK(a.W[l] == b.W[l]);
    CHECK(a.b[l] == b.b[l]);
  }
  CHECK(a.W[0] != c.W[0]);
}

TEST_CASE("early stopping fires after patience stale epochs") {
  Rng rng(8);
  MlpModel m = make_mlp({3, 6, 2}, 0.0, rng);
  const Eigen::MatrixXd X = random_matrix(3, 64, rng);
  const Eigen::MatrixXd Y = random_matrix(2, 64, rng);

  TrainConfig cfg;
  cfg.max_epochs = 500;
  cfg.patience = 5;
  cfg.min_delta = 1e9;  // nothing after the first epoch counts as progress
  cfg.seed = 2;
  const TrainResult res = train(m, X, Y, X, Y, cfg);
  CHECK(res.early_stopped);
  CHECK(res.epochs_run == 6);
  CHECK(res.best_epoch == 0);

  CHECK_THROWS_AS(train(m, Eigen::MatrixXd(3, 0), Eigen::MatrixXd(2, 0), X, Y, cfg),
                  std::invalid_argument);
  TrainConfig bad;
  bad.max_epochs = 0;
  CHECK_THROWS_AS(train(m, X, Y, X, Y, bad), std::invalid_argument);
}

TEST_CASE("output-layer retraining leaves hidden layers bit-identical") {
  Rng rng(44);
  MlpModel m = make_mlp({5, 12, 10, 4}, 1e-5, rng);
  const Eigen::MatrixXd X = random_matrix(5, 150, rng);
  const Eigen::MatrixXd Y = random_matrix(4, 150, rng, 0.5);

  const std::vector<Eigen::MatrixXd> W_before = m.W;
  const std::vector<Eigen::VectorXd> b_before = m.b;

  TrainConfig cfg;
  cfg.max_epochs = 15;
  cfg.batch_size = 32;
  cfg.patience = 15;
  const TrainResult res = train(m, X, Y, X, Y, cfg);
  CHECK(res.epochs_run == 15);

  MlpModel r = m;
  retrain_output_layer(r, X, Y, X, Y, cfg);
  for (int l = 0; l + 1 < r.layer_count(); ++l) {
    CHECK(r.W[l] == m.W[l]);
    CHECK(r.b[l] == m.b[l]);
  }
  (void)W_before;
  (void)b_before;
}

TEST_CASE("model files round-trip bit-exactly") {
  Rng rng(66);
  MlpModel m = make_mlp({50, 100, 100, 25}, 1e-4, rng);
  m.joint_index = 2;
  m.norm_shift = -1.25;
  m.norm_scale = 17.5;

  TempFile f;
  save_model(m, f.path.string());
  const MlpModel back = load_model(f.path.string());
  CHECK(back.dims == m.dims);
  CHECK(back.joint_index == 2);
  CHECK(back.l2_lambda == m.l2_lambda);
  CHECK(back.norm_shift == m.norm_shift);
  CHECK(back.norm_scale == m.norm_scale);
  for (int l = 0; l < m.layer_count(); ++l) {
    CHECK(back.W[l] == m.W[l]);
    CHECK(back.b[l] == m.b[l]);
  }

  // Saving the loaded model reproduces the identical byte stream.
  TempFile f2;
  save_model(back, f2.path.string());
  std::ifstream s1(f.path, std::ios::binary), s2(f2.path, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(s1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(s2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
}

TEST_CASE("model loader rejects malformed files") {
  Rng rng(9);
  const MlpModel m = make_mlp({3, 4, 2}, 0.0, rng);
  TempFile f;
  save_model(m, f.path.string());

  SUBCASE("bad magic") {
    std::fstream s(f.path, std::ios::binary | std::ios::in | std::ios::out);
    s.put('X');
    s.close();
    CHECK_THROWS_WITH_AS(load_model(f.path.string()), doctest::Contains("not a model file"),
                         std::runtime_error);
  }
  SUBCASE("unsupported version") {
    std::fstream s(f.path, std::ios::binary | std::ios::in | std::ios::out);
    s.seekp(8);
    s.put(char(9));
    s.close();
    CHECK_THROWS_WITH_AS(load_model(f.path.string()), doctest::Contains("version"),
                         std::runtime_error);
  }
  SUBCASE("trailing bytes") {
    std::ofstream s(f.path, std::ios::binary | std::ios::app);
    s.put('\0');
    s.close();
    CHECK_THROWS_WITH_AS(load_model(f.path.string()), doctest::Contains("trailing"),
                         std::runtime_error);
  }
  SUBCASE("truncated") {
    fs::resize_file(f.path, 40);
    CHECK_THROWS(load_model(f.path.string()));
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_model((f.path.string() + ".nope")),
                         doctest::Contains("cannot open"), std::runtime_error);
  }
}

TEST_CASE("dataset_matrices normalizes with the joint constants") {
  JointDataset jd;
  jd.norm_shift = 2.0;
  jd.norm_scale = 4.0;
  WindowPair wp;
  for (std::size_t i = 0; i < kInputWindow; ++i) wp.x[i] = double(i);
  for (std::size_t i = 0; i < kOutputWindow; ++i) wp.y[i] = 10.0 + double(i);
  jd.pairs.push_back(wp);
  for (auto& v : wp.x) v += 100.0;
  jd.pairs.push_back(wp);

  Eigen::MatrixXd X, Y;
  dataset_matrices(jd, {1, 0}, X, Y);
  REQUIRE(X.rows() == Eigen::Index(kInputWindow));
  REQUIRE(X.cols() == 2);
  CHECK(X(0, 0) == doctest::Approx((100.0 - 2.0) / 4.0));
  CHECK(X(3, 1) == doctest::Approx((3.0 - 2.0) / 4.0));
  CHECK(Y(5, 1) == doctest::Approx((15.0 - 2.0) / 4.0));
}
