#include "ffc/linear_model.hpp"

#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace ffc {

void LinearModel::validate() const {
  if (!std::isfinite(a) || !std::isfinite(zeta) || !std::isfinite(omega) || !std::isfinite(dt))
    throw std::invalid_argument("LinearModel: non-finite parameter");
  if (a <= 0.0) throw std::invalid_argument("LinearModel: a must be > 0");
  if (omega <= 0.0) throw std::invalid_argument("LinearModel: omega must be > 0");
  if (zeta <= 0.0 || zeta >= 1.0)
    throw std::invalid_argument("LinearModel: zeta must be in (0, 1)");
  if (dt <= 0.0) throw std::invalid_argument("LinearModel: dt must be > 0");
}

StateSpace discretize(const LinearModel& model) {
  model.validate();

  // Denominator (s+a)(s^2 + 2*zeta*omega*s + omega^2) in companion form.
  const double c2 = model.a + 2.0 * model.zeta * model.omega;
  const double c1 = model.omega * model.omega + 2.0 * model.zeta * model.omega * model.a;
  const double c0 = model.a * model.omega * model.omega;

  Eigen::Matrix3d Ac;
  Ac << 0, 1, 0,
        0, 0, 1,
        -c0, -c1, -c2;
  Eigen::Vector3d Bc(0, 0, 1);

  // Exact ZOH: exp([Ac Bc; 0 0] * dt) = [Ad Bd; 0 1].
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  M.topLeftCorner<3, 3>() = Ac;
  M.topRightCorner<3, 1>() = Bc;
  const Eigen::Matrix4d E = (M * model.dt).exp();

  StateSpace ss;
  ss.A = E.topLeftCorner<3, 3>();
  ss.B = E.topRightCorner<3, 1>();
  ss.C << c0, 0, 0;  // numerator a*omega^2 = c0, so DC gain is exactly 1
  ss.dt = model.dt;

  const auto eigen_mags = ss.A.eigenvalues().cwiseAbs();
  if (eigen_mags.maxCoeff() >= 1.0)
    throw std::invalid_argument("discretize: unstable discrete dynamics");
  return ss;
}

Eigen::Vector3d StateSpace::equilibrium(double hold) const {
  // x = A x + B u  =>  x = (I - A)^{-1} B u
  const Eigen::Matrix3d M = Eigen::Matrix3d::Identity() - A;
  return M.partialPivLu().solve(B * hold);
}

std::vector<double> simulate(const StateSpace& ss, const std::vector<double>& u,
                             Eigen::Vector3d x0) {
  std::vector<double> y(u.size());
  Eigen::Vector3d x = x0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    y[k] = ss.C * x;
    x = ss.A * x + ss.B * u[k];
  }
  return y;
}

std::vector<double> impulse_response(const StateSpace& ss, std::size_t n) {
  std::vector<double> g(n, 0.0);
  if (n == 0) return g;
  Eigen::Vector3d x = ss.B;
  for (std::size_t k = 1; k < n; ++k) {
    g[k] = ss.C * x;
    x = ss.A * x;
  }
  return g;
}

}  // namespace ffc
