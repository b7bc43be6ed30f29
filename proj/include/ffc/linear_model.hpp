#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace ffc {

// Continuous third-order model of the closed inner loop for one joint:
// an underdamped second-order stage behind a first-order low pass,
//
//   G(s) = a/(s+a) * omega^2/(s^2 + 2*zeta*omega*s + omega^2),
//
// which has unit DC gain by construction.
struct LinearModel {
  double a = 25.0;      // low-pass corner [rad/s]
  double zeta = 0.5;    // damping ratio, underdamped: 0 < zeta < 1
  double omega = 15.0;  // natural frequency [rad/s]
  double dt = 0.004;    // sampling period [s]

  void validate() const;
};

// Discrete state-space (A, B, C), D = 0, obtained by exact zero-order-hold
// discretization over dt.
struct StateSpace {
  Eigen::Matrix3d A;
  Eigen::Vector3d B;
  Eigen::RowVector3d C;
  double dt = 0.004;

  // State holding output == input == `hold` under constant input.
  Eigen::Vector3d equilibrium(double hold) const;
};

StateSpace discretize(const LinearModel& model);

// y[k] = C x[k];  x[k+1] = A x[k] + B u[k].
std::vector<double> simulate(const StateSpace& ss, const std::vector<double>& u,
                             Eigen::Vector3d x0 = Eigen::Vector3d::Zero());

// g[k]: response at sample k to a unit input at sample 0 (g[0] = 0).
std::vector<double> impulse_response(const StateSpace& ss, std::size_t n);

}  // namespace ffc
