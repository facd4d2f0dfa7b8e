#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

#include "ontolab/errors.hpp"

namespace ontolab {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Vec3d = Vec3<double>;

inline constexpr double kPi = 3.14159265358979323846;

// One-parameter family of two-qubit pure states
//   |psi> = sin(theta/2)|00> + cos(theta/2)|11>,  theta in [0, pi/2].
// theta = 0 is the product state |11>; theta = pi/2 is maximally
// entangled.  Convention: sigma_z|1> = +|1>, sigma_z|0> = -|0>.
class EntangledState {
 public:
  explicit EntangledState(double theta);
  double theta() const { return theta_; }

 private:
  double theta_;
};

// In-plane spin measurement axis: angle alpha from the z axis inside the
// Bloch x-z plane (the plane orthogonal to the pair's propagation axis).
// Induced unit vector (sin alpha, 0, cos alpha); alpha is normalized to
// [0, 2pi).
class MeasurementDirection {
 public:
  explicit MeasurementDirection(double alpha);
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

template <typename Scalar>
Vec3<Scalar> direction_vector(Scalar alpha) {
  using std::cos;
  using std::sin;
  return Vec3<Scalar>(sin(alpha), Scalar(0), cos(alpha));
}

// Closed forms for the state family, validated against the brute-force
// density-matrix route below:
//   <A(a)>     = cos(alpha) cos(theta)
//   <A(a)B(b)> = cos(alpha) cos(beta) + sin(theta) sin(alpha) sin(beta)
template <typename Scalar>
Scalar expectation_value(Scalar theta, Scalar alpha) {
  using std::cos;
  return cos(alpha) * cos(theta);
}

template <typename Scalar>
Scalar correlation_value(Scalar theta, Scalar alpha, Scalar beta) {
  using std::cos;
  using std::sin;
  return cos(alpha) * cos(beta) + sin(theta) * sin(alpha) * sin(beta);
}

// Joint +-1 outcome statistics of one measurement pair.  Probabilities
// are stored for the four sign combinations and kept consistent with the
// single-wing expectations and the correlation.
class JointStats {
 public:
  // Builds the joint table (1 + x<A> + y<B> + xy<AB>)/4.  Entries below
  // -1e-9 raise consistency_error; tiny negatives are clamped to zero.
  JointStats(double expectation_a, double expectation_b, double correlation);

  // Builds directly from four probabilities ordered (+,+), (+,-), (-,+),
  // (-,-); expectations are derived from the table.
  static JointStats from_joint(const std::array<double, 4>& probs);

  double expectation_a() const { return ea_; }
  double expectation_b() const { return eb_; }
  double correlation() const { return corr_; }

  double joint(int x, int y) const;      // x, y in {+1, -1}
  double marginal_a(int x) const;        // P(X_a = x)
  double marginal_b(int y) const;        // P(X_b = y)

 private:
  JointStats() = default;
  double ea_ = 0, eb_ = 0, corr_ = 0;
  std::array<double, 4> joint_{};  // (+,+), (+,-), (-,+), (-,-)
};

double expectation_A(const EntangledState& state,
                     const MeasurementDirection& a);
double expectation_B(const EntangledState& state,
                     const MeasurementDirection& b);
double correlation(const EntangledState& state, const MeasurementDirection& a,
                   const MeasurementDirection& b);
JointStats joint_stats(const EntangledState& state,
                       const MeasurementDirection& a,
                       const MeasurementDirection& b);

// P(X_b = y | X_a = given_x).  Raises conditional_error when the
// conditioning marginal vanishes.
double conditional_probability(const EntangledState& state,
                               const MeasurementDirection& a,
                               const MeasurementDirection& b, int given_x,
                               int y);

// Independent brute-force validator: builds the 4-component state vector
// and the 4x4 projectors onto the +-1 eigenspaces of (a.sigma) x I and
// I x (b.sigma), then reads the joint table off projector expectations.
// No closed-form shortcuts; everything here is real arithmetic because
// the state family and in-plane observables have real matrix elements.
JointStats density_matrix_oracle(const EntangledState& state,
                                 const MeasurementDirection& a,
                                 const MeasurementDirection& b);

}  // namespace ontolab
