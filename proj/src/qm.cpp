#include "ontolab/qm.hpp"

#include <cmath>
#include <string>

namespace ontolab {

namespace {

int outcome_index(int x, int y) {
  if ((x != 1 && x != -1) || (y != 1 && y != -1)) {
    throw std::invalid_argument("outcome labels must be +1 or -1");
  }
  return (x > 0 ? 0 : 2) + (y > 0 ? 0 : 1);
}

}  // namespace

EntangledState::EntangledState(double theta) : theta_(theta) {
  if (!std::isfinite(theta) || theta < 0.0 || theta > kPi / 2) {
    throw std::invalid_argument("state angle theta must lie in [0, pi/2]");
  }
}

MeasurementDirection::MeasurementDirection(double alpha) {
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("measurement angle must be finite");
  }
  alpha_ = std::fmod(alpha, 2 * kPi);
  if (alpha_ < 0) alpha_ += 2 * kPi;
}

JointStats::JointStats(double expectation_a, double expectation_b,
                       double correlation)
    : ea_(expectation_a), eb_(expectation_b), corr_(correlation) {
  const int xs[2] = {1, -1};
  for (int x : xs) {
    for (int y : xs) {
      double p = (1.0 + x * ea_ + y * eb_ + x * y * corr_) / 4.0;
      if (p < -1e-9) {
        throw consistency_error("joint probability " + std::to_string(p) +
                                " is materially negative");
      }
      joint_[outcome_index(x, y)] = p < 0.0 ? 0.0 : p;
    }
  }
}

JointStats JointStats::from_joint(const std::array<double, 4>& probs) {
  JointStats s;
  s.joint_ = probs;
  // (+,+), (+,-), (-,+), (-,-)
  s.ea_ = probs[0] + probs[1] - probs[2] - probs[3];
  s.eb_ = probs[0] - probs[1] + probs[2] - probs[3];
  s.corr_ = probs[0] - probs[1] - probs[2] + probs[3];
  return s;
}

double JointStats::joint(int x, int y) const {
  return joint_[outcome_index(x, y)];
}

double JointStats::marginal_a(int x) const {
  return joint(x, 1) + joint(x, -1);
}

double JointStats::marginal_b(int y) const {
  return joint(1, y) + joint(-1, y);
}

double expectation_A(const EntangledState& state,
                     const MeasurementDirection& a) {
  return expectation_value(state.theta(), a.alpha());
}

double expectation_B(const EntangledState& state,
                     const MeasurementDirection& b) {
  // The family's reduced states coincide on the two wings for in-plane
  // axes, so the closed form is shared.
  return expectation_value(state.theta(), b.alpha());
}

double correlation(const EntangledState& state, const MeasurementDirection& a,
                   const MeasurementDirection& b) {
  return correlation_value(state.theta(), a.alpha(), b.alpha());
}

JointStats joint_stats(const EntangledState& state,
                       const MeasurementDirection& a,
                       const MeasurementDirection& b) {
  return JointStats(expectation_A(state, a), expectation_B(state, b),
                    correlation(state, a, b));
}

double conditional_probability(const EntangledState& state,
                               const MeasurementDirection& a,
                               const MeasurementDirection& b, int given_x,
                               int y) {
  JointStats stats = joint_stats(state, a, b);
  double marginal = stats.marginal_a(given_x);
  if (marginal <= 0.0) {
    throw conditional_error("conditioning on outcome with zero probability");
  }
  double p = stats.joint(given_x, y) / marginal;
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

namespace {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

Mat4 kron(const Mat2& p, const Mat2& q) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = p(i, j) * q;
  return out;
}

}  // namespace

JointStats density_matrix_oracle(const EntangledState& state,
                                 const MeasurementDirection& a,
                                 const MeasurementDirection& b) {
  // Single-qubit basis order (|1>, |0>), so sigma_z = diag(+1, -1).
  // Two-qubit basis order |11>, |10>, |01>, |00>;
  // |psi> = cos(theta/2)|11> + sin(theta/2)|00>.
  Vec4 psi;
  psi << std::cos(state.theta() / 2), 0.0, 0.0, std::sin(state.theta() / 2);

  auto axis_matrix = [](double angle) {
    // (sin angle) sigma_x + (cos angle) sigma_z in the basis above.
    Mat2 m;
    m << std::cos(angle), std::sin(angle), std::sin(angle), -std::cos(angle);
    return m;
  };

  const Mat2 id = Mat2::Identity();
  Mat2 na = axis_matrix(a.alpha());
  Mat2 nb = axis_matrix(b.alpha());

  auto projector = [&id](const Mat2& axis, int sign) {
    return Mat2(0.5 * (id + sign * axis));
  };

  std::array<double, 4> probs{};
  const int xs[2] = {1, -1};
  int idx = 0;
  for (int x : xs) {
    for (int y : xs) {
      Mat4 joint_projector = kron(projector(na, x), projector(nb, y));
      probs[idx++] = psi.dot(joint_projector * psi);
    }
  }
  return JointStats::from_joint(probs);
}

}  // namespace ontolab
