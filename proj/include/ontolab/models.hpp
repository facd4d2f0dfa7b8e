#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ontolab/qm.hpp"
#include "ontolab/quadrature.hpp"

namespace ontolab {

// Hidden-variable point: a unit vector on a sphere whose pole is the
// pair's propagation axis.  mu is the azimuth about that pole (the
// inaccessible part), tau the polar angle from it (the accessible part).
// The uniform ontic density is sin(tau)/(4pi) dtau dmu.
struct OnticPoint {
  double mu;   // [0, 2pi)
  double tau;  // [0, pi]

  // Components in the sphere frame (pole along the third axis).  The
  // measurement plane is the equatorial plane of this frame.
  Vec3d unit_vector() const;
};

// Uniform sphere draw number `index` of stream `stream`.
OnticPoint sample_ontic_point(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index);

struct ResponseSample {
  int a_value;  // exactly +1 or -1
  int b_value;
};

// Closed arc on the azimuth circle, center +- half_width.  half_width < 0
// encodes the empty set, half_width = pi the full circle.
struct Arc {
  double center = 0.0;
  double half_width = -1.0;

  static Arc empty() { return {0.0, -1.0}; }
  static Arc full() { return {0.0, kPi}; }
  bool is_empty() const { return half_width < 0.0; }
  bool is_full() const { return half_width >= kPi; }
};

double arc_length(const Arc& arc);
bool arc_contains(const Arc& arc, double angle);
// Total length of the intersection (up to two components).
double arc_overlap_length(const Arc& p, const Arc& q);

// Deterministic response model whose +1 regions are spherical caps with
// centers on the equator.  Cap half-angles are pinned by the marginals
// (cos xi = -<A>, cos chi = -<B>); the azimuth separation of the two cap
// centers is the one calibrated degree of freedom.
struct CapModel {
  EntangledState state;
  MeasurementDirection a, b;
  double xi;              // A-cap half-angle
  double chi;             // B-cap half-angle
  double a_cap_azimuth;   // azimuth of A's cap center (0 by convention)
  double b_cap_azimuth;   // azimuth of B's cap center
  double calibration_tol;
};

// Modified model whose deviating region is a belt: the half-equator arc
// of azimuthal extent pi around *_belt_azimuth, restricted to polar
// band |tau - pi/2| < eta.  Inside the belt the wing responds with
// sign_* (= -sign<A>, +1 at <A> = 0); outside with -sign_*.  The band
// half-width satisfies sin(eta) = 1 - |<A>| so marginals match.
struct BeltModel {
  EntangledState state;
  MeasurementDirection a, b;
  double eta_a, eta_b;
  double a_belt_azimuth, b_belt_azimuth;
  int sign_a, sign_b;
  double calibration_tol;
};

enum class ModelKind { cap, belt };
using ResponseModel = std::variant<CapModel, BeltModel>;

ResponseSample respond_cap(const CapModel& model, const OnticPoint& point);
ResponseSample respond_belt(const BeltModel& model, const OnticPoint& point);
ResponseSample respond(const ResponseModel& model, const OnticPoint& point);

// The azimuth set where the given wing responds +1, at fixed polar
// angle tau.  Always a single arc (possibly empty or full) for both
// model families; this is the kernel behind every coarse-grained
// quantity.
enum class Wing { A, B };
Arc plus_arc(const ResponseModel& model, Wing wing, double tau);

// Polar breakpoints of the wing's response structure (band edges),
// flagged where the azimuth-averaged response has a sqrt-type branch
// point.  Used to build integration grids.
std::vector<PanelBreak> support_breaks(const ResponseModel& model, Wing wing);

// Normalized area (solid angle / 4pi) of the intersection of two
// equator-centered caps whose centers are delta_azimuth apart, by
// quadrature over (mu, tau): the mu cross-section is resolved exactly as
// an arc overlap and the polar integral is adaptive with splits seeded
// at the cap band edges.  Absolute error <= 1e-9.  Non-increasing in
// delta_azimuth, which makes calibration a bisection.
double cap_overlap_probability(double xi, double chi, double delta_azimuth);

// Tune the one free azimuth separation so the model's joint(+1,+1)
// matches quantum mechanics within tol.  Raises calibration_error when
// the target lies outside the attainable range (never silently clamps).
CapModel calibrate_cap(const EntangledState& state,
                       const MeasurementDirection& a,
                       const MeasurementDirection& b, double tol);
BeltModel calibrate_belt(const EntangledState& state,
                         const MeasurementDirection& a,
                         const MeasurementDirection& b, double tol);
ResponseModel calibrate(ModelKind kind, const EntangledState& state,
                        const MeasurementDirection& a,
                        const MeasurementDirection& b, double tol);

// Model statistics by deterministic quadrature (absolute error <= 1e-10):
// the azimuth cross-sections are exact arc computations, the polar
// integral uses a graded piecewise rule.
double model_marginal_plus(const ResponseModel& model, Wing wing);
double model_joint_plus_plus(const ResponseModel& model);
double model_correlation(const ResponseModel& model);

struct VerifyReport {
  long long n_samples = 0;
  std::uint64_t seed = 0;
  // Monte Carlo estimates and z-scores against the quantum values.
  double mc_marginal_a = 0, mc_marginal_b = 0, mc_correlation = 0;
  double z_marginal_a = 0, z_marginal_b = 0, z_correlation = 0;
  // Deterministic quadrature values and their residuals.
  double quad_marginal_a = 0, quad_marginal_b = 0;
  double quad_correlation = 0, quad_joint_pp = 0;
  double residual_marginal_a = 0, residual_marginal_b = 0;
  double residual_correlation = 0, residual_joint_pp = 0;
  bool passed = false;  // all |z| <= 5 and all residuals <= 1e-6
};

// Check a calibrated model against quantum statistics along two
// independent routes: seeded Monte Carlo (z-scores) and quadrature
// (exact-level residuals).
VerifyReport verify_model(const ResponseModel& model, long long n_samples,
                          std::uint64_t seed);

// Structured text record (JSON) round-trip for calibrated models.
std::string model_to_record(const ResponseModel& model);
ResponseModel model_from_record(const std::string& record);

}  // namespace ontolab
