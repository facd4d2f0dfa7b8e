#pragma once

#include <optional>
#include <vector>

#include "ontolab/models.hpp"

namespace ontolab {

// One wing's response averaged over the inaccessible azimuth, tabulated
// on a polar quadrature grid.  weight[i] is node i's share of the polar
// measure rho(tau) = sin(tau)/2, so weights sum to 1 and
// sum(f * weight) approximates the integral of f against rho.
struct CoarseProfile {
  std::vector<double> tau;
  std::vector<double> f;       // in [-1, 1]
  std::vector<double> weight;  // rho(tau_i) * quadrature weight
};

// (1/2pi) int A dmu at fixed tau, by quadrature over mu with panels
// split at the response's support boundaries (the integrand is piecewise
// constant, so each panel is integrated exactly).
double coarse_value(const ResponseModel& model, Wing wing, double tau);

// Closed-form counterpart used as a cross-check: for a cap of half-angle
// xi, f(tau) = 2 arccos(clamp(cos xi / sin tau, -1, 1))/pi - 1 on the
// band sin tau >= |cos xi| and the saturated value -sign(cos xi)
// elsewhere; for a belt, exactly 0 inside the band and -sign outside.
double coarse_value_closed_form(const ResponseModel& model, Wing wing,
                                double tau);

CoarseProfile coarse_grain(const ResponseModel& model, Wing wing,
                           int grid_size);

struct VarianceReport {
  double delta;   // int (f - <A>)^2 rho dtau
  double bound1;  // int |f| rho dtau - <A>^2
  double bound3;  // |<A>| - <A>^2
  std::optional<double> qm_bound;  // chained-bound ceiling when requested
};

VarianceReport variance_delta(const CoarseProfile& profile,
                              double expectation);

// (1/2pi) int A*B dmu at fixed tau: the correlation of the two wings
// conditioned on the accessible polar angle.
double conditional_correlation(const ResponseModel& model, double tau);

// Max over tau of |f(tau; a,b1) - f(tau; a,b2)|: wing A's coarse-grained
// response must not depend on the remote setting.
double check_nonsignaling(ModelKind kind, const EntangledState& state,
                          const MeasurementDirection& a,
                          const MeasurementDirection& b1,
                          const MeasurementDirection& b2, int grid_size);

// Feasibility analysis for a hypothetical belt-type model whose +1
// azimuth arcs have extents other than pi.  Band half-widths are set by
// marginal matching, sin(eta) = 2 pi p / extent (capped at 1, flagged
// infeasible when the cap binds).  Conditionals P(X_b=+1 | X_a=+1) are
// scanned over a grid of b directions; for each b the arc offset is
// chosen in the model's favor (minimizing for the lower scan, maximizing
// for the upper scan).
struct ObstructionReport {
  double arc_extent_a = 0, arc_extent_b = 0;
  bool marginals_feasible = true;
  double model_min_conditional = 0;    // best-case minimum over the b grid
  double model_max_conditional = 0;    // best-case maximum over the b grid
  double quantum_min_conditional = 0;  // quantum minimum over the b grid
  double quantum_max_conditional = 0;  // quantum maximum over the b grid
  // Arcs longer than half the equator must always intersect, so the
  // model cannot reach conditional probability 0 while quantum mechanics
  // does: the configuration is excluded.
  bool case1_excluded = false;
  // Mismatched extents cap the attainable overlap fraction below 1 while
  // quantum mechanics reaches conditional probability 1: also excluded.
  bool case2_excluded = false;
  bool excluded() const { return case1_excluded || case2_excluded; }
};

ObstructionReport obstruction_check(double arc_extent_a, double arc_extent_b,
                                    const EntangledState& state,
                                    const MeasurementDirection& a,
                                    int b_grid_size);

}  // namespace ontolab
