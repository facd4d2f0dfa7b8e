#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "ontolab/qm.hpp"
#include "ontolab/version.hpp"

namespace ontolab {

// Measurement chain gamma_0 .. gamma_2n with pinned endpoints:
// gamma_0 = a's angle and gamma_2n = gamma_0 + pi (the antipodal
// direction).  The 2n-1 interior angles are free.
struct Chain {
  int n = 0;
  std::vector<double> angles;  // size 2n+1
};

Chain equally_spaced_chain(double a_alpha, int n);

// Chained-correlation quantity
//   omega = n - (1/2) sum_k [<A(g_2k) B(g_2k+1)> + <A(g_2k+2) B(g_2k+1)>],
// built from the closed-form correlations.  Validates the endpoint
// constraints.
double omega(const EntangledState& state, const MeasurementDirection& a,
             const Chain& chain);

struct OmegaResult {
  double omega = 0;
  Chain chain;
  double qm_bound = 0;  // omega - <A(a)>^2
  bool converged = false;
  int restarts_used = 0;
};

// Derivative-free minimization of omega over the interior angles:
// adaptive Nelder-Mead started from the equally spaced chain plus
// `restarts` seeded perturbations of it, each polished by
// restart-at-best rounds (rebuilding the simplex at the incumbent
// un-sticks collapsed simplices in high dimension).  Deterministic for
// a fixed seed.  tol is the simplex-size convergence threshold; the
// non-convergence flag is raised when no run shrank below it.
OmegaResult minimize_omega(const EntangledState& state,
                           const MeasurementDirection& a, int n,
                           int restarts = 8, double tol = 1e-9,
                           std::uint64_t seed = kDefaultSeed);

struct BoundRow {
  int n = 0;
  double omega_min = 0;
  double qm_bound = 0;
  double wall_time_ms = 0;
};

// qm_bound as a function of chain size.  Rows are computed in order with
// the previous optimum (resampled to the new size) injected as a warm
// start; a monotonicity violation triggers one retry with doubled
// restarts.
std::vector<BoundRow> bound_convergence(const EntangledState& state,
                                        const MeasurementDirection& a,
                                        const std::vector<int>& n_list,
                                        int restarts = 8, double tol = 1e-9,
                                        std::uint64_t seed = kDefaultSeed);

// The generic simplex minimizer behind minimize_omega (exposed for
// testing).  Runs adaptive Nelder-Mead (dimension-scaled expansion,
// contraction and shrink coefficients) until the simplex diameter and
// value spread drop below tol or the evaluation budget is exhausted.
struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0;
  bool converged = false;
  long long evals = 0;
};

SimplexResult minimize_simplex(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, double step, double tol, long long max_evals);

}  // namespace ontolab
