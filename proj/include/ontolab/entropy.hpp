#pragma once

#include <vector>

#include "ontolab/errors.hpp"

namespace ontolab {

// Renyi order; log base is fixed at 2 (entropies in bits).  alpha = 1 is
// the Shannon limit, alpha = 0 counts the support, alpha = infinity is
// min-entropy (supported only to demonstrate its lack of concavity).
struct EntropySpec {
  double alpha = 1.0;
};

struct Atom {
  double weight;
  double p;  // P(X = +1) predicted for the ontic states this atom covers
};

// Finite atomic distribution over per-tau outcome probabilities.
struct OutcomeDistribution {
  std::vector<Atom> atoms;

  double mean() const;
  // Variance on the +-1 outcome scale: 4 E[(p - mean)^2].  This is the
  // scale on which the model-variance bounds are stated, making values
  // directly comparable across modules.
  double variance() const;
  // Weights non-negative and summing to 1 within 1e-12.
  void validate() const;
};

// Binary Renyi entropy of (p, 1-p) in bits.
double renyi_entropy(double p, const EntropySpec& spec);

// sum_i w_i H_alpha(p_i).
double average_entropy(const OutcomeDistribution& dist,
                       const EntropySpec& spec);

// The two-atom form with a deterministic atom:
//   (1 - p/q) at 0  and  (p/q) at q,  q = p + delta/(4p),
// which matches mean p and variance delta by construction.  Requires
// 0 < p < 1/2 and 0 <= delta <= 4p(1-p) (q <= 1).
OutcomeDistribution bilocal_candidate(double p_psi, double delta);

struct EntropyReport {
  double h_bar = 0;
  OutcomeDistribution minimizer;
  double delta = 0;
  double alpha = 0;
  // True when the minimizer's support, clustered at the grid resolution,
  // is exactly one deterministic atom (at 0 or 1) plus one interior atom.
  bool is_bilocal = false;
  int grid_size = 0;
  double grid_resolution = 0;
};

// Minimize the averaged entropy over all distributions with the given
// mean and variance: a linear program over a p-grid (>= 2001 nodes,
// always including 0, p_psi, 1/2 and 1) with three equality constraints
// (normalization, mean, second moment), solved by a two-phase revised
// simplex with Bland's rule.  Basic solutions have at most 3 atoms.
// Inputs with p_psi > 1/2 are reflected to 1 - p_psi and the minimizer
// mapped back.  Raises infeasibility_error when delta lies outside
// [0, 4 p_psi (1 - p_psi)].
EntropyReport minimize_average_entropy(double p_psi, double delta,
                                       const EntropySpec& spec,
                                       int grid_size = 2001);

// Largest delta at which the LP minimizer keeps the two-atom form with a
// deterministic atom (is_bilocal), located by bisection to width
// scan_tol.  Requires alpha <= 1 and 0 < p_psi < 1/2.
double critical_variance(double p_psi, const EntropySpec& spec,
                         double scan_tol = 1e-3);

}  // namespace ontolab
