#pragma once

#include <functional>
#include <vector>

namespace ontolab {

struct QuadNode {
  double x;
  double w;
};

// Gauss-Legendre rule on [-1, 1]; nodes found by Newton iteration on the
// Legendre polynomial, accurate to machine precision.
std::vector<QuadNode> gauss_legendre(int n);

// The same rule mapped affinely to [a, b].
std::vector<QuadNode> gauss_legendre(int n, double a, double b);

// Panel on [a, b] graded toward singular endpoints.  The substitution
// x = a + (b-a) s^2 turns an integrand with a sqrt-type branch point at a
// into a smooth one, restoring spectral convergence; symmetrically for b.
// With both endpoints singular the panel is split at its midpoint.
std::vector<QuadNode> graded_panel(double a, double b, int nodes,
                                   bool singular_left, bool singular_right);

struct PanelBreak {
  double x;
  bool singular;  // grade adjacent panels toward this point
};

// Piecewise rule over [breaks.front(), breaks.back()].  Node budget is
// spread over panels proportionally to length (minimum 8 per panel).
// breaks must be sorted; duplicates are merged.
std::vector<QuadNode> graded_grid(std::vector<PanelBreak> breaks,
                                  int total_nodes);

double integrate(const std::vector<QuadNode>& rule,
                 const std::function<double(double)>& f);

// Adaptive Simpson to an absolute tolerance.  Recursion is seeded with
// splits at the given interior points so that kinks and jumps there do
// not defeat the error estimate.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol,
                        const std::vector<double>& interior_seeds = {});

}  // namespace ontolab
