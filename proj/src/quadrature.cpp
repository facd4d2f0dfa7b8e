#include "ontolab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ontolab {

std::vector<QuadNode> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  std::vector<QuadNode> rule(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule[i] = {-x, w};  // roots found in descending order; store ascending
    rule[n - 1 - i] = {x, w};
  }
  return rule;
}

std::vector<QuadNode> gauss_legendre(int n, double a, double b) {
  std::vector<QuadNode> rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (QuadNode& node : rule) {
    node.x = mid + half * node.x;
    node.w *= half;
  }
  return rule;
}

std::vector<QuadNode> graded_panel(double a, double b, int nodes,
                                   bool singular_left, bool singular_right) {
  if (b <= a || nodes < 1) return {};
  if (singular_left && singular_right) {
    double mid = 0.5 * (a + b);
    auto left = graded_panel(a, mid, (nodes + 1) / 2, true, false);
    auto right = graded_panel(mid, b, nodes / 2 + 1, false, true);
    left.insert(left.end(), right.begin(), right.end());
    return left;
  }
  if (!singular_left && !singular_right) return gauss_legendre(nodes, a, b);

  // Substitute x = a + (b-a) s^2 (or the mirrored form), which maps
  // sqrt-type behavior at the flagged endpoint to a smooth integrand in s.
  std::vector<QuadNode> base = gauss_legendre(nodes, 0.0, 1.0);
  std::vector<QuadNode> rule(base.size());
  const double len = b - a;
  for (std::size_t i = 0; i < base.size(); ++i) {
    double s = base[i].x;
    double jac = 2.0 * len * s * base[i].w;
    rule[i] = singular_left ? QuadNode{a + len * s * s, jac}
                            : QuadNode{b - len * s * s, jac};
  }
  if (!singular_left) std::reverse(rule.begin(), rule.end());
  return rule;
}

std::vector<QuadNode> graded_grid(std::vector<PanelBreak> breaks,
                                  int total_nodes) {
  if (breaks.size() < 2) throw std::invalid_argument("need >= 2 breakpoints");
  std::sort(breaks.begin(), breaks.end(),
            [](const PanelBreak& p, const PanelBreak& q) { return p.x < q.x; });
  // Merge near-duplicates, keeping the singular flag if either carries it.
  std::vector<PanelBreak> merged;
  for (const PanelBreak& brk : breaks) {
    if (!merged.empty() && brk.x - merged.back().x < 1e-13) {
      merged.back().singular = merged.back().singular || brk.singular;
    } else {
      merged.push_back(brk);
    }
  }
  if (merged.size() < 2) throw std::invalid_argument("degenerate breakpoints");

  const double total_len = merged.back().x - merged.front().x;
  std::vector<QuadNode> rule;
  rule.reserve(static_cast<std::size_t>(total_nodes) + 8 * merged.size());
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    double len = merged[i + 1].x - merged[i].x;
    int nodes = std::max(8, static_cast<int>(total_nodes * len / total_len));
    auto panel = graded_panel(merged[i].x, merged[i + 1].x, nodes,
                              merged[i].singular, merged[i + 1].singular);
    rule.insert(rule.end(), panel.begin(), panel.end());
  }
  return rule;
}

double integrate(const std::vector<QuadNode>& rule,
                 const std::function<double(double)>& f) {
  double sum = 0.0;
  for (const QuadNode& node : rule) sum += node.w * f(node.x);
  return sum;
}

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double err = left + right - whole;
  if (depth > 60 || std::abs(err) < 15.0 * tol) {
    return left + right + err / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, tol / 2, depth + 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, tol / 2, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol,
                        const std::vector<double>& interior_seeds) {
  if (b <= a) return 0.0;
  std::vector<double> cuts{a};
  for (double s : interior_seeds) {
    if (s > a + 1e-14 && s < b - 1e-14) cuts.push_back(s);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  double sum = 0.0;
  double tol_per_len = abs_tol / (b - a);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    if (hi - lo < 1e-15) continue;
    double mid = 0.5 * (lo + hi);
    double flo = f(lo), fmid = f(mid), fhi = f(hi);
    double whole = simpson(flo, fmid, fhi, hi - lo);
    sum += adaptive_step(f, lo, hi, flo, fmid, fhi, whole,
                         tol_per_len * (hi - lo), 0);
  }
  return sum;
}

}  // namespace ontolab
