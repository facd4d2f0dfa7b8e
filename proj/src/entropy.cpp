#include "ontolab/entropy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ontolab {

namespace {

constexpr double kLog2 = 0.6931471805599453;  // ln 2

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace

double OutcomeDistribution::mean() const {
  double m = 0.0;
  for (const Atom& atom : atoms) m += atom.weight * atom.p;
  return m;
}

double OutcomeDistribution::variance() const {
  double m = mean();
  double v = 0.0;
  for (const Atom& atom : atoms) {
    v += atom.weight * (atom.p - m) * (atom.p - m);
  }
  return 4.0 * v;
}

void OutcomeDistribution::validate() const {
  if (atoms.empty()) throw std::invalid_argument("distribution has no atoms");
  double total = 0.0;
  for (const Atom& atom : atoms) {
    if (atom.weight < -1e-12) {
      throw std::invalid_argument("negative atom weight");
    }
    if (atom.p < -1e-12 || atom.p > 1.0 + 1e-12) {
      throw std::invalid_argument("atom probability outside [0, 1]");
    }
    total += atom.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("atom weights must sum to 1");
  }
}

double renyi_entropy(double p, const EntropySpec& spec) {
  if (p < -1e-12 || p > 1.0 + 1e-12) {
    throw std::invalid_argument("probability outside [0, 1]");
  }
  if (spec.alpha < 0) throw std::invalid_argument("Renyi order must be >= 0");
  p = clamp01(p);
  double q = 1.0 - p;
  if (p == 0.0 || q == 0.0) return 0.0;
  if (spec.alpha == 0.0) return 1.0;  // log2 of the support size
  if (std::isinf(spec.alpha)) return -std::log2(std::max(p, q));
  if (spec.alpha == 1.0) {
    return -(p * std::log(p) + q * std::log(q)) / kLog2;
  }
  return std::log2(std::pow(p, spec.alpha) + std::pow(q, spec.alpha)) /
         (1.0 - spec.alpha);
}

double average_entropy(const OutcomeDistribution& dist,
                       const EntropySpec& spec) {
  dist.validate();
  double total = 0.0;
  for (const Atom& atom : dist.atoms) {
    total += atom.weight * renyi_entropy(atom.p, spec);
  }
  return total;
}

OutcomeDistribution bilocal_candidate(double p_psi, double delta) {
  if (!(p_psi > 0.0 && p_psi < 0.5)) {
    throw std::invalid_argument("mean probability must lie in (0, 1/2)");
  }
  double delta_max = 4.0 * p_psi * (1.0 - p_psi);
  if (delta < -1e-12 || delta > delta_max + 1e-9) {
    throw infeasibility_error(
        "variance outside [0, 4 p (1 - p)]: no distribution with this "
        "mean attains it");
  }
  delta = std::min(std::max(delta, 0.0), delta_max);
  if (delta == 0.0) {
    return OutcomeDistribution{{Atom{1.0, p_psi}}};
  }
  double q = std::min(p_psi + delta / (4.0 * p_psi), 1.0);
  double w_interior = p_psi / q;
  return OutcomeDistribution{{Atom{1.0 - w_interior, 0.0},
                              Atom{w_interior, q}}};
}

namespace {

// Revised simplex on min c.w s.t. [1; p; p^2] w = b, w >= 0 with three
// rows, Bland's rule for anti-cycling, phase 1 on artificial variables.
struct MomentLP {
  std::vector<int> basis;  // three column indices into the grid
  Eigen::Vector3d xb;
  double value = 0;
};

MomentLP solve_moment_lp(const std::vector<double>& grid,
                         const Eigen::Vector3d& b,
                         const std::vector<double>& cost) {
  const int n = static_cast<int>(grid.size());
  auto column = [&](int j) -> Eigen::Vector3d {
    if (j < n) return Eigen::Vector3d(1.0, grid[j], grid[j] * grid[j]);
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(j - n) = 1.0;
    return e;
  };

  std::vector<int> basis = {n, n + 1, n + 2};
  Eigen::Vector3d xb = b;  // b >= 0 for these moments
  auto in_basis = [&basis](int j) {
    return j == basis[0] || j == basis[1] || j == basis[2];
  };

  auto iterate = [&](const std::function<double(int)>& cost_of,
                     int column_limit) {
    for (int iter = 0; iter < 20000; ++iter) {
      Eigen::Matrix3d B;
      for (int k = 0; k < 3; ++k) B.col(k) = column(basis[k]);
      Eigen::PartialPivLU<Eigen::Matrix3d> lu(B);
      Eigen::Vector3d cb(cost_of(basis[0]), cost_of(basis[1]),
                         cost_of(basis[2]));
      Eigen::Vector3d y = B.transpose().partialPivLu().solve(cb);

      int enter = -1;
      for (int j = 0; j < column_limit; ++j) {
        if (in_basis(j)) continue;
        if (cost_of(j) - y.dot(column(j)) < -1e-11) {
          enter = j;  // Bland: first improving index
          break;
        }
      }
      if (enter < 0) return;

      Eigen::Vector3d dir = lu.solve(column(enter));
      int leave = -1;
      double best_t = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        if (dir(k) <= 1e-12) continue;
        double t = xb(k) / dir(k);
        if (t < best_t - 1e-15 ||
            (t <= best_t + 1e-15 && (leave < 0 || basis[k] < basis[leave]))) {
          best_t = std::min(best_t, t);
          leave = k;
        }
      }
      if (leave < 0) {
        throw std::runtime_error("moment polytope scan became unbounded");
      }
      xb -= best_t * dir;
      xb(leave) = best_t;
      basis[leave] = enter;
      for (int k = 0; k < 3; ++k) {
        if (xb(k) < 0.0 && xb(k) > -1e-12) xb(k) = 0.0;
      }
    }
    throw std::runtime_error("simplex iteration cap exceeded");
  };

  // Phase 1: minimize the artificial mass.
  iterate([n](int j) { return j >= n ? 1.0 : 0.0; }, n + 3);
  double infeasible = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (basis[k] >= n) infeasible += xb(k);
  }
  if (infeasible > 1e-9) {
    throw infeasibility_error("moment constraints admit no distribution");
  }
  // Degenerate pivots to clear artificial variables still in the basis.
  for (int k = 0; k < 3; ++k) {
    if (basis[k] < n) continue;
    Eigen::Matrix3d B;
    for (int i = 0; i < 3; ++i) B.col(i) = column(basis[i]);
    Eigen::PartialPivLU<Eigen::Matrix3d> lu(B);
    bool pivoted = false;
    for (int j = 0; j < n && !pivoted; ++j) {
      if (in_basis(j)) continue;
      if (std::abs(lu.solve(column(j))(k)) > 1e-9) {
        basis[k] = j;
        xb(k) = 0.0;
        pivoted = true;
      }
    }
    if (!pivoted) {
      throw std::runtime_error("moment constraint row became redundant");
    }
  }
  // Phase 2: the entropy objective over the real columns only.
  iterate([&](int j) { return j >= n ? 0.0 : cost[j]; }, n);

  MomentLP out;
  out.basis = basis;
  out.xb = xb;
  out.value = 0.0;
  for (int k = 0; k < 3; ++k) out.value += cost[basis[k]] * xb(k);
  return out;
}

std::vector<double> build_grid(int grid_size, double p_psi) {
  std::vector<double> grid;
  grid.reserve(grid_size + 4);
  for (int i = 0; i < grid_size; ++i) {
    grid.push_back(static_cast<double>(i) / (grid_size - 1));
  }
  for (double anchor : {0.0, p_psi, 0.5, 1.0}) grid.push_back(anchor);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) {
                           return std::abs(a - b) < 1e-15;
                         }),
             grid.end());
  return grid;
}

struct Cluster {
  double weight = 0;
  double p = 0;  // weight-averaged location
};

std::vector<Cluster> cluster_atoms(const std::vector<Atom>& sorted_atoms,
                                   double gap_tol) {
  std::vector<Cluster> clusters;
  for (const Atom& atom : sorted_atoms) {
    bool merge = !clusters.empty() &&
                 atom.p - clusters.back().p <= gap_tol;
    if (merge) {
      Cluster& c = clusters.back();
      double w = c.weight + atom.weight;
      c.p = w > 0 ? (c.p * c.weight + atom.p * atom.weight) / w : c.p;
      c.weight = w;
    } else {
      clusters.push_back(Cluster{atom.weight, atom.p});
    }
  }
  return clusters;
}

}  // namespace

EntropyReport minimize_average_entropy(double p_psi, double delta,
                                       const EntropySpec& spec,
                                       int grid_size) {
  if (grid_size < 2001) {
    throw std::invalid_argument("probability grid needs >= 2001 nodes");
  }
  if (!(p_psi > 0.0 && p_psi < 1.0)) {
    throw std::invalid_argument("mean probability must lie in (0, 1)");
  }
  bool reflected = p_psi > 0.5;
  double p = reflected ? 1.0 - p_psi : p_psi;
  double delta_max = 4.0 * p * (1.0 - p);
  if (delta < -1e-12 || delta > delta_max + 1e-9) {
    throw infeasibility_error(
        "variance outside [0, 4 p (1 - p)]: moment polytope is empty");
  }
  delta = std::min(std::max(delta, 0.0), delta_max);

  std::vector<double> grid = build_grid(grid_size, p);
  std::vector<double> cost(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cost[i] = renyi_entropy(grid[i], spec);
  }
  Eigen::Vector3d b(1.0, p, p * p + delta / 4.0);
  MomentLP lp = solve_moment_lp(grid, b, cost);

  std::vector<Atom> atoms;
  for (int k = 0; k < 3; ++k) {
    if (lp.xb(k) > 1e-12) {
      double node = grid[lp.basis[k]];
      atoms.push_back(Atom{lp.xb(k), reflected ? 1.0 - node : node});
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.p < b.p; });

  EntropyReport report;
  report.h_bar = lp.value;
  report.minimizer.atoms = atoms;
  report.delta = delta;
  report.alpha = spec.alpha;
  report.grid_size = grid_size;
  report.grid_resolution = 1.0 / (grid_size - 1);

  report.minimizer.validate();
  if (std::abs(report.minimizer.mean() - p_psi) > 1e-9 ||
      std::abs(report.minimizer.variance() - delta) > 1e-9) {
    throw std::runtime_error("minimizer violates its moment constraints");
  }

  // Bi-local form: after clustering grid-adjacent atoms, exactly one
  // deterministic cluster and one interior cluster.  The clustering
  // absorbs the discretization split of an off-grid interior atom onto
  // two neighboring nodes.
  double res_tol = 2.0 * report.grid_resolution;
  std::vector<Cluster> clusters = cluster_atoms(atoms, res_tol);
  if (clusters.size() == 2) {
    auto deterministic = [res_tol](const Cluster& c) {
      return c.p <= res_tol || c.p >= 1.0 - res_tol;
    };
    report.is_bilocal = deterministic(clusters[0]) != deterministic(clusters[1]);
  }
  return report;
}

double critical_variance(double p_psi, const EntropySpec& spec,
                         double scan_tol) {
  if (!(spec.alpha <= 1.0)) {
    throw std::invalid_argument("critical-variance scan requires alpha <= 1");
  }
  if (!(p_psi > 0.0 && p_psi < 0.5)) {
    throw std::invalid_argument("mean probability must lie in (0, 1/2)");
  }
  if (!(scan_tol > 0)) throw std::invalid_argument("scan_tol must be > 0");

  auto bilocal_at = [&](double delta) {
    return minimize_average_entropy(p_psi, delta, spec).is_bilocal;
  };
  double delta_max = 4.0 * p_psi * (1.0 - p_psi);
  double lo = std::min(1e-6, delta_max * 1e-3);
  if (!bilocal_at(lo)) return 0.0;
  double hi = delta_max;
  if (bilocal_at(hi)) return hi;
  while (hi - lo > scan_tol) {
    double mid = 0.5 * (lo + hi);
    (bilocal_at(mid) ? lo : hi) = mid;
  }
  return lo;  // largest variance confirmed bi-local, within scan_tol
}

}  // namespace ontolab
