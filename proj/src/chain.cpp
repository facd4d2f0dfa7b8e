#include "ontolab/chain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ontolab/rng.hpp"

namespace ontolab {

namespace {

double wrap_angle(double d) {
  d = std::fmod(d, 2 * kPi);
  if (d > kPi) d -= 2 * kPi;
  if (d <= -kPi) d += 2 * kPi;
  return d;
}

}  // namespace

Chain equally_spaced_chain(double a_alpha, int n) {
  if (n < 1) throw std::invalid_argument("chain size must be >= 1");
  Chain chain;
  chain.n = n;
  chain.angles.resize(2 * n + 1);
  double spacing = kPi / (2 * n);
  for (int j = 0; j <= 2 * n; ++j) {
    chain.angles[j] = a_alpha + j * spacing;
  }
  return chain;
}

double omega(const EntangledState& state, const MeasurementDirection& a,
             const Chain& chain) {
  if (chain.n < 1 ||
      chain.angles.size() != static_cast<std::size_t>(2 * chain.n + 1)) {
    throw std::invalid_argument("chain needs 2n+1 angles with n >= 1");
  }
  if (std::abs(wrap_angle(chain.angles.front() - a.alpha())) > 1e-12) {
    throw std::invalid_argument("chain must start at the target direction");
  }
  if (std::abs(wrap_angle(chain.angles.back() - chain.angles.front() - kPi)) >
      1e-12) {
    throw std::invalid_argument("chain must end antipodal to its start");
  }
  double theta = state.theta();
  double total = 0.0;
  for (int k = 0; k < chain.n; ++k) {
    total += correlation_value(theta, chain.angles[2 * k],
                               chain.angles[2 * k + 1]);
    total += correlation_value(theta, chain.angles[2 * k + 2],
                               chain.angles[2 * k + 1]);
  }
  return chain.n - 0.5 * total;
}

SimplexResult minimize_simplex(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, double step, double tol, long long max_evals) {
  const int d = static_cast<int>(x0.size());
  if (d < 1) throw std::invalid_argument("empty search space");
  if (!(step > 0) || !(tol > 0)) {
    throw std::invalid_argument("step and tol must be > 0");
  }
  // Dimension-scaled coefficients; the classic values in one dimension
  // (where the scaled shrink factor would degenerate to 0).
  const double expand = d > 1 ? 1.0 + 2.0 / d : 2.0;
  const double contract = d > 1 ? 0.75 - 0.5 / d : 0.5;
  const double shrink = d > 1 ? 1.0 - 1.0 / d : 0.5;

  std::vector<Eigen::VectorXd> xs(d + 1, x0);
  std::vector<double> fs(d + 1);
  long long evals = 0;
  auto eval = [&](const Eigen::VectorXd& v) {
    ++evals;
    return f(v);
  };
  for (int i = 1; i <= d; ++i) xs[i](i - 1) += step;
  for (int i = 0; i <= d; ++i) fs[i] = eval(xs[i]);

  SimplexResult out;
  std::vector<int> order(d + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&fs](int i, int j) { return fs[i] < fs[j]; });
    std::vector<Eigen::VectorXd> xs2(d + 1);
    std::vector<double> fs2(d + 1);
    for (int i = 0; i <= d; ++i) {
      xs2[i] = xs[order[i]];
      fs2[i] = fs[order[i]];
    }
    xs.swap(xs2);
    fs.swap(fs2);

    double diam = 0.0;
    for (int i = 1; i <= d; ++i) {
      diam = std::max(diam, (xs[i] - xs[0]).lpNorm<Eigen::Infinity>());
    }
    double spread = fs[d] - fs[0];
    double x_scale = 1.0 + xs[0].lpNorm<Eigen::Infinity>();
    if (spread <= tol * (1.0 + std::abs(fs[0])) &&
        diam <= 0.1 * std::sqrt(tol) * x_scale) {
      out.converged = true;
      break;
    }
    if (evals >= max_evals) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += xs[i];
    centroid /= d;

    auto do_shrink = [&]() {
      for (int i = 1; i <= d; ++i) {
        xs[i] = xs[0] + shrink * (xs[i] - xs[0]);
        fs[i] = eval(xs[i]);
      }
    };

    Eigen::VectorXd xr = centroid + (centroid - xs[d]);
    double fr = eval(xr);
    if (fr < fs[0]) {
      Eigen::VectorXd xe = centroid + expand * (xr - centroid);
      double fe = eval(xe);
      if (fe < fr) {
        xs[d] = xe;
        fs[d] = fe;
      } else {
        xs[d] = xr;
        fs[d] = fr;
      }
    } else if (fr < fs[d - 1]) {
      xs[d] = xr;
      fs[d] = fr;
    } else if (fr < fs[d]) {
      Eigen::VectorXd xc = centroid + contract * (xr - centroid);
      double fc = eval(xc);
      if (fc <= fr) {
        xs[d] = xc;
        fs[d] = fc;
      } else {
        do_shrink();
      }
    } else {
      Eigen::VectorXd xc = centroid - contract * (centroid - xs[d]);
      double fc = eval(xc);
      if (fc < fs[d]) {
        xs[d] = xc;
        fs[d] = fc;
      } else {
        do_shrink();
      }
    }
  }
  out.x = xs[0];
  out.value = fs[0];
  out.evals = evals;
  return out;
}

namespace {

double omega_value(double theta, double alpha, int n,
                   const Eigen::VectorXd& interior) {
  auto angle = [&](int j) {
    if (j == 0) return alpha;
    if (j == 2 * n) return alpha + kPi;
    return interior(j - 1);
  };
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    total += correlation_value(theta, angle(2 * k), angle(2 * k + 1));
    total += correlation_value(theta, angle(2 * k + 2), angle(2 * k + 1));
  }
  return n - 0.5 * total;
}

Chain chain_from_interior(double alpha, int n, const Eigen::VectorXd& interior) {
  Chain chain;
  chain.n = n;
  chain.angles.resize(2 * n + 1);
  chain.angles.front() = alpha;
  chain.angles.back() = alpha + kPi;
  for (int j = 1; j < 2 * n; ++j) chain.angles[j] = interior(j - 1);
  return chain;
}

OmegaResult minimize_omega_impl(const EntangledState& state,
                                const MeasurementDirection& a, int n,
                                int restarts, double tol, std::uint64_t seed,
                                const std::vector<Eigen::VectorXd>& extra) {
  if (n < 1) throw std::invalid_argument("chain size must be >= 1");
  if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
  if (restarts < 0) throw std::invalid_argument("restarts must be >= 0");

  const double theta = state.theta();
  const double alpha = a.alpha();
  const int d = 2 * n - 1;
  const double spacing = kPi / (2 * n);

  Eigen::VectorXd equal(d);
  for (int i = 0; i < d; ++i) equal(i) = alpha + (i + 1) * spacing;

  std::vector<Eigen::VectorXd> inits;
  inits.push_back(equal);
  inits.insert(inits.end(), extra.begin(), extra.end());
  for (int r = 1; r <= restarts; ++r) {
    double amp = spacing * (0.25 + 0.5 * r / std::max(1, restarts));
    Eigen::VectorXd v = equal;
    for (int i = 0; i < d; ++i) {
      v(i) += amp * (2.0 * counter_uniform(seed, static_cast<std::uint64_t>(r),
                                           static_cast<std::uint64_t>(i)) -
                     1.0);
    }
    inits.push_back(v);
  }

  auto objective = [theta, alpha, n](const Eigen::VectorXd& v) {
    return omega_value(theta, alpha, n, v);
  };
  const long long budget = std::min<long long>(300000, 4000LL * d + 20000);

  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = equal;
  bool best_converged = false;
  for (const Eigen::VectorXd& init : inits) {
    Eigen::VectorXd x = init;
    double value = objective(x);
    double step = spacing * 0.5;
    bool run_converged = false;
    double prev = std::numeric_limits<double>::infinity();
    // Restart-at-best rounds: rebuilding the simplex at the incumbent
    // with a smaller step un-sticks collapsed simplices.
    for (int round = 0; round < 4; ++round) {
      SimplexResult res = minimize_simplex(objective, x, step, tol, budget);
      if (res.value < value) {
        value = res.value;
        x = res.x;
      }
      run_converged = res.converged;
      if (res.converged && prev - value < tol) break;
      prev = value;
      step *= 0.2;
    }
    if (value < best_value) {
      best_value = value;
      best_x = x;
      best_converged = run_converged;
    }
  }

  OmegaResult result;
  result.omega = best_value;
  result.chain = chain_from_interior(alpha, n, best_x);
  double ea = expectation_A(state, a);
  result.qm_bound = best_value - ea * ea;
  result.converged = best_converged;
  result.restarts_used = restarts;
  return result;
}

// Index-space linear interpolation of an optimal chain onto a larger
// chain size, used to warm-start the next table row.
Eigen::VectorXd resample_interior(const Chain& prev, int n) {
  int m = prev.n;
  Eigen::VectorXd interior(2 * n - 1);
  for (int j = 1; j < 2 * n; ++j) {
    double pos = static_cast<double>(j) * (2 * m) / (2 * n);
    int i0 = std::min(static_cast<int>(pos), 2 * m - 1);
    double frac = pos - i0;
    interior(j - 1) =
        prev.angles[i0] * (1.0 - frac) + prev.angles[i0 + 1] * frac;
  }
  return interior;
}

}  // namespace

OmegaResult minimize_omega(const EntangledState& state,
                           const MeasurementDirection& a, int n, int restarts,
                           double tol, std::uint64_t seed) {
  return minimize_omega_impl(state, a, n, restarts, tol, seed, {});
}

std::vector<BoundRow> bound_convergence(const EntangledState& state,
                                        const MeasurementDirection& a,
                                        const std::vector<int>& n_list,
                                        int restarts, double tol,
                                        std::uint64_t seed) {
  if (n_list.empty()) throw std::invalid_argument("empty chain-size list");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw std::invalid_argument("chain sizes must be strictly increasing");
    }
  }
  std::vector<BoundRow> rows;
  Chain prev_chain;
  double prev_bound = std::numeric_limits<double>::infinity();
  for (int n : n_list) {
    std::vector<Eigen::VectorXd> extra;
    if (prev_chain.n >= 1) extra.push_back(resample_interior(prev_chain, n));
    auto t0 = std::chrono::steady_clock::now();
    OmegaResult res =
        minimize_omega_impl(state, a, n, restarts, tol, seed, extra);
    if (res.qm_bound > prev_bound + 1e-9) {
      OmegaResult retry = minimize_omega_impl(state, a, n, 2 * restarts + 2,
                                              tol, seed + 1, extra);
      if (retry.qm_bound < res.qm_bound) res = retry;
    }
    auto t1 = std::chrono::steady_clock::now();
    BoundRow row;
    row.n = n;
    row.omega_min = res.omega;
    row.qm_bound = res.qm_bound;
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    rows.push_back(row);
    prev_chain = res.chain;
    prev_bound = res.qm_bound;
  }
  return rows;
}

}  // namespace ontolab
