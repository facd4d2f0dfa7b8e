#include "ontolab/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ontolab/quadrature.hpp"

namespace ontolab {

namespace {

double clamp_unit(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

double wrap_to_2pi(double x) {
  x = std::fmod(x, 2 * kPi);
  if (x < 0) x += 2 * kPi;
  return x;
}

// Azimuth panel endpoints: the response is piecewise constant in mu, so
// integrating it exactly only needs the jump locations.
std::vector<double> azimuth_cuts(std::initializer_list<Arc> arcs) {
  std::vector<double> cuts;
  for (const Arc& arc : arcs) {
    if (arc.is_empty() || arc.is_full()) continue;
    cuts.push_back(wrap_to_2pi(arc.center - arc.half_width));
    cuts.push_back(wrap_to_2pi(arc.center + arc.half_width));
  }
  if (cuts.empty()) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

template <typename Value>
double azimuth_average(const std::vector<double>& cuts, const Value& value) {
  double total = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    double lo = cuts[i];
    double hi = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + 2 * kPi;
    total += value(0.5 * (lo + hi)) * (hi - lo);
  }
  return total / (2 * kPi);
}

double wing_value(const ResponseModel& model, Wing wing, double mu,
                  double tau) {
  ResponseSample r = respond(model, OnticPoint{mu, tau});
  return static_cast<double>(wing == Wing::A ? r.a_value : r.b_value);
}

}  // namespace

double coarse_value(const ResponseModel& model, Wing wing, double tau) {
  Arc arc = plus_arc(model, wing, tau);
  std::vector<double> cuts = azimuth_cuts({arc});
  return azimuth_average(cuts, [&](double mu) {
    return wing_value(model, wing, mu, tau);
  });
}

double coarse_value_closed_form(const ResponseModel& model, Wing wing,
                                double tau) {
  return std::visit(
      [wing, tau](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CapModel>) {
          double c = std::cos(wing == Wing::A ? m.xi : m.chi);
          double s = std::sin(tau);
          if (s < 1e-12) return c <= 0 ? 1.0 : -1.0;
          if (s >= std::abs(c) - 1e-12) {
            return 2.0 * std::acos(clamp_unit(c / s)) / kPi - 1.0;
          }
          return c > 0 ? -1.0 : 1.0;  // saturated outside the band
        } else {
          double eta = wing == Wing::A ? m.eta_a : m.eta_b;
          int sign = wing == Wing::A ? m.sign_a : m.sign_b;
          if (std::abs(tau - kPi / 2) < eta) return 0.0;
          return -static_cast<double>(sign);
        }
      },
      model);
}

CoarseProfile coarse_grain(const ResponseModel& model, Wing wing,
                           int grid_size) {
  if (grid_size < 64) {
    throw std::invalid_argument("coarse grid needs at least 64 nodes");
  }
  std::vector<QuadNode> rule = graded_grid(support_breaks(model, wing),
                                           grid_size);
  CoarseProfile profile;
  profile.tau.reserve(rule.size());
  profile.f.reserve(rule.size());
  profile.weight.reserve(rule.size());
  for (const QuadNode& node : rule) {
    profile.tau.push_back(node.x);
    profile.f.push_back(coarse_value(model, wing, node.x));
    profile.weight.push_back(std::sin(node.x) / 2.0 * node.w);
  }
  return profile;
}

VarianceReport variance_delta(const CoarseProfile& profile,
                              double expectation) {
  if (profile.tau.empty() || profile.tau.size() != profile.f.size() ||
      profile.tau.size() != profile.weight.size()) {
    throw std::invalid_argument("profile arrays must be nonempty and equal");
  }
  VarianceReport report;
  double delta = 0.0, abs_mean = 0.0;
  for (std::size_t i = 0; i < profile.f.size(); ++i) {
    double d = profile.f[i] - expectation;
    delta += profile.weight[i] * d * d;
    abs_mean += profile.weight[i] * std::abs(profile.f[i]);
  }
  report.delta = delta;
  report.bound1 = abs_mean - expectation * expectation;
  report.bound3 = std::abs(expectation) - expectation * expectation;
  return report;
}

double conditional_correlation(const ResponseModel& model, double tau) {
  Arc arc_a = plus_arc(model, Wing::A, tau);
  Arc arc_b = plus_arc(model, Wing::B, tau);
  std::vector<double> cuts = azimuth_cuts({arc_a, arc_b});
  return azimuth_average(cuts, [&](double mu) {
    ResponseSample r = respond(model, OnticPoint{mu, tau});
    return static_cast<double>(r.a_value * r.b_value);
  });
}

double check_nonsignaling(ModelKind kind, const EntangledState& state,
                          const MeasurementDirection& a,
                          const MeasurementDirection& b1,
                          const MeasurementDirection& b2, int grid_size) {
  if (std::abs(b1.alpha() - b2.alpha()) < 1e-15) {
    throw std::invalid_argument("remote settings must differ");
  }
  ResponseModel m1 = calibrate(kind, state, a, b1, 1e-6);
  ResponseModel m2 = calibrate(kind, state, a, b2, 1e-6);
  CoarseProfile p1 = coarse_grain(m1, Wing::A, grid_size);
  CoarseProfile p2 = coarse_grain(m2, Wing::A, grid_size);
  if (p1.tau.size() != p2.tau.size()) {
    throw std::runtime_error("coarse grids diverged between calibrations");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < p1.f.size(); ++i) {
    worst = std::max(worst, std::abs(p1.f[i] - p2.f[i]));
  }
  return worst;
}

ObstructionReport obstruction_check(double arc_extent_a, double arc_extent_b,
                                    const EntangledState& state,
                                    const MeasurementDirection& a,
                                    int b_grid_size) {
  for (double extent : {arc_extent_a, arc_extent_b}) {
    if (!(extent > 0.0 && extent <= 2 * kPi)) {
      throw std::invalid_argument("arc extents must lie in (0, 2pi]");
    }
  }
  if (b_grid_size < 8) {
    throw std::invalid_argument("b grid needs at least 8 directions");
  }

  ObstructionReport report;
  report.arc_extent_a = arc_extent_a;
  report.arc_extent_b = arc_extent_b;

  double pa = (1.0 + expectation_A(state, a)) / 2.0;
  if (pa <= 1e-12) {
    throw conditional_error("conditioning outcome has zero probability");
  }

  // Band half-width from marginal matching: P(+1) = (extent/2pi) sin(eta).
  auto sin_eta = [&report](double p, double extent) {
    double s = 2 * kPi * p / extent;
    if (s > 1.0 + 1e-12) report.marginals_feasible = false;
    return std::min(s, 1.0);
  };
  double sa = sin_eta(pa, arc_extent_a);

  double overlap_min = std::max(0.0, arc_extent_a + arc_extent_b - 2 * kPi);
  double overlap_max = std::min(arc_extent_a, arc_extent_b);

  double inf = std::numeric_limits<double>::infinity();
  double model_min = inf, model_max = -inf;
  double quantum_min = inf, quantum_max = -inf;
  for (int j = 0; j < b_grid_size; ++j) {
    MeasurementDirection b(a.alpha() + 2 * kPi * j / b_grid_size);
    JointStats stats = joint_stats(state, a, b);
    double q = clamp_unit(stats.joint(1, 1) / pa);
    quantum_min = std::min(quantum_min, q);
    quantum_max = std::max(quantum_max, q);

    double sb = sin_eta(stats.marginal_b(1), arc_extent_b);
    // joint(+,+) = overlap/(2pi) * sin(min eta); the azimuth offset is a
    // free parameter, so both extremes of the overlap are attainable.
    double scale = std::min(sa, sb) / (arc_extent_a * sa);
    model_min = std::min(model_min, overlap_min * scale);
    model_max = std::max(model_max, overlap_max * scale);
  }

  report.model_min_conditional = model_min;
  report.model_max_conditional = model_max;
  report.quantum_min_conditional = quantum_min;
  report.quantum_max_conditional = quantum_max;
  report.case1_excluded = model_min > 1e-9 && quantum_min <= 1e-9;
  report.case2_excluded = model_max < 1.0 - 1e-9 && quantum_max >= 1.0 - 1e-9;
  return report;
}

}  // namespace ontolab
