#include "ontolab/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "ontolab/rng.hpp"
#include "ontolab/version.hpp"

namespace ontolab {

namespace {

double clamp_unit(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

// Wrap an angle difference into (-pi, pi].
double wrap_angle(double d) {
  d = std::fmod(d, 2 * kPi);
  if (d > kPi) d -= 2 * kPi;
  if (d <= -kPi) d += 2 * kPi;
  return d;
}

double segment_overlap(double a1, double b1, double a2, double b2) {
  double lo = std::max(a1, a2), hi = std::min(b1, b2);
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace

Vec3d OnticPoint::unit_vector() const {
  return Vec3d(std::sin(tau) * std::cos(mu), std::sin(tau) * std::sin(mu),
               std::cos(tau));
}

OnticPoint sample_ontic_point(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
  double u_az = counter_uniform(seed, stream, 2 * index);
  double u_pol = counter_uniform(seed, stream, 2 * index + 1);
  // Uniform measure on the sphere: azimuth uniform, cos(tau) uniform.
  return OnticPoint{2 * kPi * u_az, std::acos(clamp_unit(1.0 - 2.0 * u_pol))};
}

double arc_length(const Arc& arc) {
  if (arc.is_empty()) return 0.0;
  return std::min(2.0 * arc.half_width, 2 * kPi);
}

bool arc_contains(const Arc& arc, double angle) {
  if (arc.is_empty()) return false;
  if (arc.is_full()) return true;
  return std::abs(wrap_angle(angle - arc.center)) <= arc.half_width;
}

double arc_overlap_length(const Arc& p, const Arc& q) {
  if (p.is_empty() || q.is_empty()) return 0.0;
  if (p.is_full()) return arc_length(q);
  if (q.is_full()) return arc_length(p);
  double d = std::abs(wrap_angle(p.center - q.center));  // in [0, pi]
  // Unroll q onto the line relative to p's center; the periodic images at
  // d +- 2pi can contribute when the arcs are wide.
  double total = 0.0;
  for (double shift : {0.0, -2 * kPi, 2 * kPi}) {
    total += segment_overlap(-p.half_width, p.half_width, d + shift - q.half_width,
                             d + shift + q.half_width);
  }
  return std::min({total, arc_length(p), arc_length(q)});
}

ResponseSample respond_cap(const CapModel& model, const OnticPoint& point) {
  double sin_tau = std::sin(point.tau);
  double a_dot = sin_tau * std::cos(point.mu - model.a_cap_azimuth);
  double b_dot = sin_tau * std::cos(point.mu - model.b_cap_azimuth);
  return ResponseSample{a_dot >= std::cos(model.xi) ? 1 : -1,
                        b_dot >= std::cos(model.chi) ? 1 : -1};
}

ResponseSample respond_belt(const BeltModel& model, const OnticPoint& point) {
  bool in_band_a = std::abs(point.tau - kPi / 2) < model.eta_a;
  bool in_band_b = std::abs(point.tau - kPi / 2) < model.eta_b;
  bool in_arc_a =
      std::abs(wrap_angle(point.mu - model.a_belt_azimuth)) < kPi / 2;
  bool in_arc_b =
      std::abs(wrap_angle(point.mu - model.b_belt_azimuth)) < kPi / 2;
  return ResponseSample{
      (in_band_a && in_arc_a) ? model.sign_a : -model.sign_a,
      (in_band_b && in_arc_b) ? model.sign_b : -model.sign_b};
}

ResponseSample respond(const ResponseModel& model, const OnticPoint& point) {
  return std::visit(
      [&point](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CapModel>) {
          return respond_cap(m, point);
        } else {
          return respond_belt(m, point);
        }
      },
      model);
}

namespace {

// Azimuth +1 set of a cap of half-angle `half_angle` centered on the
// equator at `azimuth`, cut at polar angle tau.
Arc cap_plus_arc(double half_angle, double azimuth, double tau) {
  double cos_cap = std::cos(half_angle);
  double sin_tau = std::sin(tau);
  if (sin_tau < 1e-15) {
    // On the poles the dot product is 0 for every azimuth.
    return cos_cap <= 0.0 ? Arc::full() : Arc::empty();
  }
  double c = cos_cap / sin_tau;
  if (c > 1.0) return Arc::empty();
  if (c < -1.0) return Arc::full();
  return Arc{azimuth, std::acos(c)};
}

Arc belt_plus_arc(double eta, double azimuth, int sign_inside, double tau) {
  bool in_band = std::abs(tau - kPi / 2) < eta;
  if (!in_band) return sign_inside > 0 ? Arc::empty() : Arc::full();
  if (sign_inside > 0) return Arc{azimuth, kPi / 2};
  return Arc{azimuth + kPi, kPi / 2};  // complement of the belt arc
}

}  // namespace

Arc plus_arc(const ResponseModel& model, Wing wing, double tau) {
  return std::visit(
      [wing, tau](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CapModel>) {
          return wing == Wing::A
                     ? cap_plus_arc(m.xi, m.a_cap_azimuth, tau)
                     : cap_plus_arc(m.chi, m.b_cap_azimuth, tau);
        } else {
          return wing == Wing::A
                     ? belt_plus_arc(m.eta_a, m.a_belt_azimuth, m.sign_a, tau)
                     : belt_plus_arc(m.eta_b, m.b_belt_azimuth, m.sign_b, tau);
        }
      },
      model);
}

std::vector<PanelBreak> support_breaks(const ResponseModel& model, Wing wing) {
  std::vector<PanelBreak> breaks{{0.0, false}, {kPi, false}};
  return std::visit(
      [wing, &breaks](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CapModel>) {
          // The azimuth average has a sqrt-type branch point where the
          // cap boundary grazes the polar circle: sin(tau) = |cos(half)|.
          double half = wing == Wing::A ? m.xi : m.chi;
          double edge = std::asin(clamp_unit(std::abs(std::cos(half))));
          if (edge > 1e-14 && edge < kPi / 2 - 1e-14) {
            breaks.push_back({edge, true});
            breaks.push_back({kPi - edge, true});
          }
        } else {
          double eta = wing == Wing::A ? m.eta_a : m.eta_b;
          if (eta > 1e-14 && eta < kPi / 2 - 1e-14) {
            breaks.push_back({kPi / 2 - eta, false});
            breaks.push_back({kPi / 2 + eta, false});
          }
        }
        return breaks;
      },
      model);
}

namespace {

std::vector<double> break_seeds(const ResponseModel& model) {
  std::vector<double> seeds;
  for (Wing wing : {Wing::A, Wing::B}) {
    for (const PanelBreak& brk : support_breaks(model, wing)) {
      seeds.push_back(brk.x);
    }
  }
  return seeds;
}

// (1/4pi) integral of the indicator of (A = +1 and B = +1): the azimuth
// cross-section is an exact arc overlap, the polar integral is adaptive.
double joint_pp_quadrature(const ResponseModel& model, double abs_tol) {
  auto integrand = [&model](double tau) {
    double ov = arc_overlap_length(plus_arc(model, Wing::A, tau),
                                   plus_arc(model, Wing::B, tau));
    return ov / (2 * kPi) * std::sin(tau) / 2.0;
  };
  return adaptive_simpson(integrand, 0.0, kPi, abs_tol, break_seeds(model));
}

}  // namespace

double model_marginal_plus(const ResponseModel& model, Wing wing) {
  std::vector<double> seeds;
  for (const PanelBreak& brk : support_breaks(model, wing)) {
    seeds.push_back(brk.x);
  }
  auto integrand = [&model, wing](double tau) {
    double len = arc_length(plus_arc(model, wing, tau));
    return len / (2 * kPi) * std::sin(tau) / 2.0;
  };
  return adaptive_simpson(integrand, 0.0, kPi, 1e-11, seeds);
}

double model_joint_plus_plus(const ResponseModel& model) {
  return joint_pp_quadrature(model, 1e-11);
}

double model_correlation(const ResponseModel& model) {
  auto integrand = [&model](double tau) {
    Arc arc_a = plus_arc(model, Wing::A, tau);
    Arc arc_b = plus_arc(model, Wing::B, tau);
    double la = arc_length(arc_a), lb = arc_length(arc_b);
    double ov = arc_overlap_length(arc_a, arc_b);
    // E(tau) = P(AB=+1) - P(AB=-1) on the azimuth circle.
    double e_tau = 1.0 - (la + lb) / kPi + 2.0 * ov / kPi;
    return e_tau * std::sin(tau) / 2.0;
  };
  return adaptive_simpson(integrand, 0.0, kPi, 1e-11, break_seeds(model));
}

double cap_overlap_probability(double xi, double chi, double delta_azimuth) {
  if (xi < 0 || xi > kPi || chi < 0 || chi > kPi) {
    throw std::invalid_argument("cap half-angles must lie in [0, pi]");
  }
  if (delta_azimuth < 0 || delta_azimuth > kPi) {
    throw std::invalid_argument("azimuth separation must lie in [0, pi]");
  }
  auto integrand = [xi, chi, delta_azimuth](double tau) {
    double ov = arc_overlap_length(cap_plus_arc(xi, 0.0, tau),
                                   cap_plus_arc(chi, delta_azimuth, tau));
    return ov / (2 * kPi) * std::sin(tau) / 2.0;
  };
  std::vector<double> seeds;
  for (double half : {xi, chi}) {
    double edge = std::asin(clamp_unit(std::abs(std::cos(half))));
    seeds.push_back(edge);
    seeds.push_back(kPi - edge);
  }
  return adaptive_simpson(integrand, 0.0, kPi, 1e-10, seeds);
}

namespace {

// Monotone bisection of `f` over [0, pi] for f(x) = target.  `f` is the
// model's joint(+1,+1) as a function of the azimuth separation; it is
// monotone in the separation for both model families (non-increasing for
// caps, orientation depending on the belt signs).  Raises
// calibration_error when the target lies outside the attained range.
double bisect_azimuth(const std::function<double(double)>& f, double target,
                      double tol, const char* what) {
  double f0 = f(0.0), f1 = f(kPi);
  double lo_val = std::min(f0, f1), hi_val = std::max(f0, f1);
  if (target < lo_val - tol || target > hi_val + tol) {
    std::ostringstream msg;
    msg << what << ": target joint probability " << target
        << " outside attainable range [" << lo_val << ", " << hi_val << "]";
    throw calibration_error(msg.str());
  }
  bool decreasing = f0 >= f1;
  double lo = 0.0, hi = kPi;
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    double val = f(mid);
    bool go_right = decreasing ? (val >= target) : (val <= target);
    if (go_right) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double sep = 0.5 * (lo + hi);
  if (std::abs(f(sep) - target) > std::max(tol, 1e-9)) {
    std::ostringstream msg;
    msg << what << ": residual " << std::abs(f(sep) - target)
        << " exceeds tolerance " << tol << " after bisection";
    throw calibration_error(msg.str());
  }
  return sep;
}

}  // namespace

CapModel calibrate_cap(const EntangledState& state,
                       const MeasurementDirection& a,
                       const MeasurementDirection& b, double tol) {
  if (tol <= 0) throw std::invalid_argument("calibration tol must be > 0");
  JointStats stats = joint_stats(state, a, b);
  double xi = std::acos(clamp_unit(-stats.expectation_a()));
  double chi = std::acos(clamp_unit(-stats.expectation_b()));
  double target = stats.joint(1, 1);
  double sep = bisect_azimuth(
      [xi, chi](double d) { return cap_overlap_probability(xi, chi, d); },
      target, tol, "cap calibration");
  return CapModel{state, a, b, xi, chi, 0.0, sep, tol};
}

BeltModel calibrate_belt(const EntangledState& state,
                         const MeasurementDirection& a,
                         const MeasurementDirection& b, double tol) {
  if (tol <= 0) throw std::invalid_argument("calibration tol must be > 0");
  JointStats stats = joint_stats(state, a, b);
  double ea = stats.expectation_a(), eb = stats.expectation_b();
  double eta_a = std::asin(clamp_unit(1.0 - std::abs(ea)));
  double eta_b = std::asin(clamp_unit(1.0 - std::abs(eb)));
  // The belt carries the minority outcome; at a symmetric marginal the
  // choice is immaterial and fixed to +1.
  int sign_a = ea > 0 ? -1 : 1;
  int sign_b = eb > 0 ? -1 : 1;
  double target = stats.joint(1, 1);
  auto joint_at = [&](double sep) {
    BeltModel trial{state, a, b, eta_a, eta_b, 0.0, sep, sign_a, sign_b, tol};
    return joint_pp_quadrature(ResponseModel{trial}, 1e-11);
  };
  double sep = bisect_azimuth(joint_at, target, tol, "belt calibration");
  return BeltModel{state, a, b, eta_a, eta_b, 0.0, sep, sign_a, sign_b, tol};
}

ResponseModel calibrate(ModelKind kind, const EntangledState& state,
                        const MeasurementDirection& a,
                        const MeasurementDirection& b, double tol) {
  if (kind == ModelKind::cap) return calibrate_cap(state, a, b, tol);
  return calibrate_belt(state, a, b, tol);
}

namespace {

const EntangledState& model_state(const ResponseModel& model) {
  return std::visit([](const auto& m) -> const EntangledState& { return m.state; },
                    model);
}

const MeasurementDirection& model_a(const ResponseModel& model) {
  return std::visit(
      [](const auto& m) -> const MeasurementDirection& { return m.a; }, model);
}

const MeasurementDirection& model_b(const ResponseModel& model) {
  return std::visit(
      [](const auto& m) -> const MeasurementDirection& { return m.b; }, model);
}

double safe_z(double estimate, double truth, double variance, double n) {
  double se = std::sqrt(std::max(variance, 0.0) / n);
  double diff = estimate - truth;
  if (se == 0.0) return std::abs(diff) < 1e-12 ? 0.0 : 1e9;
  return diff / se;
}

}  // namespace

VerifyReport verify_model(const ResponseModel& model, long long n_samples,
                          std::uint64_t seed) {
  if (n_samples < 10000) {
    throw std::invalid_argument("verification needs >= 1e4 samples");
  }
  JointStats stats = joint_stats(model_state(model), model_a(model),
                                 model_b(model));

  long long count_a = 0, count_b = 0;
  long long corr_sum = 0;
  for (long long i = 0; i < n_samples; ++i) {
    ResponseSample r = respond(
        model, sample_ontic_point(seed, 0, static_cast<std::uint64_t>(i)));
    count_a += r.a_value > 0;
    count_b += r.b_value > 0;
    corr_sum += r.a_value * r.b_value;
  }

  VerifyReport report;
  report.n_samples = n_samples;
  report.seed = seed;
  double n = static_cast<double>(n_samples);
  report.mc_marginal_a = static_cast<double>(count_a) / n;
  report.mc_marginal_b = static_cast<double>(count_b) / n;
  report.mc_correlation = static_cast<double>(corr_sum) / n;

  double pa = stats.marginal_a(1), pb = stats.marginal_b(1);
  report.z_marginal_a = safe_z(report.mc_marginal_a, pa, pa * (1 - pa), n);
  report.z_marginal_b = safe_z(report.mc_marginal_b, pb, pb * (1 - pb), n);
  double corr = stats.correlation();
  report.z_correlation =
      safe_z(report.mc_correlation, corr, 1.0 - corr * corr, n);

  report.quad_marginal_a = model_marginal_plus(model, Wing::A);
  report.quad_marginal_b = model_marginal_plus(model, Wing::B);
  report.quad_correlation = model_correlation(model);
  report.quad_joint_pp = model_joint_plus_plus(model);
  report.residual_marginal_a = std::abs(report.quad_marginal_a - pa);
  report.residual_marginal_b = std::abs(report.quad_marginal_b - pb);
  report.residual_correlation = std::abs(report.quad_correlation - corr);
  report.residual_joint_pp = std::abs(report.quad_joint_pp - stats.joint(1, 1));

  double max_residual =
      std::max({report.residual_marginal_a, report.residual_marginal_b,
                report.residual_correlation, report.residual_joint_pp});
  double max_z =
      std::max({std::abs(report.z_marginal_a), std::abs(report.z_marginal_b),
                std::abs(report.z_correlation)});
  report.passed = max_residual <= 1e-6 && max_z <= 5.0;
  return report;
}

std::string model_to_record(const ResponseModel& model) {
  nlohmann::ordered_json record;
  record["record"] = "response-model";
  record["schema_version"] = kSchemaVersion;
  record["library_version"] = kLibraryVersion;
  record["theta"] = model_state(model).theta();
  record["alpha_a"] = model_a(model).alpha();
  record["alpha_b"] = model_b(model).alpha();
  std::visit(
      [&record](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CapModel>) {
          record["kind"] = "cap";
          record["xi"] = m.xi;
          record["chi"] = m.chi;
          record["a_cap_azimuth"] = m.a_cap_azimuth;
          record["b_cap_azimuth"] = m.b_cap_azimuth;
        } else {
          record["kind"] = "belt";
          record["eta_a"] = m.eta_a;
          record["eta_b"] = m.eta_b;
          record["a_belt_azimuth"] = m.a_belt_azimuth;
          record["b_belt_azimuth"] = m.b_belt_azimuth;
          record["sign_a"] = m.sign_a;
          record["sign_b"] = m.sign_b;
        }
        record["calibration_tol"] = m.calibration_tol;
      },
      model);
  return record.dump(2);
}

ResponseModel model_from_record(const std::string& text) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("model record is not valid JSON: ") +
                      e.what());
  }
  try {
    if (record.at("record") != "response-model") {
      throw usage_error("not a response-model record");
    }
    EntangledState state(record.at("theta").get<double>());
    MeasurementDirection a(record.at("alpha_a").get<double>());
    MeasurementDirection b(record.at("alpha_b").get<double>());
    double tol = record.at("calibration_tol").get<double>();
    std::string kind = record.at("kind").get<std::string>();
    if (kind == "cap") {
      return CapModel{state,
                      a,
                      b,
                      record.at("xi").get<double>(),
                      record.at("chi").get<double>(),
                      record.at("a_cap_azimuth").get<double>(),
                      record.at("b_cap_azimuth").get<double>(),
                      tol};
    }
    if (kind == "belt") {
      return BeltModel{state,
                       a,
                       b,
                       record.at("eta_a").get<double>(),
                       record.at("eta_b").get<double>(),
                       record.at("a_belt_azimuth").get<double>(),
                       record.at("b_belt_azimuth").get<double>(),
                       record.at("sign_a").get<int>(),
                       record.at("sign_b").get<int>(),
                       tol};
    }
    throw usage_error("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed model record: ") + e.what());
  }
}

}  // namespace ontolab
