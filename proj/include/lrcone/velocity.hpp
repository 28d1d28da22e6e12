#ifndef LRCONE_VELOCITY_HPP
#define LRCONE_VELOCITY_HPP

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lrcone/lrbound.hpp"

namespace lrcone {

struct KappaOptimum {
  double kappa_star = 1.0;
  /// min over kappa of e^kappa / kappa
  double objective_min = std::numbers::e;
  /// step_factor * sqrt(2 g J) * objective_min
  double v_lr = 0.0;
};

inline double kappa_objective(double kappa) { return std::exp(kappa) / kappa; }

/// Minimise e^k / k over k > 0 by bisection on the sign of its derivative
/// e^k (k - 1) / k^2, after bracketing.
inline KappaOptimum optimize_kappa(const Couplings& c) {
  c.validate();
  auto slope = [](double k) { return std::exp(k) * (k - 1.0) / (k * k); };
  double lo = 0.5, hi = 2.0;
  while (slope(lo) >= 0) lo *= 0.5;
  while (slope(hi) <= 0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0 ? lo : hi) = mid;
  }
  KappaOptimum k;
  k.kappa_star = 0.5 * (lo + hi);
  k.objective_min = kappa_objective(k.kappa_star);
  k.v_lr = c.step_factor * c.light_speed() * k.objective_min;
  return k;
}

class ThresholdUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArrivalOptions {
  BoundOptions bound{.rel_tol = 1e-12};
  /// Bisection stops when the bracket is this narrow relative to t.
  double t_rel_precision = 1e-13;
  double t_cap = 1e6;
  double expand = 1.25;
};

/// Time t* at which B(t*, d) first reaches epsilon. B is increasing in t, so
/// a geometric bracket expansion followed by bisection finds it.
inline double arrival_time(int d, double epsilon, const Couplings& c, const WalkCountSource& counts,
                           const ArrivalOptions& opt = {}) {
  if (d < 1) throw std::invalid_argument("arrival time needs d >= 1");
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
  auto above = [&](double t) { return evaluate_bound(t, d, c, counts, opt.bound).value > epsilon; };

  double lo = 0.0;
  double hi = d / optimize_kappa(c).v_lr;
  while (!above(hi)) {
    lo = hi;
    hi *= opt.expand;
    if (hi > opt.t_cap)
      throw ThresholdUnreachable("epsilon not reached at d = " + std::to_string(d) + " before t = " +
                                 std::to_string(opt.t_cap));
  }
  for (int i = 0; i < 400 && hi - lo > opt.t_rel_precision * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Arrival {
  int d;
  double t;
};

struct BoundSample {
  double t;
  int d;
  double value;
};

/// Least-squares line d = v t + d0 through arrival data.
struct ArrivalFit {
  double v = 0;
  double d0 = 0;
  /// RMS of d - (v t + d0)
  double residual_rms = 0;
};

struct FitWindow {
  int d_min = 0;
  int d_max = 0;
  double epsilon = 0;
};

/// Envelope B ~ 2 |O_P| |O_Q| A exp(-(d - v t) / xi).
struct LightConeFit {
  double A = 0;
  double xi = 0;
  double v = 0;
  double residual_rms = 0;
  FitWindow window;
};

namespace detail {

inline void require_finite(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite input to light-cone fit");
}

// Ordinary least squares y = b0 + b1 x1 (+ b2 x2) on centred data.
struct Ols {
  double b0 = 0, b1 = 0, b2 = 0, rms = 0;
};

inline Ols ols(std::span<const double> y, std::span<const double> x1, std::span<const double> x2 = {}) {
  const std::size_t n = y.size();
  const bool two = !x2.empty();
  auto mean = [n](std::span<const double> v) {
    double s = 0;
    for (double a : v) s += a;
    return s / n;
  };
  const double my = mean(y), m1 = mean(x1), m2 = two ? mean(x2) : 0.0;
  double s11 = 0, s22 = 0, s12 = 0, s1y = 0, s2y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x1[i] - m1, b = two ? x2[i] - m2 : 0.0, c = y[i] - my;
    s11 += a * a;
    s22 += b * b;
    s12 += a * b;
    s1y += a * c;
    s2y += b * c;
  }
  Ols r;
  if (!two) {
    if (!(s11 > 0)) throw std::invalid_argument("degenerate design matrix");
    r.b1 = s1y / s11;
  } else {
    const double det = s11 * s22 - s12 * s12;
    if (!(det > 1e-12 * s11 * s22) || !(s11 > 0) || !(s22 > 0)) throw std::invalid_argument("degenerate design matrix");
    r.b1 = (s1y * s22 - s2y * s12) / det;
    r.b2 = (s2y * s11 - s1y * s12) / det;
  }
  r.b0 = my - r.b1 * m1 - r.b2 * m2;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (r.b0 + r.b1 * x1[i] + (two ? r.b2 * x2[i] : 0.0));
    ss += e * e;
  }
  r.rms = std::sqrt(ss / n);
  return r;
}

inline void check_span(int d_min, int d_max, std::size_t points) {
  if (points < 4) throw std::invalid_argument("light-cone fit needs at least 4 points");
  if (d_min == d_max) throw std::invalid_argument("degenerate design matrix: all distances equal");
  if (d_max < 2 * d_min) throw std::invalid_argument("distance range must span at least a factor of 2");
}

}  // namespace detail

/// v is the slope of d against t*.
inline ArrivalFit fit_arrivals(std::span<const Arrival> arrivals) {
  std::vector<double> ds, ts;
  int d_min = INT_MAX, d_max = INT_MIN;
  for (const auto& a : arrivals) {
    detail::require_finite(a.t);
    ds.push_back(a.d);
    ts.push_back(a.t);
    d_min = std::min(d_min, a.d);
    d_max = std::max(d_max, a.d);
  }
  detail::check_span(d_min, d_max, arrivals.size());
  auto o = detail::ols(ds, ts);
  return {o.b1, o.b0, o.rms};
}

/// Fit log B = log 2A - d / xi + (v / xi) t to grid samples spanning at least
/// two times and two distances. residual_rms is in units of log B.
inline LightConeFit fit_lightcone(std::span<const BoundSample> grid) {
  std::vector<double> y, ds, ts;
  int d_min = INT_MAX, d_max = INT_MIN;
  for (const auto& s : grid) {
    detail::require_finite(s.t);
    detail::require_finite(s.value);
    if (!(s.value > 0)) throw std::invalid_argument("light-cone fit needs positive bound values");
    y.push_back(std::log(s.value));
    ds.push_back(s.d);
    ts.push_back(s.t);
    d_min = std::min(d_min, s.d);
    d_max = std::max(d_max, s.d);
  }
  detail::check_span(d_min, d_max, grid.size());
  auto o = detail::ols(y, ds, ts);
  if (!(o.b1 < 0)) throw std::invalid_argument("bound does not decay with distance");
  LightConeFit f;
  f.xi = -1.0 / o.b1;
  f.v = o.b2 * f.xi;
  f.A = 0.5 * std::exp(o.b0);
  f.residual_rms = o.rms;
  f.window = {d_min, d_max, 0.0};
  return f;
}

/// Velocity from arrival times; decay length and prefactor from a slice of
/// B at a single time. residual_rms is that of the arrival line.
inline LightConeFit fit_lightcone(std::span<const Arrival> arrivals, std::span<const BoundSample> slice,
                                  double epsilon) {
  auto line = fit_arrivals(arrivals);
  std::vector<double> y, ds;
  const double t_ref = slice.empty() ? 0.0 : slice.front().t;
  for (const auto& s : slice) {
    detail::require_finite(s.value);
    if (s.t != t_ref) throw std::invalid_argument("slice samples must share one time");
    if (!(s.value > 0)) throw std::invalid_argument("light-cone fit needs positive bound values");
    y.push_back(std::log(s.value));
    ds.push_back(s.d);
  }
  if (y.size() < 2) throw std::invalid_argument("slice needs at least two distances");
  auto o = detail::ols(y, ds);
  if (!(o.b1 < 0)) throw std::invalid_argument("bound does not decay with distance");
  LightConeFit f;
  f.v = line.v;
  f.xi = -1.0 / o.b1;
  f.A = 0.5 * std::exp(o.b0 - line.v * t_ref / f.xi);
  f.residual_rms = line.residual_rms;
  int d_min = INT_MAX, d_max = INT_MIN;
  for (const auto& a : arrivals) {
    d_min = std::min(d_min, a.d);
    d_max = std::max(d_max, a.d);
  }
  f.window = {d_min, d_max, epsilon};
  return f;
}

struct VelocityConfig {
  Couplings couplings;
  double epsilon = 1e-8;
  int d_min = 10;
  int d_max = 40;
  ArrivalOptions arrival;
  /// Number of consecutive sub-windows used to report the trend of v with d.
  int trend_windows = 3;

  void validate() const {
    couplings.validate();
    if (!(epsilon > 0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
    if (d_min < 1 || d_max <= d_min) throw std::invalid_argument("need 1 <= d_min < d_max");
    if (trend_windows < 1) throw std::invalid_argument("trend_windows must be positive");
  }
};

struct LocalVelocity {
  int d_lo;
  int d_hi;
  double v;
};

struct VelocityReport {
  VelocityConfig config;
  std::vector<Arrival> arrivals;
  std::vector<BoundSample> slice;
  LightConeFit fit;
  KappaOptimum kappa;
  double ratio_v_over_c = 0;
  double ratio_v_over_vlr = 0;
  std::vector<LocalVelocity> trend;
};

/// Arrival times over [d_min, d_max], the fitted cone and the analytic
/// optimum. Arrivals for distinct d are independent; `threads` only changes
/// wall time.
inline VelocityReport measure_velocity(const VelocityConfig& cfg, const WalkCountSource& counts,
                                       unsigned threads = 1) {
  cfg.validate();
  VelocityReport rep;
  rep.config = cfg;
  const int n = cfg.d_max - cfg.d_min + 1;
  rep.arrivals.resize(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](int begin, int stride) {
    for (int i = begin; i < n; i += stride) {
      try {
        const int d = cfg.d_min + i;
        rep.arrivals[i] = {d, arrival_time(d, cfg.epsilon, cfg.couplings, counts, cfg.arrival)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work, static_cast<int>(k), static_cast<int>(threads));
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Slice at the arrival time of the window midpoint.
  const double t_ref = rep.arrivals[n / 2].t;
  for (int d = cfg.d_min; d <= cfg.d_max; ++d) {
    const double b = evaluate_bound(t_ref, d, cfg.couplings, counts, cfg.arrival.bound).value;
    if (b > 0) rep.slice.push_back({t_ref, d, b});
  }
  rep.fit = fit_lightcone(rep.arrivals, rep.slice, cfg.epsilon);
  // The fits return A for unit norms.
  rep.fit.A /= cfg.couplings.norm_p * cfg.couplings.norm_q;
  rep.kappa = optimize_kappa(cfg.couplings);
  rep.ratio_v_over_c = rep.fit.v / cfg.couplings.light_speed();
  rep.ratio_v_over_vlr = rep.fit.v / rep.kappa.v_lr;

  const int w = std::max(2, n / cfg.trend_windows);
  for (int start = 0; start + w <= n; start += w) {
    auto part = std::span<const Arrival>(rep.arrivals).subspan(start, w);
    std::vector<double> ds, ts;
    for (const auto& a : part) {
      ds.push_back(a.d);
      ts.push_back(a.t);
    }
    rep.trend.push_back({part.front().d, part.back().d, detail::ols(ds, ts).b1});
  }
  return rep;
}

}  // namespace lrcone

#endif  // LRCONE_VELOCITY_HPP
