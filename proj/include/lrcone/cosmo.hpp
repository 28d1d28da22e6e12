#ifndef LRCONE_COSMO_HPP
#define LRCONE_COSMO_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lrcone/lrbound.hpp"

namespace lrcone {

/// Two-step branching of walks on the D-dimensional decorated lattice.
///  paper: 4 D (D - 1), the count quoted for hypercubic lattices.
///  graph: 8 (D - 1) = 4 links per plaquette x 2 (D - 1) plaquettes per link.
/// Both give 8 at D = 2 and 0 at D = 1.
enum class Branching { paper, graph };

inline const char* to_string(Branching b) { return b == Branching::paper ? "paper" : "graph"; }

inline Branching parse_branching(const std::string& s) {
  if (s == "paper") return Branching::paper;
  if (s == "graph") return Branching::graph;
  throw std::invalid_argument("unknown branching convention '" + s + "'");
}

inline double branching_factor(double D, Branching b) {
  if (!(D >= 1)) throw std::invalid_argument("dimension must be >= 1");
  return b == Branching::paper ? 4.0 * D * (D - 1.0) : 8.0 * (D - 1.0);
}

inline long long branching_factor(int D, Branching b) {
  if (D < 1) throw std::invalid_argument("dimension must be >= 1");
  const long long d = D;
  return b == Branching::paper ? 4 * d * (d - 1) : 8 * (d - 1);
}

/// Below D = 2 there are no plaquettes: strict mode rejects such dimensions,
/// toy mode assigns them zero velocity.
enum class DimensionMode { strict, toy };

inline const char* to_string(DimensionMode m) { return m == DimensionMode::strict ? "strict" : "toy"; }

inline DimensionMode parse_dimension_mode(const std::string& s) {
  if (s == "strict") return DimensionMode::strict;
  if (s == "toy") return DimensionMode::toy;
  throw std::invalid_argument("unknown dimension mode '" + s + "'");
}

/// v(D) = s e sqrt(b_D g J) / 2, which for s = sqrt 2 is (e / sqrt 2) sqrt(b_D g J)
/// and at D = 2 equals the optimised two-dimensional velocity s e sqrt(2 g J).
inline double v_lr_dimension(double D, const Couplings& c, Branching b, DimensionMode mode = DimensionMode::strict) {
  c.validate();
  if (!std::isfinite(D)) throw std::invalid_argument("dimension must be finite");
  if (D < 2) {
    if (mode == DimensionMode::strict) throw std::domain_error("dimension below 2 has no plaquettes");
    return 0.0;
  }
  return 0.5 * c.step_factor * std::numbers::e * std::sqrt(branching_factor(D, b) * c.g * c.J);
}

/// Dimension shrinking linearly in time: D(t) = D_in (1 - alpha t).
struct HorizonModel {
  double D_in = 100;
  double alpha = 0.01;
  Couplings couplings;
  Branching convention = Branching::paper;
  DimensionMode mode = DimensionMode::strict;

  void validate() const {
    couplings.validate();
    if (!(D_in >= 1) || !std::isfinite(D_in)) throw std::invalid_argument("D_in must be >= 1");
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be nonnegative");
  }

  double dimension_at(double t) const { return D_in * (1.0 - alpha * t); }

  /// Throws std::domain_error if D leaves the admissible range on [t_i, t_f].
  void check_interval(double t_i, double t_f) const {
    if (!(t_i <= t_f)) throw std::invalid_argument("need t_i <= t_f");
    const double lowest = std::min(dimension_at(t_i), dimension_at(t_f));
    if (lowest < 1) throw std::domain_error("D(t) drops below 1 on the requested interval");
    if (mode == DimensionMode::strict && lowest < 2)
      throw std::domain_error("D(t) drops below 2 on the requested interval (strict mode)");
  }
};

inline double horizon_speed(const HorizonModel& m, double t) {
  return v_lr_dimension(m.dimension_at(t), m.couplings, m.convention, m.mode);
}

/// Integral of v(D(t)) over [t_i, t_f] by adaptive Gauss-Kronrod quadrature.
inline double horizon_distance(const HorizonModel& m, double t_i, double t_f, double rel_tol = 1e-8) {
  m.validate();
  m.check_interval(t_i, t_f);
  if (t_i == t_f) return 0.0;
  auto f = [&](double t) { return horizon_speed(m, t); };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  // v(D) is zero below D = 2 in toy mode; split at the kink.
  std::vector<double> cuts{t_i};
  if (m.alpha > 0 && m.D_in > 2) {
    const double t2 = (1.0 - 2.0 / m.D_in) / m.alpha;
    if (t2 > t_i && t2 < t_f) cuts.push_back(t2);
  }
  cuts.push_back(t_f);
  const double tol = std::min(rel_tol, 1e-10);
  CompensatedSum total;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) total.add(Quad::integrate(f, cuts[k], cuts[k + 1], 20, tol));
  return total.value();
}

/// r(t_k) = horizon_distance(t_start, t_k) on a uniform grid of `steps` points.
inline std::vector<std::pair<double, double>> lightcone_boundary(const HorizonModel& m, double t_start, double t_end,
                                                                 int steps, double rel_tol = 1e-8) {
  if (steps < 2) throw std::invalid_argument("need at least 2 steps");
  m.validate();
  m.check_interval(t_start, t_end);
  std::vector<std::pair<double, double>> out;
  out.reserve(steps);
  const double h = (t_end - t_start) / (steps - 1);
  CompensatedSum r;
  double prev = t_start;
  out.emplace_back(t_start, 0.0);
  for (int k = 1; k < steps; ++k) {
    const double t = (k == steps - 1) ? t_end : t_start + k * h;
    r.add(horizon_distance(m, prev, t, rel_tol));
    out.emplace_back(t, r.value());
    prev = t;
  }
  return out;
}

}  // namespace lrcone

#endif  // LRCONE_COSMO_HPP
