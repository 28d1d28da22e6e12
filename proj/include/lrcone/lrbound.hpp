#ifndef LRCONE_LRBOUND_HPP
#define LRCONE_LRBOUND_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lrcone/pathcount.hpp"

namespace lrcone {

/// Effective couplings of the gauge model and the endpoint operator norms.
struct Couplings {
  double g = 0.5;
  double J = 0.5;
  double norm_p = 1.0;
  double norm_q = 1.0;
  /// Per-order factor multiplying |t|; 2 is the unrefined bound.
  double step_factor = std::sqrt(2.0);

  void validate() const {
    if (!(g > 0) || !std::isfinite(g)) throw std::invalid_argument("coupling g must be positive");
    if (!(J > 0) || !std::isfinite(J)) throw std::invalid_argument("coupling J must be positive");
    if (!(norm_p > 0) || !(norm_q > 0)) throw std::invalid_argument("operator norms must be positive");
    if (!(step_factor > 0) || step_factor > 2) throw std::invalid_argument("step_factor must lie in (0, 2]");
  }

  /// Emergent speed of light sqrt(2 g J).
  double light_speed() const { return std::sqrt(2.0 * g * J); }
  double prefactor() const { return 2.0 * norm_p * norm_q; }
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log a_n = log N'(n, d) + (n/2) log(gJ); -inf when N' vanishes.
inline double log_series_coefficient(int n, int d, const WalkCountSource& counts, const Couplings& c) {
  if (n < 0) throw std::invalid_argument("series order must be nonnegative");
  if (n > counts.max_order()) throw CountSourceExhausted(n, counts.max_order());
  const double lc = counts.log_count(n, d);
  if (std::isinf(lc)) return lc;
  return lc + 0.5 * n * std::log(c.g * c.J);
}

/// a_n = N'(n, d) (gJ)^{n/2}. Counts below 2^53 are converted directly, so
/// gJ = 1 gives the integer exactly.
inline double series_coefficient(int n, int d, const WalkCountSource& counts, const Couplings& c) {
  const double la = log_series_coefficient(n, d, counts, c);
  if (std::isinf(la) || la > 40.0) return std::exp(la);
  const BigInt N = counts.count(n, d);
  if (N < (BigInt(1) << 53)) return static_cast<double>(N) * std::pow(c.g * c.J, 0.5 * n);
  return std::exp(la);
}

struct BoundOptions {
  double rel_tol = 1e-10;
  /// Consecutive terms below rel_tol * partial sum required before stopping.
  int window = 5;
  /// Hard cap on the truncation index.
  int n_cap = 4096;
  bool keep_terms = false;
  /// Candidate kappa values for the analytic tail; the smallest valid
  /// estimate wins.
  std::vector<double> tail_kappas{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

  void validate() const {
    if (!(rel_tol > 0) || rel_tol > 1e-2) throw std::invalid_argument("rel_tol must lie in (0, 1e-2]");
    if (window < 1) throw std::invalid_argument("window must be positive");
    if (tail_kappas.empty()) throw std::invalid_argument("need at least one tail kappa");
  }
};

struct BoundSeriesResult {
  double t = 0;
  int d = 0;
  double value = 0;
  int n_truncate = 0;
  double tail_estimate = 0;
  std::optional<std::vector<double>> terms;
};

/// The series ran past its cap without meeting the stopping rule.
class SeriesDidNotConverge : public std::runtime_error {
 public:
  SeriesDidNotConverge(double t, int d, int n, double partial, double last_term, double tail)
      : std::runtime_error(describe(t, d, n, partial, last_term, tail)), n_(n), partial_(partial), tail_(tail) {}
  int last_order() const { return n_; }
  double partial_sum() const { return partial_; }
  double tail() const { return tail_; }

 private:
  static std::string describe(double t, int d, int n, double partial, double last, double tail) {
    std::ostringstream os;
    os.precision(6);
    os << "bound series did not converge at t = " << t << ", d = " << d << ": stopped at n = " << n
       << " with partial sum " << partial << ", last term " << last << ", tail estimate " << tail;
    return os.str();
  }
  int n_;
  double partial_;
  double tail_;
};

/// Natural log of tail_bound; -inf at t = 0.
inline double log_tail_bound(int n_truncate, double t, int d, const Couplings& c, double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (n_truncate < 0) throw std::invalid_argument("n_truncate must be nonnegative");
  t = std::fabs(t);
  if (t == 0) return -std::numeric_limits<double>::infinity();
  const double x = c.step_factor * t * std::sqrt(8.0 * c.g * c.J) * std::exp(kappa);
  const double m = n_truncate + 2.0;
  if (!(x < m)) throw std::domain_error("tail bound needs a larger truncation index");
  return std::log(2.0 * c.prefactor()) + kappa * (4.0 - 2.0 * d) + (n_truncate + 1.0) * std::log(x) -
         std::lgamma(n_truncate + 2.0) - std::log1p(-x / m);
}

/// Upper bound on sum_{n > n_truncate} of the series terms, from the gross
/// walk-count bound and the exponential remainder estimate.
inline double tail_bound(int n_truncate, double t, int d, const Couplings& c, double kappa) {
  return std::exp(log_tail_bound(n_truncate, t, d, c, kappa));
}

namespace detail {
inline double best_tail(int n, double t, int d, const Couplings& c, const std::vector<double>& kappas) {
  double best = std::numeric_limits<double>::infinity();
  for (double k : kappas) {
    const double x = c.step_factor * std::fabs(t) * std::sqrt(8.0 * c.g * c.J) * std::exp(k);
    if (!(x < n + 2.0)) continue;
    best = std::min(best, tail_bound(n, t, d, c, k));
  }
  return best;
}
}  // namespace detail

/// B(t, d) = 2 |O_P| |O_Q| sum_n (s |t|)^n a_n / n!, summed in increasing n.
/// Stops at the first n where `window` consecutive terms are each below
/// rel_tol times the partial sum and the analytic tail is below it too.
inline BoundSeriesResult evaluate_bound(double t, int d, const Couplings& c, const WalkCountSource& counts,
                                        const BoundOptions& opt = {}) {
  c.validate();
  opt.validate();
  if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
  if (d < 0) throw std::invalid_argument("distance must be nonnegative");
  t = std::fabs(t);

  BoundSeriesResult r;
  r.t = t;
  r.d = d;
  if (opt.keep_terms) r.terms.emplace();

  if (t == 0) {
    const double a0 = series_coefficient(0, d, counts, c);
    r.value = c.prefactor() * a0;
    if (r.terms) r.terms->push_back(r.value);
    return r;
  }

  const double log_st = std::log(c.step_factor * t);
  CompensatedSum sum;
  int small_run = 0;
  double term = 0, tail = std::numeric_limits<double>::infinity();
  for (int n = 0;; ++n) {
    if (n > opt.n_cap) throw SeriesDidNotConverge(t, d, n - 1, sum.value(), term, tail);
    const double la = log_series_coefficient(n, d, counts, c);
    term = std::isinf(la) ? 0.0 : c.prefactor() * std::exp(la + n * log_st - std::lgamma(n + 1.0));
    sum.add(term);
    if (r.terms) r.terms->push_back(term);
    const double threshold = opt.rel_tol * sum.value();
    small_run = term <= threshold ? small_run + 1 : 0;
    if (small_run >= opt.window) {
      tail = detail::best_tail(n, t, d, c, opt.tail_kappas);
      if (tail <= threshold) {
        r.value = sum.value();
        r.n_truncate = n;
        r.tail_estimate = tail;
        return r;
      }
    }
  }
}

/// Evaluate B over the grid ts x ds (row-major in t). Each point sums in its
/// own fixed order, so results do not depend on `threads`.
inline std::vector<BoundSeriesResult> evaluate_grid(std::span<const double> ts, std::span<const int> ds,
                                                    const Couplings& c, const WalkCountSource& counts,
                                                    const BoundOptions& opt = {}, unsigned threads = 1) {
  const std::size_t total = ts.size() * ds.size();
  std::vector<BoundSeriesResult> out(total);
  std::vector<std::exception_ptr> errors(total);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < total; i += stride) {
      try {
        out[i] = evaluate_bound(ts[i / ds.size()], ds[i % ds.size()], c, counts, opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || total < 2) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work, k, threads);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace lrcone

#endif  // LRCONE_LRBOUND_HPP
