#ifndef CPDQS_SPG_HPP
#define CPDQS_SPG_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>

#include "cpdqs/errors.hpp"
#include "cpdqs/instance.hpp"

namespace cpdqs {

// Where the spectral step length enters the search direction.  Spectral is
// the canonical d = P(x - lambda*grad) - x; Unit drops lambda from the
// projection (d = P(x - grad) - x) while still maintaining the spectral
// update, kept selectable for comparison runs.
enum class DirectionStep { Spectral, Unit };

// Acceptance interval for the quadratic-interpolation trial step.
// Scaled uses [sigma1*alpha, sigma2*alpha]; Literal uses the absolute lower
// bound [sigma1, sigma2*alpha].
enum class SafeguardMode { Scaled, Literal };

enum class TerminationReason {
  Stationary,     // projected-gradient residual at unit step <= eps
  SmallDecrease,  // |f(x_{k+1}) - f(x_k)| < eps_a
  WindowStall,    // every lag-M objective difference over 2M values < eps_b
  RoundedStall,   // rounded probe unchanged for stall_n iterations
  MaxIter,        // hard iteration cap
  Enumerated,     // exhaustive search finished (exact driver only)
};

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::Stationary: return "stationary";
    case TerminationReason::SmallDecrease: return "small_decrease";
    case TerminationReason::WindowStall: return "window_stall";
    case TerminationReason::RoundedStall: return "rounded_stall";
    case TerminationReason::MaxIter: return "max_iter";
    case TerminationReason::Enumerated: return "exact";
  }
  return "unknown";
}

template <typename Scalar>
struct SpgConfig {
  Scalar gamma = Scalar(1e-4);       // sufficient-decrease parameter
  int history_m = 10;                // nonmonotone window M
  Scalar sigma1 = Scalar(0.1);       // interpolation safeguards
  Scalar sigma2 = Scalar(0.9);
  Scalar lambda_min = Scalar(1e-10);  // spectral step safeguards
  Scalar lambda_max = Scalar(1e10);
  Scalar lambda0 = Scalar(1);
  Scalar alpha0 = Scalar(0.9);       // initial line-search trial step
  Scalar eps = Scalar(1e-8);         // stationarity tolerance
  Scalar eps_a = Scalar(1e-2);       // per-step decrease tolerance
  Scalar eps_b = Scalar(1e-2);       // windowed stall tolerance
  int stall_n = 50;                  // rounded-probe stall window
  long max_iter = 100000;
  int probe_period = 1;              // rounded probe every p iterations
  DirectionStep direction_step = DirectionStep::Spectral;
  SafeguardMode safeguard = SafeguardMode::Scaled;

  void validate() const {
    if (!(gamma > 0 && gamma < 1))
      throw Error("gamma must lie in (0, 1)");
    if (history_m < 1) throw Error("history M must be >= 1");
    if (!(sigma1 > 0 && sigma1 < sigma2 && sigma2 < 1))
      throw Error("safeguards must satisfy 0 < sigma1 < sigma2 < 1");
    if (!(lambda_min > 0 && lambda_min <= lambda_max &&
          std::isfinite(static_cast<double>(lambda_max))))
      throw Error("spectral bounds must satisfy 0 < lambda_min <= lambda_max < inf");
    if (!(lambda0 >= lambda_min && lambda0 <= lambda_max))
      throw Error("lambda0 must lie in [lambda_min, lambda_max]");
    if (!(alpha0 > 0)) throw Error("alpha0 must be positive");
    if (!(eps >= 0 && eps_a >= 0 && eps_b >= 0))
      throw Error("tolerances must be nonnegative");
    if (stall_n < 1) throw Error("stall window N must be >= 1");
    if (probe_period < 1) throw Error("probe period must be >= 1");
  }
};

// Everything observable about one accepted iteration; the trace stream and
// the audit tests both feed on this.
template <typename Scalar>
struct IterationRecord {
  long iteration = 0;    // 1-based index of the accepted step
  Scalar f = 0;          // objective after the step
  Scalar residual = 0;   // unit-step projected-gradient residual before the step
  Scalar lambda = 0;     // spectral step used in the direction
  Scalar alpha = 0;      // accepted line-search step
  int ls_trials = 0;     // objective evaluations inside the line search
  Scalar g_max = 0;      // nonmonotone reference value
  Scalar g_dot_d = 0;    // directional derivative at the line-search origin
};

template <typename Scalar>
struct SpgResult {
  Eigen::VectorX<Scalar> x;
  Scalar f = 0;
  long iterations = 0;
  TerminationReason reason = TerminationReason::MaxIter;
  Scalar final_residual = 0;
  long objective_evals = 0;
  long gradient_evals = 0;
};

template <typename Scalar>
using ObjectiveFn = std::function<Scalar(const Eigen::VectorX<Scalar>&)>;
template <typename Scalar>
using GradientFn =
    std::function<Eigen::VectorX<Scalar>(const Eigen::VectorX<Scalar>&)>;
template <typename Scalar>
using ProjectFn = std::function<void(Eigen::VectorX<Scalar>&)>;
template <typename Scalar>
using ProbeFn = std::function<Assignment(const Eigen::VectorX<Scalar>&)>;
template <typename Scalar>
using ObserverFn = std::function<void(const IterationRecord<Scalar>&,
                                      const Eigen::VectorX<Scalar>&)>;

// Search direction d = P(x - step*g) - x with step = lambda or 1 depending on
// the configured placement.
template <typename Scalar>
Eigen::VectorX<Scalar> spectral_direction(const Eigen::VectorX<Scalar>& x,
                                          const Eigen::VectorX<Scalar>& g,
                                          Scalar lambda,
                                          const ProjectFn<Scalar>& project,
                                          DirectionStep mode = DirectionStep::Spectral) {
  const Scalar step = mode == DirectionStep::Spectral ? lambda : Scalar(1);
  Eigen::VectorX<Scalar> d = x - step * g;
  project(d);
  d -= x;
  return d;
}

// Barzilai-Borwein step from the last displacement s and gradient change t:
// s's/s't clamped to [lambda_min, lambda_max], or lambda_max when s't <= 0.
template <typename Scalar>
Scalar bb_step_update(const Eigen::VectorX<Scalar>& s,
                      const Eigen::VectorX<Scalar>& t,
                      const SpgConfig<Scalar>& cfg) {
  const Scalar st = s.dot(t);
  if (st <= 0) return cfg.lambda_max;
  return std::max(cfg.lambda_min, std::min(s.dot(s) / st, cfg.lambda_max));
}

namespace detail {

template <typename Scalar>
void check_finite(Scalar f, const Eigen::VectorX<Scalar>& g, long iter) {
  if (!std::isfinite(static_cast<double>(f)))
    throw NumericError("objective is not finite at iteration " +
                           std::to_string(iter),
                       iter);
  if (!g.allFinite())
    throw NumericError("gradient is not finite at iteration " +
                           std::to_string(iter),
                       iter);
}

}  // namespace detail

template <typename Scalar>
struct LineSearchResult {
  Scalar alpha = 0;
  Eigen::VectorX<Scalar> x_new;
  Scalar f_new = 0;
  int trials = 0;
};

// Nonmonotone Armijo backtracking: accept the first alpha with
//   f(x + alpha*d) <= g_max + gamma * alpha * g'd,
// shrinking by safeguarded quadratic interpolation, else halving.  g_max is
// the maximum of the last min(k+1, M) objective values, supplied by the
// caller.  alpha underflow signals a non-descent direction.
template <typename Scalar>
LineSearchResult<Scalar> nonmonotone_line_search(
    const Eigen::VectorX<Scalar>& x, const Eigen::VectorX<Scalar>& d,
    Scalar f_x, Scalar g_max, Scalar g_dot_d, const SpgConfig<Scalar>& cfg,
    const ObjectiveFn<Scalar>& objective, long iter, long* eval_counter) {
  constexpr double kAlphaFloor = 1e-16;
  LineSearchResult<Scalar> out;
  Scalar alpha = cfg.alpha0;
  for (;;) {
    out.x_new = x + alpha * d;
    const Scalar f_trial = objective(out.x_new);
    if (eval_counter) ++*eval_counter;
    ++out.trials;
    if (!std::isfinite(static_cast<double>(f_trial)))
      throw NumericError("objective is not finite at iteration " +
                             std::to_string(iter),
                         iter);
    if (f_trial <= g_max + cfg.gamma * alpha * g_dot_d) {
      out.alpha = alpha;
      out.f_new = f_trial;
      return out;
    }
    const Scalar denom = f_trial - f_x - alpha * g_dot_d;
    const Scalar alpha_tmp =
        denom != 0 ? -(alpha * alpha * g_dot_d) / (2 * denom) : Scalar(0);
    const Scalar lo =
        cfg.safeguard == SafeguardMode::Scaled ? cfg.sigma1 * alpha : cfg.sigma1;
    const Scalar hi = cfg.sigma2 * alpha;
    if (std::isfinite(static_cast<double>(alpha_tmp)) && alpha_tmp >= lo &&
        alpha_tmp <= hi)
      alpha = alpha_tmp;
    else
      alpha /= 2;
    if (alpha < Scalar(kAlphaFloor))
      throw LineSearchError("line search step underflow at iteration " +
                            std::to_string(iter));
  }
}

// Spectral projected gradient over a closed convex set given by its
// projection.  Runs until one of the stopping rules fires:
//   stationary      ||P(x - grad) - x||_inf <= eps   (checked before a step)
//   small_decrease  |f_{k+1} - f_k| < eps_a
//   window_stall    all lag-M differences across the last 2M values < eps_b
//   rounded_stall   probe(x) unchanged for stall_n consecutive iterations
//   max_iter        hard cap
// Tolerances set to zero disable the corresponding rule (the comparisons are
// strict), except eps, where a residual of exactly zero still stops.
template <typename Scalar>
SpgResult<Scalar> spg_minimize(const ObjectiveFn<Scalar>& objective_fn,
                               const GradientFn<Scalar>& gradient_fn,
                               const ProjectFn<Scalar>& project,
                               Eigen::VectorX<Scalar> x0,
                               const SpgConfig<Scalar>& cfg,
                               const ProbeFn<Scalar>& probe = nullptr,
                               const ObserverFn<Scalar>& observer = nullptr) {
  cfg.validate();
  SpgResult<Scalar> res;
  if (!x0.allFinite()) throw NumericError("initial point is not finite", 0);

  // Feasible start; projecting a feasible point is the identity.
  project(x0);
  Eigen::VectorX<Scalar> x = std::move(x0);
  Scalar f = objective_fn(x);
  ++res.objective_evals;
  Eigen::VectorX<Scalar> g = gradient_fn(x);
  ++res.gradient_evals;
  detail::check_finite(f, g, 0);

  Scalar lambda =
      std::max(cfg.lambda_min, std::min(cfg.lambda0, cfg.lambda_max));
  const std::size_t window = 2 * static_cast<std::size_t>(cfg.history_m);
  std::deque<Scalar> history;
  history.push_back(f);

  std::optional<Assignment> last_probe;
  int probe_streak = 0;  // consecutive probes equal to the previous one
  if (probe) last_probe = probe(x);

  auto finish = [&](TerminationReason why, Scalar residual) {
    res.x = std::move(x);
    res.f = f;
    res.reason = why;
    res.final_residual = residual;
    return std::move(res);
  };

  for (long k = 0;; ++k) {
    Eigen::VectorX<Scalar> px = x - g;
    project(px);
    const Scalar residual =
        px.size() == 0 ? Scalar(0) : (px - x).template lpNorm<Eigen::Infinity>();
    if (residual <= cfg.eps) return finish(TerminationReason::Stationary, residual);
    if (k >= cfg.max_iter) return finish(TerminationReason::MaxIter, residual);

    Eigen::VectorX<Scalar> d =
        spectral_direction(x, g, lambda, project, cfg.direction_step);
    const Scalar g_dot_d = g.dot(d);
    if (g_dot_d >= 0) {
      // Numerically stationary: the projected step produced no usable
      // descent even though the unit-step residual is above eps.
      return finish(TerminationReason::Stationary, residual);
    }

    Scalar g_max = history.back();
    {
      const std::size_t span = std::min(
          history.size(), static_cast<std::size_t>(cfg.history_m));
      for (std::size_t j = history.size() - span; j < history.size(); ++j)
        g_max = std::max(g_max, history[j]);
    }

    LineSearchResult<Scalar> ls =
        nonmonotone_line_search(x, d, f, g_max, g_dot_d, cfg, objective_fn,
                                k + 1, &res.objective_evals);

    Eigen::VectorX<Scalar> g_new = gradient_fn(ls.x_new);
    ++res.gradient_evals;
    detail::check_finite(ls.f_new, g_new, k + 1);

    const Eigen::VectorX<Scalar> s = ls.x_new - x;
    const Eigen::VectorX<Scalar> t = g_new - g;
    const Scalar lambda_next = bb_step_update(s, t, cfg);

    const Scalar f_prev = f;
    x = std::move(ls.x_new);
    g = std::move(g_new);
    f = ls.f_new;
    res.iterations = k + 1;

    history.push_back(f);
    if (history.size() > window) history.pop_front();

    if (observer) {
      IterationRecord<Scalar> rec;
      rec.iteration = k + 1;
      rec.f = f;
      rec.residual = residual;
      rec.lambda = lambda;
      rec.alpha = ls.alpha;
      rec.ls_trials = ls.trials;
      rec.g_max = g_max;
      rec.g_dot_d = g_dot_d;
      observer(rec, x);
    }

    lambda = lambda_next;

    if (std::abs(f - f_prev) < cfg.eps_a)
      return finish(TerminationReason::SmallDecrease, residual);

    if (history.size() == window) {
      const std::size_t m = static_cast<std::size_t>(cfg.history_m);
      Scalar worst = 0;
      for (std::size_t j = 0; j < m; ++j)
        worst = std::max(worst, std::abs(history[j + m] - history[j]));
      if (worst < cfg.eps_b)
        return finish(TerminationReason::WindowStall, residual);
    }

    if (probe && (k + 1) % cfg.probe_period == 0) {
      Assignment a = probe(x);
      if (last_probe && a == *last_probe) {
        if (++probe_streak >= cfg.stall_n)
          return finish(TerminationReason::RoundedStall, residual);
      } else {
        probe_streak = 0;
        last_probe = std::move(a);
      }
    }
  }
}

}  // namespace cpdqs

#endif  // CPDQS_SPG_HPP
