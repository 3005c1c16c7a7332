#pragma once

// Path simulation of the Levy process xi, the 1-self-similar process
// Xbar_t = x0 exp(xi_{T(t/x0)}) and the Laguerre process X_t = e^{-t} Xbar_{e^t - 1},
// with replica-parallel estimators.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "bernstein.hpp"
#include "distributions.hpp"
#include "numeric.hpp"
#include "poly.hpp"
#include "quadrature.hpp"

namespace glsemi {

/// Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

/// Counter-based stream: key = seed, counter = (block, purpose, replica).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t replica, std::uint32_t purpose = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        purpose_(purpose),
        replica_(replica) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      if (block_ == std::numeric_limits<std::uint32_t>::max())
        throw std::runtime_error("random stream exhausted");
      buf_ = philox4x32({block_++, purpose_, static_cast<std::uint32_t>(replica_),
                         static_cast<std::uint32_t>(replica_ >> 32)},
                        key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32(), lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2 * std::log(uniform()));
    const double a = 2 * std::numbers::pi * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double exponential() { return -std::log(uniform()); }

  /// Poisson count by sequential inversion; intended for small means.
  long poisson(double mean) {
    if (!(mean > 0)) return 0;
    double p = std::exp(-mean), cdf = p, u = uniform();
    long k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p == 0) break;
    }
    return k;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t purpose_;
  std::uint64_t replica_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0;
};

struct PathConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  double eps_absorb = 1e-6;
  std::uint64_t seed = 1;
  long replicas = 10000;
  /// 0 means one worker per hardware thread.
  int threads = 0;
  /// Levy steps are dt / state, capped at adapt_cap * dt near 0.
  double adapt_cap = 64;
};

struct PathSample {
  std::vector<double> times;
  std::vector<double> states;
  bool absorbed = false;
  double absorption_time = std::numeric_limits<double>::infinity();
};

/// Exact increments of a Brownian motion with drift minus a compound Poisson process.
class LevySampler {
 public:
  explicit LevySampler(const LevyQuadruplet& q)
      : b_(q.beta + q.jumps.small_jump_mean()), sigma_(std::sqrt(q.sigma2)) {
    if (q.kappa != 0) throw DomainError("path simulation needs kappa = 0");
    for (const auto& c : q.jumps.components)
      std::visit(
          [&](const auto& j) {
            if constexpr (std::is_same_v<std::decay_t<decltype(j)>, Atom>)
              comps_.push_back({j.w, j.y, 0});
            else
              comps_.push_back({j.c / j.lambda, 0, j.lambda});
          },
          c);
    for (const auto& c : comps_) rate_ += c.rate;
  }

  double drift() const { return b_; }
  double sigma() const { return sigma_; }
  double jump_rate() const { return rate_; }

  /// xi_{s+h} - xi_s; remembers the step so that partial() can bridge it.
  double sample(RandomStream& rng, double h) {
    h_ = h;
    w_ = sigma_ > 0 ? std::sqrt(h) * rng.normal() : 0;
    jumps_.clear();
    double total = b_ * h + sigma_ * w_;
    const long n = rate_ > 0 ? rng.poisson(rate_ * h) : 0;
    for (long i = 0; i < n; ++i) {
      double u = rng.uniform() * rate_;
      std::size_t c = 0;
      while (c + 1 < comps_.size() && u > comps_[c].rate) u -= comps_[c++].rate;
      const double y = comps_[c].lambda > 0 ? rng.exponential() / comps_[c].lambda : comps_[c].atom;
      jumps_.push_back({rng.uniform(), y});
      total -= y;
    }
    return total;
  }

  /// xi_{s+f h} - xi_s given the last sampled step.
  double partial(RandomStream& rng, double f) const {
    double w = f * w_;
    if (sigma_ > 0) w += std::sqrt(f * (1 - f) * h_) * rng.normal();
    return increment_at(f, w);
  }

  struct Crossing {
    bool crossed = false;
    /// xi increment at the crossing, or over the whole step.
    double increment = 0;
    /// clock accumulated up to that point
    double clock = 0;
  };

  /// Locates where the clock c, with dc = speed(xi increment, c) dtau, reaches target
  /// inside the last sampled step, by bisection with Brownian bridges.
  template <typename Speed>
  Crossing locate(RandomStream& rng, double target, Speed&& speed, int levels = 14) const {
    double a = 0, b = 1, wa = 0, wb = w_, ua = 0, ub = increment_at(1, w_), ca = 0;
    const auto piece = [&](double u0, double u1, double c0, double len) {
      double d = len * (speed(u0, c0) + speed(u1, c0)) / 2;
      return len * (speed(u0, c0) + speed(u1, c0 + d)) / 2;
    };
    for (int i = 0; i < levels; ++i) {
      const double m = (a + b) / 2;
      double wm = (wa + wb) / 2;
      if (sigma_ > 0) wm += std::sqrt((b - a) * h_ / 4) * rng.normal();
      const double um = increment_at(m, wm);
      const double d = piece(ua, um, ca, (m - a) * h_);
      if (ca + d >= target) {
        b = m, wb = wm, ub = um;
      } else {
        a = m, wa = wm, ua = um, ca += d;
      }
    }
    const double d = piece(ua, ub, ca, (b - a) * h_);
    if (ca + d < target) {
      if (b < 1) return {true, ub, target};
      return {false, ub, ca + d};
    }
    const double f = d > 0 ? (target - ca) / d : 0;
    return {true, ua + f * (ub - ua), target};
  }

 private:
  struct Comp {
    double rate, atom, lambda;
  };
  double b_, sigma_, rate_ = 0;
  std::vector<Comp> comps_;
  double increment_at(double f, double w) const {
    double r = b_ * f * h_ + sigma_ * w;
    for (const auto& j : jumps_)
      if (j.first < f) r -= j.second;
    return r;
  }

  double h_ = 0, w_ = 0;
  std::vector<std::pair<double, double>> jumps_;
};

/// Outcome of running Xbar for a clock budget: the state at the budget, or
/// the (interpolated) time at which Xbar fell below the absorption level.
struct SsmpRun {
  double state = 0;
  bool absorbed = false;
  double time = 0;
};

/// Streams Xbar through the Lamperti clock without storing the path.
class SsmpWalker {
 public:
  SsmpWalker(const LevyQuadruplet& q, double dt, double adapt_cap = 64, long max_steps = 100000000)
      : lev_(q), dt_(dt), cap_(std::max(1.0, adapt_cap)), max_steps_(max_steps) {
    if (!(dt > 0)) throw DomainError("dt must be positive");
  }

  SsmpRun run(double x, double budget, double eps, RandomStream& rng) {
    if (!(x > 0)) throw DomainError("starting point must be positive");
    if (x <= eps) return {0, true, 0};
    if (budget <= 0) return {x, false, 0};
    const double leps = std::log(eps);
    double l = std::log(x), clock = 0;
    for (long n = 0; n < max_steps_; ++n) {
      const double xl = std::exp(l);
      const double h = dt_ * std::min(cap_, 1 / xl);
      const double ln = l + lev_.sample(rng, h);
      const double xn = std::exp(ln);
      const double step = h * (xl + xn) / 2;
      double t_abs = std::numeric_limits<double>::infinity();
      if (ln <= leps) {
        const double f = (l - leps) / (l - ln);
        t_abs = clock + f * h * (xl + eps) / 2;
      }
      if (clock + 1.5 * step >= budget && t_abs >= budget) {
        const auto c = lev_.locate(rng, budget - clock,
                                   [&](double u, double) { return xl * std::exp(u); });
        if (c.crossed) return {std::exp(l + c.increment), false, budget};
        if (ln <= leps) return {0, true, t_abs};
        clock += c.clock;
        l = ln;
        continue;
      }
      if (ln <= leps) return {0, true, t_abs};
      clock += step;
      l = ln;
    }
    throw ClockOverrun("Lamperti clock did not reach the requested time within the step limit");
  }

  LevySampler& levy() { return lev_; }

 private:
  LevySampler lev_;
  double dt_, cap_;
  long max_steps_;
};

struct LaguerreRun {
  double state = 0;
  bool absorbed = false;
  double time = 0;
};

/// Streams X directly: along Levy time tau, log X = log x + xi_tau - t with
/// Laguerre time dt = X dtau, so each Levy step of length dt / X advances t by ~dt.
class LaguerreWalker {
 public:
  LaguerreWalker(const LevyQuadruplet& q, double dt, double adapt_cap = 64,
                 long max_steps = 1000000000)
      : lev_(q), dt_(dt), cap_(std::max(1.0, adapt_cap)), max_steps_(max_steps) {
    if (!(dt > 0)) throw DomainError("dt must be positive");
  }

  /// Minimal process from x up to Laguerre time t_end or the first passage below eps.
  LaguerreRun run(double x, double t_end, double eps, RandomStream& rng) {
    if (!(x > 0)) throw DomainError("starting point must be positive");
    if (x <= eps) return {0, true, 0};
    const double leps = std::log(eps);
    double l = std::log(x), t = 0;
    for (long n = 0; n < max_steps_; ++n) {
      if (t >= t_end) return {std::exp(l), false, t_end};
      const Step s = step(l, rng);
      double t_abs = std::numeric_limits<double>::infinity();
      if (s.ln <= leps) t_abs = t + s.dt * (l - leps) / (l - s.ln);
      if (t + 1.5 * s.dt >= t_end && t_abs >= t_end) {
        const auto c = crossing(l, t_end - t, rng);
        if (c.crossed) return {std::exp(l + c.increment - c.clock), false, t_end};
        if (s.ln <= leps) return {0, true, t_abs};
        t += c.clock;
        l += c.increment - c.clock;
        continue;
      }
      if (s.ln <= leps) return {0, true, t_abs};
      t += s.dt;
      l = s.ln;
    }
    throw ClockOverrun("Laguerre clock did not reach the requested time within the step limit");
  }

  /// Time average of X^k over [burn_in, burn_in + horizon] for the recurrent
  /// extension: below eps / 100 the path restarts at eps.
  double time_average(double x, double k, double burn_in, double horizon, double eps,
                      RandomStream& rng) {
    const double l_abs = std::log(eps / 100), l_restart = std::log(eps);
    double l = std::log(x), t = 0;
    CompensatedSum<double> area, span;
    for (long n = 0; n < max_steps_; ++n) {
      if (t >= burn_in + horizon) return area.value() / span.value();
      const Step s = step(l, rng);
      double dt = s.dt, ln = s.ln;
      if (ln <= l_abs) {
        dt *= (l - l_abs) / (l - ln);
        ln = l_abs;
      }
      if (t >= burn_in) {
        area.add(dt * (std::exp(k * l) + std::exp(k * ln)) / 2);
        span.add(dt);
      }
      t += dt;
      l = ln <= l_abs ? l_restart : ln;
    }
    throw ClockOverrun("Laguerre clock did not reach the requested time within the step limit");
  }

  /// The recurrent extension sampled every dt_out on [0, horizon].
  PathSample recurrent_path(double x, double horizon, double dt_out, double eps,
                            RandomStream& rng) {
    const double l_abs = std::log(eps / 100), l_restart = std::log(eps);
    PathSample p;
    double l = std::log(x), t = 0, next = 0;
    for (long n = 0; n < max_steps_; ++n) {
      while (next <= t + 1e-12 && next <= horizon + 1e-12) {
        p.times.push_back(next);
        p.states.push_back(std::exp(l));
        next = static_cast<double>(p.times.size()) * dt_out;
      }
      if (next > horizon + 1e-12) return p;
      const Step s = step(l, rng);
      if (t + 1.5 * s.dt >= next && s.ln > l_abs) {
        const auto c = crossing(l, next - t, rng);
        l += c.increment - c.clock;
        t = c.crossed ? next : t + c.clock;
        continue;
      }
      if (s.ln <= l_abs) {
        t += s.dt * (l - l_abs) / (l - s.ln);
        l = l_restart;
      } else {
        t += s.dt;
        l = s.ln;
      }
    }
    throw ClockOverrun("Laguerre clock did not reach the requested time within the step limit");
  }

 private:
  struct Step {
    double dt, ln;
  };

  Step step(double l, RandomStream& rng) {
    const double x = std::exp(l);
    const double h = dt_ * std::min(cap_, 1 / x);
    const double inc = lev_.sample(rng, h);
    const double xp = x * std::exp(inc);
    double dt = h * (x + xp) / 2;
    dt = h * (x + xp * std::exp(-dt)) / 2;
    return {dt, l + inc - dt};
  }

  LevySampler::Crossing crossing(double l, double target, RandomStream& rng) {
    const double x = std::exp(l);
    return lev_.locate(rng, target, [&](double u, double c) { return x * std::exp(u - c); });
  }

  LevySampler lev_;
  double dt_, cap_;
  long max_steps_;
};

/// xi on the grid k dt, k dt <= horizon, started at 0.
inline PathSample simulate_levy(const LevyQuadruplet& q, const PathConfig& cfg, RandomStream& rng) {
  PathSample p;
  if (cfg.horizon <= 0) return p;
  LevySampler lev(q);
  const long n = std::lround(std::floor(cfg.horizon / cfg.dt + 1e-9));
  p.times.reserve(static_cast<std::size_t>(n) + 1);
  p.states.reserve(static_cast<std::size_t>(n) + 1);
  double x = 0;
  p.times.push_back(0);
  p.states.push_back(0);
  for (long k = 1; k <= n; ++k) {
    x += lev.sample(rng, cfg.dt);
    p.times.push_back(static_cast<double>(k) * cfg.dt);
    p.states.push_back(x);
  }
  return p;
}

/// Xbar on its own clock grid x0 A(s_k); stops at the first state <= eps.
inline PathSample lamperti_path(const PathSample& levy, double x0, double eps = 0) {
  if (!(x0 > 0)) throw DomainError("x0 must be positive");
  PathSample p;
  if (levy.times.empty()) return p;
  double clock = 0;
  p.times.push_back(0);
  p.states.push_back(x0 * std::exp(levy.states[0]));
  for (std::size_t k = 1; k < levy.times.size(); ++k) {
    const double h = levy.times[k] - levy.times[k - 1];
    clock += h * (std::exp(levy.states[k - 1]) + std::exp(levy.states[k])) / 2;
    const double x = x0 * std::exp(levy.states[k]);
    p.times.push_back(x0 * clock);
    p.states.push_back(x);
    if (x <= eps) {
      p.absorbed = true;
      p.absorption_time = x0 * clock;
      p.states.back() = 0;
      break;
    }
  }
  return p;
}

/// Linear interpolation of a path; 0 after absorption, ClockOverrun beyond coverage.
inline double path_value(const PathSample& p, double t) {
  if (p.times.empty()) throw ClockOverrun("empty path");
  if (p.absorbed && t >= p.absorption_time) return 0;
  if (t > p.times.back()) throw ClockOverrun("path covers the clock only up to " +
                                             std::to_string(p.times.back()));
  const auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
  if (it == p.times.begin()) return p.states.front();
  if (it == p.times.end()) return p.states.back();
  const auto k = static_cast<std::size_t>(it - p.times.begin());
  const double f = (t - p.times[k - 1]) / (p.times[k] - p.times[k - 1]);
  return p.states[k - 1] + f * (p.states[k] - p.states[k - 1]);
}

/// X_t = e^{-t} Xbar_{e^t - 1} on the grid k dt_out up to horizon.
inline PathSample laguerre_path(const PathSample& ssmp, double horizon, double dt_out) {
  PathSample p;
  const long n = std::lround(std::floor(horizon / dt_out + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt_out;
    p.times.push_back(t);
    p.states.push_back(std::exp(-t) * path_value(ssmp, std::expm1(t)));
  }
  if (ssmp.absorbed) {
    p.absorbed = true;
    p.absorption_time = std::log1p(ssmp.absorption_time);
  }
  return p;
}

/// Recurrent Laguerre process by epsilon-restart: absorbed below eps_absorb/100,
/// restarted at eps_absorb. Sampled every dt_out up to cfg.horizon.
inline PathSample simulate_recurrent_laguerre(const LevyQuadruplet& q, const PathConfig& cfg,
                                              double x0, double dt_out, RandomStream& rng) {
  LaguerreWalker walker(q, cfg.dt, cfg.adapt_cap);
  return walker.recurrent_path(x0, cfg.horizon, dt_out, cfg.eps_absorb, rng);
}

/// One Euler-Maruyama step of dX = (1-theta-X)dt + sqrt(2X+)dW, returning the
/// unreflected update.
inline double classical_em_step(double theta, double x, double dt, RandomStream& rng) {
  return x + (1 - theta - x) * dt + std::sqrt(2 * std::max(x, 0.0) * dt) * rng.normal();
}

/// Euler-Maruyama step length: dt away from 0, ratio * x near 0, never below floor * dt.
struct ClassicalStepRule {
  double ratio = 0.002;
  double floor = 1e-6;
  double operator()(double x, double dt) const {
    return std::clamp(ratio * x, floor * dt, dt);
  }
};

/// Reflected Euler-Maruyama path on the grid k dt with boundary-refined substeps;
/// absorption fields record the first passage below 0. With stop_at_absorption
/// the minimal process is returned (0 after absorption).
inline PathSample simulate_classical(double theta, const PathConfig& cfg, double x0,
                                     RandomStream& rng, bool stop_at_absorption = false,
                                     ClassicalStepRule rule = {}) {
  if (!(theta > 0 && theta < 1)) throw DomainError("theta must lie in (0, 1)");
  PathSample p;
  const long n = std::lround(std::floor(cfg.horizon / cfg.dt + 1e-9));
  double x = x0, t = 0;
  p.times.push_back(0);
  p.states.push_back(x);
  for (long k = 1; k <= n; ++k) {
    const double t_next = static_cast<double>(k) * cfg.dt;
    while (t < t_next && !(p.absorbed && stop_at_absorption)) {
      const double h = std::min(rule(x, cfg.dt), t_next - t);
      const double y = classical_em_step(theta, x, h, rng);
      if (y <= 0 && !p.absorbed) {
        p.absorbed = true;
        p.absorption_time = t + h * x / (x - y);
      }
      x = std::abs(y);
      t = (t_next - t - h <= 1e-15 * t_next) ? t_next : t + h;
      if (p.absorbed && stop_at_absorption) {
        x = 0;
        break;
      }
    }
    p.times.push_back(t_next);
    p.states.push_back(x);
  }
  return p;
}

/// E[e^{-q T_0}] for the classical process from x: T_0 = log(1 + x/G), G ~ Gamma(theta).
inline double classical_hitting_laplace(double theta, double q, double x) {
  if (x <= 0) return 1;
  // g = s^{1/theta} turns g^{theta-1} dg / Gamma(theta) into ds / Gamma(1+theta).
  const double s_max = std::pow(60.0, theta);
  const double r = integrate_gl<double>(
      [&](double s) {
        const double g = std::pow(s, 1 / theta);
        return std::exp(-q * std::log1p(x / g) - g);
      },
      0.0, s_max, 400, 10);
  return r / std::tgamma(1 + theta);
}

struct KilledSemigroup {
  ThetaShiftedPoly<double> f;
  double x = 1, t = 1;
};
struct HittingLaplace {
  double q = 1, x = 1;
};
/// Time average over [burn_in, burn_in + cfg.horizon] of the epsilon-restarted process.
struct StationaryMoment {
  int k = 1;
  double burn_in = 5;
  double x0 = 1;
};
/// Hitting Laplace transform of the classical process by Euler-Maruyama.
struct ClassicalHittingLaplace {
  double theta = 0.5, q = 1, x = 1;
  /// Paths still alive at this Laguerre time contribute e^{-q t_max}.
  double t_max = 25;
};

using Observable =
    std::variant<KilledSemigroup, HittingLaplace, StationaryMoment, ClassicalHittingLaplace>;

struct Estimate {
  double value = 0;
  double stderr_ = 0;
  long replicas = 0;
};

/// Mean and standard error, summed in index order.
inline Estimate summarize(const std::vector<double>& v) {
  Estimate e;
  e.replicas = static_cast<long>(v.size());
  if (v.empty()) return e;
  CompensatedSum<double> s;
  for (double x : v) s.add(x);
  const double mean = s.value() / static_cast<double>(v.size());
  CompensatedSum<double> ss;
  for (double x : v) ss.add((x - mean) * (x - mean));
  e.value = mean;
  if (v.size() > 1)
    e.stderr_ = std::sqrt(ss.value() / static_cast<double>(v.size() - 1) /
                          static_cast<double>(v.size()));
  return e;
}

/// Runs body(i) for i < n on worker threads; results land at index i.
inline std::vector<double> run_replicas(long n, int threads,
                                        const std::function<double(long)>& body) {
  std::vector<double> out(static_cast<std::size_t>(n));
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, std::max(1L, n)));
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    constexpr long chunk = 64;
    while (!failed) {
      const long lo = next.fetch_add(chunk);
      if (lo >= n) return;
      try {
        for (long i = lo; i < std::min(n, lo + chunk); ++i)
          out[static_cast<std::size_t>(i)] = body(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

namespace detail {

inline double classical_hitting_replica(const ClassicalHittingLaplace& o, const PathConfig& cfg,
                                        RandomStream& rng) {
  const ClassicalStepRule rule;
  double x = o.x, t = 0;
  while (t < o.t_max) {
    const double h = rule(x, cfg.dt);
    const double y = classical_em_step(o.theta, x, h, rng);
    if (y <= 0) return std::exp(-o.q * (t + h * x / (x - y)));
    x = y;
    t += h;
  }
  return std::exp(-o.q * o.t_max);
}

}  // namespace detail

/// Per-replica samples of an observable; `purpose` separates independent uses of one seed.
inline std::vector<double> sample_observable(const LevyQuadruplet& q, const Observable& obs,
                                             const PathConfig& cfg, std::uint32_t purpose = 0) {
  return std::visit(
      [&](const auto& o) -> std::vector<double> {
        using T = std::decay_t<decltype(o)>;
        return run_replicas(cfg.replicas, cfg.threads, [&](long i) {
          RandomStream rng(cfg.seed, static_cast<std::uint64_t>(i), purpose);
          if constexpr (std::is_same_v<T, ClassicalHittingLaplace>) {
            return detail::classical_hitting_replica(o, cfg, rng);
          } else {
            LaguerreWalker walker(q, cfg.dt, cfg.adapt_cap);
            if constexpr (std::is_same_v<T, KilledSemigroup>) {
              const LaguerreRun r = walker.run(o.x, o.t, cfg.eps_absorb, rng);
              return r.absorbed ? 0.0 : o.f(r.state);
            } else if constexpr (std::is_same_v<T, HittingLaplace>) {
              const LaguerreRun r = walker.run(o.x, std::numeric_limits<double>::infinity(),
                                               cfg.eps_absorb, rng);
              return std::exp(-o.q * r.time);
            } else {
              return walker.time_average(o.x0, o.k, o.burn_in, cfg.horizon, cfg.eps_absorb, rng);
            }
          }
        });
      },
      obs);
}

inline Estimate estimate(const LevyQuadruplet& q, const Observable& obs, const PathConfig& cfg,
                         std::uint32_t purpose = 0) {
  return summarize(sample_observable(q, obs, cfg, purpose));
}

template <std::floating_point Real>
Estimate estimate(const PsiModel<Real>& model, const Observable& obs, const PathConfig& cfg,
                  std::uint32_t purpose = 0) {
  return estimate(model.quadruplet(), obs, cfg, purpose);
}

/// phi^X_q(x) = E[phi^Y_q(x I_phi)]: the left side by simulation of X, the right
/// side through the Gauss rule of I_phi with phi^Y_q either exact or simulated.
struct IntertwinedHittingReport {
  Estimate lhs;
  double rhs_exact = 0;
  double z_exact = 0;
  double rhs_em = 0;
  double rhs_em_stderr = 0;
  double z_em = 0;
};

template <std::floating_point Real>
double intertwined_hitting_exact(const PsiModel<Real>& model, double q, double x, int nodes = 8) {
  const auto rule = gauss_rule_iphi(model, nodes);
  const double theta = static_cast<double>(model.theta());
  double r = 0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j)
    r += static_cast<double>(rule.weights[j]) *
         classical_hitting_laplace(theta, q, x * static_cast<double>(rule.nodes[j]));
  return r;
}

/// cfg_em.replicas == 0 skips the simulated right side.
template <std::floating_point Real>
IntertwinedHittingReport intertwined_hitting_check(const PsiModel<Real>& model, double q, double x,
                                                   const PathConfig& cfg_x,
                                                   const PathConfig& cfg_em, int nodes = 8) {
  IntertwinedHittingReport rep;
  rep.lhs = estimate(model, HittingLaplace{q, x}, cfg_x, 1);
  rep.rhs_exact = intertwined_hitting_exact(model, q, x, nodes);
  rep.z_exact = (rep.lhs.value - rep.rhs_exact) / rep.lhs.stderr_;
  if (cfg_em.replicas == 0) return rep;
  const auto rule = gauss_rule_iphi(model, nodes);
  const double theta = static_cast<double>(model.theta());
  double var = 0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double w = static_cast<double>(rule.weights[j]);
    const Estimate e = estimate(
        model, ClassicalHittingLaplace{theta, q, x * static_cast<double>(rule.nodes[j])}, cfg_em,
        static_cast<std::uint32_t>(100 + j));
    rep.rhs_em += w * e.value;
    var += w * w * e.stderr_ * e.stderr_;
  }
  rep.rhs_em_stderr = std::sqrt(var);
  rep.z_em = (rep.lhs.value - rep.rhs_em) /
             std::sqrt(rep.lhs.stderr_ * rep.lhs.stderr_ + var);
  return rep;
}

}  // namespace glsemi
