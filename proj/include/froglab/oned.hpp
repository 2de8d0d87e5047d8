#pragma once

#include <cstdint>
#include <vector>

#include "froglab/rng.hpp"

namespace froglab {

/// The two one-dimensional frog models with exponentially decaying reach: FM(1, pi_{1,alpha})
/// with drift to the right, and FM*(1, pi_sym, s) with death.
struct LeftHitModel {
    enum class Kind { drift, death };
    Kind kind = Kind::drift;
    double alpha = 0.0;    // drift model
    double survival = 1.0;  // death model

    static LeftHitModel drift(double alpha) { return {Kind::drift, alpha, 1.0}; }
    static LeftHitModel death(double s) { return {Kind::death, 0.0, s}; }

    [[nodiscard]] double right_probability() const { return kind == Kind::drift ? (1.0 + alpha) / 2.0 : 0.5; }
    [[nodiscard]] double survival_probability() const { return kind == Kind::drift ? 1.0 : survival; }
};

/// p = P(a single frog from 0 ever visits -1).
/// Drift: (1-alpha)/(1+alpha). Death: (1 - sqrt(1-s^2))/s, and 0 for s = 0.
double left_hit_probability_exact(const LeftHitModel& model);

/// Smallest k >= 1 with P(Binomial(k+1, p) <= k-1) > 2/3, i.e. with
/// p^k (k+1-kp) < 1/3. Requires p in [0,1).
int k0_threshold(double p);

/// Binomial(n, p) inverse CDF at u.
int binomial_quantile(int n, double p, double u);

/// One step of Y: 0 stays 0, otherwise Binomial(state+1, p), drawn by
/// inversion of one uniform (the coupling with `dominating_step`).
int y_step_from_uniform(int state, double p, double u);
int y_step(int state, double p, RngStream& rng);

/// The dominating chain on {0} u {k0, k0+1, ...}: above k0 down with
/// probability 2/3 (u < 2/3) else up; at k0 to 0 when u < (1-p)^(k0+1),
/// else up; 0 absorbing.
int dominating_step_from_uniform(int state, double p, int k0, double u);
int dominating_step(int state, double p, int k0, RngStream& rng);

/// Nearest-neighbour frogs on Z, one sleeping frog per site. Because a
/// walk on Z visits an interval, the activated set is the interval
/// [lo, hi] of visited sites, and the simulation only tracks its ends.
struct LineFrogConfig {
    double p_right = 0.5;
    double survival = 1.0;
    /// Active frogs at 0 (site 0 then holds no sleeping frog).
    int initial_count = 1;
    /// Steps per frog; 0 is unlimited.
    std::int64_t step_cap = 0;
    /// Sites beyond this hold no frogs, and walks passing it retire.
    std::int64_t right_cut = std::int64_t{1} << 40;
    /// Stop as soon as lo <= left_stop.
    std::int64_t left_stop = -(std::int64_t{1} << 40);
    /// Stop once this many frogs are activated; 0 is unlimited.
    std::int64_t cap = 0;
};

struct LineFrogResult {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::int64_t activated = 0;
    bool capped = false;
};

/// Frog at site x (frog number k) draws from stream keys derived from
/// (x, k), so results do not depend on processing order.
LineFrogResult simulate_line_frogs(const LineFrogConfig& config, const RngStream& rng);

struct ReachDecay {
    std::vector<int> n;
    std::vector<double> estimate;  // P-hat(0 ~> -n)
    std::vector<double> stderr_;
    double rate = 0.0;         // c-hat: minus the fitted slope of log P-hat against n
    double rate_stderr = 0.0;
    double r_squared = 0.0;
    double intercept = 0.0;
    std::size_t fitted_points = 0;
    /// Some estimate was zero; `rate` is then a lower bound for c.
    bool lower_bound = false;
    std::int64_t trials = 0;
    std::int64_t right_cut = 0;
};

/// Right end of the line beyond which frogs are ignored: p^R < 1e-9.
std::int64_t line_right_cut(const LeftHitModel& model);

/// Monte Carlo estimates of P(0 ~> -n), n = 1..n_max, with a per-frog step
/// cap of 1000 n_max, and a log-linear fit of the decay.
ReachDecay reach_decay_estimate(const LeftHitModel& model, int n_max, std::int64_t trials,
                                const RngStream& rng, unsigned workers = 1);

}  // namespace froglab
