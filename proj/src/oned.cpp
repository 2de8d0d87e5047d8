#include "froglab/oned.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "froglab/parallel.hpp"
#include "froglab/stats.hpp"

namespace froglab {

double left_hit_probability_exact(const LeftHitModel& model) {
    if (model.kind == LeftHitModel::Kind::drift) {
        const double a = model.alpha;
        if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument(fmt::format("alpha={} outside [0,1]", a));
        if (a == 0.0) throw std::invalid_argument("alpha = 0 without death: every frog hits -1 (p = 1)");
        return (1.0 - a) / (1.0 + a);
    }
    const double s = model.survival;
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument(fmt::format("s={} outside [0,1]", s));
    if (s == 1.0) throw std::invalid_argument("s = 1 without drift: every frog hits -1 (p = 1)");
    if (s == 0.0) return 0.0;
    // smaller root of (s/2) q^2 - q + s/2 = 0
    return (1.0 - std::sqrt(1.0 - s * s)) / s;
}

int k0_threshold(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument(fmt::format("p={} outside [0,1)", p));
    // p^k (k+1-kp) is strictly decreasing in k, so the scan terminates.
    double pk = p;
    for (int k = 1; k < 100'000'000; ++k) {
        if (pk * (k + 1.0 - k * p) < 1.0 / 3.0) return k;
        pk *= p;
    }
    throw std::runtime_error("k0 scan did not terminate");
}

int binomial_quantile(int n, double p, double u) {
    if (n < 0) throw std::invalid_argument("binomial size must be non-negative");
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    double pmf = std::pow(1.0 - p, n);
    const double ratio = p / (1.0 - p);
    double cdf = pmf;
    for (int k = 0; k < n; ++k) {
        if (u < cdf) return k;
        pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
        cdf += pmf;
    }
    return n;
}

int y_step_from_uniform(int state, double p, double u) {
    if (state < 0) throw std::invalid_argument("Y state must be non-negative");
    if (state == 0) return 0;
    return binomial_quantile(state + 1, p, u);
}

int y_step(int state, double p, RngStream& rng) { return y_step_from_uniform(state, p, rng.uniform()); }

int dominating_step_from_uniform(int state, double p, int k0, double u) {
    if (state < 0 || (state > 0 && state < k0))
        throw std::invalid_argument(fmt::format("state {} outside {{0}} and [k0={}, inf)", state, k0));
    if (state == 0) return 0;
    if (state == k0) return u < std::pow(1.0 - p, k0 + 1) ? 0 : k0 + 1;
    return u < 2.0 / 3.0 ? state - 1 : state + 1;
}

int dominating_step(int state, double p, int k0, RngStream& rng) {
    return dominating_step_from_uniform(state, p, k0, rng.uniform());
}

LineFrogResult simulate_line_frogs(const LineFrogConfig& cfg, const RngStream& rng) {
    if (!(cfg.p_right >= 0.0 && cfg.p_right <= 1.0)) throw std::invalid_argument("p_right outside [0,1]");
    if (!(cfg.survival >= 0.0 && cfg.survival <= 1.0)) throw std::invalid_argument("survival outside [0,1]");
    if (cfg.initial_count < 1) throw std::invalid_argument("initial_count must be positive");
    if (cfg.survival == 1.0 && cfg.step_cap == 0 && cfg.p_right <= 0.5)
        throw std::invalid_argument("walks without death, drift or step cap never retire");

    LineFrogResult r;
    r.activated = cfg.initial_count;
    std::vector<std::pair<std::int64_t, int>> queue;
    for (int k = 0; k < cfg.initial_count; ++k) queue.emplace_back(0, k);
    const bool mortal = cfg.survival < 1.0;
    auto reached = [&](std::int64_t x) {
        queue.emplace_back(x, 0);
        ++r.activated;
        if (cfg.cap > 0 && r.activated >= cfg.cap) {
            r.activated = cfg.cap;
            r.capped = true;
        }
    };
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto [home, k] = queue[head];
        const std::uint64_t key = splitmix64(static_cast<std::uint64_t>(home)) + 2 * static_cast<std::uint64_t>(k);
        LeafStream move = rng.leaf(key);
        LeafStream death = rng.leaf(key + 1);
        std::int64_t pos = home;
        for (std::int64_t step = 0; cfg.step_cap == 0 || step < cfg.step_cap; ++step) {
            if (mortal && !(death.uniform() < cfg.survival)) break;
            pos += move.uniform() < cfg.p_right ? 1 : -1;
            if (pos > cfg.right_cut) break;
            if (pos < r.lo) {
                r.lo = pos;
                reached(pos);
                if (r.lo <= cfg.left_stop || r.capped) return r;
            } else if (pos > r.hi) {
                r.hi = pos;
                reached(pos);
                if (r.capped) return r;
            }
        }
    }
    return r;
}

std::int64_t line_right_cut(const LeftHitModel& model) {
    const double p = left_hit_probability_exact(model);
    if (p <= 0.0) return 1;
    const double r = std::ceil(std::log(1e-9) / std::log(p));
    return static_cast<std::int64_t>(std::min(r, 1e6));
}

ReachDecay reach_decay_estimate(const LeftHitModel& model, int n_max, std::int64_t trials,
                                const RngStream& rng, unsigned workers) {
    if (n_max < 3) throw std::invalid_argument("n_max must be at least 3");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    LineFrogConfig cfg;
    cfg.p_right = model.right_probability();
    cfg.survival = model.survival_probability();
    cfg.step_cap = 1000 * static_cast<std::int64_t>(n_max);
    cfg.right_cut = line_right_cut(model);
    cfg.left_stop = -n_max;

    std::vector<int> reach(static_cast<std::size_t>(trials));
    parallel_for(reach.size(), resolve_workers(workers), [&](std::size_t t) {
        const auto res = simulate_line_frogs(cfg, rng.child(t));
        reach[t] = static_cast<int>(std::min<std::int64_t>(-res.lo, n_max));
    });
    std::vector<std::int64_t> count(static_cast<std::size_t>(n_max) + 1, 0);
    for (int L : reach)
        for (int n = 1; n <= L; ++n) ++count[static_cast<std::size_t>(n)];

    ReachDecay out;
    out.trials = trials;
    out.right_cut = cfg.right_cut;
    std::vector<double> xs, ys;
    int first_zero = 0;
    const auto N = static_cast<double>(trials);
    for (int n = 1; n <= n_max; ++n) {
        const double est = static_cast<double>(count[static_cast<std::size_t>(n)]) / N;
        out.n.push_back(n);
        out.estimate.push_back(est);
        out.stderr_.push_back(std::sqrt(est * (1.0 - est) / N));
        if (est > 0.0) {
            xs.push_back(n);
            ys.push_back(std::log(est));
        } else if (first_zero == 0) {
            first_zero = n;
        }
    }
    out.lower_bound = first_zero != 0;
    out.fitted_points = xs.size();
    if (xs.size() >= 2) {
        const auto fit = fit_line(xs, ys);
        out.rate = -fit.slope;
        out.rate_stderr = fit.slope_stderr;
        out.r_squared = fit.r_squared;
        out.intercept = fit.intercept;
    } else {
        // rule of three: P(0 ~> -n) <= 3/trials at about 95% confidence
        const int n0 = first_zero != 0 ? first_zero : 1;
        out.rate = std::log(N / 3.0) / n0;
        out.lower_bound = true;
    }
    return out;
}

}  // namespace froglab
