#include "froglab/brw.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "froglab/frog.hpp"
#include "froglab/lattice.hpp"
#include "froglab/oned.hpp"
#include "froglab/parallel.hpp"
#include "froglab/stats.hpp"

namespace froglab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(fmt::format("{}={} outside [0,1]", name, v));
}

}  // namespace

XiDraw sample_xi(double w, std::int64_t cap, const RngStream& rng, std::int64_t step_cap) {
    if (!(w > 0.0 && w <= 1.0))
        throw std::invalid_argument(fmt::format("w={} outside (0,1]; at w = 0 xi is infinite", w));
    if (cap < 2) throw std::invalid_argument("cap must be at least 2");
    LineFrogConfig cfg;
    cfg.p_right = 0.5;
    cfg.survival = 1.0 - w;
    cfg.initial_count = 2;
    cfg.cap = cap;
    cfg.step_cap = step_cap;
    const auto r = simulate_line_frogs(cfg, rng);
    return {r.activated, r.capped};
}

double mu_exact_1d(double alpha, double theta, double mean_xi) {
    return 0.5 * ((1.0 - alpha) * std::exp(theta) + (1.0 + alpha) * std::exp(-theta)) * mean_xi;
}

double reference_brw_boundary(double alpha) {
    check_unit(alpha, "alpha");
    if (alpha == 0.0) return 1.0;
    return std::min(1.0, 1.0 / (2.0 * (1.0 - std::sqrt(1.0 - alpha * alpha))));
}

MuEstimate estimate_mu_1d_projected(double alpha, double w, double theta, std::int64_t trials,
                                    const RngStream& rng, const ProjectedOptions& options) {
    check_unit(alpha, "alpha");
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    std::vector<double> xi(static_cast<std::size_t>(trials));
    std::vector<std::uint8_t> capped(xi.size(), 0);
    parallel_for(xi.size(), resolve_workers(options.workers), [&](std::size_t t) {
        const auto draw = sample_xi(w, options.cap, rng.child(t));
        xi[t] = static_cast<double>(draw.count);
        capped[t] = draw.capped;
    });
    const auto m = mean_ci(xi);
    const double factor = mu_exact_1d(alpha, theta, 1.0);
    MuEstimate e;
    e.theta = theta;
    e.mu_hat = factor * m.mean;
    e.stderr_ = factor * m.stderr_;
    e.ci_low = factor * m.low;
    e.ci_high = factor * m.high;
    e.trials = trials;
    e.cap_fraction = static_cast<double>(std::count(capped.begin(), capped.end(), 1)) / static_cast<double>(trials);
    e.flagged = e.cap_fraction > 0.01;
    // xi is truncated only at the cap
    e.truncated_mass = e.cap_fraction > 0.0 ? kInf : 0.0;
    e.a_hat = factor;
    e.b_hat = m.mean;
    return e;
}

double line_decay_rate(double alpha, const RngStream& rng) {
    check_unit(alpha, "alpha");
    if (alpha == 0.0) return 0.0;
    const auto decay = reach_decay_estimate(LeftHitModel::drift(alpha), 10, 5000, rng);
    return decay.rate;
}

namespace {

std::int64_t walk_step_cap(double w, double alpha, const LinesOptions& o) {
    if (o.step_cap > 0) return o.step_cap;
    const double v = w * alpha;
    if (v <= 0.0) return 20'000;
    return static_cast<std::int64_t>(std::min(20'000.0, 2.0 * (o.level_cap + 1) / v + 200.0));
}

// One walk from (start,0,...,0) until its level exceeds start + level_cap
// or the step cap: distinct off-line sites per level.
std::vector<std::pair<int, std::int64_t>> walk_occupancy(const StepSampler& sampler, int d, int start, int level_cap,
                                                         std::int64_t step_cap, LeafStream& move, int& stop_level) {
    Point pos(d);
    pos[0] = start;
    std::unordered_set<Point, PointHash> seen;
    std::map<int, std::int64_t> count;
    for (std::int64_t k = 0; k < step_cap; ++k) {
        const Step st = sampler.sample(move);
        if (st.is_hold()) continue;
        apply_step(pos, st);
        if (pos[0] > start + level_cap) break;
        if (!pos.lateral_is_zero() && seen.insert(pos).second) ++count[pos[0]];
    }
    stop_level = pos[0];
    return {count.begin(), count.end()};
}

struct LineRun {
    std::vector<int> reached;
    bool truncated = false;
    std::vector<std::int64_t> children;  // e1 coordinates, when collected
};

// Frog model with sleeping frogs on L_0 n [-cap, cap] only, started by the
// frog at 0.
LineRun run_line_frogs(const TransitionKernel& kernel, const LinesOptions& o, std::int64_t step_cap,
                       const RngStream& rng, bool collect_children) {
    const int d = kernel.d;
    const StepSampler sampler(kernel);
    const int L = o.level_cap;
    std::vector<std::uint8_t> awake(static_cast<std::size_t>(2 * L + 1), 0);
    std::deque<int> queue{0};
    awake[static_cast<std::size_t>(L)] = 1;
    LineRun run;
    std::int64_t total = 0;
    while (!queue.empty()) {
        const int home = queue.front();
        queue.pop_front();
        run.reached.push_back(home);
        Point pos(d);
        pos[0] = home;
        LeafStream move = rng.leaf(frog_key(pos, 0));
        std::unordered_set<Point, PointHash> seen;
        for (std::int64_t k = 0; k < step_cap; ++k) {
            if (o.line_step_budget > 0 && ++total > o.line_step_budget) {
                run.truncated = true;
                std::sort(run.reached.begin(), run.reached.end());
                return run;
            }
            const Step st = sampler.sample(move);
            if (st.is_hold()) continue;
            apply_step(pos, st);
            if (pos[0] > L) break;
            if (pos.lateral_is_zero()) {
                if (pos[0] >= -L) {
                    auto& a = awake[static_cast<std::size_t>(pos[0] + L)];
                    if (!a) {
                        a = 1;
                        queue.push_back(pos[0]);
                    }
                }
            } else if (collect_children && seen.insert(pos).second) {
                run.children.push_back(pos[0]);
            }
        }
    }
    std::sort(run.reached.begin(), run.reached.end());
    return run;
}

TransitionKernel lines_kernel(int d, double w, double alpha) {
    if (d < 2 || d > kMaxDim) throw std::invalid_argument("the line construction needs 2 <= d <= 8");
    TransitionKernel k{d, w, alpha, 0.0};
    k.validate();
    return k;
}

}  // namespace

LineSamples sample_lines(int d, double w, double alpha, std::int64_t trials, const RngStream& rng,
                         const LinesOptions& options) {
    const TransitionKernel kernel = lines_kernel(d, w, alpha);
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (options.level_cap < 1) throw std::invalid_argument("level_cap must be positive");
    LineSamples s;
    s.d = d;
    s.w = w;
    s.alpha = alpha;
    s.level_cap = options.level_cap;
    s.c_hat = std::isnan(options.c_hat) ? line_decay_rate(alpha, rng.child(3)) : options.c_hat;
    const std::int64_t cap = walk_step_cap(w, alpha, options);
    const unsigned workers = resolve_workers(options.workers);
    const auto n = static_cast<std::size_t>(trials);

    s.occupancy.resize(n);
    s.stop_level.resize(n);
    const StepSampler sampler(kernel);
    const RngStream walks = rng.child(1);
    parallel_for(n, workers, [&](std::size_t t) {
        LeafStream move = walks.leaf(t);
        s.occupancy[t] = walk_occupancy(sampler, d, 0, options.level_cap, cap, move, s.stop_level[t]);
    });

    // one probe run first: when it overruns the budget every run would, and
    // the estimate cannot be certified anyway
    const RngStream lines = rng.child(2);
    auto probe = run_line_frogs(kernel, options, cap, lines.child(0), false);
    if (probe.truncated) {
        s.reached.push_back(std::move(probe.reached));
        s.truncated_runs = 1;
        return s;
    }
    s.reached.resize(n);
    s.reached[0] = std::move(probe.reached);
    std::vector<std::uint8_t> trunc(n, 0);
    parallel_for(n - 1, workers, [&](std::size_t j) {
        auto run = run_line_frogs(kernel, options, cap, lines.child(j + 1), false);
        trunc[j + 1] = run.truncated;
        s.reached[j + 1] = std::move(run.reached);
    });
    s.truncated_runs = std::count(trunc.begin(), trunc.end(), 1);
    return s;
}

MuEstimate LineSamples::evaluate(double theta) const {
    MuEstimate e;
    e.theta = theta;
    Accumulator a, b, a_tail;
    const double v = w * alpha;
    const double rho = alpha < 1.0 ? (1.0 - alpha) / (1.0 + alpha) : 0.0;
    const double up = 1.0 / (1.0 - std::exp(-theta));
    const double down_ratio = rho * std::exp(theta);
    const double spread = (v > 0.0 && down_ratio < 1.0) ? (up + down_ratio / (1.0 - down_ratio)) / v : kInf;
    for (std::size_t t = 0; t < occupancy.size(); ++t) {
        double sum = 0.0;
        for (const auto& [k, c] : occupancy[t]) sum += static_cast<double>(c) * std::exp(-theta * k);
        a.add(sum);
        // visits still to come after the walk stopped, counted with multiplicity
        a_tail.add(w < 1.0 ? std::exp(-theta * stop_level[t]) * spread : 0.0);
    }
    for (const auto& r : reached) {
        double sum = 0.0;
        for (int i : r) sum += std::exp(-theta * i);
        b.add(sum);
    }
    e.a_hat = a.mean();
    e.b_hat = b.mean();
    e.mu_hat = e.a_hat * e.b_hat;
    e.trials = static_cast<std::int64_t>(occupancy.size());
    const double var = e.b_hat * e.b_hat * a.variance() / std::max<double>(1.0, a.count()) +
                       e.a_hat * e.a_hat * b.variance() / std::max<double>(1.0, b.count());
    e.stderr_ = std::sqrt(var);
    e.ci_low = e.mu_hat - kZ95 * e.stderr_;
    e.ci_high = e.mu_hat + kZ95 * e.stderr_;

    const int L = level_cap;
    const double r = std::exp(theta - c_hat);
    const double b_tail = std::exp(-(L + 1) * theta) * up + (r < 1.0 ? std::pow(r, L + 1) / (1.0 - r) : kInf);
    const double at = a_tail.mean();
    e.truncated_mass = truncated_runs > 0 ? kInf : (e.a_hat + at) * (e.b_hat + b_tail) - e.a_hat * e.b_hat;
    if (std::isnan(e.truncated_mass)) e.truncated_mass = kInf;
    e.cap_fraction = reached.empty() ? 0.0 : static_cast<double>(truncated_runs) / static_cast<double>(reached.size());
    e.flagged = truncated_runs > 0;
    return e;
}

std::pair<double, double> mean_line_occupancy(int d, double w, double alpha, int k, int i, std::int64_t trials,
                                              const RngStream& rng, const LinesOptions& options) {
    const TransitionKernel kernel = lines_kernel(d, w, alpha);
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    const StepSampler sampler(kernel);
    const std::int64_t cap = walk_step_cap(w, alpha, options);
    std::vector<double> n(static_cast<std::size_t>(trials));
    parallel_for(n.size(), resolve_workers(options.workers), [&](std::size_t t) {
        LeafStream move = rng.leaf(t);
        int stop = 0;
        double c = 0.0;
        for (const auto& [lvl, cnt] : walk_occupancy(sampler, d, i, options.level_cap, cap, move, stop))
            if (lvl == k) c = static_cast<double>(cnt);
        n[t] = c;
    });
    const auto m = mean_ci(n);
    return {m.mean, m.stderr_};
}

MuEstimate estimate_mu_lines(int d, double w, double alpha, double theta, std::int64_t trials, const RngStream& rng,
                             const LinesOptions& options) {
    lines_kernel(d, w, alpha);
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    LinesOptions o = options;
    if (std::isnan(o.c_hat)) o.c_hat = line_decay_rate(alpha, rng.child(3));
    if (!(theta < o.c_hat))
        throw std::invalid_argument(
            fmt::format("theta={} is not below the fitted decay rate {}; the sum may diverge", theta, o.c_hat));
    return sample_lines(d, w, alpha, trials, rng, o).evaluate(theta);
}

std::string to_string(CertStrategy s) { return s == CertStrategy::lines ? "lines" : "projected-1d"; }

std::string to_string(Verdict v) { return v == Verdict::certified_evidence ? "certified-evidence" : "inconclusive"; }

CertStrategy parse_strategy(const std::string& s) {
    if (s == "lines") return CertStrategy::lines;
    if (s == "projected-1d" || s == "projected") return CertStrategy::projected_1d;
    throw std::invalid_argument(fmt::format("unknown strategy '{}'", s));
}

std::string TransienceCertificate::to_json() const {
    auto num = [](double x) -> nlohmann::json {
        if (std::isfinite(x)) return x;
        return nullptr;
    };
    nlohmann::ordered_json j;
    j["d"] = d;
    j["w"] = w;
    j["alpha"] = alpha;
    j["strategy"] = to_string(strategy);
    j["theta"] = num(estimate.theta);
    j["mu_hat"] = num(estimate.mu_hat);
    j["ci_low"] = num(estimate.ci_low);
    j["ci_high"] = num(estimate.ci_high);
    j["trials"] = estimate.trials;
    j["truncated_mass"] = num(estimate.truncated_mass);
    j["verdict"] = to_string(verdict);
    j["seed"] = seed;
    return j.dump();
}

namespace {

// Golden-section search for the minimiser of f on [lo, hi].
template <class F>
double golden_minimum(F&& f, double lo, double hi, int iterations = 40) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), dd = a + g * (b - a);
    double fc = f(c), fd = f(dd);
    for (int k = 0; k < iterations; ++k) {
        if (fc < fd) {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = f(dd);
        }
    }
    return 0.5 * (a + b);
}

constexpr double kDiagnosticThetas[] = {0.01, 0.05, 0.1, 0.2, 0.5, 1.0};

bool certifies(const MuEstimate& e) {
    return e.ci_high < 1.0 && e.truncated_mass < kMaxTruncatedMass && !e.flagged;
}

}  // namespace

TransienceCertificate certify_transience(int d, double w, double alpha, CertStrategy strategy, std::int64_t budget,
                                         const RngStream& rng, unsigned workers) {
    check_unit(w, "w");
    check_unit(alpha, "alpha");
    if (budget < 8) throw std::invalid_argument("budget must be at least 8");
    TransienceCertificate cert;
    cert.d = d;
    cert.w = w;
    cert.alpha = alpha;
    cert.strategy = strategy;
    cert.seed = rng.root_seed();
    const std::int64_t pilot_trials = budget / 4;
    const std::int64_t main_trials = budget - pilot_trials;

    auto probe = [&](const MuEstimate& e) {
        cert.probes.push_back({e.theta, e.mu_hat, e.ci_high, e.truncated_mass});
    };

    if (strategy == CertStrategy::projected_1d) {
        if (d != 2) throw std::invalid_argument("the projected construction is for d = 2");
        if (w == 0.0) {
            cert.note = "w = 0: xi is infinite";
            return cert;
        }
        ProjectedOptions po;
        po.workers = workers;
        cert.theta_max = alpha < 1.0 ? std::log((1.0 + alpha) / (1.0 - alpha)) : 10.0;
        const auto pilot = estimate_mu_1d_projected(alpha, w, 1.0, pilot_trials, rng.child(1), po);
        const double mean_xi = pilot.b_hat;
        if (!(cert.theta_max > 1e-6)) {
            for (double th : kDiagnosticThetas) {
                MuEstimate e = pilot;
                const double f = mu_exact_1d(alpha, th, 1.0);
                e.theta = th;
                e.mu_hat = f * mean_xi;
                e.ci_high = f * (pilot.ci_high / pilot.a_hat);
                e.ci_low = f * (pilot.ci_low / pilot.a_hat);
                probe(e);
            }
            cert.estimate = pilot;
            cert.note = "alpha = 0: no tilt makes mu < 1";
            return cert;
        }
        const double theta = golden_minimum(
            [&](double th) {
                const double m = mu_exact_1d(alpha, th, mean_xi);
                cert.probes.push_back({th, m, m * pilot.ci_high / std::max(pilot.mu_hat, 1e-300), pilot.truncated_mass});
                return m;
            },
            1e-6, cert.theta_max);
        cert.estimate = estimate_mu_1d_projected(alpha, w, theta, main_trials, rng.child(2), po);
        cert.verdict = certifies(cert.estimate) ? Verdict::certified_evidence : Verdict::inconclusive;
        return cert;
    }

    LinesOptions lo;
    lo.workers = workers;
    lo.c_hat = line_decay_rate(alpha, rng.child(3));
    const double rho_bound = alpha < 1.0 ? std::log((1.0 + alpha) / (1.0 - alpha)) : kInf;
    cert.theta_max = 0.9 * std::min(lo.c_hat, rho_bound);
    const auto pilot = sample_lines(d, w, alpha, pilot_trials, rng.child(1), lo);
    if (!(cert.theta_max > 1e-6)) {
        for (double th : kDiagnosticThetas) probe(pilot.evaluate(th));
        cert.estimate = pilot.evaluate(kDiagnosticThetas[0]);
        cert.note = "empty theta range: no decay of the line frog model measured";
        return cert;
    }
    const double theta = golden_minimum(
        [&](double th) {
            const auto e = pilot.evaluate(th);
            probe(e);
            return e.mu_hat;
        },
        1e-3 * cert.theta_max, cert.theta_max);
    const auto at_pilot = pilot.evaluate(theta);
    if (!std::isfinite(at_pilot.truncated_mass) || at_pilot.ci_low > 1.0) {
        cert.estimate = at_pilot;
        cert.note = "pilot already rules out a certificate";
        return cert;
    }
    cert.estimate = sample_lines(d, w, alpha, main_trials, rng.child(2), lo).evaluate(theta);
    cert.verdict = certifies(cert.estimate) ? Verdict::certified_evidence : Verdict::inconclusive;
    return cert;
}

OffspringModel OffspringModel::xi_1d(double w, double alpha, std::int64_t cap) {
    check_unit(alpha, "alpha");
    if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("w must lie in (0,1]");
    OffspringModel m;
    m.cap = cap;
    m.name = "xi-1d";
    m.sample = [w, alpha, cap](const RngStream& rs, std::vector<std::int64_t>& out) {
        const auto xi = sample_xi(w, cap, rs.child(0));
        LeafStream jumps = rs.leaf(1);
        for (std::int64_t k = 0; k < xi.count; ++k) out.push_back(jumps.uniform() < (1.0 + alpha) / 2.0 ? 1 : -1);
    };
    return m;
}

OffspringModel OffspringModel::lines(int d, double w, double alpha, const LinesOptions& options) {
    const TransitionKernel kernel = lines_kernel(d, w, alpha);
    OffspringModel m;
    m.name = "line-based";
    const std::int64_t cap = walk_step_cap(w, alpha, options);
    m.sample = [kernel, options, cap](const RngStream& rs, std::vector<std::int64_t>& out) {
        const auto run = run_line_frogs(kernel, options, cap, rs, true);
        out.insert(out.end(), run.children.begin(), run.children.end());
    };
    return m;
}

OffspringModel OffspringModel::fixed(std::vector<std::int64_t> displacements) {
    OffspringModel m;
    m.name = "fixed";
    m.cap = static_cast<std::int64_t>(displacements.size());
    m.sample = [d = std::move(displacements)](const RngStream&, std::vector<std::int64_t>& out) {
        out.insert(out.end(), d.begin(), d.end());
    };
    return m;
}

MartingalePath simulate_brw_martingale(const OffspringModel& offspring, double theta, double mu, int generations,
                                       std::int64_t population_cap, const RngStream& rng) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (generations < 0) throw std::invalid_argument("generations must be non-negative");
    if (population_cap < 1) throw std::invalid_argument("population_cap must be positive");
    MartingalePath path;
    std::vector<std::int64_t> particles{0};
    std::vector<std::int64_t> next, kids;
    const double log_mu = std::log(mu);
    auto record = [&](int n) {
        double sum = 0.0;
        std::int64_t at_zero = 0;
        for (auto x : particles) {
            sum += std::exp(-theta * static_cast<double>(x) - n * log_mu);
            at_zero += x == 0;
        }
        path.m.push_back(sum);
        path.origin_counts.push_back(at_zero);
        path.population.push_back(static_cast<std::int64_t>(particles.size()));
    };
    record(0);
    for (int n = 0; n < generations; ++n) {
        next.clear();
        const RngStream gen = rng.child(static_cast<std::uint64_t>(n));
        for (std::size_t j = 0; j < particles.size(); ++j) {
            kids.clear();
            offspring.sample(gen.child(j), kids);
            for (auto k : kids) next.push_back(particles[j] + k);
            if (static_cast<std::int64_t>(next.size()) > population_cap) {
                path.truncated = true;
                return path;
            }
        }
        particles.swap(next);
        record(n + 1);
        if (particles.empty()) {
            // extinct: M stays 0
            for (int m = n + 2; m <= generations; ++m) {
                path.m.push_back(0.0);
                path.origin_counts.push_back(0);
                path.population.push_back(0);
            }
            break;
        }
    }
    return path;
}

}  // namespace froglab
