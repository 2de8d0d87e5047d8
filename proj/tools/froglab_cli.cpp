// froglab command line: sweep, certify, pc-estimate, lemma-checks.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "froglab/brw.hpp"
#include "froglab/experiments.hpp"
#include "froglab/hitting.hpp"
#include "froglab/oned.hpp"
#include "froglab/percolation.hpp"

namespace fs = std::filesystem;
using froglab::ConfigError;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
    unsigned workers = 0;
};

nlohmann::json read_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError({fmt::format("config: cannot read {}", path)});
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({fmt::format("config: not valid JSON ({})", e.what())});
    }
}

// Small typed reader that collects every violation before failing.
class Fields {
public:
    explicit Fields(const nlohmann::json& raw, std::vector<std::string> known) : raw_(raw) {
        if (!raw_.is_object()) {
            bad_.emplace_back("configuration must be a JSON object");
            return;
        }
        for (const auto& [k, v] : raw_.items())
            if (std::find(known.begin(), known.end(), k) == known.end())
                bad_.push_back(fmt::format("{}: unknown field", k));
    }
    template <class T>
    T get(const char* key, T fallback, double lo, double hi) {
        if (!raw_.is_object() || !raw_.contains(key)) return fallback;
        const auto& v = raw_.at(key);
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                bad_.push_back(fmt::format("{}: must be an integer", key));
                return fallback;
            }
        } else if (!v.is_number()) {
            bad_.push_back(fmt::format("{}: must be a number", key));
            return fallback;
        }
        const double x = v.get<double>();
        if (!(x >= lo && x <= hi)) {
            bad_.push_back(fmt::format("{}: {} outside [{}, {}]", key, x, lo, hi));
            return fallback;
        }
        return v.get<T>();
    }
    std::string get_string(const char* key, std::string fallback) {
        if (!raw_.is_object() || !raw_.contains(key)) return fallback;
        if (!raw_.at(key).is_string()) {
            bad_.push_back(fmt::format("{}: must be a string", key));
            return fallback;
        }
        return raw_.at(key).get<std::string>();
    }
    std::vector<int> get_ints(const char* key, std::vector<int> fallback) {
        if (!raw_.is_object() || !raw_.contains(key)) return fallback;
        const auto& v = raw_.at(key);
        std::vector<int> out;
        if (!v.is_array()) {
            bad_.push_back(fmt::format("{}: must be an array of integers", key));
            return fallback;
        }
        for (const auto& x : v) {
            if (!x.is_number_integer()) {
                bad_.push_back(fmt::format("{}: must be an array of integers", key));
                return fallback;
            }
            out.push_back(x.get<int>());
        }
        return out;
    }
    void fail(std::string msg) { bad_.push_back(std::move(msg)); }
    void check() const {
        if (!bad_.empty()) throw ConfigError(bad_);
    }

private:
    const nlohmann::json& raw_;
    std::vector<std::string> bad_;
};

std::string out_path(const Common& c, const std::string& fallback_dir, const std::string& name) {
    const fs::path dir = c.out.empty() ? fs::path(fallback_dir) : fs::path(c.out);
    fs::create_directories(dir);
    return (dir / name).string();
}

int run_sweep_cmd(const Common& c) {
    auto raw = read_config(c.config);
    if (c.seed && raw.is_object()) raw["seed"] = *c.seed;
    if (!c.out.empty() && raw.is_object()) raw["out_dir"] = c.out;
    auto cfg = froglab::validate_config(raw);
    if (c.workers > 0) cfg.workers = c.workers;
    const auto format = froglab::parse_format(c.format);
    fs::create_directories(cfg.out_dir);
    const auto grid = froglab::run_sweep(cfg);
    const auto path = froglab::emit_results(grid, format);
    std::cout << "wrote " << path << "\n";
    if (cfg.alphas.size() >= 3) {
        const auto report = froglab::boundary_monotonicity_report(grid);
        const auto rpath = (fs::path(cfg.out_dir) / "boundary_report.json").string();
        froglab::write_atomic(rpath, report.to_json().dump(2) + "\n");
        std::cout << "wrote " << rpath << " (boundary nonincreasing: " << (report.nonincreasing ? "yes" : "no")
                  << ")\n";
    }
    return 0;
}

int run_certify_cmd(const Common& c) {
    const auto raw = read_config(c.config);
    Fields f(raw, {"d", "w", "alpha", "strategy", "budget", "seed"});
    const int d = f.get<int>("d", 2, 2, froglab::kMaxDim);
    const double w = f.get<double>("w", 0.95, 0.0, 1.0);
    const double alpha = f.get<double>("alpha", 0.95, 0.0, 1.0);
    const auto budget = f.get<std::int64_t>("budget", 4000, 8, 1e12);
    auto seed = f.get<std::uint64_t>("seed", 1, 0, 1.8446744073709552e19);
    const std::string strategy_name = f.get_string("strategy", "lines");
    froglab::CertStrategy strategy = froglab::CertStrategy::lines;
    try {
        strategy = froglab::parse_strategy(strategy_name);
    } catch (const std::invalid_argument& e) {
        f.fail(fmt::format("strategy: {}", e.what()));
    }
    if (strategy == froglab::CertStrategy::projected_1d && d != 2) f.fail("strategy: projected-1d needs d = 2");
    f.check();
    if (c.seed) seed = *c.seed;
    const auto cert = froglab::certify_transience(d, w, alpha, strategy, budget, froglab::RngStream(seed),
                                                  c.workers);
    std::string body;
    if (c.format == "csv") {
        body = "d,w,alpha,strategy,theta,mu_hat,ci_low,ci_high,trials,truncated_mass,verdict,seed\n";
        body += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", d, w, alpha, froglab::to_string(strategy),
                            cert.estimate.theta, cert.estimate.mu_hat, cert.estimate.ci_low, cert.estimate.ci_high,
                            cert.estimate.trials, cert.estimate.truncated_mass, froglab::to_string(cert.verdict),
                            seed);
    } else {
        body = cert.to_json() + "\n";
    }
    const auto path = out_path(c, ".", c.format == "csv" ? "certificate.csv" : "certificate.json");
    froglab::write_atomic(path, body);
    std::cout << froglab::to_string(cert.verdict) << " mu_hat=" << cert.estimate.mu_hat
              << " ci_high=" << cert.estimate.ci_high << " (wrote " << path << ")\n";
    return 0;
}

int run_pc_cmd(const Common& c) {
    const auto raw = read_config(c.config);
    Fields f(raw, {"d", "box_sizes", "trials", "seed"});
    const int d = f.get<int>("d", 2, 1, froglab::kMaxDim);
    const auto sizes = f.get_ints("box_sizes", {32, 64, 128});
    const auto trials = f.get<std::int64_t>("trials", 400, 1, 1e9);
    auto seed = f.get<std::uint64_t>("seed", 1, 0, 1.8446744073709552e19);
    if (sizes.size() < 2) f.fail("box_sizes: need at least two sizes");
    for (int L : sizes)
        if (L < 2) f.fail(fmt::format("box_sizes: {} is below 2", L));
    f.check();
    if (c.seed) seed = *c.seed;
    const auto est = froglab::estimate_pc(d, sizes, trials, froglab::RngStream(seed), c.workers);
    std::string body;
    if (c.format == "csv") {
        body = "d,small,large,low,high,estimate,crossed\n";
        for (const auto& x : est.crossings)
            body += fmt::format("{},{},{},{},{},{},{}\n", d, x.small, x.large, x.low, x.high, x.estimate, x.crossed);
    } else {
        ojson j;
        j["d"] = d;
        j["estimate"] = est.estimate;
        j["low"] = est.low;
        j["high"] = est.high;
        j["flagged"] = est.flagged;
        j["trials"] = trials;
        j["seed"] = seed;
        j["crossings"] = ojson::array();
        for (const auto& x : est.crossings)
            j["crossings"].push_back(
                {{"small", x.small}, {"large", x.large}, {"low", x.low}, {"high", x.high}, {"crossed", x.crossed}});
        body = j.dump(2) + "\n";
    }
    const auto path = out_path(c, ".", c.format == "csv" ? "pc_estimate.csv" : "pc_estimate.json");
    froglab::write_atomic(path, body);
    std::cout << fmt::format("p_c({}) ~ {:.4f} in [{:.4f}, {:.4f}]{} (wrote {})\n", d, est.estimate, est.low, est.high,
                             est.flagged ? " flagged" : "", path);
    return 0;
}

int run_lemma_cmd(const Common& c) {
    const auto raw = read_config(c.config);
    Fields f(raw, {"trials", "seed"});
    const auto trials = f.get<std::int64_t>("trials", 20000, 10, 1e9);
    auto seed = f.get<std::uint64_t>("seed", 1, 0, 1.8446744073709552e19);
    f.check();
    if (c.seed) seed = *c.seed;
    const froglab::RngStream root(seed);

    ojson checks = ojson::array();
    // hyperplane law: P(hit x_1 = -n) = ((1-alpha)/(1+alpha))^n
    for (double alpha : {0.2, 1.0 / 3.0, 0.6}) {
        for (int n = 1; n <= 4; ++n) {
            const froglab::TransitionKernel k{2, 0.5, alpha, 0.0};
            const auto targets = froglab::TargetSet::hyperplane(-n);
            const auto est = froglab::mc_hit_estimate(k, froglab::Point::origin(2), targets, 400 * n, trials,
                                                      root.child({1, static_cast<std::uint64_t>(n)}));
            const double exact = froglab::hyperplane_hit_exact(alpha, n);
            checks.push_back({{"check", "hyperplane_law"},
                              {"alpha", alpha},
                              {"n", n},
                              {"exact", exact},
                              {"estimate", est.estimate},
                              {"stderr", est.stderr_}});
        }
    }
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9})
        checks.push_back({{"check", "k0"}, {"p", p}, {"k0", froglab::k0_threshold(p)}});
    for (auto model : {froglab::LeftHitModel::drift(0.4), froglab::LeftHitModel::death(0.9)}) {
        const auto r = froglab::reach_decay_estimate(model, 8, trials, root.child(2));
        checks.push_back({{"check", "reach_decay"},
                          {"model", model.kind == froglab::LeftHitModel::Kind::drift ? "drift" : "death"},
                          {"parameter", model.kind == froglab::LeftHitModel::Kind::drift ? model.alpha : model.survival},
                          {"rate", r.rate},
                          {"r_squared", r.r_squared},
                          {"lower_bound", r.lower_bound}});
    }
    for (double a : {0.0, 0.5, 0.96, 1.0})
        checks.push_back({{"check", "g_alpha"}, {"alpha", a}, {"g", froglab::reference_brw_boundary(a)}});
    ojson j;
    j["seed"] = seed;
    j["trials"] = trials;
    j["checks"] = checks;
    const auto path = out_path(c, ".", "lemma_checks.json");
    froglab::write_atomic(path, j.dump(2) + "\n");
    std::cout << "wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"froglab: frog model experiments"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON configuration file");
        sub->add_option("--seed", common.seed, "root seed (overrides the config)");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--workers", common.workers, "worker threads (default: FROGLAB_WORKERS or 1)");
    };
    auto* sweep = app.add_subcommand("sweep", "phase-diagram sweep over (alpha, w)");
    add_common(sweep);
    auto* certify = app.add_subcommand("certify", "transience certificate for one (d, w, alpha)");
    add_common(certify);
    auto* pc = app.add_subcommand("pc-estimate", "site percolation threshold from spanning curves");
    add_common(pc);
    auto* lemma = app.add_subcommand("lemma-checks", "quick numerical checks of closed forms and decay estimates");
    add_common(lemma);
    sweep->callback([&] { common.format = sweep->count("--format") ? common.format : "csv"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (*sweep) return run_sweep_cmd(common);
        if (*certify) return run_certify_cmd(common);
        if (*pc) return run_pc_cmd(common);
        if (*lemma) return run_lemma_cmd(common);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
