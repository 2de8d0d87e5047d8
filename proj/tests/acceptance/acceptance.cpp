// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//   froglab_acceptance --cli <froglab_cli> --workdir <dir> [--only 1,3,...]
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "froglab/brw.hpp"
#include "froglab/experiments.hpp"
#include "froglab/hitting.hpp"
#include "froglab/oned.hpp"
#include "froglab/parallel.hpp"
#include "froglab/percolation.hpp"
#include "froglab/renorm.hpp"
#include "froglab/stats.hpp"

using namespace froglab;
namespace fs = std::filesystem;

namespace {

struct Result {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// 1. hyperplane law
Result hyperplane_law() {
    const auto t0 = Clock::now();
    Result r;
    const std::int64_t trials = 100'000;
    int worst_n = 0;
    double worst_z = 0.0;
    for (double alpha : {0.2, 1.0 / 3.0, 0.6}) {
        const double ratio = (1 - alpha) / (1 + alpha);
        // a walk that drifts this far right comes back with probability < 1e-10
        const int right = static_cast<int>(std::ceil(std::log(1e-10) / std::log(ratio)));
        for (int n = 1; n <= 8; ++n) {
            const LatticeBox box(Point{-n}, Point{right});
            const auto est = mc_hit_estimate(TransitionKernel::one_dim(alpha), Point{0}, TargetSet::hyperplane(-n),
                                             1'000'000, trials, RngStream(101).child({std::uint64_t(alpha * 1000), std::uint64_t(n)}),
                                             &box);
            const double exact = std::pow(ratio, n);
            // binomial standard error at the exact value; the plug-in one is 0 when no walk hits
            const double z = std::abs(est.estimate - exact) / std::sqrt(exact * (1 - exact) / trials);
            if (z > worst_z) {
                worst_z = z;
                worst_n = n;
            }
            if (!(z <= 4.0)) r.pass = false;
        }
    }
    const double secs = seconds_since(t0);
    if (secs >= 120) r.pass = false;
    r.detail = fmt::format("24 points, worst |z| = {:.2f} (n = {}), {:.1f} s", worst_z, worst_n, secs);
    return r;
}

// 2. exact solver vs Monte Carlo on random boxes
Result oracle_equivalence() {
    Result r;
    RngStream gen(202);
    double worst = 0.0;
    std::vector<std::string> cases;
    for (int c = 0; c < 10; ++c) {
        const int d = 1 + c % 2;
        const int R = 5 + static_cast<int>(gen.below(26));
        const double alpha = 0.2 + 0.6 * gen.uniform();
        const double w = d == 1 ? 1.0 : 0.3 + 0.7 * gen.uniform();
        const TransitionKernel k = d == 1 ? TransitionKernel::one_dim(alpha) : TransitionKernel{2, w, alpha, 0.0};
        const LatticeBox box = LatticeBox::cube(d, R, c % 4 < 2 ? BoundaryMode::killing : BoundaryMode::absorbing);
        auto random_site = [&](int radius) {
            Point p(d);
            for (int a = 0; a < d; ++a) p[a] = static_cast<int>(gen.below(2 * radius + 1)) - radius;
            return p;
        };
        // redraw start and targets until the answer is not (nearly) 0 or 1
        Point start;
        TargetSet targets;
        double exact = 0.0;
        for (int attempt = 0; attempt < 200 && !(exact > 0.02 && exact < 0.98); ++attempt) {
            start = random_site(R / 2);
            targets = TargetSet();
            const int nt = 1 + static_cast<int>(gen.below(3));
            for (int i = 0; i < nt; ++i) targets.add(random_site(R - 1));
            if (c % 3 == 0) targets.with_hyperplane(-(R / 2) - 1);
            exact = exact_hit_solver(k, start, targets, box).probability;
        }
        const std::int64_t trials = 100'000;
        const auto mc = mc_hit_estimate(k, start, targets, 10'000'000, trials, RngStream(203).child(c), &box);
        const double se = std::sqrt(exact * (1 - exact) / trials);
        const double gap = std::abs(mc.estimate - exact);
        const bool ok = gap <= 3 * se + 1e-12;
        if (!ok) r.pass = false;
        if (se > 0) worst = std::max(worst, gap / se);
        cases.push_back(fmt::format("{}{:.3f}", ok ? "" : "!", exact));
    }
    r.detail = fmt::format("10 cases, worst gap {:.2f} se; exact = [{}]", worst, fmt::join(cases, " "));
    return r;
}

// 3. exponential decay of reach probabilities
Result decay() {
    Result r;
    std::vector<std::string> parts;
    for (auto [name, model] : {std::pair{"drift 0.4", LeftHitModel::drift(0.4)},
                               std::pair{"death 0.9", LeftHitModel::death(0.9)}}) {
        const auto f = reach_decay_estimate(model, 8, 100'000, RngStream(303).child(parts.size()));
        const bool ok = f.rate > 0 && f.r_squared >= 0.95 && f.fitted_points == 8;
        r.pass = r.pass && ok;
        parts.push_back(fmt::format("{}: slope {:.4f}, R^2 {:.4f}", name, -f.rate, f.r_squared));
    }
    r.detail = fmt::format("{}", fmt::join(parts, "; "));
    return r;
}

// 4. Y chain law and coupled domination
Result y_chain() {
    Result r;
    const std::int64_t draws = 100'000;
    double worst_ratio = 0.0;
    for (int k : {1, 2, 5})
        for (double p : {0.3, 0.5, 0.7}) {
            RngStream rng = RngStream(404).child({std::uint64_t(k), std::uint64_t(p * 10)});
            std::vector<std::int64_t> counts(k + 2, 0);
            for (std::int64_t i = 0; i < draws; ++i) ++counts.at(static_cast<std::size_t>(y_step(k, p, rng)));
            const boost::math::binomial_distribution<double> law(k + 1, p);
            double chi2 = 0;
            for (int j = 0; j <= k + 1; ++j) {
                const double e = draws * boost::math::pdf(law, j);
                chi2 += (counts[j] - e) * (counts[j] - e) / e;
            }
            const double crit = boost::math::quantile(boost::math::chi_squared_distribution<double>(k + 1), 0.99);
            worst_ratio = std::max(worst_ratio, chi2 / crit);
            if (!(chi2 < crit)) r.pass = false;
        }
    std::int64_t violations = 0;
    std::int64_t paths = 0;
    for (double p : {0.3, 0.5, 0.7}) {
        const int k0 = k0_threshold(p);
        RngStream rng = RngStream(405).child(std::uint64_t(p * 10));
        for (int path = 0; path < 10'000; ++path, ++paths) {
            int y = 1 + static_cast<int>(rng.below(8));
            int yt = std::max(y, k0);
            for (int n = 0; n < 100 && yt > 0; ++n) {
                const double u = rng.uniform();
                y = y_step_from_uniform(y, p, u);
                yt = dominating_step_from_uniform(yt, p, k0, u);
                if (yt < y) ++violations;
            }
        }
    }
    if (violations != 0) r.pass = false;
    r.detail = fmt::format("9 chi-square tests, max chi2/crit {:.3f}; {} coupled paths, {} violations", worst_ratio,
                           paths, violations);
    return r;
}

// 5. transience certificates
Result certificates() {
    Result r;
    const auto strong = certify_transience(2, 0.95, 0.95, CertStrategy::lines, 4000, RngStream(505));
    const bool s_ok = strong.verdict == Verdict::certified_evidence && strong.estimate.ci_high < 1.0 &&
                      strong.estimate.truncated_mass < 1e-3;
    const auto sym = certify_transience(2, 0.95, 0.0, CertStrategy::lines, 4000, RngStream(506));
    bool sym_ok = sym.verdict == Verdict::inconclusive && !sym.probes.empty();
    for (const auto& p : sym.probes) sym_ok = sym_ok && !(p.ci_high < 1.0 && p.truncated_mass < 1e-3);
    r.pass = s_ok && sym_ok;
    r.detail = fmt::format("alpha=0.95: {} (mu_hat {:.4f}, ci_high {:.4f}, truncated {:.2e}); alpha=0: {} over {} probes",
                           to_string(strong.verdict), strong.estimate.mu_hat, strong.estimate.ci_high,
                           strong.estimate.truncated_mass, to_string(sym.verdict), sym.probes.size());
    return r;
}

// 6. projected mu at alpha = 1 and the martingale mean
Result mu_and_martingale() {
    Result r;
    const RngStream rng(606);
    const auto pilot = estimate_mu_1d_projected(1.0, 0.7, 1.0, 20'000, rng);
    const double theta = std::log(2 * pilot.b_hat);
    const auto e = estimate_mu_1d_projected(1.0, 0.7, theta, 20'000, rng);
    const bool mu_ok = e.ci_low <= 0.5 && 0.5 <= e.ci_high;

    const double alpha = 0.6;
    const double th = 0.4;
    const double mu = mu_exact_1d(alpha, th, 2.0);
    const auto model = OffspringModel::xi_1d(1.0, alpha);
    Accumulator m5;
    std::int64_t truncated = 0;
    for (int t = 0; t < 10'000; ++t) {
        const auto p = simulate_brw_martingale(model, th, mu, 5, 100'000, RngStream(607).child(t));
        truncated += p.truncated;
        m5.add(p.m[5]);
    }
    const double z = (m5.mean() - 1.0) / m5.stderr_of_mean();
    const bool m_ok = std::abs(z) <= 4.0 && truncated == 0;
    r.pass = mu_ok && m_ok;
    r.detail = fmt::format("mu_hat {:.6f} in [{:.6f}, {:.6f}]; E[M_5] = {:.4f} +- {:.4f} (z = {:.2f})", e.mu_hat,
                           e.ci_low, e.ci_high, m5.mean(), m5.stderr_of_mean(), z);
    return r;
}

// 7. renormalized block openness
Result openness() {
    Result r;
    std::vector<std::string> parts;
    const std::int64_t t2 = 1000;
    for (int K : {1, 2, 3}) {
        const auto p = renorm_open_probability(RenormScheme::cube(2, K), TransitionKernel{2, 0.5, 0.0, 0.0}, 1.0, t2,
                                               RngStream(707).child(K));
        if (p.mean != 1.0) r.pass = false;
        parts.push_back(fmt::format("d=2 K={}: {:.4f}", K, p.mean));
    }
    const std::int64_t t3 = 400;
    std::vector<MeanCi> zero;
    std::vector<std::string> d3;
    bool mono = true;
    bool conv = true;
    for (int K = 1; K <= 4; ++K) {
        const auto scheme = RenormScheme::cube(3, K);
        zero.push_back(renorm_open_probability(scheme, TransitionKernel{3, 0.5, 0.0, 0.0}, 1.0, t3,
                                               RngStream(708).child(K)));
        std::string row = fmt::format("K={}: {:.3f}", K, zero.back().mean);
        MeanCi last;
        for (double a : {0.05, 0.01, 0.002}) {
            last = renorm_open_probability(scheme, TransitionKernel{3, 0.5, a, 0.0}, 1.0, t3,
                                           RngStream(709).child({std::uint64_t(K), std::uint64_t(a * 1000)}));
            row += fmt::format("/{:.3f}", last.mean);
        }
        if (std::abs(last.mean - zero.back().mean) > 2 * std::hypot(last.stderr_, zero.back().stderr_)) conv = false;
        if (K > 1) {
            const auto& a = zero[K - 2];
            const auto& b = zero[K - 1];
            if (b.mean < a.mean - 2 * std::hypot(a.stderr_, b.stderr_)) mono = false;
        }
        d3.push_back(row);
    }
    r.pass = r.pass && mono && conv;
    r.detail = fmt::format("{}; d=3 w=0.5 alpha=0/0.05/0.01/0.002: {} (nondecreasing: {}, alpha->0: {})",
                           fmt::join(parts, ", "), fmt::join(d3, ", "), mono ? "yes" : "no", conv ? "yes" : "no");
    return r;
}

// Union-find components of a 3x3 field.
std::vector<int> components3(const std::vector<int>& open) {
    std::vector<int> parent(9);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < 9; ++i) {
        if (!open[i]) continue;
        if (i % 3 < 2 && open[i + 1]) parent[find(i)] = find(i + 1);
        if (i < 6 && open[i + 3]) parent[find(i)] = find(i + 3);
    }
    std::vector<int> label(9, -1);
    for (int i = 0; i < 9; ++i)
        if (open[i]) label[i] = find(i);
    return label;
}

// 8. percolation
Result percolation(unsigned workers) {
    const auto t0 = Clock::now();
    Result r;
    PercolationField f;
    f.d = 2;
    f.box = LatticeBox(Point{0, 0}, Point{2, 2});
    int mismatches = 0;
    for (int mask = 0; mask < 512; ++mask) {
        f.open.assign(9, 0);
        std::vector<int> open(9);
        for (int i = 0; i < 9; ++i) f.open[i] = open[i] = (mask >> i) & 1;
        // box index i = 3 x_1 + x_2; the oracle uses the same layout
        const auto label = components3(open);
        for (int i = 0; i < 9; ++i) {
            const auto c = explore_cluster(f, f.box.point(i));
            std::set<std::size_t> got;
            for (const auto& p : c.members) got.insert(f.box.index(p));
            std::set<std::size_t> want;
            if (label[i] >= 0)
                for (int j = 0; j < 9; ++j)
                    if (label[j] == label[i]) want.insert(j);
            if (got != want || got.size() != c.members.size()) ++mismatches;
        }
    }
    const auto p2 = estimate_pc(2, {32, 64, 128}, 200, RngStream(808), workers);
    const auto p3 = estimate_pc(3, {32, 64, 128}, 100, RngStream(809), workers);
    const double secs = seconds_since(t0);
    r.pass = mismatches == 0 && p2.estimate >= 0.55 && p2.estimate <= 0.65 && p3.estimate < p2.estimate &&
             secs < 600;
    r.detail = fmt::format("3x3 mismatches {}; p_c(2) ~ {:.4f}, p_c(3) ~ {:.4f}; {:.0f} s", mismatches, p2.estimate,
                           p3.estimate, secs);
    return r;
}

// 9. phase diagram through the CLI
Result phase_diagram(const std::string& cli, const fs::path& work, unsigned workers) {
    Result r;
    const fs::path dir = work / "sweep9";
    fs::create_directories(dir);
    nlohmann::ordered_json cfg;
    cfg["d"] = 2;
    cfg["alpha"] = {{"start", 0.05}, {"stop", 0.95}, {"num", 9}};
    cfg["w"] = {{"start", 0.05}, {"stop", 0.95}, {"num", 9}};
    cfg["arena_radius"] = 100;
    cfg["trials"] = 200;
    cfg["seed"] = 9;
    {
        std::ofstream out(dir / "config.json");
        out << cfg.dump(2) << "\n";
    }
    const auto t0 = Clock::now();
    const int rc = run(fmt::format("{} sweep --config {} --out {} --format json --workers {}", quote(cli),
                                   quote((dir / "config.json").string()), quote(dir.string()), workers));
    if (rc != 0) return {false, fmt::format("sweep exited with {}", rc)};
    const auto grid = load_results_json(slurp(dir / "sweep.json"));
    if (grid.points.size() != 81) return {false, fmt::format("{} points instead of 81", grid.points.size())};
    int rec_bad = 0, rec_n = 0, tr_bad = 0, tr_n = 0, conflicts = 0;
    for (const auto& p : grid.points) {
        if (p.classification == Classification::conflict) ++conflicts;
        if (p.alpha <= 0.1 + 1e-12 && p.w <= 0.3 + 1e-12) {
            ++rec_n;
            rec_bad += p.classification != Classification::recurrent_like;
        }
        if (p.alpha >= 0.9 - 1e-12 && p.w >= 0.9 - 1e-12) {
            ++tr_n;
            tr_bad += p.classification != Classification::transient_like;
        }
    }
    const auto report = boundary_monotonicity_report(grid);
    std::vector<std::string> bounds;
    for (const auto& c : report.columns) bounds.push_back(c.boundary ? fmt::format("{:.3f}", *c.boundary) : "-");
    r.pass = rec_n > 0 && tr_n > 0 && rec_bad == 0 && tr_bad == 0 && conflicts == 0 && report.nonincreasing;
    r.detail = fmt::format("recurrent-like {}/{}, transient-like {}/{}, conflicts {}, boundary w by alpha [{}] "
                           "nonincreasing: {}; {:.0f} s",
                           rec_n - rec_bad, rec_n, tr_n - tr_bad, tr_n, conflicts, fmt::join(bounds, " "),
                           report.nonincreasing ? "yes" : "no", seconds_since(t0));
    return r;
}

// 10. byte-identical reruns
Result determinism(const std::string& cli, const fs::path& work) {
    Result r;
    const fs::path base = work / "determinism";
    fs::create_directories(base);
    const fs::path sweep_cfg = base / "sweep.json";
    {
        nlohmann::ordered_json c;
        c["d"] = 2;
        c["alpha"] = {0.1, 0.5, 0.9};
        c["w"] = {0.3, 0.9};
        c["arena_radius"] = 20;
        c["n_boxes"] = 4;
        c["trials"] = 10;
        c["cert_budget"] = 200;
        std::ofstream(sweep_cfg) << c.dump() << "\n";
    }
    const fs::path pc_cfg = base / "pc.json";
    std::ofstream(pc_cfg) << R"({"d": 2, "box_sizes": [16, 32], "trials": 50})" << "\n";
    const fs::path cert_cfg = base / "cert.json";
    std::ofstream(cert_cfg) << R"({"d": 2, "w": 0.9, "alpha": 0.9, "budget": 400})" << "\n";
    const fs::path lemma_cfg = base / "lemma.json";
    std::ofstream(lemma_cfg) << R"({"trials": 2000})" << "\n";

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"sweep-csv", fmt::format("sweep --config {} --seed 5 --format csv", quote(sweep_cfg.string()))},
        {"sweep-json", fmt::format("sweep --config {} --seed 5 --format json", quote(sweep_cfg.string()))},
        {"certify", fmt::format("certify --config {} --seed 5", quote(cert_cfg.string()))},
        {"pc", fmt::format("pc-estimate --config {} --seed 5 --format csv", quote(pc_cfg.string()))},
        {"lemma", fmt::format("lemma-checks --config {} --seed 5", quote(lemma_cfg.string()))},
    };
    std::vector<std::string> checked;
    for (const auto& [name, args] : commands) {
        std::vector<std::map<std::string, std::string>> outputs;
        const fs::path out = base / name;
        for (int rep = 0; rep < 2; ++rep) {
            fs::remove_all(out);
            const int rc = run(fmt::format("{} {} --out {}", quote(cli), args, quote(out.string())));
            if (rc != 0) return {false, fmt::format("{} exited with {}", name, rc)};
            std::map<std::string, std::string> files;
            for (const auto& e : fs::directory_iterator(out))
                if (e.is_regular_file()) files[e.path().filename().string()] = slurp(e.path());
            outputs.push_back(std::move(files));
        }
        if (outputs[0].empty() || outputs[0] != outputs[1]) {
            r.pass = false;
            checked.push_back(name + " DIFFERS");
        } else {
            checked.push_back(fmt::format("{} ({} files)", name, outputs[0].size()));
        }
    }
    r.detail = fmt::format("identical reruns: {}", fmt::join(checked, ", "));
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"froglab acceptance checks"};
    std::string cli;
    std::string workdir = "acceptance_work";
    std::vector<int> only;
    unsigned workers = 0;
    app.add_option("--cli", cli, "path to froglab_cli")->required();
    app.add_option("--workdir", workdir, "scratch directory");
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    app.add_option("--workers", workers, "worker threads (default: FROGLAB_WORKERS or 1)");
    CLI11_PARSE(app, argc, argv);
    workers = resolve_workers(workers);

    const fs::path work = fs::absolute(workdir);
    fs::remove_all(work);
    fs::create_directories(work);
    cli = fs::absolute(cli).string();

    struct Criterion {
        int id;
        const char* name;
        std::function<Result()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "hyperplane law", hyperplane_law},
        {2, "exact solver vs Monte Carlo", oracle_equivalence},
        {3, "exponential decay of reach", decay},
        {4, "Y chain law and domination", y_chain},
        {5, "transience certificate", certificates},
        {6, "projected mu and martingale mean", mu_and_martingale},
        {7, "renormalized openness", openness},
        {8, "percolation", [&] { return percolation(workers); }},
        {9, "phase diagram sweep", [&] { return phase_diagram(cli, work, workers); }},
        {10, "determinism", [&] { return determinism(cli, work); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Result res;
        try {
            res = c.fn();
        } catch (const std::exception& e) {
            res = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !res.pass;
        std::cout << fmt::format("CRITERION {:>2} {}: {} | {}", c.id, res.pass ? "PASS" : "FAIL", c.name, res.detail)
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
