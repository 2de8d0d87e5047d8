#include "froglab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>

#include "froglab/frog.hpp"
#include "froglab/parallel.hpp"

namespace froglab {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& v : violations) msg += "\n  " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<double> linspace(double start, double stop, int num) {
    if (num < 1) throw std::invalid_argument("linspace needs num >= 1");
    std::vector<double> out(static_cast<std::size_t>(num));
    if (num == 1) {
        out[0] = start;
        return out;
    }
    for (int k = 0; k < num; ++k) out[static_cast<std::size_t>(k)] = start + (stop - start) * k / (num - 1);
    out.back() = stop;
    return out;
}

ojson SweepConfig::to_json() const {
    ojson j;
    j["d"] = d;
    j["alpha"] = alphas;
    j["w"] = ws;
    j["arena_radius"] = arena_radius;
    j["n_boxes"] = n_boxes;
    j["trials"] = trials;
    j["cert_budget"] = cert_budget;
    j["seed"] = seed;
    j["strategy"] = strategy;
    j["max_steps"] = max_steps;
    j["step_budget"] = step_budget;
    j["proxy_threshold"] = proxy_threshold;
    j["out_dir"] = out_dir;
    if (!partial_file.empty()) j["partial_file"] = partial_file;
    return j;
}

std::string SweepConfig::partial_path() const {
    return partial_file.empty() ? (fs::path(out_dir) / "sweep.partial.jsonl").string() : partial_file;
}

namespace {

// The part of the configuration that determines results.
std::string result_key(const SweepConfig& c) {
    ojson j = c.to_json();
    j.erase("out_dir");
    j.erase("partial_file");
    return j.dump();
}

}  // namespace

SweepConfig validate_config(const nlohmann::json& raw) {
    std::vector<std::string> bad;
    SweepConfig c;
    if (!raw.is_object()) throw ConfigError({"configuration must be a JSON object"});
    static const std::vector<std::string> known = {"d",        "alpha",           "w",          "arena_radius",
                                                   "n_boxes",  "trials",          "cert_budget", "seed",
                                                   "strategy", "max_steps",       "step_budget", "proxy_threshold",
                                                   "out_dir",  "partial_file",    "workers"};
    for (const auto& [key, value] : raw.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) bad.push_back(fmt::format("{}: unknown field", key));

    auto get_int = [&](const char* key, auto& target, long long lo, long long hi) {
        if (!raw.contains(key)) return;
        const auto& v = raw.at(key);
        if (!v.is_number_integer()) {
            bad.push_back(fmt::format("{}: must be an integer", key));
            return;
        }
        const long long x = v.get<long long>();
        if (x < lo || x > hi) {
            bad.push_back(fmt::format("{}: {} outside [{}, {}]", key, x, lo, hi));
            return;
        }
        target = static_cast<std::remove_reference_t<decltype(target)>>(x);
    };
    auto get_grid = [&](const char* key, std::vector<double>& target) {
        if (!raw.contains(key)) {
            bad.push_back(fmt::format("{}: missing", key));
            return;
        }
        const auto& v = raw.at(key);
        std::vector<double> grid;
        if (v.is_number()) {
            grid.push_back(v.get<double>());
        } else if (v.is_array()) {
            for (const auto& x : v) {
                if (!x.is_number()) {
                    bad.push_back(fmt::format("{}: grid entries must be numbers", key));
                    return;
                }
                grid.push_back(x.get<double>());
            }
        } else if (v.is_object() && v.contains("start") && v.contains("stop") && v.contains("num") &&
                   v["start"].is_number() && v["stop"].is_number() && v["num"].is_number_integer()) {
            const int num = v["num"].get<int>();
            if (num < 1 || num > 10'000) {
                bad.push_back(fmt::format("{}: num must lie in [1, 10000]", key));
                return;
            }
            grid = linspace(v["start"].get<double>(), v["stop"].get<double>(), num);
        } else {
            bad.push_back(fmt::format("{}: expected a number, an array or {{start, stop, num}}", key));
            return;
        }
        if (grid.empty()) bad.push_back(fmt::format("{}: grid is empty", key));
        for (double x : grid)
            if (!(x >= 0.0 && x <= 1.0)) bad.push_back(fmt::format("{}: value {} outside [0, 1]", key, x));
        target = grid;
    };

    get_int("d", c.d, 1, kMaxDim);
    get_grid("alpha", c.alphas);
    get_grid("w", c.ws);
    get_int("arena_radius", c.arena_radius, 1, 100'000);
    get_int("n_boxes", c.n_boxes, 1, 100'000);
    get_int("trials", c.trials, 1, 1'000'000'000LL);
    get_int("cert_budget", c.cert_budget, 8, 1'000'000'000LL);
    get_int("max_steps", c.max_steps, 1, 1'000'000'000LL);
    get_int("step_budget", c.step_budget, 0, std::numeric_limits<long long>::max());
    get_int("workers", c.workers, 0, 4096);
    if (raw.contains("seed")) {
        const auto& v = raw.at("seed");
        if (v.is_number_unsigned()) c.seed = v.get<std::uint64_t>();
        else if (v.is_number_integer() && v.get<long long>() >= 0) c.seed = static_cast<std::uint64_t>(v.get<long long>());
        else bad.emplace_back("seed: must be a non-negative integer");
    }
    if (raw.contains("strategy")) {
        const auto& v = raw.at("strategy");
        if (!v.is_string()) {
            bad.emplace_back("strategy: must be a string");
        } else {
            c.strategy = v.get<std::string>();
            try {
                c.strategy = to_string(parse_strategy(c.strategy));
            } catch (const std::invalid_argument&) {
                bad.push_back(fmt::format("strategy: '{}' is not lines or projected-1d", c.strategy));
            }
        }
    }
    if (raw.contains("proxy_threshold")) {
        const auto& v = raw.at("proxy_threshold");
        if (!v.is_number() || !(v.get<double>() >= 0.0 && v.get<double>() <= 1.0))
            bad.emplace_back("proxy_threshold: must be a number in [0, 1]");
        else
            c.proxy_threshold = v.get<double>();
    }
    for (const char* key : {"out_dir", "partial_file"}) {
        if (!raw.contains(key)) continue;
        if (!raw.at(key).is_string()) bad.push_back(fmt::format("{}: must be a string", key));
    }
    if (raw.contains("out_dir") && raw["out_dir"].is_string()) c.out_dir = raw["out_dir"].get<std::string>();
    if (raw.contains("partial_file") && raw["partial_file"].is_string())
        c.partial_file = raw["partial_file"].get<std::string>();

    if (c.d == 1)
        for (double w : c.ws)
            if (w != 1.0) {
                bad.push_back(fmt::format("w: d = 1 needs w = 1, got {}", w));
                break;
            }
    if (c.strategy == "projected-1d" && c.d != 2) bad.emplace_back("strategy: projected-1d needs d = 2");
    if (c.n_boxes >= c.arena_radius) bad.emplace_back("n_boxes: boxes must fit inside the arena (n_boxes < arena_radius)");
    if (!bad.empty()) throw ConfigError(std::move(bad));
    return c;
}

SweepConfig validate_config_text(const std::string& text) {
    nlohmann::json raw;
    try {
        raw = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({fmt::format("not valid JSON: {}", e.what())});
    }
    return validate_config(raw);
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::recurrent_like: return "recurrent-like";
        case Classification::transient_like: return "transient-like";
        case Classification::undetermined: return "undetermined";
        case Classification::conflict: return "conflict";
    }
    return "undetermined";
}

Classification parse_classification(const std::string& s) {
    for (auto c : {Classification::recurrent_like, Classification::transient_like, Classification::undetermined,
                   Classification::conflict})
        if (to_string(c) == s) return c;
    throw std::invalid_argument(fmt::format("unknown classification '{}'", s));
}

Classification classify(const MeanCi& proxy, Verdict verdict, double threshold) {
    const bool recurrent = proxy.n > 0 && proxy.low > threshold;
    const bool transient = verdict == Verdict::certified_evidence;
    if (recurrent && transient) return Classification::conflict;
    if (recurrent) return Classification::recurrent_like;
    if (transient) return Classification::transient_like;
    return Classification::undetermined;
}

namespace {

// JSON has no inf/nan; they travel as strings.
nlohmann::ordered_json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double num_from(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

Verdict parse_verdict(const std::string& s) {
    if (s == to_string(Verdict::certified_evidence)) return Verdict::certified_evidence;
    if (s == to_string(Verdict::inconclusive)) return Verdict::inconclusive;
    throw std::invalid_argument(fmt::format("unknown verdict '{}'", s));
}

}  // namespace

ojson PhasePointEstimate::to_json() const {
    ojson j;
    j["alpha_index"] = alpha_index;
    j["w_index"] = w_index;
    j["d"] = d;
    j["alpha"] = alpha;
    j["w"] = w;
    j["proxy_frac"] = num(proxy.mean);
    j["proxy_stderr"] = num(proxy.stderr_);
    j["proxy_ci_low"] = num(proxy.low);
    j["proxy_ci_high"] = num(proxy.high);
    j["proxy_n"] = proxy.n;
    j["proxy_truncated"] = proxy_truncated;
    j["theta"] = num(theta);
    j["mu_hat"] = num(mu_hat);
    j["mu_ci_low"] = num(mu_ci_low);
    j["mu_ci_high"] = num(mu_ci_high);
    j["truncated_mass"] = num(truncated_mass);
    j["verdict"] = to_string(verdict);
    j["classification"] = to_string(classification);
    j["trials"] = trials;
    j["seed"] = seed;
    j["g_alpha"] = num(g_alpha);
    j["error"] = error;
    return j;
}

PhasePointEstimate PhasePointEstimate::from_json(const nlohmann::json& j) {
    PhasePointEstimate p;
    p.alpha_index = j.at("alpha_index").get<std::size_t>();
    p.w_index = j.at("w_index").get<std::size_t>();
    p.d = j.at("d").get<int>();
    p.alpha = j.at("alpha").get<double>();
    p.w = j.at("w").get<double>();
    p.proxy.mean = num_from(j.at("proxy_frac"));
    p.proxy.stderr_ = num_from(j.at("proxy_stderr"));
    p.proxy.low = num_from(j.at("proxy_ci_low"));
    p.proxy.high = num_from(j.at("proxy_ci_high"));
    p.proxy.n = j.at("proxy_n").get<std::int64_t>();
    p.proxy_truncated = j.at("proxy_truncated").get<std::int64_t>();
    p.theta = num_from(j.at("theta"));
    p.mu_hat = num_from(j.at("mu_hat"));
    p.mu_ci_low = num_from(j.at("mu_ci_low"));
    p.mu_ci_high = num_from(j.at("mu_ci_high"));
    p.truncated_mass = num_from(j.at("truncated_mass"));
    p.verdict = parse_verdict(j.at("verdict").get<std::string>());
    p.classification = parse_classification(j.at("classification").get<std::string>());
    p.trials = j.at("trials").get<std::int64_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.g_alpha = num_from(j.at("g_alpha"));
    p.error = j.at("error").get<std::string>();
    return p;
}

PhasePointEstimate evaluate_point(const SweepConfig& config, std::size_t ai, std::size_t wi) {
    PhasePointEstimate p;
    p.alpha_index = ai;
    p.w_index = wi;
    p.d = config.d;
    p.alpha = config.alphas.at(ai);
    p.w = config.ws.at(wi);
    p.trials = config.trials;
    p.seed = config.seed;
    p.g_alpha = reference_brw_boundary(p.alpha);
    const RngStream point = RngStream(config.seed).child({ai, wi});
    try {
        FrogSystemConfig fc;
        fc.kernel = {config.d, p.w, p.alpha, 0.0};
        fc.arena = LatticeBox::cube(config.d, config.arena_radius);
        fc.max_steps = config.max_steps;
        fc.step_budget = config.step_budget;
        Accumulator acc;
        const RngStream proxy_rng = point.child(0);
        for (std::int64_t t = 0; t < config.trials; ++t) {
            const auto r = recurrence_proxy(fc, config.n_boxes, proxy_rng.child(static_cast<std::uint64_t>(t)));
            acc.add(r.fraction);
            p.proxy_truncated += r.truncated;
        }
        p.proxy = acc.ci();

        if (config.d >= 2 && (config.strategy == "lines" || config.d == 2)) {
            const auto cert =
                certify_transience(config.d, p.w, p.alpha, parse_strategy(config.strategy), config.cert_budget,
                                   point.child(1), 1);
            p.theta = cert.estimate.theta;
            p.mu_hat = cert.estimate.mu_hat;
            p.mu_ci_low = cert.estimate.ci_low;
            p.mu_ci_high = cert.estimate.ci_high;
            p.truncated_mass = cert.estimate.truncated_mass;
            p.verdict = cert.verdict;
        } else {
            // no branching-walk domination for d = 1
            p.theta = p.mu_hat = p.mu_ci_low = p.mu_ci_high = std::numeric_limits<double>::quiet_NaN();
            p.truncated_mass = std::numeric_limits<double>::infinity();
        }
        p.classification = classify(p.proxy, p.verdict, config.proxy_threshold);
    } catch (const std::exception& e) {
        p.error = e.what();
        p.classification = Classification::undetermined;
    }
    return p;
}

namespace {

void append_line(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error(fmt::format("cannot append to {}", path));
    out << line << '\n';
    out.flush();
}

}  // namespace

SweepGrid run_sweep(const SweepConfig& config, std::optional<std::size_t> max_new_points) {
    SweepGrid grid;
    grid.config = config;
    const std::size_t na = config.alphas.size(), nw = config.ws.size();
    const std::size_t total = na * nw;
    std::vector<std::optional<PhasePointEstimate>> slots(total);

    fs::create_directories(fs::path(config.partial_path()).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(config.partial_path()).parent_path());
    const std::string partial = config.partial_path();
    const std::string key = result_key(config);
    bool fresh = true;
    {
        std::ifstream in(partial);
        std::string line;
        if (in && std::getline(in, line)) {
            try {
                const auto head = nlohmann::json::parse(line);
                if (head.contains("config") && head["config"].get<std::string>() == key) {
                    fresh = false;
                    while (std::getline(in, line)) {
                        if (line.empty()) continue;
                        try {
                            auto p = PhasePointEstimate::from_json(nlohmann::json::parse(line));
                            if (p.alpha_index < na && p.w_index < nw) slots[p.alpha_index * nw + p.w_index] = p;
                        } catch (const std::exception&) {
                            // a torn last line from an interrupted run
                        }
                    }
                }
            } catch (const std::exception&) {
            }
        }
    }
    if (fresh) {
        ojson head;
        head["config"] = key;
        std::ofstream out(partial, std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write {}", partial));
        out << head.dump() << '\n';
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < total; ++i)
        if (!slots[i]) todo.push_back(i);
    if (max_new_points && todo.size() > *max_new_points) todo.resize(*max_new_points);

    std::mutex io;
    parallel_for(todo.size(), resolve_workers(config.workers), [&](std::size_t k) {
        const std::size_t i = todo[k];
        auto p = evaluate_point(config, i / nw, i % nw);
        const std::string line = p.to_json().dump();
        std::lock_guard lock(io);
        append_line(partial, line);
        slots[i] = std::move(p);
    });
    for (auto& s : slots)
        if (s) grid.points.push_back(std::move(*s));
    return grid;
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw std::invalid_argument(fmt::format("unknown format '{}' (csv or json)", s));
}

std::string results_csv(const SweepGrid& grid) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& p : grid.points)
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", p.d, p.alpha, p.w, p.proxy.mean, p.proxy.low,
                           p.proxy.high, p.mu_hat, p.mu_ci_low, p.mu_ci_high, to_string(p.verdict),
                           to_string(p.classification), p.trials, p.seed, p.g_alpha);
    return out;
}

std::string results_json(const SweepGrid& grid) {
    ojson j;
    ojson meta;
    meta["proxy_threshold"] = grid.config.proxy_threshold;
    meta["ci_level"] = 0.95;
    meta["proxy_threshold_note"] = "calibration choice for finite runs";
    meta["config"] = grid.config.to_json();
    j["metadata"] = meta;
    j["points"] = ojson::array();
    for (const auto& p : grid.points) j["points"].push_back(p.to_json());
    return j.dump(2) + "\n";
}

SweepGrid load_results_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    SweepGrid grid;
    grid.config = validate_config(j.at("metadata").at("config"));
    for (const auto& p : j.at("points")) grid.points.push_back(PhasePointEstimate::from_json(p));
    return grid;
}

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) throw std::runtime_error(fmt::format("directory {} does not exist", dir.string()));
    const fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error(fmt::format("cannot move results into {}", path));
    }
}

std::string emit_results(const SweepGrid& grid, OutputFormat format) {
    const fs::path dir(grid.config.out_dir);
    const std::string path = (dir / (format == OutputFormat::csv ? "sweep.csv" : "sweep.json")).string();
    write_atomic(path, format == OutputFormat::csv ? results_csv(grid) : results_json(grid));
    return path;
}

ojson BoundaryReport::to_json() const {
    ojson j;
    j["d"] = d;
    j["nonincreasing"] = nonincreasing;
    j["partial"] = partial;
    j["conflicts_excluded"] = conflicts_excluded;
    j["columns"] = ojson::array();
    for (const auto& c : columns) {
        ojson col;
        col["alpha"] = c.alpha;
        col["boundary_w"] = c.boundary ? ojson(*c.boundary) : ojson(nullptr);
        col["resolved"] = c.resolved;
        col["conflicts"] = c.conflicts;
        j["columns"].push_back(col);
    }
    j["note"] = "empirical boundary: an observation, not an estimate of a proven curve";
    return j;
}

BoundaryReport boundary_monotonicity_report(const SweepGrid& grid) {
    std::map<double, BoundaryColumn> cols;
    for (const auto& p : grid.points) {
        auto& c = cols[p.alpha];
        c.alpha = p.alpha;
        switch (p.classification) {
            case Classification::conflict: ++c.conflicts; break;
            case Classification::transient_like:
                ++c.resolved;
                if (!c.boundary || p.w < *c.boundary) c.boundary = p.w;
                break;
            case Classification::recurrent_like: ++c.resolved; break;
            case Classification::undetermined: break;
        }
    }
    if (cols.size() < 3) throw std::invalid_argument("boundary report needs at least three alpha columns");
    BoundaryReport r;
    r.d = grid.points.empty() ? grid.config.d : grid.points.front().d;
    double prev = std::numeric_limits<double>::infinity();
    for (auto& [a, c] : cols) {
        r.conflicts_excluded += c.conflicts;
        if (c.resolved == 0) r.partial = true;
        const double b = c.boundary ? *c.boundary : std::numeric_limits<double>::infinity();
        if (b > prev) r.nonincreasing = false;
        prev = b;
        r.columns.push_back(c);
    }
    return r;
}

DimensionComparison compare_dimensions(const BoundaryReport& low, const BoundaryReport& high) {
    DimensionComparison out;
    for (const auto& a : low.columns)
        for (const auto& b : high.columns) {
            if (a.alpha != b.alpha || !a.boundary || !b.boundary) continue;
            out.alphas.push_back(a.alpha);
            ++out.compared;
            if (*b.boundary < *a.boundary) out.increasing_in_d = false;
        }
    return out;
}

}  // namespace froglab
