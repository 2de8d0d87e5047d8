#include "froglab/frog.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include <fmt/format.h>

namespace froglab {

std::uint64_t frog_key(const Point& home, int index) {
    return splitmix64(point_key(home) + 2 * static_cast<std::uint64_t>(index));
}

std::vector<Point> frog_trace(const TransitionKernel& kernel, double survival, std::int64_t max_steps,
                              const Point& home, int index, const RngStream& rng) {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be positive");
    const StepSampler sampler(kernel);
    const std::uint64_t key = frog_key(home, index);
    LeafStream move = rng.leaf(key);
    LeafStream death = rng.leaf(key + 1);
    std::vector<Point> path{home};
    Point pos = home;
    for (std::int64_t k = 0; k < max_steps; ++k) {
        if (survival < 1.0 && !(death.uniform() < survival)) break;
        const Step st = sampler.sample(move);
        if (!st.is_hold()) apply_step(pos, st);
        path.push_back(pos);
    }
    return path;
}

void FrogSystemConfig::validate() const {
    kernel.validate();
    if (arena.dim() != kernel.d)
        throw std::invalid_argument(fmt::format("arena dimension {} differs from kernel dimension {}",
                                                arena.dim(), kernel.d));
    if (!(survival >= 0.0 && survival <= 1.0))
        throw std::invalid_argument(fmt::format("survival s={} outside [0,1]", survival));
    if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
    if (time_horizon < 0) throw std::invalid_argument("time_horizon must be non-negative");
    if (step_budget < 0) throw std::invalid_argument("step_budget must be non-negative");
    if (sleeping_per_site < 0 || sleeping_per_site > 255)
        throw std::invalid_argument("sleeping_per_site must lie in 0..255");
    if (walk_box && walk_box->dim() != kernel.d) throw std::invalid_argument("walk box dimension mismatch");
    for (const auto& s : initial) {
        if (s.site.dim != kernel.d) throw std::invalid_argument("initial site dimension mismatch");
        if (!arena.contains(s.site))
            throw std::invalid_argument(fmt::format("initial site {} outside the arena", s.site.str()));
        if (s.count < 1 || s.count > 255) throw std::invalid_argument("initial count must lie in 1..255");
    }
    if (initial.empty() && !arena.contains(Point::origin(kernel.d)))
        throw std::invalid_argument("arena does not contain the origin");
    const std::size_t volume = arena.volume();
    if (volume > memory_budget_sites)
        throw ResourceError(fmt::format("arena of {} sites exceeds the memory budget of {} sites; "
                                        "shrink the arena radius",
                                        volume, memory_budget_sites),
                            volume, memory_budget_sites);
}

std::int64_t FrogSystemConfig::effective_max_steps() const {
    return max_steps > 0 ? max_steps : 64 * std::max<std::int64_t>(1, arena.diameter());
}

std::vector<std::size_t> FrogRunRecord::activation_chain(std::size_t i) const {
    std::vector<std::size_t> chain;
    for (auto k = static_cast<std::int64_t>(i); k >= 0; k = frogs.at(static_cast<std::size_t>(k)).parent)
        chain.push_back(static_cast<std::size_t>(k));
    std::reverse(chain.begin(), chain.end());
    return chain;
}

FrogSimulation::FrogSimulation(FrogSystemConfig config, const RngStream& rng)
    : cfg_(std::move(config)), rng_(rng), sampler_((cfg_.validate(), cfg_.kernel)),
      max_steps_(cfg_.effective_max_steps()), origin_(Point::origin(cfg_.kernel.d)) {
    const std::size_t volume = cfg_.arena.volume();
    sleeping_.assign(volume, static_cast<std::uint8_t>(cfg_.sleeping_per_site));
    watched_.assign(volume, 0);
    if (cfg_.track_visited) visited_.assign(volume, 0);
    if (cfg_.initial.empty()) cfg_.initial.push_back({origin_, 1});
    for (const auto& s : cfg_.initial) sleeping_[cfg_.arena.index(s.site)] = 0;
    for (const auto& s : cfg_.initial) {
        for (int k = 0; k < s.count; ++k) activate(s.site, k, -1, 0);
        if (cfg_.track_visited) {
            auto& v = visited_[cfg_.arena.index(s.site)];
            if (!v) {
                v = 1;
                ++visited_count_;
            }
        }
    }
    active_.swap(pending_);
    if (cfg_.track_visited) visited_per_time_.push_back(visited_count_);
}

void FrogSimulation::activate(const Point& home, int index, std::int32_t parent, std::int64_t t) {
    FrogState f;
    f.home = home;
    f.pos = home;
    const std::uint64_t key = frog_key(home, index);
    f.move = rng_.leaf(key);
    f.death = rng_.leaf(key + 1);
    f.parent = parent;
    f.index = index;
    f.activation_time = t;
    frogs_.push_back(f);
    if (cfg_.retain_trajectories) trajectories_.push_back({home});
    pending_.push_back(frogs_.size() - 1);
}

void FrogSimulation::wake_site(std::size_t site, const Point& p, std::int32_t parent) {
    const int count = sleeping_[site];
    sleeping_[site] = 0;
    if (watched_[site]) --watched_asleep_;
    for (int k = 0; k < count; ++k) activate(p, k, parent, time_ + 1);
}

bool FrogSimulation::step_frog(std::size_t i, bool allow_wake) {
    FrogState& f = frogs_[i];
    if (f.fate != FrogFate::active) return false;
    if (f.steps >= max_steps_) {
        f.fate = FrogFate::exhausted;
        return false;
    }
    if (cfg_.survival < 1.0 && !(f.death.uniform() < cfg_.survival)) {
        f.fate = FrogFate::died;
        return false;
    }
    const Step st = sampler_.sample(f.move);
    ++f.steps;
    ++total_steps_;
    if (!st.is_hold()) apply_step(f.pos, st);
    if (!cfg_.unbounded_walks) {
        const LatticeBox& domain = cfg_.walk_box ? *cfg_.walk_box : cfg_.arena;
        if (!domain.contains(f.pos)) {
            f.fate = FrogFate::left_domain;
            return false;
        }
    }
    if (cfg_.retain_trajectories) trajectories_[i].push_back(f.pos);
    if (!st.is_hold() && f.pos == origin_) ++f.origin_visits;
    if (classify_) {
        const int id = classify_(f.pos);
        if (id >= 0 && !target_hit_[static_cast<std::size_t>(id)]) {
            target_hit_[static_cast<std::size_t>(id)] = 1;
            --targets_remaining_;
        }
    }
    const bool alive = f.steps < max_steps_;
    if (!alive) f.fate = FrogFate::exhausted;
    if (allow_wake && cfg_.arena.contains(f.pos)) {
        const std::size_t site = cfg_.arena.index(f.pos);
        if (cfg_.track_visited && !visited_[site]) {
            visited_[site] = 1;
            ++visited_count_;
        }
        // may reallocate frogs_, so `f` is not used afterwards
        if (sleeping_[site]) wake_site(site, Point(f.pos), static_cast<std::int32_t>(i));
    }
    return alive;
}

bool FrogSimulation::advance() {
    if (active_.empty() || budget_hit_) return false;
    if (cfg_.time_horizon > 0 && time_ >= cfg_.time_horizon) return false;
    const std::size_t n = active_.size();
    next_.clear();
    std::size_t k = 0;
    for (; k < n; ++k) {
        if (cfg_.step_budget > 0 && total_steps_ >= cfg_.step_budget) {
            budget_hit_ = true;
            break;
        }
        if (step_frog(active_[k], true)) next_.push_back(active_[k]);
    }
    for (; k < n; ++k) next_.push_back(active_[k]);
    // frogs woken during this time unit start moving in the next one
    next_.insert(next_.end(), pending_.begin(), pending_.end());
    pending_.clear();
    active_.swap(next_);
    ++time_;
    if (cfg_.track_visited) visited_per_time_.push_back(visited_count_);
    if (budget_hit_) return false;
    if (cfg_.time_horizon > 0 && time_ >= cfg_.time_horizon) return false;
    return !active_.empty();
}

void FrogSimulation::run() {
    while (advance()) {
    }
}

bool FrogSimulation::is_awake(const Point& site) const {
    if (!cfg_.arena.contains(site)) return true;
    return sleeping_[cfg_.arena.index(site)] == 0;
}

void FrogSimulation::watch(const std::vector<Point>& sites) {
    for (const auto& p : sites) {
        if (!cfg_.arena.contains(p)) continue;
        const std::size_t idx = cfg_.arena.index(p);
        if (sleeping_[idx] > 0 && !watched_[idx]) {
            watched_[idx] = 1;
            ++watched_asleep_;
        }
    }
}

void FrogSimulation::set_targets(std::size_t n, std::function<int(const Point&)> classify) {
    classify_ = std::move(classify);
    target_hit_.assign(n, 0);
    targets_remaining_ = n;
    // positions of the frogs already placed count as visits
    for (const auto& f : frogs_) {
        const int id = classify_(f.pos);
        if (id >= 0 && !target_hit_[static_cast<std::size_t>(id)]) {
            target_hit_[static_cast<std::size_t>(id)] = 1;
            --targets_remaining_;
        }
    }
}

void FrogSimulation::retain_only(const std::function<bool(const FrogState&)>& keep) {
    std::vector<std::size_t> kept;
    for (std::size_t i : active_) {
        if (keep(frogs_[i])) kept.push_back(i);
        else frogs_[i].fate = FrogFate::stopped;
    }
    active_ = std::move(kept);
}

bool FrogSimulation::continue_until_origin(std::size_t i) {
    if (frogs_[i].fate != FrogFate::active) return false;
    for (;;) {
        const std::int64_t before = frogs_[i].origin_visits;
        const bool alive = step_frog(i, false);
        if (frogs_[i].origin_visits > before) return true;
        if (!alive) return false;
    }
}

FrogRunRecord FrogSimulation::record() const {
    FrogRunRecord rec;
    rec.frogs.reserve(frogs_.size());
    for (std::size_t i = 0; i < frogs_.size(); ++i) {
        const auto& f = frogs_[i];
        FrogInfo info;
        info.home = f.home;
        info.index = f.index;
        info.parent = f.parent;
        info.activation_time = f.activation_time;
        info.steps = f.steps;
        info.origin_visits = f.origin_visits;
        info.fate = f.fate;
        if (cfg_.retain_trajectories) info.trajectory = trajectories_[i];
        rec.frogs.push_back(std::move(info));
        rec.activated.push_back(f.home);
        rec.hyperplane_activations[f.home[0]] += 1;
        if (!(cfg_.exclude_origin_line && f.home.lateral_is_zero())) rec.origin_visit_count += f.origin_visits;
    }
    std::sort(rec.activated.begin(), rec.activated.end());
    rec.activated.erase(std::unique(rec.activated.begin(), rec.activated.end()), rec.activated.end());
    rec.survived = !active_.empty();
    rec.truncated = budget_hit_;
    rec.final_time = time_;
    rec.total_steps = total_steps_;
    rec.visited_per_time = visited_per_time_;
    return rec;
}

FrogRunRecord run_frog_model(const FrogSystemConfig& config, const RngStream& rng) {
    if (config.survival != 1.0) throw std::invalid_argument("run_frog_model needs survival s = 1");
    FrogSimulation sim(config, rng);
    sim.run();
    return sim.record();
}

FrogRunRecord run_frog_model_with_death(const FrogSystemConfig& config, const RngStream& rng) {
    FrogSimulation sim(config, rng);
    sim.run();
    return sim.record();
}

FrogTraces traces_from_record(const FrogRunRecord& record) {
    FrogTraces traces;
    for (const auto& f : record.frogs)
        if (f.index == 0) traces.emplace(f.home, f.trajectory);
    return traces;
}

bool frog_path_exists(const FrogTraces& traces, const Point& x, const Point& y,
                      const std::vector<Point>& region) {
    if (!traces.count(x)) throw std::invalid_argument(fmt::format("no trajectory for site {}", x.str()));
    std::unordered_set<Point, PointHash> area;
    for (const auto& z : region) {
        if (!traces.count(z))
            throw std::invalid_argument(fmt::format("no trajectory for region site {}", z.str()));
        area.insert(z);
    }
    std::unordered_set<Point, PointHash> expanded{x};
    std::deque<Point> queue{x};
    while (!queue.empty()) {
        const Point u = queue.front();
        queue.pop_front();
        for (const auto& v : traces.at(u)) {
            if (v == y) return true;
            if (area.count(v) && expanded.insert(v).second) queue.push_back(v);
        }
    }
    return false;
}

FrogCluster frog_cluster(const FrogTraces& traces, const Point& root) {
    FrogCluster c;
    c.root = root;
    std::unordered_set<Point, PointHash> reached{root};
    std::unordered_set<Point, PointHash> expanded;
    std::deque<Point> queue{root};
    while (!queue.empty()) {
        const Point u = queue.front();
        queue.pop_front();
        auto it = traces.find(u);
        if (it == traces.end() || !expanded.insert(u).second) continue;
        for (const auto& v : it->second)
            if (reached.insert(v).second) queue.push_back(v);
    }
    c.members.assign(reached.begin(), reached.end());
    std::sort(c.members.begin(), c.members.end());
    return c;
}

std::vector<std::vector<Point>> proxy_boxes(int d, int n_boxes) {
    if (n_boxes < 1) throw std::invalid_argument("n_boxes must be at least 1");
    std::vector<std::vector<Point>> boxes;
    for (int i = 1; i <= n_boxes; ++i) {
        const auto r = static_cast<std::int32_t>(std::floor(std::sqrt(static_cast<double>(i)) + 1e-12));
        Point lo(d), hi(d);
        lo[0] = hi[0] = -i;
        for (int a = 1; a < d; ++a) {
            lo[a] = -r;
            hi[a] = r;
        }
        std::vector<Point> sites;
        LatticeBox(lo, hi).for_each([&](const Point& p) { sites.push_back(p); });
        boxes.push_back(std::move(sites));
    }
    return boxes;
}

ProxyResult recurrence_proxy(const FrogSystemConfig& config, int n_boxes, const RngStream& rng) {
    const auto boxes = proxy_boxes(config.kernel.d, n_boxes);
    std::vector<Point> all;
    for (const auto& b : boxes)
        for (const auto& p : b) {
            if (!config.arena.contains(p))
                throw std::invalid_argument(
                    fmt::format("arena does not contain box site {} of box {}", p.str(), -p[0]));
            all.push_back(p);
        }
    FrogSimulation sim(config, rng);
    sim.watch(all);
    while (sim.watched_asleep() > 0 && sim.advance()) {
    }

    ProxyResult out;
    out.flags.assign(static_cast<std::size_t>(n_boxes), false);
    out.truncated = sim.budget_exhausted();
    out.activated = static_cast<std::int64_t>(sim.frogs().size());

    auto box_of = [&](const Point& h) -> int {
        const int i = -h[0];
        if (i < 1 || i > n_boxes) return -1;
        const auto r = static_cast<std::int32_t>(std::floor(std::sqrt(static_cast<double>(i)) + 1e-12));
        for (int a = 1; a < h.dim; ++a)
            if (std::abs(h[a]) > r) return -1;
        return i - 1;
    };
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_boxes));
    const std::size_t n_frogs = sim.frogs().size();
    for (std::size_t f = 0; f < n_frogs; ++f) {
        const int b = box_of(sim.frogs()[f].home);
        if (b < 0) continue;
        members[static_cast<std::size_t>(b)].push_back(f);
        if (sim.frogs()[f].origin_visits > 0) out.flags[static_cast<std::size_t>(b)] = true;
    }
    // Box frogs still moving are followed on their own: no further
    // activation can change which box frogs are active.
    for (std::size_t b = 0; b < members.size(); ++b) {
        if (out.flags[b]) continue;
        for (std::size_t f : members[b])
            if (sim.continue_until_origin(f)) {
                out.flags[b] = true;
                break;
            }
    }
    const auto hits = std::count(out.flags.begin(), out.flags.end(), true);
    out.fraction = static_cast<double>(hits) / n_boxes;
    return out;
}

std::vector<std::int64_t> measure_shape_growth(const TransitionKernel& kernel, std::int64_t horizon,
                                               const RngStream& rng) {
    if (kernel.alpha != 0.0) throw std::invalid_argument("shape growth needs a symmetric kernel (alpha = 0)");
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    FrogSystemConfig cfg;
    cfg.kernel = kernel;
    cfg.arena = LatticeBox::cube(kernel.d, static_cast<std::int32_t>(horizon + 1));
    cfg.max_steps = horizon + 1;
    cfg.time_horizon = horizon;
    cfg.track_visited = true;
    if (horizon == 0) return {1};
    FrogSimulation sim(cfg, rng);
    sim.run();
    auto counts = sim.record().visited_per_time;
    counts.resize(static_cast<std::size_t>(horizon + 1), counts.back());
    return counts;
}

FrogRunRecord hyperplane_death_coupling(int d, double w, std::int64_t horizon, const RngStream& rng) {
    if (d < 2) throw std::invalid_argument("hyperplane coupling needs d >= 2");
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("w outside [0,1]");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    FrogSystemConfig cfg;
    cfg.kernel = TransitionKernel::symmetric(d - 1);
    cfg.survival = 1.0 - w;
    cfg.arena = LatticeBox::cube(d - 1, static_cast<std::int32_t>(horizon + 1));
    cfg.max_steps = horizon + 1;
    cfg.time_horizon = horizon;
    return run_frog_model_with_death(cfg, rng);
}

void write_trajectory_dump(const FrogRunRecord& record, std::ostream& out) {
    for (const auto& f : record.frogs) {
        const std::string id = fmt::format("{}#{}", f.home.str(), f.index);
        for (std::size_t n = 0; n < f.trajectory.size(); ++n)
            out << f.trajectory[n].str() << '\t' << n << '\t' << id << '\n';
    }
}

}  // namespace froglab
