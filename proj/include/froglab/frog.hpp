#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "froglab/lattice.hpp"
#include "froglab/rng.hpp"

namespace froglab {

/// Thrown when a requested simulation would not fit the memory budget.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::size_t requested, std::size_t limit)
        : std::runtime_error(what), requested_(requested), limit_(limit) {}
    [[nodiscard]] std::size_t requested() const { return requested_; }
    [[nodiscard]] std::size_t limit() const { return limit_; }

private:
    std::size_t requested_;
    std::size_t limit_;
};

/// Stream key of frog number `index` at site `home`; its moves come from
/// rng.leaf(key) and its death coin from rng.leaf(key + 1).
std::uint64_t frog_key(const Point& home, int index);

/// The path (home first) frog (home, index) follows when it is woken and
/// never leaves the simulation domain: what FrogSimulation produces with
/// unbounded walks.
std::vector<Point> frog_trace(const TransitionKernel& kernel, double survival, std::int64_t max_steps,
                              const Point& home, int index, const RngStream& rng);

struct InitialSite {
    Point site;
    int count = 1;
};

struct FrogSystemConfig {
    TransitionKernel kernel;
    /// Per-step survival probability s; 1 disables death.
    double survival = 1.0;
    /// Sites carrying sleeping frogs. Activation happens only here.
    LatticeBox arena;
    /// Step budget per frog; 0 selects 64 x arena diameter.
    std::int64_t max_steps = 0;
    /// Active frogs at time 0. Empty means one frog at the origin.
    /// These sites hold no sleeping frog.
    std::vector<InitialSite> initial;
    /// Sleeping frogs per arena site (0 or more).
    int sleeping_per_site = 1;
    /// Frogs retire on leaving this box (default: the arena).
    std::optional<LatticeBox> walk_box;
    /// No walk box at all: frogs retire only by budget or death.
    bool unbounded_walks = false;
    /// Stop after this many time units; 0 runs until every frog retires.
    std::int64_t time_horizon = 0;
    /// Cap on the total number of frog steps; 0 is unlimited. A run that
    /// hits it is flagged truncated.
    std::int64_t step_budget = 0;
    bool retain_trajectories = false;
    /// origin_visit_count skips frogs whose home lies on the e1 axis line.
    bool exclude_origin_line = false;
    /// Record the number of distinct visited arena sites after each time unit.
    bool track_visited = false;
    std::size_t memory_budget_sites = std::size_t{1} << 27;

    void validate() const;
    [[nodiscard]] std::int64_t effective_max_steps() const;
};

enum class FrogFate : std::uint8_t { active, exhausted, died, left_domain, stopped };

struct FrogState {
    Point home;
    Point pos;
    LeafStream move;
    LeafStream death;
    std::int64_t steps = 0;
    std::int64_t origin_visits = 0;
    std::int64_t activation_time = 0;
    std::int32_t parent = -1;  // index of the frog that woke this one
    std::int32_t index = 0;    // frog number at its home site
    FrogFate fate = FrogFate::active;
};

struct FrogInfo {
    Point home;
    std::int32_t index = 0;
    std::int32_t parent = -1;
    std::int64_t activation_time = 0;
    std::int64_t steps = 0;
    std::int64_t origin_visits = 0;
    FrogFate fate = FrogFate::active;
    std::vector<Point> trajectory;  // filled when trajectories are retained
};

struct FrogRunRecord {
    /// Distinct home sites of activated frogs, sorted lexicographically.
    std::vector<Point> activated;
    /// Frogs in activation order.
    std::vector<FrogInfo> frogs;
    std::int64_t origin_visit_count = 0;
    /// e1 coordinate -> number of activated frogs with home there.
    std::map<int, std::int64_t> hyperplane_activations;
    /// Filled by recurrence_proxy.
    std::vector<bool> box_return_flags;
    /// Some frog was still active when the run stopped.
    bool survived = false;
    bool truncated = false;
    std::int64_t final_time = 0;
    std::int64_t total_steps = 0;
    /// visited_per_time[n] = distinct arena sites visited by time n.
    std::vector<std::int64_t> visited_per_time;

    /// Indices of frogs from an initial frog down to frog `i`.
    [[nodiscard]] std::vector<std::size_t> activation_chain(std::size_t i) const;
};

/// Time-synchronous simulation state: every active frog makes one step per
/// time unit; a frog woken at time t starts moving at time t+1. Each frog
/// draws its steps from a stream keyed by (home site, frog number), so its
/// trajectory does not depend on the order of processing, the arena or the
/// step budget.
class FrogSimulation {
public:
    FrogSimulation(FrogSystemConfig config, const RngStream& rng);

    /// Advance one time unit. Returns false once no frog is active, the
    /// time horizon is reached or the step budget is spent.
    bool advance();
    void run();

    [[nodiscard]] std::int64_t time() const { return time_; }
    [[nodiscard]] std::size_t active_count() const { return active_.size(); }
    [[nodiscard]] bool budget_exhausted() const { return budget_hit_; }
    [[nodiscard]] const std::vector<FrogState>& frogs() const { return frogs_; }
    [[nodiscard]] const FrogSystemConfig& config() const { return cfg_; }
    /// Site carries no sleeping frog anymore (or never did).
    [[nodiscard]] bool is_awake(const Point& site) const;

    /// Watch a set of arena sites; `watched_asleep` counts those whose
    /// sleeping frogs are not yet woken.
    void watch(const std::vector<Point>& sites);
    [[nodiscard]] std::size_t watched_asleep() const { return watched_asleep_; }

    /// Target classes: `classify(pos)` returns a class id in [0, n) or -1.
    /// Every step checks the new position; `targets_remaining` counts
    /// classes no frog has visited yet.
    void set_targets(std::size_t n, std::function<int(const Point&)> classify);
    [[nodiscard]] std::size_t targets_remaining() const { return targets_remaining_; }
    [[nodiscard]] const std::vector<std::uint8_t>& targets_hit() const { return target_hit_; }

    /// Stop every active frog failing `keep`.
    void retain_only(const std::function<bool(const FrogState&)>& keep);

    /// Move frog `i` on its own until it arrives at the origin or retires,
    /// ignoring activations. Returns true on arrival.
    bool continue_until_origin(std::size_t i);

    [[nodiscard]] FrogRunRecord record() const;

private:
    void activate(const Point& home, int index, std::int32_t parent, std::int64_t t);
    void wake_site(std::size_t site, const Point& p, std::int32_t parent);
    /// One step of frog i. Returns false if the frog retired.
    bool step_frog(std::size_t i, bool allow_wake);

    FrogSystemConfig cfg_;
    RngStream rng_;
    StepSampler sampler_;
    std::int64_t max_steps_;
    Point origin_;
    std::vector<std::uint8_t> sleeping_;
    std::vector<std::uint8_t> watched_;
    std::size_t watched_asleep_ = 0;
    std::vector<std::uint8_t> visited_;
    std::int64_t visited_count_ = 0;
    std::vector<std::int64_t> visited_per_time_;
    std::vector<FrogState> frogs_;
    std::vector<std::vector<Point>> trajectories_;
    std::vector<std::size_t> active_;
    std::vector<std::size_t> pending_;
    std::vector<std::size_t> next_;
    std::function<int(const Point&)> classify_;
    std::vector<std::uint8_t> target_hit_;
    std::size_t targets_remaining_ = 0;
    std::int64_t time_ = 0;
    std::int64_t total_steps_ = 0;
    bool budget_hit_ = false;
};

/// FM(d, pi): run to completion. Requires survival == 1.
FrogRunRecord run_frog_model(const FrogSystemConfig& config, const RngStream& rng);
/// FM*(d, pi, s) for any s in [0,1]; with s == 1 identical to run_frog_model.
FrogRunRecord run_frog_model_with_death(const FrogSystemConfig& config, const RngStream& rng);

/// Trajectory of the frog living at each site.
using FrogTraces = std::unordered_map<Point, std::vector<Point>, PointHash>;

FrogTraces traces_from_record(const FrogRunRecord& record);

/// x ~>_A y: a chain x -> z_1 -> ... -> z_n -> y where each z_i lies in A
/// and "u -> v" means v is on u's trajectory.
bool frog_path_exists(const FrogTraces& traces, const Point& x, const Point& y,
                      const std::vector<Point>& region);

struct FrogCluster {
    Point root;
    std::vector<Point> members;  // sorted
};

/// Sites reachable from `root` by frog paths through sites that have traces.
FrogCluster frog_cluster(const FrogTraces& traces, const Point& root);

struct ProxyResult {
    double fraction = 0.0;
    std::vector<bool> flags;
    bool truncated = false;
    std::int64_t activated = 0;
};

/// Boxes {-i} x [-floor(sqrt i), floor(sqrt i)]^{d-1}, i = 1..n.
std::vector<std::vector<Point>> proxy_boxes(int d, int n_boxes);

/// Fraction of i <= n_boxes such that some activated frog of box i visits
/// the origin. The frog run stops early once every box site is awake; the
/// box frogs are then followed individually.
ProxyResult recurrence_proxy(const FrogSystemConfig& config, int n_boxes, const RngStream& rng);

/// Distinct visited sites after each time unit 0..horizon, for a symmetric
/// kernel (alpha = 0), started from one frog at the origin.
std::vector<std::int64_t> measure_shape_growth(const TransitionKernel& kernel, std::int64_t horizon,
                                               const RngStream& rng);

/// FM*(d-1, pi_sym, 1-w) run up to `horizon` time units: the image in the
/// hyperplane H_0 of the drifted model when a step off the hyperplane
/// counts as death.
FrogRunRecord hyperplane_death_coupling(int d, double w, std::int64_t horizon, const RngStream& rng);

/// Line-delimited dump "site<TAB>step<TAB>frog" of retained trajectories;
/// frog ids read "(home)#k".
void write_trajectory_dump(const FrogRunRecord& record, std::ostream& out);

}  // namespace froglab
