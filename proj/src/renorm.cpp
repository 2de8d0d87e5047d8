#include "froglab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "froglab/frog.hpp"
#include "froglab/parallel.hpp"

namespace froglab {

namespace {

std::int32_t floor_div(std::int32_t a, std::int32_t b) {
    std::int32_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// salt for the thinning coins, kept apart from the frog streams
constexpr std::uint64_t kThinningTag = 0x7468696e6e696e67ULL;

int offset_class(const Point& y, const Point& centre) {
    int c = 0;
    for (int i = 0; i < y.dim; ++i) c += y[i] != centre[i];
    return c;
}

}  // namespace

void RenormScheme::validate() const {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument(fmt::format("dimension {} out of range", d));
    switch (variant) {
        case RenormVariant::cube:
            if (K < 0) throw std::invalid_argument("block radius K must be non-negative");
            break;
        case RenormVariant::segment:
            if (d != 2) throw std::invalid_argument("segment blocks need d = 2");
            if (K < 0) throw std::invalid_argument("block radius K must be non-negative");
            break;
        case RenormVariant::prime_cube:
            if (!(a > 0.0)) throw std::invalid_argument("closeness fraction a must be positive");
            break;
    }
}

Point RenormScheme::centre(const Point& x) const {
    switch (variant) {
        case RenormVariant::cube: return (2 * K + 1) * x;
        case RenormVariant::segment: {
            Point q = x;
            q[1] = (2 * K + 1) * x[1];
            return q;
        }
        case RenormVariant::prime_cube: return 3 * x;
    }
    return x;
}

LatticeBox RenormScheme::block(const Point& x) const {
    const Point q = centre(x);
    if (variant == RenormVariant::segment) {
        Point lo = q, hi = q;
        lo[1] -= K;
        hi[1] += K;
        return {lo, hi};
    }
    return LatticeBox::centered(q, variant == RenormVariant::prime_cube ? 1 : K);
}

Point RenormScheme::block_of(const Point& y) const {
    Point x = y;
    switch (variant) {
        case RenormVariant::cube:
            for (int i = 0; i < d; ++i) x[i] = floor_div(y[i] + K, 2 * K + 1);
            break;
        case RenormVariant::segment: x[1] = floor_div(y[1] + K, 2 * K + 1); break;
        case RenormVariant::prime_cube:
            for (int i = 0; i < d; ++i) x[i] = floor_div(y[i] + 1, 3);
            break;
    }
    return x;
}

bool RenormScheme::in_inner(const Point& x, const Point& y) const {
    if (variant != RenormVariant::prime_cube) return y == centre(x);
    const Point q = centre(x);
    if (!block(x).contains(y)) return false;
    return static_cast<double>((y - q).l1()) <= a * d + 1e-12;
}

std::vector<Point> RenormScheme::inner_sites(const Point& x) const {
    std::vector<Point> out;
    block(x).for_each([&](const Point& y) {
        if (in_inner(x, y)) out.push_back(y);
    });
    return out;
}

std::int64_t RenormScheme::max_steps() const {
    const std::int64_t side = variant == RenormVariant::prime_cube ? 3 : 2 * K + 1;
    return 100 * side * side;
}

std::vector<Point> unit_directions(int d) {
    std::vector<Point> out;
    for (int i = 0; i < d; ++i) {
        out.push_back(Point::axis(d, i, 1));
        out.push_back(Point::axis(d, i, -1));
    }
    return out;
}

namespace {

// Target class of position p for block x: index of the direction e with
// p a target of x + e, or -1.
int classify_target(const RenormScheme& scheme, const Point& x, const Point& p) {
    const Point z = scheme.block_of(p);
    const Point e = z - x;
    if (e.l1() != 1) return -1;
    if (!scheme.in_inner(z, p)) return -1;
    for (int i = 0; i < e.dim; ++i)
        if (e[i] != 0) return 2 * i + (e[i] > 0 ? 0 : 1);
    return -1;
}

// Block event with the frog engine: one active frog at `start`, sleeping
// frogs in block x, walks unbounded, stop once every direction is hit.
bool block_event(const RenormScheme& scheme, const TransitionKernel& kernel, double survival,
                 const Point& x, const Point& start, const RngStream& rng) {
    FrogSystemConfig cfg;
    cfg.kernel = kernel;
    cfg.survival = survival;
    cfg.arena = scheme.block(x);
    cfg.unbounded_walks = true;
    cfg.max_steps = scheme.max_steps();
    cfg.initial = {{start, 1}};
    FrogSimulation sim(cfg, rng);
    sim.set_targets(static_cast<std::size_t>(2 * scheme.d),
                    [&](const Point& p) { return classify_target(scheme, x, p); });
    while (sim.targets_remaining() > 0 && sim.advance()) {
    }
    return sim.targets_remaining() == 0;
}

void check_kernel(const RenormScheme& scheme, const TransitionKernel& kernel, double survival) {
    scheme.validate();
    kernel.validate();
    if (kernel.d != scheme.d) throw std::invalid_argument("kernel and scheme dimensions differ");
    if (!(survival >= 0.0 && survival <= 1.0)) throw std::invalid_argument("survival outside [0,1]");
}

}  // namespace

bool block_open(const RenormScheme& scheme, const TransitionKernel& kernel, double survival, const Point& x,
                const RngStream& rng) {
    check_kernel(scheme, kernel, survival);
    return block_event(scheme, kernel, survival, x, scheme.centre(x), rng);
}

MeanCi renorm_open_probability(const RenormScheme& scheme, const TransitionKernel& kernel, double survival,
                               std::int64_t trials, const RngStream& rng, const Point& x, unsigned workers) {
    check_kernel(scheme, kernel, survival);
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    std::vector<double> hits(static_cast<std::size_t>(trials));
    parallel_for(hits.size(), resolve_workers(workers), [&](std::size_t t) {
        hits[t] = block_event(scheme, kernel, survival, x, scheme.centre(x), rng.child(t)) ? 1.0 : 0.0;
    });
    return mean_ci(hits);
}

MeanCi renorm_open_probability(const RenormScheme& scheme, const TransitionKernel& kernel, double survival,
                               std::int64_t trials, const RngStream& rng, unsigned workers) {
    return renorm_open_probability(scheme, kernel, survival, trials, rng, Point::origin(scheme.d), workers);
}

void check_good_vertex_parameters(int d, double s, double a, const Point& o) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument(fmt::format("dimension {} out of range", d));
    if (!(s > 0.75 && s <= 1.0)) throw std::invalid_argument(fmt::format("need 3/4 < s <= 1, got s={}", s));
    if (!(a > 2.0 / 3.0 && a < 2.0 - 1.0 / s))
        throw std::invalid_argument(fmt::format("need 2/3 < a < 2 - 1/s = {}, got a={}", 2.0 - 1.0 / s, a));
    if (o.dim != d) throw std::invalid_argument("o has the wrong dimension");
    if (!RenormScheme::prime_cube(d, a).in_inner(Point::origin(d), o))
        throw std::invalid_argument(fmt::format("o={} is not in W_0", o.str()));
}

bool vertex_good(int d, double s, double a, const Point& o, const RngStream& rng) {
    if (!(a > 0.0)) throw std::invalid_argument("closeness fraction a must be positive");
    const auto scheme = RenormScheme::prime_cube(d, a);
    return block_event(scheme, TransitionKernel::symmetric(d), s, scheme.block_of(o), o, rng);
}

MeanCi good_vertex_probability(int d, double s, double a, const Point& o, std::int64_t trials,
                               const RngStream& rng, unsigned workers) {
    check_good_vertex_parameters(d, s, a, o);
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    std::vector<double> hits(static_cast<std::size_t>(trials));
    parallel_for(hits.size(), resolve_workers(workers),
                 [&](std::size_t t) { hits[t] = vertex_good(d, s, a, o, rng.child(t)) ? 1.0 : 0.0; });
    return mean_ci(hits);
}

double GoodVertexTable::beta() const {
    if (by_class.empty()) return 0.0;
    double b = 1.0;
    for (const auto& c : by_class) b = std::min(b, c.low);
    return std::max(b, 0.0);
}

GoodVertexTable estimate_good_vertex_table(int d, double s, double a, std::int64_t trials, const RngStream& rng,
                                           unsigned workers) {
    GoodVertexTable table{d, s, a, {}};
    const int classes = std::min(d, static_cast<int>(std::floor(a * d + 1e-12)));
    for (int c = 0; c <= classes; ++c) {
        Point o(d);
        for (int i = 0; i < c; ++i) o[i] = 1;
        table.by_class.push_back(good_vertex_probability(d, s, a, o, trials, rng.child(static_cast<std::uint64_t>(c)),
                                                         workers));
    }
    return table;
}

namespace {

class TraceCache {
public:
    TraceCache(const TransitionKernel& kernel, double survival, std::int64_t max_steps, const RngStream& rng)
        : kernel_(kernel), survival_(survival), max_steps_(max_steps), rng_(rng) {}

    const std::vector<Point>& get(const Point& home) {
        auto it = cache_.find(home);
        if (it == cache_.end())
            it = cache_.emplace(home, frog_trace(kernel_, survival_, max_steps_, home, 0, rng_)).first;
        return it->second;
    }

private:
    TransitionKernel kernel_;
    double survival_;
    std::int64_t max_steps_;
    RngStream rng_;
    std::unordered_map<Point, std::vector<Point>, PointHash> cache_;
};

// Same event as block_event, decided from the cached trajectories.
bool block_event_from_traces(const RenormScheme& scheme, TraceCache& traces, const Point& x, const Point& start) {
    const LatticeBox box = scheme.block(x);
    const auto n = static_cast<std::size_t>(2 * scheme.d);
    std::vector<std::uint8_t> hit(n, 0);
    std::size_t remaining = n;
    std::unordered_set<Point, PointHash> expanded{start};
    std::vector<Point> stack{start};
    while (!stack.empty() && remaining > 0) {
        const Point u = stack.back();
        stack.pop_back();
        for (const auto& p : traces.get(u)) {
            const int id = classify_target(scheme, x, p);
            if (id >= 0 && !hit[static_cast<std::size_t>(id)]) {
                hit[static_cast<std::size_t>(id)] = 1;
                --remaining;
            }
            if (box.contains(p) && expanded.insert(p).second) stack.push_back(p);
        }
    }
    return remaining == 0;
}

}  // namespace

ExplorationResult renormalized_frog_exploration(const RenormScheme& scheme, const TransitionKernel& kernel,
                                                double survival, const Point& v, const RngStream& rng,
                                                const ExplorationOptions& options) {
    check_kernel(scheme, kernel, survival);
    if (options.radius < 0) throw std::invalid_argument("exploration radius must be non-negative");
    const bool prime = scheme.variant == RenormVariant::prime_cube;
    const GoodVertexTable* table = nullptr;
    double beta = options.beta;
    if (prime) {
        check_good_vertex_parameters(scheme.d, survival, scheme.a, Point::origin(scheme.d));
        if (kernel.alpha != 0.0 || std::abs(kernel.w - TransitionKernel::symmetric(scheme.d).w) > 1e-12 ||
            kernel.hold != 0.0)
            throw std::invalid_argument("good-vertex exploration needs the symmetric kernel");
        if (!options.table) throw std::invalid_argument("good-vertex exploration needs a probability table");
        table = &*options.table;
        if (table->d != scheme.d || table->s != survival || table->a != scheme.a)
            throw std::invalid_argument("probability table was estimated for other parameters");
        if (beta <= 0.0) beta = table->beta();
        for (const auto& c : table->by_class)
            if (!(beta <= c.mean)) throw std::invalid_argument("beta exceeds a good-vertex probability");
    }

    ExplorationResult out;
    out.block_box = LatticeBox::centered(v, options.radius);
    const LatticeBox& blocks = out.block_box;
    TraceCache traces(kernel, survival, scheme.max_steps(), rng);
    const RngStream coins = rng.child(kThinningTag);

    enum : std::uint8_t { unexplored, reached, dead };
    std::vector<std::uint8_t> state(blocks.volume(), unexplored);
    // sites with a frog path from 3v inside the reached blocks, and every
    // site their frogs visit
    std::unordered_set<Point, PointHash> expanded;
    std::unordered_set<Point, PointHash> visited;

    auto in_reached = [&](const Point& p) {
        const Point z = scheme.block_of(p);
        return blocks.contains(z) && state[blocks.index(z)] == reached;
    };
    auto expand = [&](const Point& site) {
        std::vector<Point> stack{site};
        while (!stack.empty()) {
            const Point u = stack.back();
            stack.pop_back();
            if (!expanded.insert(u).second) continue;
            for (const auto& p : traces.get(u)) {
                visited.insert(p);
                if (in_reached(p) && !expanded.count(p)) stack.push_back(p);
            }
        }
    };

    auto examine = [&](const Point& x) -> bool {
        Point y;
        if (prime) {
            bool found = false;
            for (const auto& c : scheme.inner_sites(x))
                if (visited.count(c)) {
                    y = c;
                    found = true;
                    break;
                }
            if (!found) return false;
        } else {
            y = scheme.centre(x);
        }
        out.examined.push_back(x);
        out.chosen.push_back(y);
        bool ok = block_event_from_traces(scheme, traces, x, y);
        if (prime) {
            LeafStream coin = coins.leaf(point_key(y));
            const double p = table->by_class[static_cast<std::size_t>(offset_class(y, scheme.centre(x)))].mean;
            ok = ok && coin.uniform() < beta / p;
        }
        out.accepted.push_back(ok ? 1 : 0);
        return ok;
    };
    auto accept = [&](const Point& x) {
        state[blocks.index(x)] = reached;
        out.reached.push_back(x);
        scheme.block(x).for_each([&](const Point& q) {
            if (visited.count(q)) expand(q);
        });
    };

    const Point seed = scheme.centre(v);
    visited.insert(seed);
    if (!examine(v)) return out;
    accept(v);

    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> frontier;
    std::vector<std::uint8_t> queued(blocks.volume(), 0);
    auto push_neighbours = [&](const Point& x) {
        for (const auto& e : unit_directions(scheme.d)) {
            const Point z = x + e;
            if (!blocks.contains(z)) continue;
            const std::size_t i = blocks.index(z);
            if (!queued[i] && state[i] == unexplored) {
                queued[i] = 1;
                frontier.push(i);
            }
        }
    };
    queued[blocks.index(v)] = 1;
    push_neighbours(v);
    while (!frontier.empty()) {
        const std::size_t i = frontier.top();
        frontier.pop();
        const Point x = blocks.point(i);
        if (examine(x)) {
            accept(x);
            push_neighbours(x);
        } else {
            state[i] = dead;
        }
    }
    return out;
}

}  // namespace froglab
