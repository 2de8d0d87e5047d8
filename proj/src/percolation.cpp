#include "froglab/percolation.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "froglab/parallel.hpp"

namespace froglab {

std::size_t PercolationField::open_count() const {
    return static_cast<std::size_t>(std::count(open.begin(), open.end(), std::uint8_t{1}));
}

PercolationField sample_field(int d, double p, const LatticeBox& box, const RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("p={} outside [0,1]", p));
    if (box.dim() != d) throw std::invalid_argument("box dimension mismatch");
    PercolationField f;
    f.d = d;
    f.p = p;
    f.box = box;
    f.open.resize(box.volume());
    RngStream draws = rng;
    for (auto& o : f.open) o = draws.uniform() < p ? 1 : 0;
    return f;
}

namespace {

template <class F>
void for_each_neighbour(const LatticeBox& box, std::size_t idx, F&& f) {
    const Point p = box.point(idx);
    for (int a = 0; a < box.dim(); ++a)
        for (int s : {-1, +1}) {
            Point q = p;
            q[a] += s;
            if (box.contains(q)) f(box.index(q));
        }
}

}  // namespace

Cluster explore_cluster(const PercolationField& field, const Point& x) {
    if (!field.box.contains(x)) throw std::invalid_argument(fmt::format("site {} outside the field", x.str()));
    Cluster c;
    c.root = x;
    const std::size_t start = field.box.index(x);
    if (!field.open[start]) return c;
    // linear indices follow lexicographic order, so a min-heap of indices
    // yields the smallest unexplored neighbour of the reached set
    std::vector<std::uint8_t> seen(field.open.size(), 0);
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> frontier;
    seen[start] = 1;
    c.members.push_back(x);
    for_each_neighbour(field.box, start, [&](std::size_t j) {
        seen[j] = 1;
        frontier.push(j);
    });
    while (!frontier.empty()) {
        const std::size_t i = frontier.top();
        frontier.pop();
        if (!field.open[i]) continue;  // declared dead
        c.members.push_back(field.box.point(i));
        for_each_neighbour(field.box, i, [&](std::size_t j) {
            if (!seen[j]) {
                seen[j] = 1;
                frontier.push(j);
            }
        });
    }
    return c;
}

bool density_statistic(const std::vector<Point>& cluster, const std::vector<Point>& region, double a) {
    if (region.empty()) throw std::invalid_argument("density region A is empty");
    std::unordered_set<Point, PointHash> members(cluster.begin(), cluster.end());
    std::unordered_set<Point, PointHash> area(region.begin(), region.end());
    std::size_t hits = 0;
    for (const auto& y : area) hits += members.count(y);
    return static_cast<double>(hits) >= a * static_cast<double>(area.size());
}

MeanCi density_frequency(int d, double p, const LatticeBox& box, const Point& x,
                         const std::vector<Point>& region, double a, std::int64_t trials,
                         const RngStream& rng) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    Accumulator acc;
    for (std::int64_t t = 0; t < trials; ++t) {
        const auto field = sample_field(d, p, box, rng.child(static_cast<std::uint64_t>(t)));
        acc.add(density_statistic(explore_cluster(field, x).members, region, a) ? 1.0 : 0.0);
    }
    return acc.ci();
}

bool spans_axis1(const PercolationField& field) {
    const LatticeBox& box = field.box;
    const std::size_t n = field.open.size();
    std::vector<std::uint8_t> seen(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i)
        if (field.open[i] && box.point(i)[0] == box.lower()[0]) {
            seen[i] = 1;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        if (box.point(i)[0] == box.upper()[0]) return true;
        for_each_neighbour(box, i, [&](std::size_t j) {
            if (field.open[j] && !seen[j]) {
                seen[j] = 1;
                queue.push_back(j);
            }
        });
    }
    return false;
}

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

double spanning_threshold(int d, int L, const RngStream& rng) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
    if (L < 2) throw std::invalid_argument("box size must be at least 2");
    const LatticeBox box = LatticeBox(Point(d), [&] {
        Point hi(d);
        for (int a = 0; a < d; ++a) hi[a] = L - 1;
        return hi;
    }());
    const std::size_t n = box.volume();
    if (n > (std::size_t{1} << 31)) throw std::invalid_argument("box too large");
    std::vector<double> u(n);
    RngStream draws = rng;
    for (auto& v : u) v = draws.uniform();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return u[a] < u[b]; });

    // two virtual nodes for the faces x_1 = 0 and x_1 = L-1
    const auto left = static_cast<std::uint32_t>(n);
    const auto right = static_cast<std::uint32_t>(n + 1);
    UnionFind uf(n + 2);
    std::vector<std::uint8_t> added(n, 0);
    const std::size_t face_stride = n / static_cast<std::size_t>(L);
    for (std::uint32_t i : order) {
        added[i] = 1;
        const std::size_t x1 = i / face_stride;
        if (x1 == 0) uf.unite(i, left);
        if (x1 == static_cast<std::size_t>(L - 1)) uf.unite(i, right);
        for_each_neighbour(box, i, [&](std::size_t j) {
            if (added[j]) uf.unite(i, static_cast<std::uint32_t>(j));
        });
        if (uf.find(left) == uf.find(right)) return u[i];
    }
    return 1.0;
}

MeanCi spanning_probability(int d, int L, double p, std::int64_t trials, const RngStream& rng) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    Accumulator acc;
    for (std::int64_t t = 0; t < trials; ++t)
        acc.add(spanning_threshold(d, L, rng.child(static_cast<std::uint64_t>(t))) < p ? 1.0 : 0.0);
    return acc.ci();
}

PcEstimate estimate_pc(int d, std::vector<int> box_sizes, std::int64_t trials, const RngStream& rng,
                       unsigned workers, double resolution) {
    if (box_sizes.size() < 2) throw std::invalid_argument("estimate_pc needs at least two box sizes");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    std::sort(box_sizes.begin(), box_sizes.end());
    box_sizes.erase(std::unique(box_sizes.begin(), box_sizes.end()), box_sizes.end());
    if (box_sizes.size() < 2) throw std::invalid_argument("estimate_pc needs two distinct box sizes");

    // empirical spanning curves: pi_L(p) = #{threshold < p} / trials
    std::vector<std::vector<double>> thresholds(box_sizes.size());
    for (std::size_t k = 0; k < box_sizes.size(); ++k) {
        auto& th = thresholds[k];
        th.resize(static_cast<std::size_t>(trials));
        const RngStream size_rng = rng.child(static_cast<std::uint64_t>(box_sizes[k]));
        parallel_for(th.size(), resolve_workers(workers), [&](std::size_t t) {
            th[t] = spanning_threshold(d, box_sizes[k], size_rng.child(t));
        });
        std::sort(th.begin(), th.end());
    }
    auto curve = [&](std::size_t k, double p) {
        const auto& th = thresholds[k];
        return static_cast<double>(std::lower_bound(th.begin(), th.end(), p) - th.begin()) /
               static_cast<double>(th.size());
    };

    PcEstimate out;
    out.d = d;
    out.trials = trials;
    out.low = 1.0;
    out.high = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < box_sizes.size(); ++k) {
        PcCrossing c;
        c.small = box_sizes[k];
        c.large = box_sizes[k + 1];
        // the larger box spans less below p_c and more above it
        auto diff = [&](double p) { return curve(k + 1, p) - curve(k, p); };
        double lo = 0.05, hi = 0.95;
        c.crossed = diff(lo) <= 0.0 && diff(hi) >= 0.0;
        if (c.crossed) {
            while (hi - lo > resolution) {
                const double mid = 0.5 * (lo + hi);
                const double delta = diff(mid);
                // both curves flat at 0 (or 1) tie far from the crossing
                const bool below = delta < 0.0 || (delta == 0.0 && curve(k, mid) + curve(k + 1, mid) < 1.0);
                if (below) lo = mid;
                else hi = mid;
            }
        }
        c.low = lo;
        c.high = hi;
        c.estimate = 0.5 * (lo + hi);
        out.flagged = out.flagged || !c.crossed;
        out.low = std::min(out.low, lo);
        out.high = std::max(out.high, hi);
        sum += c.estimate;
        out.crossings.push_back(c);
    }
    out.estimate = sum / static_cast<double>(out.crossings.size());
    return out;
}

}  // namespace froglab
