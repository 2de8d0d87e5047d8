#pragma once

#include <cstdint>
#include <vector>

#include "froglab/lattice.hpp"
#include "froglab/rng.hpp"
#include "froglab/stats.hpp"

namespace froglab {

/// Site percolation on a box: site i is open iff its uniform u_i < p.
/// Uniforms are drawn one per site in lexicographic order, so fields
/// sampled from the same stream at different p are coupled (monotone in p).
struct PercolationField {
    int d = 2;
    double p = 0.0;
    LatticeBox box;
    std::vector<std::uint8_t> open;

    [[nodiscard]] bool is_open(const Point& x) const { return box.contains(x) && open[box.index(x)]; }
    [[nodiscard]] std::size_t open_count() const;
};

PercolationField sample_field(int d, double p, const LatticeBox& box, const RngStream& rng);

struct Cluster {
    Point root;
    /// Members in the order the exploration reached them.
    std::vector<Point> members;
    [[nodiscard]] std::size_t size() const { return members.size(); }
};

/// Open cluster of x inside the box, found by the reached/dead/unexplored
/// exploration: always examine the unexplored site with a reached
/// neighbour that comes first in lexicographic order. Empty if x is closed.
Cluster explore_cluster(const PercolationField& field, const Point& x);

/// |A n C| >= a |A|. Throws on empty A.
bool density_statistic(const std::vector<Point>& cluster, const std::vector<Point>& region, double a);

/// Frequency of the density event for the cluster of x over fresh fields.
MeanCi density_frequency(int d, double p, const LatticeBox& box, const Point& x,
                         const std::vector<Point>& region, double a, std::int64_t trials,
                         const RngStream& rng);

/// Open path from the face x_1 = lower to the face x_1 = upper.
bool spans_axis1(const PercolationField& field);

/// Smallest p at which the box {0..L-1}^d spans along axis 1 for the
/// field drawn from `rng`: spanning holds for all p above this value and
/// fails at or below it.
double spanning_threshold(int d, int L, const RngStream& rng);

MeanCi spanning_probability(int d, int L, double p, std::int64_t trials, const RngStream& rng);

struct PcCrossing {
    int small = 0;
    int large = 0;
    double low = 0.0;
    double high = 1.0;
    double estimate = 0.0;
    bool crossed = false;
};

struct PcEstimate {
    int d = 2;
    double estimate = 0.0;
    double low = 0.0;
    double high = 1.0;
    /// Some pair of curves did not cross at the requested resolution.
    bool flagged = false;
    std::vector<PcCrossing> crossings;
    std::int64_t trials = 0;
};

/// Crossing of spanning-probability curves of consecutive box sizes,
/// bisected on [0.05, 0.95] to `resolution`. The estimate averages the
/// crossings; the bracket spans them.
PcEstimate estimate_pc(int d, std::vector<int> box_sizes, std::int64_t trials, const RngStream& rng,
                       unsigned workers = 1, double resolution = 0.01);

}  // namespace froglab
