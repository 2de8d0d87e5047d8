#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "froglab/lattice.hpp"
#include "froglab/percolation.hpp"
#include "froglab/rng.hpp"
#include "froglab/stats.hpp"

namespace froglab {

enum class RenormVariant { cube, segment, prime_cube };

/// Block tessellations.
///   cube:       q_x = (2K+1) x, Q_x = {y : |y - q_x|_inf <= K}
///   segment:    d = 2, q_x = (x_1, (2K+1) x_2), Q_x = {x_1} x [q_2 - K, q_2 + K]
///   prime_cube: centre 3x, Q'_x = {|y - 3x|_inf <= 1}, W_x = {|y - 3x|_1 <= a d}
struct RenormScheme {
    RenormVariant variant = RenormVariant::cube;
    int d = 2;
    int K = 1;
    double a = 0.7;

    static RenormScheme cube(int d, int K) { return {RenormVariant::cube, d, K, 0.0}; }
    static RenormScheme segment(int K) { return {RenormVariant::segment, 2, K, 0.0}; }
    static RenormScheme prime_cube(int d, double a) { return {RenormVariant::prime_cube, d, 1, a}; }

    void validate() const;
    [[nodiscard]] Point centre(const Point& x) const;
    [[nodiscard]] LatticeBox block(const Point& x) const;
    /// Block whose Q (or Q') contains y.
    [[nodiscard]] Point block_of(const Point& y) const;
    /// y in W_x (prime_cube only).
    [[nodiscard]] bool in_inner(const Point& x, const Point& y) const;
    [[nodiscard]] std::vector<Point> inner_sites(const Point& x) const;
    /// Per-frog step cap inside a block: 100 (2K+1)^2.
    [[nodiscard]] std::int64_t max_steps() const;
};

/// The 2d unit directions in the order +e_1, -e_1, +e_2, ...
std::vector<Point> unit_directions(int d);

/// One draw of the block event at block x: the frog model started by one
/// active frog at q_x, sleeping frogs only in Q_x, has a frog path from q_x
/// to q_{x+e} in Q_x for every direction e. For prime_cube this is the
/// good-vertex event of the centre.
bool block_open(const RenormScheme& scheme, const TransitionKernel& kernel, double survival,
                const Point& x, const RngStream& rng);

MeanCi renorm_open_probability(const RenormScheme& scheme, const TransitionKernel& kernel, double survival,
                               std::int64_t trials, const RngStream& rng, const Point& x,
                               unsigned workers = 1);
MeanCi renorm_open_probability(const RenormScheme& scheme, const TransitionKernel& kernel, double survival,
                               std::int64_t trials, const RngStream& rng, unsigned workers = 1);

/// Throws std::invalid_argument unless s > 3/4, 2/3 < a < 2 - 1/s and o in W_0.
void check_good_vertex_parameters(int d, double s, double a, const Point& o);

/// o (a site of W_x, x its block) is good: in FM*(d, pi_sym, s) started by
/// one active frog at o with sleeping frogs only in Q'_x, frog paths from o
/// reach W_{x+e} for every direction e.
bool vertex_good(int d, double s, double a, const Point& o, const RngStream& rng);

MeanCi good_vertex_probability(int d, double s, double a, const Point& o, std::int64_t trials,
                               const RngStream& rng, unsigned workers = 1);

/// Good-vertex probability depends on o only through the number of
/// nonzero coordinates of o - 3x; class c uses the representative
/// e_1 + ... + e_c.
struct GoodVertexTable {
    int d = 3;
    double s = 0.9;
    double a = 0.7;
    std::vector<MeanCi> by_class;  // index: number of nonzero offsets, up to floor(a d)
    /// min over classes of the lower 95% bound, floored at 0.
    [[nodiscard]] double beta() const;
};

GoodVertexTable estimate_good_vertex_table(int d, double s, double a, std::int64_t trials,
                                           const RngStream& rng, unsigned workers = 1);

struct ExplorationOptions {
    /// Blocks explored: |z - v|_inf <= radius.
    int radius = 4;
    /// Thinning target; required for prime_cube together with `table`.
    double beta = 0.0;
    std::optional<GoodVertexTable> table;
};

struct ExplorationResult {
    /// Reached blocks, in the order they were accepted.
    std::vector<Point> reached;
    /// Examined blocks in order, with their acceptance indicator.
    std::vector<Point> examined;
    std::vector<std::uint8_t> accepted;
    /// The vertex whose goodness decided each examination.
    std::vector<Point> chosen;
    /// Reached blocks as a field over the explored block box.
    LatticeBox block_box;
};

/// The reached/dead/unexplored exploration of the frog cluster over blocks,
/// started at block v. Examines the unexplored block with a reached
/// neighbour that is first in lexicographic order. prime_cube: pick the
/// lexicographically smallest site y of W_x visited through frog paths
/// from 3v inside the reached blocks and accept iff y is good and an
/// independent coin with success probability beta / P(y good) comes up.
/// cube/segment: accept iff block x is open. Frog trajectories are shared
/// with `block_open` and `vertex_good` for the same stream.
ExplorationResult renormalized_frog_exploration(const RenormScheme& scheme, const TransitionKernel& kernel,
                                                double survival, const Point& v, const RngStream& rng,
                                                const ExplorationOptions& options = {});

}  // namespace froglab
