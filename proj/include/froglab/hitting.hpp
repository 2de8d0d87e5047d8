#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "froglab/lattice.hpp"
#include "froglab/rng.hpp"

namespace froglab {

/// A set of target sites: explicit points, optionally together with the
/// hyperplane {x : x_1 = level}.
class TargetSet {
public:
    TargetSet() = default;
    explicit TargetSet(std::vector<Point> points);
    static TargetSet hyperplane(int level);

    TargetSet& add(const Point& p);
    TargetSet& with_hyperplane(int level);

    [[nodiscard]] bool contains(const Point& p) const {
        if (hyperplane_ && p[0] == *hyperplane_) return true;
        return !points_.empty() && points_.count(p) > 0;
    }
    [[nodiscard]] bool empty() const { return points_.empty() && !hyperplane_; }
    [[nodiscard]] const std::unordered_set<Point, PointHash>& points() const { return points_; }
    [[nodiscard]] std::optional<int> hyperplane_level() const { return hyperplane_; }

private:
    std::unordered_set<Point, PointHash> points_;
    std::optional<int> hyperplane_;
};

/// P(walk from 0 ever reaches the hyperplane x_1 = -n) = ((1-alpha)/(1+alpha))^n.
double hyperplane_hit_exact(double alpha, std::int64_t n);

struct ExactSolverOptions {
    /// Systems up to this many unknowns use a sparse direct factorization.
    std::size_t direct_limit = 10'000;
    double tolerance = 1e-10;
    std::int64_t max_sweeps = 100'000;
};

struct ExactSolution {
    double probability = 0.0;
    std::size_t unknowns = 0;
    bool iterative = false;
    std::int64_t sweeps = 0;
    double residual = 0.0;
};

/// Probability that a walk from `start` reaches `targets` before the box
/// stops it (shell sites absorb in absorbing mode; leaving the box kills
/// in killing mode). Solves the first-step equations over the box's sites in
/// lexicographic order.
ExactSolution exact_hit_solver(const TransitionKernel& kernel, const Point& start,
                               const TargetSet& targets, const LatticeBox& box,
                               const ExactSolverOptions& options = {});

struct HitEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::int64_t trials = 0;
    std::int64_t hits = 0;
};

/// Fraction of `trials` walks from `start` that visit `targets` within
/// `max_steps` steps (and before the optional box stops them). Trial t uses
/// the stream `rng.leaf(t)`.
HitEstimate mc_hit_estimate(const TransitionKernel& kernel, const Point& start,
                            const TargetSet& targets, std::int64_t max_steps, std::int64_t trials,
                            const RngStream& rng, const LatticeBox* box = nullptr);

/// Default truncation for infinite-time hitting events: 64 x box diameter.
std::int64_t default_max_steps(const LatticeBox& box);

}  // namespace froglab
