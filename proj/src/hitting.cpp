#include "froglab/hitting.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace froglab {

TargetSet::TargetSet(std::vector<Point> points) {
    for (auto& p : points) points_.insert(p);
}

TargetSet TargetSet::hyperplane(int level) {
    TargetSet t;
    t.hyperplane_ = level;
    return t;
}

TargetSet& TargetSet::add(const Point& p) {
    points_.insert(p);
    return *this;
}

TargetSet& TargetSet::with_hyperplane(int level) {
    hyperplane_ = level;
    return *this;
}

double hyperplane_hit_exact(double alpha, std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("hyperplane distance n must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha outside [0,1]");
    return std::pow((1.0 - alpha) / (1.0 + alpha), static_cast<double>(n));
}

std::int64_t default_max_steps(const LatticeBox& box) { return 64 * std::max<std::int64_t>(1, box.diameter()); }

namespace {

enum class SiteKind : std::uint8_t { unknown, target, dead };

struct Neighbour {
    std::size_t index;
    double prob;
};

}  // namespace

ExactSolution exact_hit_solver(const TransitionKernel& kernel, const Point& start,
                               const TargetSet& targets, const LatticeBox& box,
                               const ExactSolverOptions& options) {
    kernel.validate();
    if (box.dim() != kernel.d || start.dim != kernel.d)
        throw std::invalid_argument("dimension mismatch between kernel, box and start");
    ExactSolution out;
    if (targets.contains(start)) {
        out.probability = 1.0;
        return out;
    }
    if (!box.contains(start)) return out;

    const std::size_t n_sites = box.volume();
    std::vector<SiteKind> kind(n_sites, SiteKind::unknown);
    std::vector<std::int64_t> unknown_id(n_sites, -1);
    std::size_t n_unknown = 0;
    for (std::size_t i = 0; i < n_sites; ++i) {
        const Point p = box.point(i);
        if (targets.contains(p)) {
            kind[i] = SiteKind::target;
        } else if (box.mode() == BoundaryMode::absorbing && box.on_shell(p)) {
            kind[i] = SiteKind::dead;
        } else {
            unknown_id[i] = static_cast<std::int64_t>(n_unknown++);
        }
    }
    out.unknowns = n_unknown;
    const std::size_t start_idx = box.index(start);
    if (kind[start_idx] == SiteKind::dead) return out;

    // Moves only; holding drops out after dividing by (1 - hold).
    std::vector<std::pair<int, double>> moves;
    for (int axis = 1; axis <= kernel.d; ++axis)
        for (int sign : {+1, -1}) {
            const double pr = kernel_probability(kernel, sign * axis) / (1.0 - kernel.hold);
            if (pr > 0.0) moves.emplace_back(sign * axis, pr);
        }

    // Row r: h_r - sum_{unknown nb} p h_nb = sum_{target nb} p
    std::vector<std::vector<Neighbour>> rows(n_unknown);
    std::vector<double> rhs(n_unknown, 0.0);
    for (std::size_t i = 0; i < n_sites; ++i) {
        if (unknown_id[i] < 0) continue;
        const auto r = static_cast<std::size_t>(unknown_id[i]);
        const Point p = box.point(i);
        for (auto [dir, pr] : moves) {
            Point q = p;
            q[std::abs(dir) - 1] += dir > 0 ? 1 : -1;
            if (!box.contains(q)) {
                if (targets.contains(q)) rhs[r] += pr;  // target just outside a killing box
                continue;
            }
            const std::size_t j = box.index(q);
            if (kind[j] == SiteKind::target) rhs[r] += pr;
            else if (unknown_id[j] >= 0) rows[r].push_back({static_cast<std::size_t>(unknown_id[j]), pr});
        }
    }
    const auto start_row = static_cast<std::size_t>(unknown_id[start_idx]);

    auto gauss_seidel = [&](std::vector<double>& h) {
        out.iterative = true;
        for (std::int64_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
            double delta = 0.0;
            for (std::size_t r = 0; r < n_unknown; ++r) {
                double v = rhs[r];
                for (const auto& nb : rows[r]) v += nb.prob * h[nb.index];
                delta = std::max(delta, std::abs(v - h[r]));
                h[r] = v;
            }
            out.sweeps = sweep;
            out.residual = delta;
            if (delta < options.tolerance) break;
        }
    };

    std::vector<double> h(n_unknown, 0.0);
    bool solved = false;
    if (n_unknown <= options.direct_limit) {
        using Sparse = Eigen::SparseMatrix<double>;
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(n_unknown * (moves.size() + 1));
        for (std::size_t r = 0; r < n_unknown; ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            triplets.emplace_back(ri, ri, 1.0);
            for (const auto& nb : rows[r])
                triplets.emplace_back(ri, static_cast<Eigen::Index>(nb.index), -nb.prob);
        }
        Sparse A(static_cast<Eigen::Index>(n_unknown), static_cast<Eigen::Index>(n_unknown));
        A.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SparseLU<Sparse> lu;
        lu.compute(A);
        if (lu.info() == Eigen::Success) {
            Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n_unknown));
            Eigen::VectorXd x = lu.solve(b);
            if (lu.info() == Eigen::Success && x.allFinite()) {
                for (std::size_t r = 0; r < n_unknown; ++r) h[r] = x[static_cast<Eigen::Index>(r)];
                solved = true;
            }
        }
    }
    // Singular systems (closed classes that never reach a target) fall back
    // to the iteration from zero, which converges to the minimal solution.
    if (!solved) gauss_seidel(h);
    out.probability = std::clamp(h[start_row], 0.0, 1.0);
    return out;
}

HitEstimate mc_hit_estimate(const TransitionKernel& kernel, const Point& start,
                            const TargetSet& targets, std::int64_t max_steps, std::int64_t trials,
                            const RngStream& rng, const LatticeBox* box) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
    const StepSampler sampler(kernel);
    HitEstimate out;
    out.trials = trials;
    const bool absorbing = box && box->mode() == BoundaryMode::absorbing;
    for (std::int64_t t = 0; t < trials; ++t) {
        LeafStream eng = rng.leaf(static_cast<std::uint64_t>(t));
        Point p = start;
        bool hit = targets.contains(p);
        if (!hit && (!box || (box->contains(p) && !(absorbing && box->on_shell(p))))) {
            for (std::int64_t n = 0; n < max_steps; ++n) {
                apply_step(p, sampler.sample(eng));
                if (targets.contains(p)) {
                    hit = true;
                    break;
                }
                if (box) {
                    if (!box->contains(p)) break;
                    if (absorbing && box->on_shell(p)) break;
                }
            }
        }
        if (hit) ++out.hits;
    }
    const double n = static_cast<double>(trials);
    out.estimate = static_cast<double>(out.hits) / n;
    out.stderr_ = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
    return out;
}

}  // namespace froglab
