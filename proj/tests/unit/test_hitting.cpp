#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "froglab/hitting.hpp"

using namespace froglab;

namespace {

// Biased gambler's ruin on {0..N}: P(reach 0 before N from k), right step q.
double ruin(int k, int N, double q) {
    if (q == 0.5) return 1.0 - double(k) / N;
    const double r = (1 - q) / q;
    return (std::pow(r, k) - std::pow(r, N)) / (1 - std::pow(r, N));
}

// Plain value iteration over a killing box, written without the solver's
// row bookkeeping.
double value_iteration(const TransitionKernel& k, const Point& start, const Point& target, int radius) {
    const int d = k.d;
    std::map<Point, double> h;
    const LatticeBox box = LatticeBox::cube(d, radius);
    box.for_each([&](const Point& p) { h[p] = (p == target) ? 1.0 : 0.0; });
    for (int it = 0; it < 200000; ++it) {
        double delta = 0;
        for (auto& [p, v] : h) {
            if (p == target) continue;
            double nv = 0;
            for (int axis = 1; axis <= d; ++axis)
                for (int sgn : {1, -1}) {
                    Point q = p;
                    q[axis - 1] += sgn;
                    auto itq = h.find(q);
                    if (itq != h.end()) nv += kernel_probability(k, sgn * axis) * itq->second;
                }
            nv /= (1.0 - k.hold);
            delta = std::max(delta, std::abs(nv - v));
            v = nv;
        }
        if (delta < 1e-13) break;
    }
    return h[start];
}

}  // namespace

TEST(Hyperplane, Examples) {
    EXPECT_DOUBLE_EQ(hyperplane_hit_exact(0.0, 5), 1.0);
    EXPECT_NEAR(hyperplane_hit_exact(1.0 / 3, 3), 0.125, 1e-15);
    EXPECT_NEAR(hyperplane_hit_exact(0.5, 2), 1.0 / 9, 1e-15);
    EXPECT_THROW(hyperplane_hit_exact(0.5, 0), std::invalid_argument);
    EXPECT_THROW(hyperplane_hit_exact(0.5, -2), std::invalid_argument);
}

TEST(Hyperplane, Multiplicative) {
    for (double a : {0.05, 0.2, 0.5, 0.9})
        for (int n = 1; n <= 12; ++n)
            EXPECT_NEAR(hyperplane_hit_exact(a, n), std::pow(hyperplane_hit_exact(a, 1), n), 1e-14);
}

TEST(ExactSolver, GamblersRuin) {
    const LatticeBox box(Point{0}, Point{10}, BoundaryMode::absorbing);
    const auto sol = exact_hit_solver(TransitionKernel::one_dim(0.0), Point{1}, TargetSet({Point{0}}), box);
    EXPECT_NEAR(sol.probability, 0.9, 1e-10);
    for (double a : {0.1, 0.4})
        for (int k = 1; k < 10; ++k) {
            const auto s = exact_hit_solver(TransitionKernel::one_dim(a), Point{k}, TargetSet({Point{0}}), box);
            EXPECT_NEAR(s.probability, ruin(k, 10, (1 + a) / 2), 1e-10) << a << ' ' << k;
        }
}

TEST(ExactSolver, FullDriftHitsFromLeft) {
    const LatticeBox box(Point{-5}, Point{5}, BoundaryMode::absorbing);
    EXPECT_NEAR(exact_hit_solver(TransitionKernel::one_dim(1.0), Point{-1}, TargetSet({Point{0}}), box).probability,
                1.0, 1e-12);
    EXPECT_NEAR(exact_hit_solver(TransitionKernel::one_dim(1.0), Point{1}, TargetSet({Point{0}}), box).probability,
                0.0, 1e-12);
}

TEST(ExactSolver, MatchesValueIteration2d) {
    const TransitionKernel k{2, 0.6, 0.3, 0.0};
    const LatticeBox box = LatticeBox::cube(2, 5);
    const double oracle = value_iteration(k, Point{-3, 2}, Point{0, 0}, 5);
    const auto sol = exact_hit_solver(k, Point{-3, 2}, TargetSet({Point{0, 0}}), box);
    EXPECT_NEAR(sol.probability, oracle, 1e-9);
    EXPECT_FALSE(sol.iterative);
}

TEST(ExactSolver, HoldDoesNotChangeHitting) {
    const TransitionKernel lazy{2, 0.6, 0.3, 0.4};
    const TransitionKernel eager{2, 0.6, 0.3, 0.0};
    const LatticeBox box = LatticeBox::cube(2, 6);
    const TargetSet t({Point{0, 0}});
    EXPECT_NEAR(exact_hit_solver(lazy, Point{-2, 3}, t, box).probability,
                exact_hit_solver(eager, Point{-2, 3}, t, box).probability, 1e-10);
}

TEST(ExactSolver, IterativeAgreesWithDirect) {
    const TransitionKernel k{2, 0.5, 0.2, 0.0};
    const LatticeBox box = LatticeBox::cube(2, 8);
    const TargetSet t({Point{1, 1}});
    ExactSolverOptions opts;
    opts.direct_limit = 0;
    const auto it = exact_hit_solver(k, Point{-4, 0}, t, box, opts);
    const auto direct = exact_hit_solver(k, Point{-4, 0}, t, box);
    EXPECT_TRUE(it.iterative);
    EXPECT_NEAR(it.probability, direct.probability, 1e-8);
}

TEST(ExactSolver, UnreachableIsZero) {
    // alpha = 1, w = 1: the walk only moves right; targets on the left are never reached.
    const TransitionKernel k{2, 1.0, 1.0, 0.0};
    const LatticeBox box = LatticeBox::cube(2, 4);
    EXPECT_EQ(exact_hit_solver(k, Point{0, 0}, TargetSet({Point{-2, 0}}), box).probability, 0.0);
}

TEST(MonteCarlo, StartInTargets) {
    const auto e = mc_hit_estimate({2, 0.5, 0.0, 0.0}, Point{1, 1}, TargetSet({Point{1, 1}}), 10, 100, RngStream(1));
    EXPECT_EQ(e.estimate, 1.0);
    EXPECT_EQ(e.stderr_, 0.0);
}

TEST(MonteCarlo, HyperplaneOneDim) {
    const auto e = mc_hit_estimate(TransitionKernel::one_dim(1.0 / 3), Point{0}, TargetSet::hyperplane(-2), 5000,
                                   40000, RngStream(3));
    EXPECT_NEAR(e.estimate, 0.25, 4 * std::max(e.stderr_, 1e-9));
}

TEST(MonteCarlo, AgreesWithExact2d) {
    const TransitionKernel k{2, 0.6, 0.3, 0.0};
    const LatticeBox box = LatticeBox::cube(2, 30);
    const TargetSet t({Point{0, 0}});
    const double exact = exact_hit_solver(k, Point{-5, 2}, t, box).probability;
    const auto mc = mc_hit_estimate(k, Point{-5, 2}, t, default_max_steps(box), 40000, RngStream(11), &box);
    EXPECT_NEAR(mc.estimate, exact, 4 * mc.stderr_);
}

TEST(MonteCarlo, Validation) {
    EXPECT_THROW(mc_hit_estimate({2, 0.5, 0.0, 0.0}, Point{0, 0}, TargetSet({Point{1, 0}}), 10, 0, RngStream(1)),
                 std::invalid_argument);
}

TEST(MonteCarlo, SrwLowerBoundStaysPositive) {
    // d = 3 symmetric: P(0 -> x) |x| stays bounded below.
    const TransitionKernel k = TransitionKernel::symmetric(3);
    double min_ratio = 1e9;
    int i = 0;
    for (int r : {2, 4, 8}) {
        const Point x{r, 0, 0};
        const LatticeBox box = LatticeBox::cube(3, 6 * r);
        const auto e = mc_hit_estimate(k, Point::origin(3), TargetSet({x}), 40 * r * r * 6, 20000,
                                       RngStream(5).child(++i), &box);
        min_ratio = std::min(min_ratio, e.estimate * r);
    }
    EXPECT_GT(min_ratio, 0.1);
}

TEST(MonteCarlo, Deterministic) {
    const TransitionKernel k{2, 0.6, 0.3, 0.0};
    const auto a = mc_hit_estimate(k, Point{-3, 1}, TargetSet({Point{0, 0}}), 500, 1000, RngStream(4));
    const auto b = mc_hit_estimate(k, Point{-3, 1}, TargetSet({Point{0, 0}}), 500, 1000, RngStream(4));
    EXPECT_EQ(a.hits, b.hits);
}
