#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "froglab/frog.hpp"
#include "froglab/oned.hpp"
#include "froglab/stats.hpp"

using namespace froglab;

namespace {

double binom_pmf(int n, double p, int k) {
    return boost::math::pdf(boost::math::binomial_distribution<double>(n, p), k);
}

// P(Binomial(k+1, p) <= k-1) > 2/3 scanned from the pmf directly.
int k0_by_scan(double p) {
    for (int k = 1;; ++k) {
        double cdf = 0;
        for (int j = 0; j <= k - 1; ++j) cdf += binom_pmf(k + 1, p, j);
        if (cdf > 2.0 / 3.0) return k;
    }
}

}  // namespace

TEST(LeftHit, Exact) {
    EXPECT_NEAR(left_hit_probability_exact(LeftHitModel::drift(1.0 / 3)), 0.5, 1e-15);
    EXPECT_NEAR(left_hit_probability_exact(LeftHitModel::death(0.8)), 0.5, 1e-15);
    EXPECT_NEAR(left_hit_probability_exact(LeftHitModel::death(1.0 - 1e-12)), 1.0, 2e-6);
    EXPECT_EQ(left_hit_probability_exact(LeftHitModel::death(0.0)), 0.0);
    EXPECT_THROW(left_hit_probability_exact(LeftHitModel::drift(0.0)), std::invalid_argument);
    EXPECT_THROW(left_hit_probability_exact(LeftHitModel::death(1.0)), std::invalid_argument);
    // first-step equation q = s/2 + (s/2) q^2
    for (double s : {0.3, 0.6, 0.95}) {
        const double q = left_hit_probability_exact(LeftHitModel::death(s));
        EXPECT_NEAR(q, s / 2 + s / 2 * q * q, 1e-14);
    }
}

TEST(LeftHit, MatchesEngine) {
    FrogSystemConfig c;
    c.kernel = TransitionKernel::one_dim(0.4);
    c.arena = LatticeBox::cube(1, 300);
    c.max_steps = 20000;
    c.sleeping_per_site = 0;
    c.retain_trajectories = true;
    Accumulator acc;
    for (int t = 0; t < 20000; ++t) {
        const auto rec = run_frog_model(c, RngStream(6).child(t));
        bool hit = false;
        for (const auto& p : rec.frogs[0].trajectory) hit |= p[0] == -1;
        acc.add(hit);
    }
    EXPECT_NEAR(acc.mean(), left_hit_probability_exact(LeftHitModel::drift(0.4)), 4 * acc.stderr_of_mean());
}

TEST(K0, MatchesPmfScan) {
    for (int i = 0; i <= 9; ++i) {
        const double p = i / 10.0;
        EXPECT_EQ(k0_threshold(p), k0_by_scan(p)) << p;
    }
    EXPECT_EQ(k0_threshold(0.0), 1);
    EXPECT_THROW(k0_threshold(1.0), std::invalid_argument);
}

TEST(YChain, Basics) {
    RngStream rng(1);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(y_step(0, 0.7, rng), 0);
    for (int k = 1; k < 10; ++k) ASSERT_EQ(y_step(k, 1.0, rng), k + 1);
    EXPECT_THROW(y_step(-1, 0.5, rng), std::invalid_argument);
}

TEST(YChain, BinomialChiSquare) {
    RngStream rng(314);
    const int n = 1'000'000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(y_step(2, 0.5, rng))];
    double chi2 = 0;
    for (int k = 0; k <= 3; ++k) {
        const double e = n * binom_pmf(3, 0.5, k);
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    const double crit = boost::math::quantile(boost::math::chi_squared_distribution<double>(3), 0.99);
    EXPECT_LT(chi2, crit);
}

TEST(YChain, AbsorptionPreserved) {
    RngStream rng(2);
    for (int path = 0; path < 1000; ++path) {
        int y = 3;
        bool dead = false;
        for (int n = 0; n < 50; ++n) {
            y = y_step(y, 0.4, rng);
            if (dead) {
                ASSERT_EQ(y, 0);
            }
            dead = dead || y == 0;
        }
    }
}

TEST(Dominating, Table) {
    RngStream rng(1);
    const int k0 = k0_threshold(0.5);
    EXPECT_EQ(dominating_step(0, 0.5, k0, rng), 0);
    EXPECT_THROW(dominating_step(1, 0.5, 3, rng), std::invalid_argument);
    EXPECT_EQ(dominating_step_from_uniform(k0, 0.999999, k0, 0.5), k0 + 1);
    // drop to zero exactly when u < (1-p)^(k0+1)
    const double drop = std::pow(0.5, k0 + 1);
    EXPECT_EQ(dominating_step_from_uniform(k0, 0.5, k0, drop * 0.99), 0);
    EXPECT_EQ(dominating_step_from_uniform(k0, 0.5, k0, drop * 1.01), k0 + 1);
    EXPECT_EQ(dominating_step_from_uniform(k0 + 3, 0.5, k0, 0.6), k0 + 2);
    EXPECT_EQ(dominating_step_from_uniform(k0 + 3, 0.5, k0, 0.7), k0 + 4);
}

TEST(Dominating, CoupledPathsNeverCross) {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const int k0 = k0_threshold(p);
        RngStream rng = RngStream(99).child(static_cast<std::uint64_t>(p * 10));
        for (int path = 0; path < 10000; ++path) {
            int y = 1 + static_cast<int>(rng.below(8));
            int yt = std::max(y, k0);
            for (int n = 0; n < 60; ++n) {
                const double u = rng.uniform();
                y = y_step_from_uniform(y, p, u);
                yt = dominating_step_from_uniform(yt, p, k0, u);
                ASSERT_GE(yt, y) << p << ' ' << path << ' ' << n;
                if (yt == 0) break;
            }
        }
    }
}

TEST(LineFrogs, MatchesEngineReach) {
    // P(0 ~> -2) for FM*(1, pi_sym, 0.9): specialised line simulation vs general engine
    const int trials = 20000;
    Accumulator line;
    Accumulator engine;
    LineFrogConfig lc;
    lc.survival = 0.9;
    lc.left_stop = -2;
    FrogSystemConfig fc;
    fc.kernel = TransitionKernel::one_dim(0.0);
    fc.survival = 0.9;
    fc.arena = LatticeBox::cube(1, 200);
    fc.max_steps = 100000;
    for (int t = 0; t < trials; ++t) {
        line.add(simulate_line_frogs(lc, RngStream(1).child(t)).lo <= -2);
        const auto rec = run_frog_model_with_death(fc, RngStream(2).child(t));
        engine.add(rec.activated.front()[0] <= -2);
    }
    const double sep = std::hypot(line.stderr_of_mean(), engine.stderr_of_mean());
    EXPECT_NEAR(line.mean(), engine.mean(), 4 * sep);
}

TEST(ReachDecay, FullDriftIsZero) {
    const auto r = reach_decay_estimate(LeftHitModel::drift(1.0), 5, 1000, RngStream(1));
    for (double e : r.estimate) EXPECT_EQ(e, 0.0);
    EXPECT_TRUE(r.lower_bound);
    EXPECT_THROW(reach_decay_estimate(LeftHitModel::drift(0.5), 2, 10, RngStream(1)), std::invalid_argument);
}

TEST(ReachDecay, RatesPositive) {
    int i = 0;
    for (const auto& m : {LeftHitModel::drift(0.2), LeftHitModel::drift(0.4), LeftHitModel::drift(0.6),
                          LeftHitModel::drift(0.8), LeftHitModel::death(0.7), LeftHitModel::death(0.8),
                          LeftHitModel::death(0.9)}) {
        const auto r = reach_decay_estimate(m, 6, 20000, RngStream(5).child(++i));
        EXPECT_GT(r.rate, 0.0) << i;
        ASSERT_EQ(r.estimate.size(), 6u);
        for (std::size_t n = 1; n < r.estimate.size(); ++n) EXPECT_LE(r.estimate[n], r.estimate[n - 1] + 1e-12);
    }
}

TEST(ReachDecay, Deterministic) {
    const auto a = reach_decay_estimate(LeftHitModel::death(0.9), 4, 2000, RngStream(3), 1);
    const auto b = reach_decay_estimate(LeftHitModel::death(0.9), 4, 2000, RngStream(3), 3);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.rate, b.rate);
}
