#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "froglab/rng.hpp"

namespace froglab {

struct XiDraw {
    std::int64_t count = 0;
    bool capped = false;
};

/// Number of activated frogs in FM*(1, pi_sym, 1-w) started with two
/// active frogs at 0, truncated at `cap`. `step_cap` (0 = none) limits
/// each frog's walk. Requires w in (0,1] and cap >= 2.
XiDraw sample_xi(double w, std::int64_t cap, const RngStream& rng, std::int64_t step_cap = 0);

/// 1/2 ((1-alpha) e^theta + (1+alpha) e^-theta) m
double mu_exact_1d(double alpha, double theta, double mean_xi);

/// min{1, 1 / (2 (1 - sqrt(1 - alpha^2)))}, with g(0) = 1.
double reference_brw_boundary(double alpha);

struct MuEstimate {
    double theta = 0.0;
    double mu_hat = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t trials = 0;
    /// Upper bound on the mass dropped by truncating the sums; infinite
    /// when no bound is available.
    double truncated_mass = 0.0;
    /// Share of draws that hit a cap (offspring cap or step budget).
    double cap_fraction = 0.0;
    bool flagged = false;
    /// Factors of the lines estimator: mu = A * B.
    double a_hat = 0.0;
    double b_hat = 0.0;
};

struct ProjectedOptions {
    std::int64_t cap = 10'000;
    unsigned workers = 1;
};

/// mu for the one-dimensional BRW with offspring xi: mu_exact_1d at the
/// sample mean of xi, CI carried over from that of E[xi]. d = 2 only.
MuEstimate estimate_mu_1d_projected(double alpha, double w, double theta, std::int64_t trials,
                                    const RngStream& rng, const ProjectedOptions& options = {});

struct LinesOptions {
    /// Levels k and line sites i beyond this are not simulated.
    int level_cap = 200;
    /// Steps per walk; 0 picks 2 (level_cap + 1) / (w alpha) + 200, at most 20000.
    std::int64_t step_cap = 0;
    /// Total steps in one run of the line frog model; hitting it marks the run
    /// truncated.
    std::int64_t line_step_budget = 2'000'000;
    /// Decay rate of P(0 ~> -n) in FM(1, 1, alpha); NaN estimates it.
    double c_hat = std::numeric_limits<double>::quiet_NaN();
    unsigned workers = 1;
};

/// Decay rate used as the upper end of the admissible theta range.
double line_decay_rate(double alpha, const RngStream& rng);

/// Samples behind the lines estimator; mu-hat can be evaluated at any theta
/// from the same draws.
struct LineSamples {
    int d = 2;
    double w = 0.0;
    double alpha = 0.0;
    double c_hat = 0.0;
    int level_cap = 200;
    /// Per walk from 0: (level k, distinct off-line sites of H_k visited).
    std::vector<std::vector<std::pair<int, std::int64_t>>> occupancy;
    /// Level where each walk stopped.
    std::vector<int> stop_level;
    /// Per run of the line frog model: line sites i with 0 ~>_{L_0} (i,0,...,0).
    std::vector<std::vector<int>> reached;
    std::int64_t truncated_runs = 0;

    [[nodiscard]] MuEstimate evaluate(double theta) const;
};

LineSamples sample_lines(int d, double w, double alpha, std::int64_t trials, const RngStream& rng,
                         const LinesOptions& options = {});

/// E[N_{k,i}]: mean number of distinct sites of H_k off L_0 visited by a
/// walk started at (i,0,...,0), with standard error.
std::pair<double, double> mean_line_occupancy(int d, double w, double alpha, int k, int i, std::int64_t trials,
                                              const RngStream& rng, const LinesOptions& options = {});

/// mu = sum_k E[N_{k,0}] e^{-theta k} * sum_i e^{-theta i} P(0 ~>_{L_0} (i,0,...,0)).
/// Throws std::invalid_argument unless 0 < theta < c_hat.
MuEstimate estimate_mu_lines(int d, double w, double alpha, double theta, std::int64_t trials,
                             const RngStream& rng, const LinesOptions& options = {});

enum class CertStrategy { lines, projected_1d };
enum class Verdict { certified_evidence, inconclusive };

std::string to_string(CertStrategy s);
std::string to_string(Verdict v);
CertStrategy parse_strategy(const std::string& s);

struct ThetaProbe {
    double theta = 0.0;
    double mu_hat = 0.0;
    double ci_high = 0.0;
    double truncated_mass = 0.0;
};

struct TransienceCertificate {
    int d = 2;
    double w = 0.0;
    double alpha = 0.0;
    CertStrategy strategy = CertStrategy::lines;
    MuEstimate estimate;
    Verdict verdict = Verdict::inconclusive;
    std::uint64_t seed = 0;
    double theta_max = 0.0;
    /// Pilot evaluations of the theta search.
    std::vector<ThetaProbe> probes;
    std::string note;

    /// {d, w, alpha, strategy, theta, mu_hat, ci_low, ci_high, trials, truncated_mass, verdict, seed}
    [[nodiscard]] std::string to_json() const;
};

inline constexpr double kMaxTruncatedMass = 1e-3;

/// Pilot with a quarter of the budget, golden-section search for the theta
/// minimising mu-hat over (0, theta_max), then a fresh estimate at that
/// theta with the rest. Certified iff the upper 95% bound is below 1 and
/// the truncated mass below 1e-3.
TransienceCertificate certify_transience(int d, double w, double alpha, CertStrategy strategy,
                                         std::int64_t budget, const RngStream& rng, unsigned workers = 1);

/// Offspring law of a BRW on Z: displacements (in e1) of the children.
struct OffspringModel {
    std::function<void(const RngStream&, std::vector<std::int64_t>&)> sample;
    std::int64_t cap = 10'000;
    std::string name;

    /// xi children, each moving +1 w.p. (1+alpha)/2 and -1 otherwise.
    static OffspringModel xi_1d(double w, double alpha, std::int64_t cap = 10'000);
    /// The line-based offspring: a child at every site off L_0 visited by a
    /// frog of L_0 reached from 0 by frog paths in L_0.
    static OffspringModel lines(int d, double w, double alpha, const LinesOptions& options = {});
    /// Always the same children.
    static OffspringModel fixed(std::vector<std::int64_t> displacements);
};

struct MartingalePath {
    /// M_n = mu^-n sum_i e^{-theta X_n^i}, n = 0..generations.
    std::vector<double> m;
    /// Particles with e1 coordinate 0 in generation n.
    std::vector<std::int64_t> origin_counts;
    std::vector<std::int64_t> population;
    bool truncated = false;
};

MartingalePath simulate_brw_martingale(const OffspringModel& offspring, double theta, double mu, int generations,
                                       std::int64_t population_cap, const RngStream& rng);

}  // namespace froglab
