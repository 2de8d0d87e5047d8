#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "froglab/rng.hpp"

namespace froglab {

/// Largest lattice dimension the toolkit supports.
inline constexpr int kMaxDim = 8;

/// A point of Z^d, d <= kMaxDim. Unused trailing coordinates are zero, so
/// points of the same dimension compare and hash by their coordinates.
struct Point {
    std::array<std::int32_t, kMaxDim> x{};
    int dim = 1;

    Point() = default;
    explicit Point(int d) : dim(d) {}
    Point(std::initializer_list<std::int32_t> coords);

    static Point origin(int d) { return Point(d); }
    static Point axis(int d, int axis, std::int32_t length);

    std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
    std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

    friend bool operator==(const Point& a, const Point& b) { return a.dim == b.dim && a.x == b.x; }
    friend bool operator<(const Point& a, const Point& b) { return a.x < b.x; }

    [[nodiscard]] std::int64_t l1() const;
    [[nodiscard]] std::int64_t linf() const;
    [[nodiscard]] double l2() const;
    [[nodiscard]] bool lateral_is_zero() const;  // coordinates 2..d vanish
    [[nodiscard]] std::string str() const;
};

Point operator+(Point a, const Point& b);
Point operator-(Point a, const Point& b);
Point operator*(std::int32_t k, Point a);

struct PointHash {
    std::size_t operator()(const Point& p) const noexcept;
};

/// 64-bit key for a point, stable across runs; used to address per-frog
/// random streams.
std::uint64_t point_key(const Point& p, std::uint64_t salt = 0) noexcept;

enum class BoundaryMode {
    /// A walk stops on reaching a site of the box's outer shell.
    absorbing,
    /// A walk is killed when it would step out of the box.
    killing,
};

/// Axis-aligned box of Z^d with inclusive bounds. Linear indices follow the
/// lexicographic order of points (first coordinate most significant).
class LatticeBox {
public:
    LatticeBox() = default;
    LatticeBox(Point lower, Point upper, BoundaryMode mode = BoundaryMode::killing);

    static LatticeBox cube(int d, std::int32_t radius, BoundaryMode mode = BoundaryMode::killing);
    static LatticeBox centered(const Point& centre, std::int32_t radius,
                               BoundaryMode mode = BoundaryMode::killing);

    [[nodiscard]] int dim() const { return lower_.dim; }
    [[nodiscard]] const Point& lower() const { return lower_; }
    [[nodiscard]] const Point& upper() const { return upper_; }
    [[nodiscard]] BoundaryMode mode() const { return mode_; }
    [[nodiscard]] std::int64_t extent(int axis) const { return upper_[axis] - lower_[axis] + 1; }

    [[nodiscard]] std::size_t volume() const;
    [[nodiscard]] bool contains(const Point& p) const;
    /// Site on the outer shell (some coordinate equals a bound).
    [[nodiscard]] bool on_shell(const Point& p) const;
    [[nodiscard]] std::size_t index(const Point& p) const;
    [[nodiscard]] Point point(std::size_t index) const;
    /// Largest coordinate span, the "diameter" used for default step caps.
    [[nodiscard]] std::int64_t diameter() const;

    /// Visit every site in lexicographic order.
    void for_each(const std::function<void(const Point&)>& f) const;

private:
    Point lower_;
    Point upper_;
    BoundaryMode mode_ = BoundaryMode::killing;
    std::array<std::size_t, kMaxDim> stride_{};
};

/// The nearest-neighbour drift kernel: weight `w` on the e1 axis, split
/// (1+alpha)/2 : (1-alpha)/2 between +e1 and -e1, the remaining 1-w spread
/// evenly over the other 2(d-1) directions. A hold probability makes the walk
/// lazy; moves are then scaled by (1 - hold).
struct TransitionKernel {
    int d = 2;
    double w = 0.5;
    double alpha = 0.0;
    double hold = 0.0;

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    static TransitionKernel symmetric(int d) { return {d, d == 1 ? 1.0 : 1.0 / d, 0.0, 0.0}; }
    static TransitionKernel one_dim(double alpha) { return {1, 1.0, alpha, 0.0}; }
};

/// Probability of a step in signed axis direction `dir` (+/-1 .. +/-d).
double kernel_probability(const TransitionKernel& kernel, int dir);
/// Probability of holding (staying put) for one step.
double hold_probability(const TransitionKernel& kernel);

/// One sampled step: axis in [0, d) and sign +/-1, or a hold (sign 0).
struct Step {
    int axis = 0;
    int sign = 0;
    [[nodiscard]] bool is_hold() const { return sign == 0; }
    /// Signed axis index (+/-1 .. +/-d), 0 for hold.
    [[nodiscard]] int dir() const { return sign * (axis + 1); }
};

/// Precomputed inverse-CDF step sampler. One uniform per step.
class StepSampler {
public:
    explicit StepSampler(const TransitionKernel& kernel);

    [[nodiscard]] Step from_uniform(double u) const {
        if (u < hold_) return {};
        if (u < plus_) return {0, +1};
        if (u < minus_) return {0, -1};
        if (lateral_ == 0) return {0, -1};  // only reachable through rounding
        // lateral directions share the remaining mass equally
        const double v = (u - minus_) * lateral_scale_;
        auto k = static_cast<int>(v);
        if (k >= 2 * lateral_) k = 2 * lateral_ - 1;
        return {1 + k / 2, (k % 2 == 0) ? +1 : -1};
    }
    template <class Engine>
    Step sample(Engine& rng) const {
        return from_uniform(rng.uniform());
    }
    [[nodiscard]] const TransitionKernel& kernel() const { return kernel_; }

private:
    TransitionKernel kernel_;
    double hold_ = 0.0;
    double plus_ = 0.0;
    double minus_ = 0.0;
    int lateral_ = 0;
    double lateral_scale_ = 0.0;
};

Step sample_step(const TransitionKernel& kernel, RngStream& rng);

inline void apply_step(Point& p, const Step& s) { p[s.axis] += s.sign; }

/// Trajectory S_0 = start, S_1, ... of at most max_steps steps.
/// With a box: killing mode stops before leaving the box, absorbing mode
/// stops at the first shell site reached (which is included).
std::vector<Point> walk_path(const TransitionKernel& kernel, const Point& start,
                             std::int64_t max_steps, const LatticeBox* box, RngStream& rng);

}  // namespace froglab
