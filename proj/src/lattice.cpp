#include "froglab/lattice.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace froglab {

Point::Point(std::initializer_list<std::int32_t> coords) : dim(static_cast<int>(coords.size())) {
    if (coords.size() == 0 || coords.size() > static_cast<std::size_t>(kMaxDim))
        throw std::invalid_argument("point dimension out of range");
    std::size_t i = 0;
    for (auto c : coords) x[i++] = c;
}

Point Point::axis(int d, int axis, std::int32_t length) {
    Point p(d);
    p[axis] = length;
    return p;
}

std::int64_t Point::l1() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += std::abs(static_cast<std::int64_t>(x[i]));
    return s;
}

std::int64_t Point::linf() const {
    std::int64_t m = 0;
    for (int i = 0; i < dim; ++i) m = std::max<std::int64_t>(m, std::abs(x[i]));
    return m;
}

double Point::l2() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += static_cast<double>(x[i]) * x[i];
    return std::sqrt(s);
}

bool Point::lateral_is_zero() const {
    for (int i = 1; i < dim; ++i)
        if (x[i] != 0) return false;
    return true;
}

std::string Point::str() const {
    std::string out = "(";
    for (int i = 0; i < dim; ++i) {
        if (i) out += ",";
        out += std::to_string(x[i]);
    }
    return out + ")";
}

Point operator+(Point a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) a[i] += b[i];
    return a;
}

Point operator-(Point a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) a[i] -= b[i];
    return a;
}

Point operator*(std::int32_t k, Point a) {
    for (int i = 0; i < a.dim; ++i) a[i] *= k;
    return a;
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
    return static_cast<std::size_t>(point_key(p));
}

std::uint64_t point_key(const Point& p, std::uint64_t salt) noexcept {
    std::uint64_t h = splitmix64(salt ^ static_cast<std::uint64_t>(p.dim));
    for (int i = 0; i < p.dim; ++i)
        h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x[i])));
    return h;
}

LatticeBox::LatticeBox(Point lower, Point upper, BoundaryMode mode)
    : lower_(lower), upper_(upper), mode_(mode) {
    if (lower_.dim != upper_.dim) throw std::invalid_argument("box bounds differ in dimension");
    for (int i = 0; i < dim(); ++i)
        if (lower_[i] > upper_[i])
            throw std::invalid_argument(fmt::format("box axis {}: lower {} > upper {}", i + 1,
                                                    lower_[i], upper_[i]));
    std::size_t stride = 1;
    for (int i = dim() - 1; i >= 0; --i) {
        stride_[static_cast<std::size_t>(i)] = stride;
        stride *= static_cast<std::size_t>(extent(i));
    }
}

LatticeBox LatticeBox::cube(int d, std::int32_t radius, BoundaryMode mode) {
    return centered(Point::origin(d), radius, mode);
}

LatticeBox LatticeBox::centered(const Point& centre, std::int32_t radius, BoundaryMode mode) {
    if (radius < 0) throw std::invalid_argument("box radius must be non-negative");
    Point lo = centre, hi = centre;
    for (int i = 0; i < centre.dim; ++i) {
        lo[i] -= radius;
        hi[i] += radius;
    }
    return LatticeBox(lo, hi, mode);
}

std::size_t LatticeBox::volume() const {
    std::size_t v = 1;
    for (int i = 0; i < dim(); ++i) v *= static_cast<std::size_t>(extent(i));
    return v;
}

bool LatticeBox::contains(const Point& p) const {
    for (int i = 0; i < dim(); ++i)
        if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
    return true;
}

bool LatticeBox::on_shell(const Point& p) const {
    for (int i = 0; i < dim(); ++i)
        if (p[i] == lower_[i] || p[i] == upper_[i]) return true;
    return false;
}

std::size_t LatticeBox::index(const Point& p) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim(); ++i)
        idx += static_cast<std::size_t>(p[i] - lower_[i]) * stride_[static_cast<std::size_t>(i)];
    return idx;
}

Point LatticeBox::point(std::size_t index) const {
    Point p(dim());
    for (int i = 0; i < dim(); ++i) {
        const auto s = stride_[static_cast<std::size_t>(i)];
        p[i] = lower_[i] + static_cast<std::int32_t>(index / s);
        index %= s;
    }
    return p;
}

std::int64_t LatticeBox::diameter() const {
    std::int64_t m = 0;
    for (int i = 0; i < dim(); ++i) m = std::max(m, extent(i) - 1);
    return m;
}

void LatticeBox::for_each(const std::function<void(const Point&)>& f) const {
    const std::size_t n = volume();
    for (std::size_t i = 0; i < n; ++i) f(point(i));
}

void TransitionKernel::validate() const {
    if (d < 1 || d > kMaxDim)
        throw std::invalid_argument(fmt::format("dimension d={} outside 1..{}", d, kMaxDim));
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument(fmt::format("w={} outside [0,1]", w));
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument(fmt::format("alpha={} outside [0,1]", alpha));
    if (!(hold >= 0.0 && hold < 1.0))
        throw std::invalid_argument(fmt::format("hold={} outside [0,1)", hold));
    if (d == 1 && w != 1.0) throw std::invalid_argument("d=1 requires w=1");
}

double kernel_probability(const TransitionKernel& k, int dir) {
    k.validate();
    const int axis = std::abs(dir);
    if (axis < 1 || axis > k.d)
        throw std::invalid_argument(fmt::format("direction {} outside +/-1..+/-{}", dir, k.d));
    const double move = 1.0 - k.hold;
    if (axis == 1) return move * k.w * (dir > 0 ? 1.0 + k.alpha : 1.0 - k.alpha) / 2.0;
    return move * (1.0 - k.w) / (2.0 * (k.d - 1));
}

double hold_probability(const TransitionKernel& k) {
    k.validate();
    return k.hold;
}

StepSampler::StepSampler(const TransitionKernel& kernel) : kernel_(kernel) {
    kernel.validate();
    hold_ = kernel.hold;
    plus_ = hold_ + kernel_probability(kernel, +1);
    minus_ = plus_ + kernel_probability(kernel, -1);
    lateral_ = kernel.d - 1;
    if (lateral_ > 0 && minus_ < 1.0) lateral_scale_ = 2.0 * lateral_ / (1.0 - minus_);
}

Step sample_step(const TransitionKernel& kernel, RngStream& rng) {
    return StepSampler(kernel).sample(rng);
}

std::vector<Point> walk_path(const TransitionKernel& kernel, const Point& start,
                             std::int64_t max_steps, const LatticeBox* box, RngStream& rng) {
    if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
    if (start.dim != kernel.d) throw std::invalid_argument("start point dimension mismatch");
    const StepSampler sampler(kernel);
    std::vector<Point> path{start};
    if (box && !box->contains(start)) return path;
    if (box && box->mode() == BoundaryMode::absorbing && box->on_shell(start)) return path;
    Point p = start;
    for (std::int64_t n = 0; n < max_steps; ++n) {
        const Step s = sampler.sample(rng);
        Point next = p;
        apply_step(next, s);
        if (box) {
            if (!box->contains(next)) break;  // killed
            path.push_back(next);
            p = next;
            if (box->mode() == BoundaryMode::absorbing && box->on_shell(p)) break;
        } else {
            path.push_back(next);
            p = next;
        }
    }
    return path;
}

}  // namespace froglab
