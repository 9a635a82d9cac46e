#include "fpp/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "fpp/errors.hpp"

namespace fpp {

BoxRegion::BoxRegion(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw ConfigError("box corners differ in dimension");
    if (lower_.size() < 2) throw ConfigError("lattice dimension must be at least 2");
    const int d = dim();
    stride_.assign(d, 1);
    std::int64_t count = 1;
    for (int a = d - 1; a >= 0; --a) {
        if (upper_[a] < lower_[a]) throw ConfigError("box upper corner below lower corner");
        stride_[a] = count;
        count *= extent(a);
        if (count > std::numeric_limits<VertexId>::max())
            throw ConfigError("box too large for 32-bit vertex ids");
    }
    vertex_count_ = count;
}

BoxRegion BoxRegion::centered(const Point& center, int radius) {
    Point lo(center), hi(center);
    for (std::size_t a = 0; a < center.size(); ++a) {
        lo[a] -= radius;
        hi[a] += radius;
    }
    return {std::move(lo), std::move(hi)};
}

std::int64_t BoxRegion::edge_count() const {
    std::int64_t total = 0;
    for (int a = 0; a < dim(); ++a) total += (vertex_count_ / extent(a)) * (extent(a) - 1);
    return total;
}

bool BoxRegion::contains(std::span<const int> p) const {
    if (static_cast<int>(p.size()) != dim()) return false;
    for (int a = 0; a < dim(); ++a)
        if (p[a] < lower_[a] || p[a] > upper_[a]) return false;
    return true;
}

bool BoxRegion::contains(const BoxRegion& inner) const {
    return inner.dim() == dim() && contains(inner.lower_) && contains(inner.upper_);
}

bool BoxRegion::on_boundary(std::span<const int> p) const {
    for (int a = 0; a < dim(); ++a)
        if (p[a] == lower_[a] || p[a] == upper_[a]) return true;
    return false;
}

bool BoxRegion::on_boundary(VertexId v) const {
    for (int a = 0; a < dim(); ++a) {
        const int c = coord(v, a);
        if (c == lower_[a] || c == upper_[a]) return true;
    }
    return false;
}

VertexId BoxRegion::index(std::span<const int> p) const {
    if (!contains(p)) throw DomainError("vertex " + to_string(p) + " outside box " + describe());
    std::int64_t id = 0;
    for (int a = 0; a < dim(); ++a) id += (p[a] - lower_[a]) * stride_[a];
    return static_cast<VertexId>(id);
}

Point BoxRegion::point(VertexId v) const {
    if (v < 0 || v >= vertex_count_) throw DomainError("vertex id out of range");
    Point p(dim());
    for (int a = 0; a < dim(); ++a) p[a] = coord(v, a);
    return p;
}

VertexId BoxRegion::step(VertexId v, int axis, int dir) const {
    const int c = coord(v, axis) + dir;
    if (c < lower_[axis] || c > upper_[axis]) return kNoVertex;
    return static_cast<VertexId>(v + dir * stride_[axis]);
}

int BoxRegion::inradius(std::span<const int> p) const {
    int r = std::numeric_limits<int>::max();
    for (int a = 0; a < dim(); ++a) r = std::min({r, p[a] - lower_[a], upper_[a] - p[a]});
    return r;
}

std::vector<std::int64_t> BoxRegion::canonical_edge_slots() const {
    const int d = dim();
    std::vector<std::int64_t> slots(static_cast<std::size_t>(vertex_count_) * d, -1);
    std::int64_t next = 0;
    for (VertexId v = 0; v < vertex_count_; ++v)
        for (int a = 0; a < d; ++a)
            if (coord(v, a) < upper_[a]) slots[static_cast<std::size_t>(v) * d + a] = next++;
    return slots;
}

std::string BoxRegion::describe() const { return to_string(lower_) + ".." + to_string(upper_); }

int l1_norm(std::span<const int> p) {
    int s = 0;
    for (int c : p) s += std::abs(c);
    return s;
}

int sup_norm(std::span<const int> p) {
    int s = 0;
    for (int c : p) s = std::max(s, std::abs(c));
    return s;
}

double euclidean_norm(std::span<const int> p) {
    double s = 0;
    for (int c : p) s += double(c) * c;
    return std::sqrt(s);
}

Point operator-(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Point operator+(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

bool adjacent(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) return false;
    int diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
    return diff == 1;
}

std::string to_string(std::span<const int> p) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << ')';
    return os.str();
}

}  // namespace fpp
