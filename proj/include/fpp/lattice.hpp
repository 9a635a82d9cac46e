#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fpp {

using Point = std::vector<int>;
using VertexId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;

/// Axis-aligned box of the Z^d nearest-neighbour lattice with inclusive bounds.
///
/// Vertices are numbered in lexicographic coordinate order (first axis
/// slowest). Edges are identified by (lower endpoint, axis); the canonical
/// edge order is lexicographic on that pair.
class BoxRegion {
public:
    BoxRegion() = default;
    BoxRegion(Point lower, Point upper);

    /// Box [-radius, radius]^d translated to `center`.
    static BoxRegion centered(const Point& center, int radius);

    int dim() const { return static_cast<int>(lower_.size()); }
    const Point& lower() const { return lower_; }
    const Point& upper() const { return upper_; }
    int extent(int axis) const { return upper_[axis] - lower_[axis] + 1; }

    std::int64_t vertex_count() const { return vertex_count_; }
    /// Closed form: sum over axes of (extent_a - 1) * prod_{b != a} extent_b.
    std::int64_t edge_count() const;

    bool contains(std::span<const int> p) const;
    bool contains(const BoxRegion& inner) const;
    bool on_boundary(std::span<const int> p) const;
    bool on_boundary(VertexId v) const;

    VertexId index(std::span<const int> p) const;
    Point point(VertexId v) const;
    /// Coordinate of `v` along one axis, without materializing the point.
    int coord(VertexId v, int axis) const { return lower_[axis] + static_cast<int>((v / stride_[axis]) % extent(axis)); }
    std::int64_t stride(int axis) const { return stride_[axis]; }

    /// Neighbour of `v` one step along +axis (dir = +1) or -axis (dir = -1), or kNoVertex.
    VertexId step(VertexId v, int axis, int dir) const;

    /// Largest r such that the sup-norm ball of radius r about p fits in the box.
    int inradius(std::span<const int> p) const;

    /// Index of edge (v, v + e_axis) in canonical edge order; -1 if absent.
    /// Computed on demand; use for persistence, not hot loops.
    std::vector<std::int64_t> canonical_edge_slots() const;

    std::string describe() const;
    bool operator==(const BoxRegion&) const = default;

private:
    Point lower_, upper_;
    std::vector<std::int64_t> stride_;
    std::int64_t vertex_count_ = 0;
};

int l1_norm(std::span<const int> p);
int sup_norm(std::span<const int> p);
double euclidean_norm(std::span<const int> p);
Point operator-(const Point& a, const Point& b);
Point operator+(const Point& a, const Point& b);
/// True iff the points are at L1 distance exactly 1.
bool adjacent(std::span<const int> a, std::span<const int> b);
std::string to_string(std::span<const int> p);

}  // namespace fpp
