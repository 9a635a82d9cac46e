#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fpp/environment.hpp"
#include "fpp/lattice.hpp"
#include "fpp/time.hpp"

namespace fpp {

/// Self-avoiding lattice path with its total weight (summed front to back).
struct LatticePath {
    std::vector<Point> vertices;
    Time weight;
    /// False when the engine met an exact tie, so the path may not be the only minimizer.
    bool unique = true;

    std::size_t size() const { return vertices.size(); }
    bool self_avoiding() const;
    bool operator==(const LatticePath&) const = default;
};

/// Single-source passage times T(source, .) and predecessor links over a box.
class PassageMap {
public:
    const Point& source() const { return source_; }
    VertexId source_id() const { return source_id_; }
    const BoxRegion& region() const { return region_; }

    Time time(VertexId v) const { return times_[v]; }
    VertexId pred(VertexId v) const { return pred_[v]; }
    /// Weight of the edge (pred(v), v); 0 at the source.
    double in_weight(VertexId v) const { return in_weight_[v]; }
    const std::vector<Time>& times() const { return times_; }
    const std::vector<VertexId>& preds() const { return pred_; }

    /// Number of relaxations that matched an existing tentative time exactly.
    std::int64_t tie_count() const { return ties_; }

private:
    friend PassageMap passage_map(const Environment&, std::span<const int>, const BoxRegion&);
    Point source_;
    VertexId source_id_ = kNoVertex;
    BoxRegion region_;
    std::vector<Time> times_;
    std::vector<VertexId> pred_;
    std::vector<double> in_weight_;
    std::int64_t ties_ = 0;
};

/// Dijkstra (binary heap, lazy deletion) restricted to `region`, which must lie
/// inside env.region(). Exact ties resolve to the lexicographically smallest
/// predecessor and are counted.
PassageMap passage_map(const Environment& env, std::span<const int> source, const BoxRegion& region);
PassageMap passage_map(const Environment& env, std::span<const int> source);

Time passage_time(const PassageMap& pm, std::span<const int> target);
LatticePath geodesic(const PassageMap& pm, std::span<const int> target);
LatticePath geodesic(const PassageMap& pm, VertexId target);
/// Vertex ids from source to target along the predecessor chain.
std::vector<VertexId> geodesic_ids(const PassageMap& pm, VertexId target);

/// Sum of edge weights along `path`, front to back.
Time path_weight(const Environment& env, std::span<const Point> path);

inline constexpr std::int64_t kBruteForceMaxVertices = 20;

struct BruteForceResult {
    Time time;
    LatticePath path;
    std::int64_t paths_enumerated = 0;
    std::int64_t minimizers = 0;
};

/// Exhaustive minimum over all self-avoiding x -> y paths in `region`
/// (default: the whole environment box). Refuses boxes above 20 vertices.
BruteForceResult brute_force_passage_time(const Environment& env, std::span<const int> x, std::span<const int> y);
BruteForceResult brute_force_passage_time(const Environment& env, std::span<const int> x, std::span<const int> y,
                                          const BoxRegion& region);

/// Spanning tree of geodesics from a passage map's source.
class GeodesicTree {
public:
    explicit GeodesicTree(const PassageMap& pm);

    VertexId root() const { return root_; }
    const BoxRegion& region() const { return region_; }
    VertexId parent(VertexId v) const { return parent_[v]; }
    std::span<const VertexId> children(VertexId v) const {
        return {children_.data() + offsets_[v], children_.data() + offsets_[v + 1]};
    }
    std::int64_t vertex_count() const { return region_.vertex_count(); }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(children_.size()); }
    /// Vertex ids in breadth-first order from the root.
    const std::vector<VertexId>& bfs_order() const { return order_; }
    std::vector<VertexId> path_from_root(VertexId v) const;

private:
    VertexId root_ = kNoVertex;
    BoxRegion region_;
    std::vector<VertexId> parent_;
    std::vector<std::int64_t> offsets_;
    std::vector<VertexId> children_;
    std::vector<VertexId> order_;
};

GeodesicTree geodesic_tree(const PassageMap& pm);

/// CSV: x0..x{d-1}, T, pred_x0..pred_x{d-1} in canonical vertex order.
void write_passage_map_csv(const PassageMap& pm, std::ostream& os);

}  // namespace fpp
