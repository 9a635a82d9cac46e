#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpp/competition.hpp"
#include "fpp/metric.hpp"
#include "json.hpp"

namespace fpp {

/// Finite stand-in for the number of ends of the geodesic tree.
///
/// Branches are root paths truncated where they first reach sup-distance R.
/// Two branches are disjoint outside radius r iff their first vertices beyond
/// radius r differ, so the count is the number of distinct such vertices.
struct EndCountReport {
    int inner_radius = 0;
    int outer_radius = 0;
    int count = 0;
    std::int64_t exit_vertices = 0;
    /// One unit vector per branch: direction from the root to the branch's
    /// first exit vertex (lowest id).
    std::vector<std::vector<double>> exit_directions;
};

EndCountReport tree_end_count(const GeodesicTree& tree, int r, int R);

struct DisjointGeodesics {
    int count = 0;
    /// True when the search finished; otherwise `count` is only a lower bound.
    bool exact = false;
    std::vector<LatticePath> paths;
    std::int64_t nodes = 0;
};

/// Lower bound (exact on small inputs) on the number of pairwise
/// vertex-disjoint geodesics, each from one source to the boundary of `region`.
/// Candidate paths are geodesics truncated at their first boundary vertex.
DisjointGeodesics disjoint_geodesic_count(const Environment& env, std::span<const Point> sources,
                                          const BoxRegion& region, std::int64_t node_budget = 1'000'000);
/// Region = sup-norm box of radius R about the origin.
DisjointGeodesics disjoint_geodesic_count(const Environment& env, std::span<const Point> sources, int R);

/// All candidate source-to-boundary geodesics (one per distinct truncated endpoint).
std::vector<std::vector<VertexId>> boundary_geodesic_candidates(const PassageMap& pm);

struct MergePoint {
    std::optional<Point> vertex;
    /// Steps from x and from y to the merge vertex (when present).
    int steps_from_x = -1;
    int steps_from_y = -1;
};

/// Where geo(x, target) and geo(y, target) join for good. Absent when the two
/// geodesics meet only at the target itself.
MergePoint coalescence_merge(const Environment& env, std::span<const int> x, std::span<const int> y,
                             std::span<const int> target, const BoxRegion& region);
MergePoint coalescence_merge(const Environment& env, std::span<const int> x, std::span<const int> y,
                             std::span<const int> target);

/// (v_k - v_0) / |v_k - v_0| for every vertex after the first.
std::vector<std::vector<double>> direction_sequence(const LatticePath& path);

struct WitnessCheck {
    bool ok = false;
    std::string reason;
};

/// Verifies a coexistence witness: one path per cell, each starting at its
/// source, ending on the region boundary, lying inside its cell, carrying
/// weight T(source, end), and pairwise vertex-disjoint.
WitnessCheck verify_disjoint_witness(const Environment& env, const Partition& p, std::span<const LatticePath> paths);

nlohmann::json end_count_record(const EndCountReport& report, std::uint64_t seed);
nlohmann::json merge_record(const MergePoint& merge, std::uint64_t seed);

}  // namespace fpp
