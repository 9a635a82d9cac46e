#include "fpp/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "fpp/errors.hpp"

namespace fpp {

EndCountReport tree_end_count(const GeodesicTree& tree, int r, int R) {
    const auto& region = tree.region();
    const Point root = region.point(tree.root());
    if (r < 0 || r >= R) throw DomainError("end count needs 0 <= r < R");
    if (R > region.inradius(root))
        throw DomainError("outer radius " + std::to_string(R) + " exceeds box inradius " +
                          std::to_string(region.inradius(root)) + " about the root");

    const auto n = static_cast<std::size_t>(region.vertex_count());
    auto radius = [&](VertexId v) {
        int m = 0;
        for (int a = 0; a < region.dim(); ++a) m = std::max(m, std::abs(region.coord(v, a) - root[a]));
        return m;
    };
    std::vector<VertexId> anchor(n, kNoVertex);
    std::vector<char> truncated(n, 0);
    std::map<VertexId, VertexId> first_exit;  // anchor -> lowest-id exit vertex
    std::int64_t exits = 0;

    for (VertexId v : tree.bfs_order()) {
        const int rv = radius(v);
        if (v != tree.root()) {
            const VertexId p = tree.parent(v);
            truncated[v] = truncated[p] || radius(p) >= R;
            anchor[v] = anchor[p] != kNoVertex ? anchor[p] : (rv > r ? v : kNoVertex);
        }
        if (!truncated[v] && rv == R) {
            ++exits;
            auto [it, inserted] = first_exit.emplace(anchor[v], v);
            if (!inserted) it->second = std::min(it->second, v);
        }
    }

    EndCountReport rep;
    rep.inner_radius = r;
    rep.outer_radius = R;
    rep.count = static_cast<int>(first_exit.size());
    rep.exit_vertices = exits;
    for (const auto& [a, e] : first_exit) {
        const Point d = region.point(e) - root;
        const double norm = euclidean_norm(d);
        std::vector<double> u(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) u[i] = d[i] / norm;
        rep.exit_directions.push_back(std::move(u));
    }
    return rep;
}

std::vector<std::vector<VertexId>> boundary_geodesic_candidates(const PassageMap& pm) {
    const auto& region = pm.region();
    std::set<VertexId> endpoints;
    std::vector<std::vector<VertexId>> out;
    for (VertexId b = 0; b < region.vertex_count(); ++b) {
        if (!region.on_boundary(b)) continue;
        auto ids = geodesic_ids(pm, b);
        const auto hit = std::find_if(ids.begin(), ids.end(), [&](VertexId v) { return region.on_boundary(v); });
        ids.erase(hit + 1, ids.end());
        if (endpoints.insert(ids.back()).second) out.push_back(std::move(ids));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a.back() < b.back();
    });
    return out;
}

DisjointGeodesics disjoint_geodesic_count(const Environment& env, std::span<const Point> sources,
                                          const BoxRegion& region, std::int64_t node_budget) {
    if (sources.empty()) throw ConfigError("at least one source required");
    for (const auto& s : sources)
        if (!region.contains(s)) throw DomainError("source " + to_string(s) + " outside region " + region.describe());

    const int k = static_cast<int>(sources.size());
    std::vector<PassageMap> maps;
    std::vector<std::vector<std::vector<VertexId>>> candidates;
    for (const auto& s : sources) {
        maps.push_back(passage_map(env, s, region));
        candidates.push_back(boundary_geodesic_candidates(maps.back()));
    }

    DisjointGeodesics out;
    std::vector<char> used(static_cast<std::size_t>(region.vertex_count()), 0);
    std::vector<int> choice(k, -1), best_choice(k, -1);
    int best = 0;
    bool aborted = false;

    // Depth-first over sources; the first leaf is the greedy assignment, later
    // leaves are augmentations. Pruned by the count still achievable.
    std::function<void(int, int)> search = [&](int i, int chosen) {
        if (aborted || chosen + (k - i) <= best) return;
        if (++out.nodes > node_budget) {
            aborted = true;
            return;
        }
        if (i == k) {
            best = chosen;
            best_choice = choice;
            return;
        }
        for (std::size_t c = 0; c < candidates[i].size() && best < k; ++c) {
            const auto& path = candidates[i][c];
            if (std::any_of(path.begin(), path.end(), [&](VertexId v) { return used[v] != 0; })) continue;
            for (VertexId v : path) used[v] = 1;
            choice[i] = static_cast<int>(c);
            search(i + 1, chosen + 1);
            choice[i] = -1;
            for (VertexId v : path) used[v] = 0;
        }
        search(i + 1, chosen);
    };
    search(0, 0);

    out.count = best;
    out.exact = !aborted;
    for (int i = 0; i < k; ++i) {
        if (best_choice[i] < 0) continue;
        LatticePath path;
        for (VertexId v : candidates[i][best_choice[i]]) path.vertices.push_back(region.point(v));
        const VertexId end = candidates[i][best_choice[i]].back();
        path.weight = maps[i].time(end);
        path.unique = maps[i].tie_count() == 0;
        out.paths.push_back(std::move(path));
    }
    return out;
}

DisjointGeodesics disjoint_geodesic_count(const Environment& env, std::span<const Point> sources, int R) {
    if (R < 1) throw DomainError("radius must be positive");
    return disjoint_geodesic_count(env, sources, BoxRegion::centered(Point(env.region().dim(), 0), R));
}

MergePoint coalescence_merge(const Environment& env, std::span<const int> x, std::span<const int> y,
                             std::span<const int> target, const BoxRegion& region) {
    if (!region.contains(x) || !region.contains(y)) throw DomainError("merge endpoints outside region");
    const auto pm = passage_map(env, target, region);
    const VertexId t = pm.source_id();
    std::vector<int> depth_x(static_cast<std::size_t>(region.vertex_count()), -1);
    int steps = 0;
    for (VertexId v = region.index(x); v != kNoVertex; v = pm.pred(v)) depth_x[v] = steps++;

    MergePoint mp;
    VertexId v = region.index(y);
    int steps_y = 0;
    while (depth_x[v] < 0) {
        v = pm.pred(v);
        ++steps_y;
    }
    const bool endpoint_only = v == t && region.index(x) != t && region.index(y) != t;
    if (!endpoint_only) {
        mp.vertex = region.point(v);
        mp.steps_from_x = depth_x[v];
        mp.steps_from_y = steps_y;
    }
    return mp;
}

MergePoint coalescence_merge(const Environment& env, std::span<const int> x, std::span<const int> y,
                             std::span<const int> target) {
    return coalescence_merge(env, x, y, target, env.region());
}

std::vector<std::vector<double>> direction_sequence(const LatticePath& path) {
    if (path.vertices.size() < 2) throw DomainError("direction sequence needs a path with at least two vertices");
    const Point& origin = path.vertices.front();
    std::vector<std::vector<double>> out;
    out.reserve(path.vertices.size() - 1);
    for (std::size_t k = 1; k < path.vertices.size(); ++k) {
        const Point d = path.vertices[k] - origin;
        const double norm = euclidean_norm(d);
        if (norm == 0) throw DomainError("path revisits its origin");
        std::vector<double> u(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) u[i] = d[i] / norm;
        out.push_back(std::move(u));
    }
    return out;
}

WitnessCheck verify_disjoint_witness(const Environment& env, const Partition& p, std::span<const LatticePath> paths) {
    const auto& r = p.region;
    auto fail = [](std::string why) { return WitnessCheck{false, std::move(why)}; };
    if (static_cast<int>(paths.size()) != p.k()) return fail("expected one path per cell");
    std::vector<int> claimed(static_cast<std::size_t>(r.vertex_count()), -1);
    for (int i = 0; i < p.k(); ++i) {
        const auto& path = paths[i];
        const std::string tag = "path " + std::to_string(i) + ": ";
        if (path.vertices.empty() || path.vertices.front() != p.sources[i]) return fail(tag + "does not start at its source");
        if (!r.on_boundary(path.vertices.back())) return fail(tag + "does not end on the region boundary");
        if (!path.self_avoiding()) return fail(tag + "not a self-avoiding lattice path");
        for (const auto& v : path.vertices) {
            if (!r.contains(v)) return fail(tag + "leaves the region");
            const VertexId id = r.index(v);
            if (p.owner[id] != i) return fail(tag + "leaves its cell at " + to_string(v));
            if (claimed[id] >= 0) return fail(tag + "meets path " + std::to_string(claimed[id]));
            claimed[id] = i;
        }
        const Time w = path_weight(env, path.vertices);
        if (w != path.weight) return fail(tag + "stated weight differs from its edge sum");
        if (w != passage_time(passage_map(env, p.sources[i], r), path.vertices.back()))
            return fail(tag + "is not a geodesic");
    }
    return {true, {}};
}

nlohmann::json end_count_record(const EndCountReport& report, std::uint64_t seed) {
    return {{"seed", seed},
            {"r", report.inner_radius},
            {"R", report.outer_radius},
            {"count", report.count},
            {"exit_vertices", report.exit_vertices},
            {"exit_directions", report.exit_directions}};
}

nlohmann::json merge_record(const MergePoint& merge, std::uint64_t seed) {
    nlohmann::json j{{"seed", seed},
                     {"merged", merge.vertex.has_value()},
                     {"vertex", nullptr},
                     {"steps_from_x", nullptr},
                     {"steps_from_y", nullptr}};
    if (merge.vertex) {
        j["vertex"] = *merge.vertex;
        j["steps_from_x"] = merge.steps_from_x;
        j["steps_from_y"] = merge.steps_from_y;
    }
    return j;
}

}  // namespace fpp
