#include "fpp/metric.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "fpp/errors.hpp"

namespace fpp {

bool LatticePath::self_avoiding() const {
    std::set<Point> seen(vertices.begin(), vertices.end());
    if (seen.size() != vertices.size()) return false;
    for (std::size_t i = 1; i < vertices.size(); ++i)
        if (!adjacent(vertices[i - 1], vertices[i])) return false;
    return true;
}

namespace {

/// Maps ids of a sub-box to ids of the environment box.
struct SubBox {
    SubBox(const BoxRegion& outer, const BoxRegion& inner) : outer(outer), inner(inner) {
        if (!outer.contains(inner)) throw DomainError("region " + inner.describe() + " not inside environment box");
        identical = outer == inner;
        base = outer.index(inner.lower());
    }
    VertexId to_outer(VertexId v) const {
        if (identical) return v;
        std::int64_t id = base;
        for (int a = 0; a < inner.dim(); ++a) id += (inner.coord(v, a) - inner.lower()[a]) * outer.stride(a);
        return static_cast<VertexId>(id);
    }
    const BoxRegion& outer;
    const BoxRegion& inner;
    bool identical = false;
    VertexId base = 0;
};

struct HeapEntry {
    Time time;
    VertexId v;
    bool operator>(const HeapEntry& o) const { return time != o.time ? time > o.time : v > o.v; }
};

}  // namespace

PassageMap passage_map(const Environment& env, std::span<const int> source, const BoxRegion& region) {
    const SubBox sub(env.region(), region);
    if (!region.contains(source)) throw DomainError("source " + to_string(source) + " outside region " + region.describe());

    PassageMap pm;
    pm.source_.assign(source.begin(), source.end());
    pm.region_ = region;
    const auto n = static_cast<std::size_t>(region.vertex_count());
    pm.times_.assign(n, Time::infinity());
    pm.pred_.assign(n, kNoVertex);
    pm.in_weight_.assign(n, 0.0);
    std::vector<char> done(n, 0);

    const int d = region.dim();
    pm.source_id_ = region.index(source);
    pm.times_[pm.source_id_] = Time::zero();
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
    heap.push({Time::zero(), pm.source_id_});

    while (!heap.empty()) {
        const auto [t, u] = heap.top();
        heap.pop();
        if (done[u]) continue;
        done[u] = 1;
        const VertexId eu = sub.to_outer(u);
        for (int a = 0; a < d; ++a) {
            for (int dir : {-1, 1}) {
                const VertexId v = region.step(u, a, dir);
                if (v == kNoVertex || done[v]) continue;
                const VertexId lower = dir > 0 ? eu : static_cast<VertexId>(eu - env.region().stride(a));
                const Time cand = t + env.time(lower, a);
                if (cand < pm.times_[v]) {
                    pm.times_[v] = cand;
                    pm.pred_[v] = u;
                    pm.in_weight_[v] = env.weight(lower, a);
                    heap.push({cand, v});
                } else if (cand == pm.times_[v]) {
                    ++pm.ties_;
                    if (u < pm.pred_[v]) {
                        pm.pred_[v] = u;
                        pm.in_weight_[v] = env.weight(lower, a);
                    }
                }
            }
        }
    }
    return pm;
}

PassageMap passage_map(const Environment& env, std::span<const int> source) {
    return passage_map(env, source, env.region());
}

Time passage_time(const PassageMap& pm, std::span<const int> target) {
    if (!pm.region().contains(target)) throw DomainError("target " + to_string(target) + " outside passage-map region");
    return pm.time(pm.region().index(target));
}

std::vector<VertexId> geodesic_ids(const PassageMap& pm, VertexId target) {
    std::vector<VertexId> ids;
    for (VertexId v = target; v != kNoVertex; v = pm.pred(v)) ids.push_back(v);
    std::reverse(ids.begin(), ids.end());
    return ids;
}

LatticePath geodesic(const PassageMap& pm, VertexId target) {
    LatticePath path;
    const auto ids = geodesic_ids(pm, target);
    path.vertices.reserve(ids.size());
    for (VertexId v : ids) {
        path.vertices.push_back(pm.region().point(v));
        if (v != pm.source_id()) path.weight += Time::from_double(pm.in_weight(v));
    }
    path.unique = pm.tie_count() == 0;
    return path;
}

LatticePath geodesic(const PassageMap& pm, std::span<const int> target) {
    if (!pm.region().contains(target)) throw DomainError("target " + to_string(target) + " outside passage-map region");
    return geodesic(pm, pm.region().index(target));
}

Time path_weight(const Environment& env, std::span<const Point> path) {
    Time total;
    for (std::size_t i = 1; i < path.size(); ++i) total += Time::from_double(env.edge_weight(path[i - 1], path[i]));
    return total;
}

BruteForceResult brute_force_passage_time(const Environment& env, std::span<const int> x, std::span<const int> y) {
    return brute_force_passage_time(env, x, y, env.region());
}

BruteForceResult brute_force_passage_time(const Environment& env, std::span<const int> x, std::span<const int> y,
                                          const BoxRegion& region) {
    if (region.vertex_count() > kBruteForceMaxVertices)
        throw DomainError("brute-force enumeration limited to " + std::to_string(kBruteForceMaxVertices) +
                          " vertices; region has " + std::to_string(region.vertex_count()));
    if (!env.region().contains(region)) throw DomainError("region not inside environment box");
    if (!region.contains(x) || !region.contains(y)) throw DomainError("endpoint outside region");

    const VertexId target = region.index(y);
    const int n = static_cast<int>(region.vertex_count());
    std::vector<Point> points(n);
    for (VertexId v = 0; v < n; ++v) points[v] = region.point(v);

    BruteForceResult best;
    best.time = Time::infinity();
    std::vector<char> on_path(n, 0);
    std::vector<VertexId> stack;

    std::function<void(VertexId, Time)> extend = [&](VertexId u, Time sum) {
        if (u == target) {
            ++best.paths_enumerated;
            if (sum < best.time) {
                best.time = sum;
                best.minimizers = 1;
                best.path.vertices.clear();
                for (VertexId v : stack) best.path.vertices.push_back(points[v]);
            } else if (sum == best.time) {
                ++best.minimizers;
            }
            return;
        }
        for (int a = 0; a < region.dim(); ++a) {
            for (int dir : {-1, 1}) {
                const VertexId v = region.step(u, a, dir);
                if (v == kNoVertex || on_path[v]) continue;
                on_path[v] = 1;
                stack.push_back(v);
                extend(v, sum + Time::from_double(env.edge_weight(points[u], points[v])));
                stack.pop_back();
                on_path[v] = 0;
            }
        }
    };

    const VertexId start = region.index(x);
    on_path[start] = 1;
    stack.push_back(start);
    extend(start, Time::zero());
    best.path.weight = best.time;
    best.path.unique = best.minimizers == 1;
    return best;
}

GeodesicTree::GeodesicTree(const PassageMap& pm) : root_(pm.source_id()), region_(pm.region()) {
    const auto n = static_cast<std::size_t>(region_.vertex_count());
    parent_ = pm.preds();
    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<VertexId>(v) == root_) continue;
        if (parent_[v] == kNoVertex) throw DomainError("passage map incomplete: vertex without predecessor");
        ++offsets_[parent_[v] + 1];
    }
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
    children_.resize(n - 1);
    auto fill = offsets_;
    for (std::size_t v = 0; v < n; ++v)
        if (static_cast<VertexId>(v) != root_) children_[fill[parent_[v]]++] = static_cast<VertexId>(v);

    order_.reserve(n);
    order_.push_back(root_);
    for (std::size_t i = 0; i < order_.size(); ++i)
        for (VertexId c : children(order_[i])) order_.push_back(c);
    if (order_.size() != n) throw DomainError("predecessor links contain a cycle");
}

std::vector<VertexId> GeodesicTree::path_from_root(VertexId v) const {
    std::vector<VertexId> ids;
    for (; v != kNoVertex; v = parent_[v]) ids.push_back(v);
    std::reverse(ids.begin(), ids.end());
    return ids;
}

GeodesicTree geodesic_tree(const PassageMap& pm) { return GeodesicTree(pm); }

void write_passage_map_csv(const PassageMap& pm, std::ostream& os) {
    const auto& r = pm.region();
    const int d = r.dim();
    for (int a = 0; a < d; ++a) os << 'x' << a << ',';
    os << 'T';
    for (int a = 0; a < d; ++a) os << ",pred_x" << a;
    os << '\n';
    for (VertexId v = 0; v < r.vertex_count(); ++v) {
        for (int a = 0; a < d; ++a) os << r.coord(v, a) << ',';
        os << to_string(pm.time(v));
        const VertexId p = pm.pred(v);
        for (int a = 0; a < d; ++a) {
            os << ',';
            if (p != kNoVertex) os << r.coord(p, a);
        }
        os << '\n';
    }
}

}  // namespace fpp
