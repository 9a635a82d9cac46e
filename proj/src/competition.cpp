#include "fpp/competition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <tuple>

#include "fpp/errors.hpp"
#include "fpp/random.hpp"

namespace fpp {

bool Partition::all_connected() const {
    return std::all_of(connected.begin(), connected.end(), [](char c) { return c != 0; });
}

namespace {

void check_sources(const BoxRegion& region, std::span<const Point> sources) {
    if (sources.empty()) throw ConfigError("at least one source required");
    std::set<Point> seen;
    for (const auto& s : sources) {
        if (!region.contains(s)) throw DomainError("source " + to_string(s) + " outside region " + region.describe());
        if (!seen.insert(s).second) throw ConfigError("duplicate source " + to_string(s));
    }
}

/// Fills cell sizes, boundary flags and the connectivity check from `owner`.
void summarize(Partition& p) {
    const int k = p.k();
    const auto& r = p.region;
    p.cell_sizes.assign(k, 0);
    p.touches_boundary.assign(k, 0);
    p.connected.assign(k, 0);
    for (VertexId v = 0; v < r.vertex_count(); ++v) {
        const int o = p.owner[v];
        ++p.cell_sizes[o];
        if (r.on_boundary(v)) p.touches_boundary[o] = 1;
    }
    std::vector<char> seen(static_cast<std::size_t>(r.vertex_count()), 0);
    std::vector<VertexId> queue;
    for (int i = 0; i < k; ++i) {
        const VertexId s = r.index(p.sources[i]);
        if (p.owner[s] != i) continue;
        queue.assign(1, s);
        seen[s] = 1;
        for (std::size_t q = 0; q < queue.size(); ++q)
            for (int a = 0; a < r.dim(); ++a)
                for (int dir : {-1, 1}) {
                    const VertexId w = r.step(queue[q], a, dir);
                    if (w != kNoVertex && !seen[w] && p.owner[w] == i) {
                        seen[w] = 1;
                        queue.push_back(w);
                    }
                }
        p.connected[i] = static_cast<std::int64_t>(queue.size()) == p.cell_sizes[i];
    }
}

VertexId env_lower(const Environment& env, const BoxRegion& region, VertexId v, int axis, int dir) {
    Point p = region.point(v);
    if (dir < 0) --p[axis];
    return env.region().index(p);
}

struct Arrival {
    Time time;
    int label;
    VertexId v;
    bool operator>(const Arrival& o) const { return std::tie(time, label, v) > std::tie(o.time, o.label, o.v); }
};

using ClockFn = std::function<Time(VertexId from, int axis, int dir, int type)>;

/// Event-driven colouring shared by the reference Voronoi and Richardson growth.
/// Events are ordered by (time, type, vertex); a popped event on a coloured
/// vertex is a cancelled clock.
Partition grow(const BoxRegion& region, std::span<const Point> sources, const ClockFn& clock, GrowthTrace* trace) {
    Partition p;
    p.region = region;
    p.sources.assign(sources.begin(), sources.end());
    const auto n = static_cast<std::size_t>(region.vertex_count());
    p.owner.assign(n, -1);
    p.arrival.assign(n, Time::infinity());

    std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> events;
    for (int i = 0; i < p.k(); ++i) events.push({Time::zero(), i, region.index(sources[i])});

    Time last = -Time::infinity();
    while (!events.empty()) {
        const Arrival e = events.top();
        events.pop();
        if (p.owner[e.v] >= 0) {
            if (e.time == p.arrival[e.v] && e.label != p.owner[e.v]) ++p.tie_count;
            continue;
        }
        p.owner[e.v] = e.label;
        p.arrival[e.v] = e.time;
        if (trace) {
            if (e.time == last && e.time != Time::zero()) ++trace->tie_count;
            trace->events.push_back({e.time, e.v, e.label});
        }
        last = e.time;
        for (int a = 0; a < region.dim(); ++a)
            for (int dir : {-1, 1}) {
                const VertexId w = region.step(e.v, a, dir);
                if (w == kNoVertex || p.owner[w] >= 0) continue;
                events.push({e.time + clock(e.v, a, dir, e.label), e.label, w});
            }
    }
    summarize(p);
    return p;
}

}  // namespace

Partition fpp_voronoi(const Environment& env, std::span<const Point> sources, const BoxRegion& region, Exec exec) {
    check_sources(region, sources);
    const int k = static_cast<int>(sources.size());
    std::vector<PassageMap> maps(k);
    parallel_for(k, exec, [&](std::int64_t i) { maps[i] = passage_map(env, sources[i], region); });

    Partition p;
    p.region = region;
    p.sources.assign(sources.begin(), sources.end());
    const auto n = region.vertex_count();
    p.owner.assign(static_cast<std::size_t>(n), 0);
    p.arrival.assign(static_cast<std::size_t>(n), Time::infinity());
    std::int64_t ties = 0;
    auto assign = [&](std::int64_t v) {
        const auto id = static_cast<VertexId>(v);
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (maps[j].time(id) < maps[best].time(id)) best = j;
        const Time t = maps[best].time(id);
        p.owner[v] = best;
        p.arrival[v] = t;
        int equal = 0;
        for (int j = 0; j < k; ++j) equal += maps[j].time(id) == t;
        return equal - 1;
    };
    if (exec.serial()) {
        for (std::int64_t v = 0; v < n; ++v) ties += assign(v) > 0;
    } else {
#pragma omp parallel for reduction(+ : ties) num_threads(exec.threads())
        for (std::int64_t v = 0; v < n; ++v) ties += assign(v) > 0;
    }
    p.tie_count = ties;
    summarize(p);
    return p;
}

Partition fpp_voronoi(const Environment& env, std::span<const Point> sources, Exec exec) {
    return fpp_voronoi(env, sources, env.region(), exec);
}

Partition fpp_voronoi_reference(const Environment& env, std::span<const Point> sources, const BoxRegion& region) {
    check_sources(region, sources);
    if (!env.region().contains(region)) throw DomainError("region not inside environment box");
    return grow(region, sources,
                [&](VertexId v, int axis, int dir, int) { return env.time(env_lower(env, region, v, axis, dir), axis); },
                nullptr);
}

namespace {
void check_rates(std::span<const Point> sources, std::span<const double> rates) {
    if (rates.size() != sources.size()) throw ConfigError("one rate per source required");
    for (double r : rates)
        if (!(r > 0) || !std::isfinite(r)) throw ConfigError("rates must be positive");
}
}  // namespace

RichardsonResult simulate_richardson(const BoxRegion& region, std::span<const Point> sources,
                                     std::span<const double> rates, std::uint64_t seed) {
    check_sources(region, sources);
    check_rates(sources, rates);
    RichardsonResult out;
    out.trace.rates.assign(rates.begin(), rates.end());
    Point lower(region.dim());
    auto clock = [&](VertexId v, int axis, int dir, int type) {
        for (int a = 0; a < region.dim(); ++a) lower[a] = region.coord(v, a);
        if (dir < 0) --lower[axis];
        const auto key = hash_combine(edge_key(seed, lower, axis), static_cast<std::uint64_t>(type));
        double tau = quantize_weight(-std::log1p(-uniform_open01(key)) / rates[type]);
        if (tau <= 0) tau = 0x1p-64;
        return Time::from_double(tau);
    };
    out.partition = grow(region, sources, clock, &out.trace);
    return out;
}

RichardsonResult simulate_richardson(const Environment& env, std::span<const Point> sources,
                                     std::span<const double> rates) {
    const auto& region = env.region();
    check_sources(region, sources);
    check_rates(sources, rates);
    RichardsonResult out;
    out.trace.rates.assign(rates.begin(), rates.end());
    auto clock = [&](VertexId v, int axis, int dir, int type) {
        const VertexId lower = dir > 0 ? v : static_cast<VertexId>(v - region.stride(axis));
        if (rates[type] == 1.0) return env.time(lower, axis);
        double tau = quantize_weight(env.weight(lower, axis) / rates[type]);
        if (tau <= 0) tau = 0x1p-64;
        return Time::from_double(tau);
    };
    out.partition = grow(region, sources, clock, &out.trace);
    return out;
}

bool verify_trace(const BoxRegion& region, std::span<const Point> sources, const GrowthTrace& trace) {
    const auto n = static_cast<std::size_t>(region.vertex_count());
    if (trace.events.size() != n) return false;
    std::vector<int> colour(n, -1);
    Time last = Time::zero();
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const auto& e = trace.events[i];
        if (e.vertex < 0 || static_cast<std::size_t>(e.vertex) >= n || colour[e.vertex] >= 0) return false;
        if (e.time < last) return false;
        last = e.time;
        if (i < sources.size()) {
            if (e.time != Time::zero() || region.index(sources[e.type]) != e.vertex) return false;
        } else {
            bool supported = false;
            for (int a = 0; a < region.dim() && !supported; ++a)
                for (int dir : {-1, 1}) {
                    const VertexId w = region.step(e.vertex, a, dir);
                    if (w != kNoVertex && colour[w] == e.type) supported = true;
                }
            if (!supported) return false;
        }
        colour[e.vertex] = e.type;
    }
    return true;
}

ProxyMode ProxyMode::volume(double theta) {
    if (!(theta > 0) || theta > 1) throw ConfigError("volume proxy theta must lie in (0, 1]");
    return {Kind::Volume, theta};
}

bool coexistence_proxy(const Partition& p, ProxyMode mode) {
    if (p.owner.size() != static_cast<std::size_t>(p.region.vertex_count()) || p.cell_sizes.size() != p.sources.size())
        throw DomainError("partition incomplete");
    if (mode.kind == ProxyMode::Kind::Boundary)
        return std::all_of(p.touches_boundary.begin(), p.touches_boundary.end(), [](char c) { return c != 0; });
    if (!(mode.theta > 0) || mode.theta > 1) throw ConfigError("volume proxy theta must lie in (0, 1]");
    const double need = mode.theta * static_cast<double>(p.region.vertex_count());
    return std::all_of(p.cell_sizes.begin(), p.cell_sizes.end(), [&](std::int64_t s) { return s >= need; });
}

std::vector<LatticePath> extract_disjoint_geodesics(const Partition& p, const Environment& env) {
    if (!coexistence_proxy(p, ProxyMode::boundary()))
        throw DomainError("boundary-coexistence proxy does not hold; no disjoint witness to extract");
    const auto& r = p.region;
    std::vector<LatticePath> paths;
    for (int i = 0; i < p.k(); ++i) {
        const auto pm = passage_map(env, p.sources[i], r);
        VertexId exit = kNoVertex;
        for (VertexId v = 0; v < r.vertex_count(); ++v)
            if (p.owner[v] == i && r.on_boundary(v) && (exit == kNoVertex || pm.time(v) < pm.time(exit))) exit = v;
        const auto ids = geodesic_ids(pm, exit);
        for (VertexId v : ids)
            if (p.owner[v] != i)
                throw AssertionFailure("geodesic from source " + std::to_string(i) + " leaves its cell at " +
                                       to_string(r.point(v)));
        paths.push_back(geodesic(pm, exit));
    }
    return paths;
}

void write_partition_csv(const Partition& p, std::ostream& os) {
    const auto& r = p.region;
    for (int a = 0; a < r.dim(); ++a) os << 'x' << a << ',';
    os << "owner\n";
    for (VertexId v = 0; v < r.vertex_count(); ++v) {
        for (int a = 0; a < r.dim(); ++a) os << r.coord(v, a) << ',';
        os << p.owner[v] << '\n';
    }
}

void write_trace_csv(const BoxRegion& region, const GrowthTrace& trace, std::ostream& os) {
    os << "time";
    for (int a = 0; a < region.dim(); ++a) os << ",x" << a;
    os << ",type\n";
    for (const auto& e : trace.events) {
        os << to_string(e.time);
        for (int a = 0; a < region.dim(); ++a) os << ',' << region.coord(e.vertex, a);
        os << ',' << e.type << '\n';
    }
}

}  // namespace fpp
