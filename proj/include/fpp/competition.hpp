#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fpp/environment.hpp"
#include "fpp/metric.hpp"
#include "fpp/parallel.hpp"

namespace fpp {

/// Assignment of every region vertex to its closest source (FPP-Voronoi cells).
struct Partition {
    BoxRegion region;
    std::vector<Point> sources;
    std::vector<int> owner;          // per region vertex
    std::vector<Time> arrival;       // T(owner, v)
    std::vector<std::int64_t> cell_sizes;
    std::vector<char> touches_boundary;
    std::vector<char> connected;     // cell i is lattice-connected and contains source i
    std::int64_t tie_count = 0;      // vertices equidistant to two sources

    int k() const { return static_cast<int>(sources.size()); }
    bool all_connected() const;
};

/// Owner of v is argmin_j T(x_j, v); exact ties go to the lower index and are counted.
/// Builds one passage map per source in parallel, then reduces per vertex.
Partition fpp_voronoi(const Environment& env, std::span<const Point> sources, const BoxRegion& region, Exec exec = {});
Partition fpp_voronoi(const Environment& env, std::span<const Point> sources, Exec exec = {});

/// Serial reference: a single labelled multi-source Dijkstra.
Partition fpp_voronoi_reference(const Environment& env, std::span<const Point> sources, const BoxRegion& region);

struct ColouringEvent {
    Time time;
    VertexId vertex;
    int type;
};

struct GrowthTrace {
    std::vector<ColouringEvent> events;
    std::vector<double> rates;
    std::int64_t tie_count = 0;  // equal consecutive event times
};

struct RichardsonResult {
    Partition partition;
    GrowthTrace trace;
};

/// Multi-type Richardson growth with independent exponential clocks: the
/// clock on edge (u, v) for type i is Exp(rates[i]) and is drawn once, when a
/// type-i vertex u first exposes uncoloured v.
RichardsonResult simulate_richardson(const BoxRegion& region, std::span<const Point> sources,
                                     std::span<const double> rates, std::uint64_t seed);

/// Coupled variant: the clock on edge e for type i is env weight / rates[i].
/// With exponential(1) weights and unit rates the outcome equals fpp_voronoi exactly.
RichardsonResult simulate_richardson(const Environment& env, std::span<const Point> sources,
                                     std::span<const double> rates);

/// Checks the trace rules: each vertex coloured once, sources at time zero, a
/// non-source coloured i only next to an earlier type-i vertex, times nondecreasing.
bool verify_trace(const BoxRegion& region, std::span<const Point> sources, const GrowthTrace& trace);

struct ProxyMode {
    enum class Kind { Boundary, Volume } kind = Kind::Boundary;
    double theta = 0;  // Volume: minimum cell fraction

    static ProxyMode boundary() { return {}; }
    static ProxyMode volume(double theta);
};

/// Finite stand-in for coexistence: every cell touches the region boundary
/// (Boundary) or holds at least theta of the region (Volume).
bool coexistence_proxy(const Partition& p, ProxyMode mode = ProxyMode::boundary());

/// One geodesic per cell from its source to the nearest boundary vertex of that
/// cell, contained in the cell. Refuses when the boundary proxy fails.
std::vector<LatticePath> extract_disjoint_geodesics(const Partition& p, const Environment& env);

void write_partition_csv(const Partition& p, std::ostream& os);
void write_trace_csv(const BoxRegion& region, const GrowthTrace& trace, std::ostream& os);

}  // namespace fpp
