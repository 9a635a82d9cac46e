#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "fpp/lattice.hpp"
#include "fpp/time.hpp"
#include "fpp/weights.hpp"

namespace fpp {

/// Immutable i.i.d. edge-weight environment on a finite box.
///
/// Each weight is a pure function of (seed, lower endpoint, axis) so the
/// same edge carries the same weight in every box that contains it.
class Environment {
public:
    static Environment make(const BoxRegion& region, const WeightSpec& spec, std::uint64_t seed);
    /// Adopt weights listed in canonical edge order (used by the loader).
    static Environment from_canonical(const BoxRegion& region, const WeightSpec& spec, std::uint64_t seed,
                                      std::span<const double> weights);

    const BoxRegion& region() const { return region_; }
    const WeightSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

    /// Weight of the edge {u, v}; symmetric in orientation.
    double edge_weight(std::span<const int> u, std::span<const int> v) const;
    /// Minimum of the 2d weights at an interior vertex.
    double min_incident_weight(std::span<const int> v) const;

    /// Weight of edge (v, v + e_axis), v an env-region vertex id. NaN if absent.
    double weight(VertexId v, int axis) const { return weights_[slot(v, axis)]; }
    Time time(VertexId v, int axis) const { return times_[slot(v, axis)]; }

    std::vector<double> canonical_weights() const;
    /// Kolmogorov-Smirnov distance between the sampled weights and the weight distribution's CDF.
    double ks_statistic() const;
    double mean_weight() const;

private:
    Environment(BoxRegion region, WeightSpec spec, std::uint64_t seed);
    void finalize();
    std::size_t slot(VertexId v, int axis) const { return static_cast<std::size_t>(v) * region_.dim() + axis; }

    BoxRegion region_;
    WeightSpec spec_ = WeightSpec::constant(1);
    std::uint64_t seed_ = 0;
    std::vector<double> weights_;
    std::vector<Time> times_;
};

/// Binary layout: "FPPENV1", u32 d, i32 lower[d], i32 upper[d], u32 family,
/// f64 p0, f64 p1, u64 seed, u8 cached, then (if cached) f64 weights in
/// canonical edge order. All little-endian.
void save_environment(const Environment& env, const std::filesystem::path& path, bool cache_weights = true);
void save_environment(const Environment& env, std::ostream& os, bool cache_weights = true);
Environment load_environment(const std::filesystem::path& path);

}  // namespace fpp
