#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fpp/busemann.hpp"
#include "fpp/parallel.hpp"
#include "fpp/stats.hpp"
#include "fpp/weights.hpp"

namespace fpp {

using Vec2 = std::array<double, 2>;

/// Per-n and final estimates of mu(z) = lim T(0, n z) / n.
struct TimeConstantEstimate {
    Point z;
    std::vector<int> n_list;
    std::vector<MeanSummary> per_n;  // T(0, n z) / n over kept replicas
    double mu = 0;                   // at the largest n
    double stderr = 0;
    std::int64_t replicas = 0;
    std::int64_t discarded = 0;  // replicas whose geodesic touched the box boundary
    /// Mean T/n does not increase along n_list.
    bool trend_nonincreasing = true;
};

/// One environment per replica (seed derived from `seed` and the replica
/// index), each sized around 0 and n_max z with a margin.
TimeConstantEstimate estimate_time_constant(const WeightSpec& spec, std::span<const int> z, std::span<const int> n_list,
                                            int replicas, std::uint64_t seed, Exec exec = {});

/// Angles 2 pi j / count.
std::vector<double> uniform_angles(int count);

/// round(n u(angle)), rounding half away from zero. When the angle list is a
/// uniform grid with count divisible by 8, targets are computed on one
/// fundamental sector and mapped by the dihedral group, so the target set is
/// exactly symmetric.
std::vector<Point> direction_targets(std::span<const double> angles, int n);

/// Convex hull (counter-clockwise, collinear points dropped), monotone chain.
std::vector<Vec2> convex_hull(std::vector<Vec2> points, double eps = 1e-12);

struct ShapeEstimate {
    std::vector<double> angles;
    std::vector<Point> targets;
    int n = 0;
    int replicas = 0;
    std::vector<MeanSummary> mu_hat;  // T(0, p) / |p| per direction
    std::vector<char> valid;          // direction has at least one kept sample
    std::vector<std::int64_t> discarded;
    std::vector<Vec2> points;  // (p / |p|) / mu_hat, valid directions only
    std::vector<Vec2> hull;

    /// max over symmetry orbits of max |r_i - mean r| / mean r, with r_i = 1 / mu_hat_i.
    double symmetry_defect = 0;
    /// sqrt of the mean squared relative standard error (0 when undefined).
    double pooled_rel_stderr = 0;
    /// max over directions of the relative gap between the hull boundary and the point.
    double convexity_dent = 0;
};

/// Simulation box for scale n: radius n plus a margin.
BoxRegion shape_box(int n);
/// T(0, p) / |p| per target in one environment; NaN where the geodesic touches the box boundary.
std::vector<double> shape_replica(const WeightSpec& spec, std::span<const Point> targets, int n, std::uint64_t seed);
/// Builds the estimate from per-replica rows, aggregated in row order.
ShapeEstimate summarize_shape(std::span<const double> angles, std::span<const Point> targets, int n,
                              std::span<const std::vector<double>> samples);

ShapeEstimate estimate_shape(const WeightSpec& spec, std::span<const double> angles, int n, int replicas,
                             std::uint64_t seed, Exec exec = {});

struct SideReport {
    double angle_tol = 0;
    int count = 0;
    std::vector<double> normal_angles;  // one outward edge normal per hull edge
};

/// Smallest number of arcs of width below angle_tol covering all edge-normal
/// angles of the hull. Rejects angle_tol >= pi / 4.
SideReport count_sides(std::span<const Vec2> hull, double angle_tol);
SideReport count_sides(const ShapeEstimate& shape, double angle_tol);

struct SupportingFunctional {
    LinearFunctional rho;       // gradient u / h(u)
    double support_value = 0;   // h(u) = max over hull vertices of <u, x>
    std::vector<int> contacts;  // hull vertex indices with rho = 1
    /// The line {rho = 1} meets the hull in a single vertex.
    bool unique_touch = false;
    /// rho <= 1 on every hull vertex with equality somewhere.
    bool verified = false;
};

SupportingFunctional supporting_functional(std::span<const Vec2> hull, const Vec2& u, double tol = 1e-12);
SupportingFunctional supporting_functional(const ShapeEstimate& shape, const Vec2& u, double tol = 1e-12);

void write_shape_csv(const ShapeEstimate& s, std::ostream& os);
void write_hull_csv(std::span<const Vec2> hull, std::ostream& os);

}  // namespace fpp
