#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fpp/environment.hpp"
#include "fpp/metric.hpp"
#include "fpp/parallel.hpp"
#include "json.hpp"

namespace fpp {

/// Target vertices v_1, v_2, ... along the box geodesic from `origin` toward
/// the boundary vertex closest in angle to direction `theta`. Only vertices
/// that set a new sup-distance record from the origin are kept, so |v_k|
/// strictly increases. Planar boxes only.
struct BusemannRay {
    Point origin;
    double theta = 0;
    Point boundary_target;
    std::vector<Point> targets;

    const Point& last() const { return targets.back(); }
};

BusemannRay busemann_ray(const Environment& env, double theta, std::span<const int> origin);
BusemannRay busemann_ray(const Environment& env, double theta);

/// B_k(x, y) = T(x, v_k) - T(y, v_k), exact.
struct BusemannSeries {
    Point x;
    Point y;
    std::vector<Point> targets;
    std::vector<Time> values;

    Time last() const { return values.back(); }
    /// max - min of B_k over the last quartile of k.
    double oscillation() const;
};

BusemannSeries busemann_series(const Environment& env, std::span<const int> x, std::span<const int> y,
                               const BusemannRay& ray);
/// Same series from precomputed maps rooted at x and y.
BusemannSeries busemann_series(const PassageMap& from_x, const PassageMap& from_y, const BusemannRay& ray);

/// B_last(x, y) for every pair from one map rooted at the last ray target.
class BusemannField {
public:
    BusemannField(const Environment& env, const BusemannRay& ray);

    Time operator()(std::span<const int> x, std::span<const int> y) const;
    const PassageMap& map() const { return from_last_; }

private:
    PassageMap from_last_;
};

/// B_last(anchor, y) for a set of probe vertices y.
struct BusemannProbes {
    Point anchor;
    std::vector<Point> probes;
    std::vector<Time> values;
    std::vector<double> oscillation;  // empty when computed from a field
};

/// Per-probe series over a shared map rooted at the anchor; one map per probe, in parallel.
BusemannProbes busemann_probes(const Environment& env, const BusemannRay& ray, std::span<const int> anchor,
                               std::span<const Point> probes, Exec exec = {});
BusemannProbes busemann_probes(const BusemannField& field, std::span<const int> anchor, std::span<const Point> probes);

/// Probe vertices y with inner <= |y - anchor|_inf <= outer and every
/// coordinate offset divisible by `stride`.
std::vector<Point> probe_shell(std::span<const int> anchor, int inner, int outer, int stride = 1);

/// rho(x) = <gradient, x>.
struct LinearFunctional {
    std::vector<double> gradient;

    double operator()(std::span<const double> x) const;
    double operator()(std::span<const int> x) const;
    double norm() const;
    /// Gradient angle in [0, 2 pi); planar only.
    double angle() const;
    static LinearFunctional from_angle(double angle, double scale = 1.0);
};

struct LinearFit {
    LinearFunctional rho;
    std::vector<double> residuals;
    double rms_residual = 0;
    double sigma_min = 0;
    double sigma_max = 0;

    /// Upper bound on the gradient change caused by a value perturbation of Euclidean norm `delta_norm`.
    double perturbation_bound(double delta_norm) const { return delta_norm / sigma_min; }
};

/// Least squares without intercept: minimizes sum_i (values_i - <g, displacements_i>)^2.
LinearFit fit_linear_functional(std::span<const Point> displacements, std::span<const double> values);
LinearFit fit_linear_functional(const BusemannProbes& probes);

/// sup over probes with |y - anchor| >= M of |B_last(anchor, y) - rho(y - anchor)| / |y - anchor|.
double linearity_deviation(std::span<const Point> displacements, std::span<const double> values,
                           const LinearFunctional& rho, double M);
double linearity_deviation(const BusemannProbes& probes, const LinearFunctional& rho, double M);

struct RegionPredicate {
    enum class Kind { HalfPlane, Cone } kind = Kind::HalfPlane;
    LinearFunctional rho;
    std::vector<double> anchor;
    double delta = 0;
};

/// HalfPlane: rho(y - z) <= -delta |y - z|.  Cone: |rho(y - z)| <= delta |y - z|.
bool region_contains(const RegionPredicate& pred, std::span<const double> y);
bool region_contains(const RegionPredicate& pred, std::span<const int> y);

/// Angular half-width of the cone C_rho(0, delta) about the line rho = 0;
/// the cone is the whole plane when delta >= |rho|.
double cone_half_width(const LinearFunctional& rho, double delta);
/// True when the cones C_rho_a(0, delta_a) and C_rho_b(0, delta_b) meet only at the origin.
bool cones_disjoint(const LinearFunctional& a, double delta_a, const LinearFunctional& b, double delta_b);

enum class PlacementVariant {
    Circle,     // x_i at a common radius in the direction of rho_i
    Inductive,  // x_1 = 0, x_{i+1} = x_i + v_{i+1}
};

struct PlacementCheck {
    enum class Kind { Separation, HalfPlane } kind;
    int i = 0;
    int j = 0;
    double lhs = 0;  // Separation: |x_i - x_j|;  HalfPlane: rho_i(x_j - x_i)
    double rhs = 0;  // Separation: max(M_i, M_j); HalfPlane: -delta_i |x_j - x_i|
    bool ok = false;
};

struct Placement {
    PlacementVariant variant = PlacementVariant::Circle;
    std::vector<Point> points;
    std::vector<LinearFunctional> functionals;
    std::vector<double> deltas;
    std::vector<double> radii;
    double radius = 0;  // circle radius (Circle variant)
    std::vector<PlacementCheck> checks;
};

/// Evaluates every separation and half-plane inequality on raw coordinates.
std::vector<PlacementCheck> verify_placement(std::span<const Point> points, std::span<const LinearFunctional> functionals,
                                             std::span<const double> deltas, std::span<const double> radii);

/// Lattice points x_1..x_k with |x_i - x_j| >= max(M_i, M_j) and x_j in
/// H_rho_i(x_i, delta_i) for j != i. Throws DomainError on infeasible
/// geometry; the result always passes verify_placement.
Placement place_coexistence_points(std::span<const LinearFunctional> functionals, std::span<const double> deltas,
                                   std::span<const double> radii, PlacementVariant variant = PlacementVariant::Circle,
                                   double min_radius = 0);

nlohmann::json placement_json(const Placement& p);
void write_series_csv(const BusemannSeries& s, std::ostream& os);

}  // namespace fpp
