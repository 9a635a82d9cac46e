#include "fpp/busemann.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fpp/errors.hpp"

namespace fpp {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0 ? a + kTwoPi : a;
}

// Smallest absolute difference between two angles, in [0, pi].
double angle_gap(double a, double b) {
    const double d = wrap_angle(a - b);
    return std::min(d, kTwoPi - d);
}

std::vector<double> as_double(std::span<const int> p) { return {p.begin(), p.end()}; }

double norm2(std::span<const double> v) {
    double s = 0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

void require_in(const BoxRegion& region, std::span<const int> p, const char* what) {
    if (!region.contains(p)) throw DomainError(std::string(what) + " " + to_string(p) + " outside " + region.describe());
}

}  // namespace

BusemannRay busemann_ray(const Environment& env, double theta, std::span<const int> origin) {
    const auto& region = env.region();
    if (region.dim() != 2) throw DomainError("Busemann rays are planar");
    if (!std::isfinite(theta)) throw ConfigError("ray direction must be finite");
    require_in(region, origin, "ray origin");
    if (region.on_boundary(origin)) throw DomainError("ray origin lies on the box boundary");

    const double want = wrap_angle(theta);
    VertexId best = kNoVertex;
    double best_gap = 0;
    for (VertexId v = 0; v < region.vertex_count(); ++v) {
        if (!region.on_boundary(v)) continue;
        const double a = std::atan2(region.coord(v, 1) - origin[1], region.coord(v, 0) - origin[0]);
        const double gap = angle_gap(a, want);
        if (best == kNoVertex || gap < best_gap) best = v, best_gap = gap;
    }

    BusemannRay ray;
    ray.origin.assign(origin.begin(), origin.end());
    ray.theta = want;
    ray.boundary_target = region.point(best);
    const auto pm = passage_map(env, origin);
    int record = 0;
    for (const auto& v : geodesic(pm, best).vertices) {
        const int r = sup_norm(v - ray.origin);
        if (r > record) {
            record = r;
            ray.targets.push_back(v);
        }
    }
    return ray;
}

BusemannRay busemann_ray(const Environment& env, double theta) {
    return busemann_ray(env, theta, Point(static_cast<std::size_t>(env.region().dim()), 0));
}

double BusemannSeries::oscillation() const {
    if (values.empty()) return 0;
    const std::size_t start = 3 * values.size() / 4;
    Time lo = values[start], hi = values[start];
    for (std::size_t k = start; k < values.size(); ++k) {
        lo = std::min(lo, values[k]);
        hi = std::max(hi, values[k]);
    }
    return (hi - lo).to_double();
}

BusemannSeries busemann_series(const PassageMap& from_x, const PassageMap& from_y, const BusemannRay& ray) {
    if (ray.targets.empty()) throw DomainError("ray has no targets");
    BusemannSeries s;
    s.x = from_x.source();
    s.y = from_y.source();
    s.targets = ray.targets;
    s.values.reserve(ray.targets.size());
    for (const auto& v : ray.targets) {
        if (!from_x.region().contains(v) || !from_y.region().contains(v))
            throw DomainError("ray exits region at " + to_string(v));
        s.values.push_back(from_x.time(from_x.region().index(v)) - from_y.time(from_y.region().index(v)));
    }
    return s;
}

BusemannSeries busemann_series(const Environment& env, std::span<const int> x, std::span<const int> y,
                               const BusemannRay& ray) {
    return busemann_series(passage_map(env, x), passage_map(env, y), ray);
}

BusemannField::BusemannField(const Environment& env, const BusemannRay& ray)
    : from_last_(ray.targets.empty() ? throw DomainError("ray has no targets") : passage_map(env, ray.last())) {}

Time BusemannField::operator()(std::span<const int> x, std::span<const int> y) const {
    const auto& r = from_last_.region();
    require_in(r, x, "vertex");
    require_in(r, y, "vertex");
    return from_last_.time(r.index(x)) - from_last_.time(r.index(y));
}

BusemannProbes busemann_probes(const Environment& env, const BusemannRay& ray, std::span<const int> anchor,
                               std::span<const Point> probes, Exec exec) {
    BusemannProbes out;
    out.anchor.assign(anchor.begin(), anchor.end());
    out.probes.assign(probes.begin(), probes.end());
    out.values.resize(probes.size());
    out.oscillation.resize(probes.size());
    const auto from_anchor = passage_map(env, anchor);
    for (const auto& y : probes) require_in(env.region(), y, "probe");
    parallel_for(static_cast<std::int64_t>(probes.size()), exec, [&](std::int64_t i) {
        const auto s = busemann_series(from_anchor, passage_map(env, probes[i]), ray);
        out.values[i] = s.last();
        out.oscillation[i] = s.oscillation();
    });
    return out;
}

BusemannProbes busemann_probes(const BusemannField& field, std::span<const int> anchor, std::span<const Point> probes) {
    BusemannProbes out;
    out.anchor.assign(anchor.begin(), anchor.end());
    out.probes.assign(probes.begin(), probes.end());
    out.values.reserve(probes.size());
    for (const auto& y : probes) out.values.push_back(field(anchor, y));
    return out;
}

std::vector<Point> probe_shell(std::span<const int> anchor, int inner, int outer, int stride) {
    if (inner < 0 || outer < inner || stride < 1) throw ConfigError("probe shell needs 0 <= inner <= outer and stride >= 1");
    const int d = static_cast<int>(anchor.size());
    std::vector<Point> out;
    Point off(static_cast<std::size_t>(d), -outer / stride * stride);
    const int top = outer / stride * stride;
    while (true) {
        const int r = sup_norm(off);
        if (r >= inner && r <= outer) {
            Point y(anchor.begin(), anchor.end());
            for (int a = 0; a < d; ++a) y[a] += off[a];
            out.push_back(std::move(y));
        }
        int a = d - 1;
        while (a >= 0 && off[a] == top) off[a--] = -top;
        if (a < 0) break;
        off[a] += stride;
    }
    return out;
}

double LinearFunctional::operator()(std::span<const double> x) const {
    if (x.size() != gradient.size()) throw DomainError("functional dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += gradient[i] * x[i];
    return s;
}

double LinearFunctional::operator()(std::span<const int> x) const { return (*this)(as_double(x)); }

double LinearFunctional::norm() const { return norm2(gradient); }

double LinearFunctional::angle() const {
    if (gradient.size() != 2) throw DomainError("functional angle is planar");
    return wrap_angle(std::atan2(gradient[1], gradient[0]));
}

LinearFunctional LinearFunctional::from_angle(double angle, double scale) {
    return {{scale * std::cos(angle), scale * std::sin(angle)}};
}

LinearFit fit_linear_functional(std::span<const Point> displacements, std::span<const double> values) {
    if (displacements.size() != values.size()) throw ConfigError("fit needs one value per displacement");
    if (displacements.empty()) throw DomainError("degenerate design: no samples");
    const auto n = static_cast<Eigen::Index>(displacements.size());
    const auto d = static_cast<Eigen::Index>(displacements[0].size());
    Eigen::MatrixXd A(n, d);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(displacements[i].size()) != d) throw ConfigError("mixed displacement dimensions");
        for (Eigen::Index a = 0; a < d; ++a) A(i, a) = displacements[i][a];
        b(i) = values[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (n < d || sv(d - 1) <= 1e-12 * sv(0)) throw DomainError("degenerate design: rank below dimension");

    const Eigen::VectorXd g = svd.solve(b);
    const Eigen::VectorXd r = b - A * g;
    LinearFit fit;
    fit.rho.gradient.assign(g.data(), g.data() + d);
    fit.residuals.assign(r.data(), r.data() + n);
    fit.rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    fit.sigma_max = sv(0);
    fit.sigma_min = sv(d - 1);
    return fit;
}

namespace {

std::vector<Point> displacements_of(const BusemannProbes& probes) {
    std::vector<Point> out;
    out.reserve(probes.probes.size());
    for (const auto& y : probes.probes) out.push_back(y - probes.anchor);
    return out;
}

std::vector<double> values_of(const BusemannProbes& probes) {
    std::vector<double> out;
    out.reserve(probes.values.size());
    for (const auto& t : probes.values) out.push_back(t.to_double());
    return out;
}

}  // namespace

LinearFit fit_linear_functional(const BusemannProbes& probes) {
    return fit_linear_functional(displacements_of(probes), values_of(probes));
}

double linearity_deviation(std::span<const Point> displacements, std::span<const double> values,
                           const LinearFunctional& rho, double M) {
    if (displacements.size() != values.size()) throw ConfigError("deviation needs one value per displacement");
    double worst = -1;
    for (std::size_t i = 0; i < displacements.size(); ++i) {
        const double len = euclidean_norm(displacements[i]);
        if (len < M || len == 0) continue;
        worst = std::max(worst, std::abs(values[i] - rho(displacements[i])) / len);
    }
    if (worst < 0) throw DomainError("no probe at distance >= " + std::to_string(M));
    return worst;
}

double linearity_deviation(const BusemannProbes& probes, const LinearFunctional& rho, double M) {
    return linearity_deviation(displacements_of(probes), values_of(probes), rho, M);
}

bool region_contains(const RegionPredicate& pred, std::span<const double> y) {
    if (y.size() != pred.anchor.size()) throw DomainError("region predicate dimension mismatch");
    std::vector<double> diff(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) diff[i] = y[i] - pred.anchor[i];
    const double len = norm2(diff);
    const double r = pred.rho(diff);
    return pred.kind == RegionPredicate::Kind::HalfPlane ? r <= -pred.delta * len : std::abs(r) <= pred.delta * len;
}

bool region_contains(const RegionPredicate& pred, std::span<const int> y) { return region_contains(pred, as_double(y)); }

double cone_half_width(const LinearFunctional& rho, double delta) {
    const double n = rho.norm();
    if (delta >= n) return std::numbers::pi / 2;
    return std::asin(std::max(delta, 0.0) / n);
}

bool cones_disjoint(const LinearFunctional& a, double delta_a, const LinearFunctional& b, double delta_b) {
    if (delta_a >= a.norm() || delta_b >= b.norm()) return false;
    // Cone axes are the lines rho = 0; compare them modulo pi.
    double d = std::fmod(angle_gap(a.angle(), b.angle()), std::numbers::pi);
    d = std::min(d, std::numbers::pi - d);
    return d > cone_half_width(a, delta_a) + cone_half_width(b, delta_b);
}

std::vector<PlacementCheck> verify_placement(std::span<const Point> points, std::span<const LinearFunctional> functionals,
                                             std::span<const double> deltas, std::span<const double> radii) {
    std::vector<PlacementCheck> out;
    const int k = static_cast<int>(points.size());
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            std::vector<double> diff(points[j].size());
            for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = double(points[j][a]) - double(points[i][a]);
            const double len = norm2(diff);
            if (i < j) {
                PlacementCheck sep{PlacementCheck::Kind::Separation, i, j, len, std::max(radii[i], radii[j]), false};
                sep.ok = sep.lhs >= sep.rhs;
                out.push_back(sep);
            }
            PlacementCheck half{PlacementCheck::Kind::HalfPlane, i, j, functionals[i](diff), -deltas[i] * len, false};
            half.ok = half.lhs <= half.rhs;
            out.push_back(half);
        }
    return out;
}

namespace {

bool all_ok(const std::vector<PlacementCheck>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const PlacementCheck& c) { return c.ok; });
}

Point round_point(double r, double angle) {
    return {static_cast<int>(std::lround(r * std::cos(angle))), static_cast<int>(std::lround(r * std::sin(angle)))};
}

constexpr int kRadiusAttempts = 10000;

void place_on_circle(Placement& p, double min_radius) {
    const int k = static_cast<int>(p.functionals.size());
    const double max_m = *std::max_element(p.radii.begin(), p.radii.end());
    double min_chord = 2;  // min over pairs of 2 sin(theta_ij / 2)
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            const double theta = angle_gap(p.functionals[i].angle(), p.functionals[j].angle());
            const double s = std::sin(theta / 2);
            if (p.functionals[i].norm() * s < p.deltas[i])
                throw DomainError("infeasible placement: functionals " + std::to_string(i) + " and " + std::to_string(j) +
                                  " are too close in angle for delta " + std::to_string(p.deltas[i]));
            min_chord = std::min(min_chord, 2 * s);
        }
    const double start = std::max({max_m, max_m / min_chord, min_radius, 1.0});
    for (int step = 0; step < kRadiusAttempts; ++step) {
        const double r = std::ceil(start) + step;
        std::vector<Point> pts;
        for (const auto& f : p.functionals) pts.push_back(round_point(r, f.angle()));
        auto checks = verify_placement(pts, p.functionals, p.deltas, p.radii);
        if (all_ok(checks)) {
            p.radius = r;
            p.points = std::move(pts);
            p.checks = std::move(checks);
            return;
        }
    }
    throw DomainError("infeasible placement: lattice rounding never satisfied the half-plane conditions");
}

void place_inductively(Placement& p) {
    const int k = static_cast<int>(p.functionals.size());
    std::vector<double> angle(k);
    for (int i = 0; i < k; ++i) angle[i] = p.functionals[i].angle();
    for (int i = 1; i < k; ++i)
        if (angle[i] <= angle[i - 1]) throw DomainError("inductive placement needs strictly increasing functional angles");
    if (angle[k - 1] - angle[0] >= std::numbers::pi)
        throw DomainError("inductive placement needs functional angles within an open half-turn");
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (!cones_disjoint(p.functionals[i], p.deltas[i], p.functionals[j], p.deltas[j]))
                throw DomainError("infeasible placement: cones " + std::to_string(i) + " and " + std::to_string(j) +
                                  " overlap away from the origin");

    // v_{i+1} lies strictly inside the half-planes rho_j > delta_j |v| for j > i
    // and rho_j < -delta_j |v| for j <= i.
    auto margin = [&](int step, std::span<const double> v) {
        const double len = norm2(v);
        double m = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const double r = p.functionals[j](v);
            m = std::min(m, j >= step ? r - p.deltas[j] * len : -r - p.deltas[j] * len);
        }
        return m / len;
    };
    constexpr int kScan = 1 << 16;
    p.points.assign(1, Point{0, 0});
    for (int step = 1; step < k; ++step) {
        double best_phi = 0, best = -1;
        for (int s = 0; s < kScan; ++s) {
            const double phi = kTwoPi * s / kScan;
            const double u[2] = {std::cos(phi), std::sin(phi)};
            const double m = margin(step, u);
            if (m > best) best = m, best_phi = phi;
        }
        if (best <= 0) throw DomainError("infeasible placement: no direction for step " + std::to_string(step));
        const double need = *std::max_element(p.radii.begin(), p.radii.begin() + step + 1);
        bool placed = false;
        for (int t = 0; t < kRadiusAttempts && !placed; ++t) {
            const Point v = round_point(std::floor(need) + 1 + t, best_phi);
            const std::vector<double> vd = as_double(v);
            if (norm2(vd) > need && margin(step, vd) > 0) {
                p.points.push_back(p.points.back() + v);
                placed = true;
            }
        }
        if (!placed) throw DomainError("infeasible placement: lattice rounding failed at step " + std::to_string(step));
    }
    p.checks = verify_placement(p.points, p.functionals, p.deltas, p.radii);
    if (!all_ok(p.checks)) throw DomainError("infeasible placement: inductive points violate a pairwise condition");
}

}  // namespace

Placement place_coexistence_points(std::span<const LinearFunctional> functionals, std::span<const double> deltas,
                                   std::span<const double> radii, PlacementVariant variant, double min_radius) {
    const std::size_t k = functionals.size();
    if (k == 0) throw ConfigError("placement needs at least one functional");
    if (deltas.size() != k || radii.size() != k) throw ConfigError("placement needs one delta and one radius per functional");
    for (std::size_t i = 0; i < k; ++i) {
        if (functionals[i].gradient.size() != 2 || !(functionals[i].norm() > 0))
            throw ConfigError("placement needs nonzero planar functionals");
        if (!(deltas[i] >= 0) || !(radii[i] >= 0)) throw ConfigError("placement needs delta >= 0 and M >= 0");
    }
    Placement p;
    p.variant = variant;
    p.functionals.assign(functionals.begin(), functionals.end());
    p.deltas.assign(deltas.begin(), deltas.end());
    p.radii.assign(radii.begin(), radii.end());
    if (k == 1) {
        p.points.assign(1, Point{0, 0});
        return p;
    }
    if (variant == PlacementVariant::Circle)
        place_on_circle(p, min_radius);
    else
        place_inductively(p);
    return p;
}

nlohmann::json placement_json(const Placement& p) {
    nlohmann::json fs = nlohmann::json::array(), checks = nlohmann::json::array();
    for (const auto& f : p.functionals) fs.push_back({{"gradient", f.gradient}, {"angle", f.angle()}});
    bool verified = true;
    for (const auto& c : p.checks) {
        verified = verified && c.ok;
        checks.push_back({{"kind", c.kind == PlacementCheck::Kind::Separation ? "separation" : "half_plane"},
                          {"i", c.i},
                          {"j", c.j},
                          {"lhs", c.lhs},
                          {"rhs", c.rhs},
                          {"ok", c.ok}});
    }
    return {{"variant", p.variant == PlacementVariant::Circle ? "circle" : "inductive"},
            {"radius", p.radius},
            {"points", p.points},
            {"functionals", fs},
            {"deltas", p.deltas},
            {"radii", p.radii},
            {"checks", checks},
            {"verified", verified}};
}

void write_series_csv(const BusemannSeries& s, std::ostream& os) {
    os << 'k';
    for (std::size_t a = 0; a < s.x.size(); ++a) os << ",v" << a;
    os << ",B\n";
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        os << k + 1;
        for (int c : s.targets[k]) os << ',' << c;
        os << ',' << to_string(s.values[k]) << '\n';
    }
}

}  // namespace fpp
