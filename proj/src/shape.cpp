#include "fpp/shape.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>

#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/metric.hpp"
#include "fpp/random.hpp"

namespace fpp {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

bool path_touches_boundary(const PassageMap& pm, VertexId target) {
    for (VertexId v : geodesic_ids(pm, target))
        if (pm.region().on_boundary(v)) return true;
    return false;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// The eight lattice symmetries of the plane.
Point apply_symmetry(int g, const Point& p) {
    int x = p[0], y = p[1];
    if (g & 4) std::swap(x, y);
    if (g & 2) y = -y;
    if (g & 1) x = -x;
    return {x, y};
}

}  // namespace

TimeConstantEstimate estimate_time_constant(const WeightSpec& spec, std::span<const int> z, std::span<const int> n_list,
                                            int replicas, std::uint64_t seed, Exec exec) {
    if (z.size() < 2 || sup_norm(z) == 0) throw ConfigError("direction must be a nonzero lattice vector with d >= 2");
    if (n_list.empty() || n_list.front() < 1) throw ConfigError("n list must be nonempty and positive");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw ConfigError("n list must be strictly increasing");
    if (replicas < 0) throw ConfigError("replica count must be nonnegative");

    const int n_max = n_list.back();
    const int margin = static_cast<int>(std::ceil(0.3 * n_max * sup_norm(z))) + 5;
    Point lower(z.size()), upper(z.size());
    for (std::size_t a = 0; a < z.size(); ++a) {
        lower[a] = std::min(0, n_max * z[a]) - margin;
        upper[a] = std::max(0, n_max * z[a]) + margin;
    }
    const BoxRegion box(lower, upper);
    const Point origin(z.size(), 0);

    // Per replica: T(0, n z) / n for each n, empty when discarded.
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(replicas));
    parallel_for(replicas, exec, [&](std::int64_t i) {
        const auto env = Environment::make(box, spec, derive_seed(seed, static_cast<std::uint64_t>(i)));
        const auto pm = passage_map(env, origin);
        std::vector<double> row;
        for (int n : n_list) {
            Point target(z.begin(), z.end());
            for (auto& c : target) c *= n;
            const VertexId t = box.index(target);
            if (path_touches_boundary(pm, t)) return;
            row.push_back(pm.time(t).to_double() / n);
        }
        samples[i] = std::move(row);
    });

    TimeConstantEstimate est;
    est.z.assign(z.begin(), z.end());
    est.n_list.assign(n_list.begin(), n_list.end());
    est.per_n.resize(n_list.size());
    for (const auto& row : samples) {
        if (row.empty()) {
            ++est.discarded;
            continue;
        }
        ++est.replicas;
        for (std::size_t k = 0; k < row.size(); ++k) est.per_n[k].add(row[k]);
    }
    est.mu = est.per_n.back().mean;
    est.stderr = est.per_n.back().stderr_of_mean().value_or(0.0);
    for (std::size_t k = 1; k < est.per_n.size(); ++k)
        if (est.per_n[k].mean > est.per_n[k - 1].mean) est.trend_nonincreasing = false;
    return est;
}

std::vector<double> uniform_angles(int count) {
    if (count < 1) throw ConfigError("direction count must be positive");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) out[j] = kTwoPi * j / count;
    return out;
}

std::vector<Point> direction_targets(std::span<const double> angles, int n) {
    if (n < 1) throw ConfigError("scale n must be positive");
    const int count = static_cast<int>(angles.size());
    auto direct = [n](double a) {
        return Point{static_cast<int>(std::lround(n * std::cos(a))), static_cast<int>(std::lround(n * std::sin(a)))};
    };
    bool uniform = count > 0 && count % 8 == 0;
    for (int j = 0; uniform && j < count; ++j) uniform = std::abs(angles[j] - kTwoPi * j / count) < 1e-12;

    std::vector<Point> out;
    out.reserve(angles.size());
    if (!uniform) {
        for (double a : angles) out.push_back(direct(a));
        return out;
    }
    const int m = count / 8;  // grid steps per eighth-turn
    std::vector<Point> base(static_cast<std::size_t>(m + 1));
    for (int s = 0; s <= m; ++s) base[s] = direct(kTwoPi * s / count);
    base[m][1] = base[m][0];
    for (int j = 0; j < count; ++j) {
        const int octant = j / m, r = j % m, quarter = octant / 2;
        Point p = octant % 2 == 0 ? base[r] : Point{base[m - r][1], base[m - r][0]};
        for (int q = 0; q < quarter; ++q) p = {-p[1], p[0]};
        out.push_back(p);
    }
    return out;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts, double eps) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= eps) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

namespace {

// Distance from the origin to the hull boundary along direction phi.
double hull_radius(std::span<const Vec2> hull, double phi) {
    const double ux = std::cos(phi), uy = std::sin(phi);
    double best = 0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double den = ux * ey - uy * ex;
        if (den == 0) continue;
        const double t = (a[0] * ey - a[1] * ex) / den;       // along the ray
        const double s = (a[0] * uy - a[1] * ux) / den;       // along the edge
        if (t > 0 && s >= -1e-12 && s <= 1 + 1e-12) best = std::max(best, t);
    }
    return best;
}

}  // namespace

BoxRegion shape_box(int n) {
    if (n < 1) throw ConfigError("scale n must be positive");
    return BoxRegion::centered({0, 0}, n + std::max(5, static_cast<int>(std::ceil(0.3 * n))));
}

std::vector<double> shape_replica(const WeightSpec& spec, std::span<const Point> targets, int n, std::uint64_t seed) {
    const BoxRegion box = shape_box(n);
    const auto env = Environment::make(box, spec, seed);
    const auto pm = passage_map(env, Point{0, 0});
    std::vector<double> row(targets.size());
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const VertexId t = box.index(targets[j]);
        row[j] = path_touches_boundary(pm, t) ? std::nan("") : pm.time(t).to_double() / euclidean_norm(targets[j]);
    }
    return row;
}

ShapeEstimate estimate_shape(const WeightSpec& spec, std::span<const double> angles, int n, int replicas,
                             std::uint64_t seed, Exec exec) {
    if (angles.empty()) throw ConfigError("direction grid is empty");
    if (replicas < 0) throw ConfigError("replica count must be nonnegative");
    const auto targets = direction_targets(angles, n);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(replicas));
    parallel_for(replicas, exec, [&](std::int64_t i) {
        rows[i] = shape_replica(spec, targets, n, derive_seed(seed, static_cast<std::uint64_t>(i)));
    });
    return summarize_shape(angles, targets, n, rows);
}

ShapeEstimate summarize_shape(std::span<const double> angles, std::span<const Point> targets, int n,
                              std::span<const std::vector<double>> samples) {
    if (angles.size() != targets.size()) throw ConfigError("one target per direction");
    ShapeEstimate est;
    est.angles.assign(angles.begin(), angles.end());
    est.targets.assign(targets.begin(), targets.end());
    est.n = n;
    est.replicas = static_cast<int>(samples.size());
    const std::size_t dirs = angles.size();

    est.mu_hat.resize(dirs);
    est.discarded.assign(dirs, 0);
    for (const auto& row : samples)
        for (std::size_t j = 0; j < dirs; ++j) {
            if (std::isnan(row[j]))
                ++est.discarded[j];
            else
                est.mu_hat[j].add(row[j]);
        }

    est.valid.assign(dirs, 0);
    std::vector<double> rel_var;
    for (std::size_t j = 0; j < dirs; ++j) {
        const auto& s = est.mu_hat[j];
        if (s.count == 0 || !(s.mean > 0)) continue;
        est.valid[j] = 1;
        const double len = euclidean_norm(est.targets[j]);
        est.points.push_back({est.targets[j][0] / len / s.mean, est.targets[j][1] / len / s.mean});
        if (auto se = s.stderr_of_mean()) rel_var.push_back((*se / s.mean) * (*se / s.mean));
    }
    if (est.points.empty()) return est;
    est.hull = convex_hull(est.points);

    if (!rel_var.empty()) {
        double sum = 0;
        for (double v : rel_var) sum += v;
        est.pooled_rel_stderr = std::sqrt(sum / static_cast<double>(rel_var.size()));
    }

    std::set<std::vector<int>> orbits;
    for (std::size_t j = 0; j < dirs; ++j) {
        if (!est.valid[j]) continue;
        std::vector<int> orbit;
        for (int g = 0; g < 8; ++g) {
            const Point q = apply_symmetry(g, est.targets[j]);
            for (std::size_t i = 0; i < dirs; ++i)
                if (est.valid[i] && est.targets[i] == q) orbit.push_back(static_cast<int>(i));
        }
        std::sort(orbit.begin(), orbit.end());
        orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
        orbits.insert(orbit);
    }
    for (const auto& orbit : orbits) {
        // Offsets from the smallest radius keep an exactly symmetric orbit at zero defect.
        double low = std::numeric_limits<double>::infinity(), offset = 0;
        for (int i : orbit) low = std::min(low, 1 / est.mu_hat[i].mean);
        for (int i : orbit) offset += 1 / est.mu_hat[i].mean - low;
        const double mean_r = low + offset / static_cast<double>(orbit.size());
        for (int i : orbit) est.symmetry_defect = std::max(est.symmetry_defect, std::abs(1 / est.mu_hat[i].mean - mean_r) / mean_r);
    }

    if (est.hull.size() >= 3)
        for (const auto& p : est.points) {
            const double h = hull_radius(est.hull, std::atan2(p[1], p[0]));
            if (h > 0) est.convexity_dent = std::max(est.convexity_dent, (h - std::hypot(p[0], p[1])) / h);
        }
    return est;
}

SideReport count_sides(std::span<const Vec2> hull, double angle_tol) {
    if (!(angle_tol > 0)) throw ConfigError("angle tolerance must be positive");
    if (angle_tol >= std::numbers::pi / 4) throw ConfigError("angle tolerance >= pi/4 cannot separate the sides of a square");
    if (hull.size() < 3) throw DomainError("degenerate hull");
    SideReport rep;
    rep.angle_tol = angle_tol;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        double ang = std::atan2(-(b[0] - a[0]), b[1] - a[1]);
        if (ang < 0) ang += kTwoPi;
        rep.normal_angles.push_back(ang);
    }
    std::vector<double> sorted = rep.normal_angles;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    int best = static_cast<int>(n);
    for (std::size_t s = 0; s < n; ++s) {
        int arcs = 0;
        std::size_t covered = 0;
        while (covered < n) {
            const double start = sorted[(s + covered) % n] + (s + covered >= n ? kTwoPi : 0);
            ++arcs;
            while (covered < n) {
                const double a = sorted[(s + covered) % n] + (s + covered >= n ? kTwoPi : 0);
                if (a - start >= angle_tol) break;
                ++covered;
            }
        }
        best = std::min(best, arcs);
    }
    rep.count = best;
    return rep;
}

SideReport count_sides(const ShapeEstimate& shape, double angle_tol) { return count_sides(shape.hull, angle_tol); }

SupportingFunctional supporting_functional(std::span<const Vec2> hull, const Vec2& u, double tol) {
    if (std::abs(std::hypot(u[0], u[1]) - 1) > 1e-9) throw ConfigError("support direction must be a unit vector");
    if (hull.size() < 3) throw DomainError("degenerate hull");
    double h = -std::numeric_limits<double>::infinity();
    for (const auto& x : hull) h = std::max(h, u[0] * x[0] + u[1] * x[1]);
    if (!(h > 0)) throw DomainError("hull does not contain the origin in its interior");

    SupportingFunctional out;
    out.rho.gradient = {u[0] / h, u[1] / h};
    out.support_value = h;
    bool below = true;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const double r = out.rho(std::span<const double>(hull[i]));
        if (r >= 1 - tol) out.contacts.push_back(static_cast<int>(i));
        below = below && r <= 1 + tol;
    }
    out.unique_touch = out.contacts.size() == 1;
    out.verified = below && !out.contacts.empty();
    return out;
}

SupportingFunctional supporting_functional(const ShapeEstimate& shape, const Vec2& u, double tol) {
    return supporting_functional(shape.hull, u, tol);
}

void write_shape_csv(const ShapeEstimate& s, std::ostream& os) {
    const auto old = os.precision(17);
    os << "angle,target_x0,target_x1,mu,stderr,n,replicas,discarded,valid\n";
    for (std::size_t j = 0; j < s.angles.size(); ++j) {
        const auto se = s.mu_hat[j].stderr_of_mean();
        os << s.angles[j] << ',' << s.targets[j][0] << ',' << s.targets[j][1] << ',' << s.mu_hat[j].mean << ','
           << (se ? *se : std::nan("")) << ',' << s.n << ',' << s.mu_hat[j].count << ','
           << s.discarded[j] << ',' << int(s.valid[j]) << '\n';
    }
    os.precision(old);
}

void write_hull_csv(std::span<const Vec2> hull, std::ostream& os) {
    const auto old = os.precision(17);
    os << "index,x0,x1\n";
    for (std::size_t i = 0; i < hull.size(); ++i) os << i << ',' << hull[i][0] << ',' << hull[i][1] << '\n';
    os.precision(old);
}

}  // namespace fpp
