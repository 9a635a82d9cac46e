#include "fpp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <regex>
#include <sstream>

#include "fpp/busemann.hpp"
#include "fpp/competition.hpp"
#include "fpp/errors.hpp"
#include "fpp/geodesics.hpp"
#include "fpp/metric.hpp"
#include "fpp/parallel.hpp"
#include "fpp/random.hpp"
#include "fpp/shape.hpp"
#include "fpp/stats.hpp"

namespace fpp {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

long long parse_int(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || text.empty())
        throw ConfigError("parameter '" + key + "': expected an integer, got '" + text + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || text.empty() || !std::isfinite(v))
        throw ConfigError("parameter '" + key + "': expected a finite number, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || text.empty())
        throw ConfigError("parameter '" + key + "': expected an unsigned integer, got '" + text + "'");
    return v;
}

const std::map<std::string, std::map<std::string, std::string>>& kind_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> table = {
        {"env", {{"d", "2"}, {"box_radius", "20"}, {"weights", "exponential(1)"}}},
        {"metric-oracle", {{"weights", "uniform(0,1)"}}},
        {"passage-map", {{"d", "2"}, {"box_radius", "30"}, {"weights", "exponential(1)"}}},
        {"ends", {{"box_radius", "100"}, {"r", "20"}, {"R", "100"}, {"weights", "exponential(1)"}}},
        {"merge", {{"distance", "200"}, {"width", "12"}, {"offset", "0,1"}, {"weights", "uniform(0.9,1.1)"}}},
        {"shape", {{"directions", "32"}, {"n", "100"}, {"angle_tol", "0.05"}, {"weights", "exponential(1)"}}},
        {"busemann-linearity",
         {{"box_radius", "150"},
          {"theta", "0"},
          {"M", "30"},
          {"probe_outer", "60"},
          {"probe_stride", "3"},
          {"deltas", "0.05,0.1,0.2,0.3,0.5"},
          {"weights", "exponential(1)"}}},
        {"coexistence",
         {{"box_radius", "30"},
          {"sources", "-10,0;10,0"},
          {"dynamics", "voronoi"},
          {"rates", ""},
          {"proxy", "boundary"},
          {"theta", "0.1"},
          {"weights", "exponential(1)"}}},
        {"duality",
         {{"box_radius", "30"},
          {"k", "2"},
          {"delta", "0.1"},
          {"M", "10"},
          {"functionals", "even"},
          {"angle_offset", "0"},
          {"gradient_norm", "1"},
          {"placement", "circle"},
          {"min_radius", "0"},
          {"proxy", "boundary"},
          {"theta", "0.1"},
          {"shape_directions", "32"},
          {"shape_n", "60"},
          {"shape_replicas", "20"},
          {"angle_tol", "0.05"},
          {"weights", "exponential(1)"}}},
    };
    return table;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, trim(t.substr(eq + 1))).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return out;
}

WeightSpec parse_weight_spec(std::string_view text) {
    static const std::regex re(R"(\s*([a-z-]+)\s*\(\s*([^,()\s]+)\s*(?:,\s*([^,()\s]+)\s*)?\)\s*)");
    std::cmatch m;
    if (!std::regex_match(text.begin(), text.end(), m, re))
        throw ConfigError("weights: expected family(params), got '" + std::string(text) + "'");
    const std::string family = m[1];
    const double a = parse_double("weights", m[2]);
    const bool two = m[3].matched;
    auto need = [&](bool want_two) {
        if (two != want_two) throw ConfigError("weights: wrong parameter count for " + family);
    };
    if (family == "exponential") return need(false), WeightSpec::exponential(a);
    if (family == "constant") return need(false), WeightSpec::constant(a);
    if (family == "uniform") return need(true), WeightSpec::uniform(a, parse_double("weights", m[3]));
    if (family == "shifted-power") return need(true), WeightSpec::shifted_power(a, parse_double("weights", m[3]));
    throw ConfigError("weights: unknown family '" + family + "'");
}

const std::vector<KindInfo>& experiment_kinds() {
    static const std::vector<KindInfo> kinds = {
        {"env", "env"},           {"metric-oracle", "metric"}, {"passage-map", "metric"},
        {"ends", "metric"},       {"merge", "metric"},         {"shape", "shape"},
        {"busemann-linearity", "busemann"}, {"coexistence", "compete"}, {"duality", "duality"},
    };
    return kinds;
}

const std::string& ExperimentConfig::get(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw ConfigError("missing parameter '" + key + "'");
    return it->second;
}

long long ExperimentConfig::get_int(const std::string& key) const { return parse_int(key, get(key)); }

double ExperimentConfig::get_double(const std::string& key) const { return parse_double(key, get(key)); }

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    const auto& text = get(key);
    if (text.empty()) return out;
    for (const auto& part : split(text, ',')) out.push_back(parse_double(key, part));
    return out;
}

WeightSpec ExperimentConfig::weights() const { return parse_weight_spec(get("weights")); }

std::string ExperimentConfig::canonical_text() const {
    std::map<std::string, std::string> all = params;
    all["kind"] = kind;
    all["seed"] = std::to_string(seed);
    all["replicas"] = std::to_string(replicas);
    if (replay_seed) all["replay_seed"] = std::to_string(*replay_seed);
    std::string out;
    for (const auto& [k, v] : all) out += k + "=" + v + "\n";
    return out;
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// ---------------------------------------------------------------------------
// Plans: one per kind. A plan reads and checks its parameters up front, then
// exposes a per-replica function and an optional finishing step.

using Sink = std::vector<Artifact>;

struct Plan {
    json environment = json::object();
    json setup = json::object();
    std::function<std::optional<json>(std::uint64_t seed, Sink* sink)> replica;
    std::function<void(const std::vector<json>& records, json& extras, Sink& artifacts)> finish;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw AssertionFailure(what);
}

long long int_in(const ExperimentConfig& c, const std::string& key, long long lo, long long hi) {
    const long long v = c.get_int(key);
    if (v < lo || v > hi)
        throw ConfigError("parameter '" + key + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return v;
}

double double_in(const ExperimentConfig& c, const std::string& key, double lo, double hi) {
    const double v = c.get_double(key);
    if (!(v >= lo && v <= hi))
        throw ConfigError("parameter '" + key + "' = " + c.get(key) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return v;
}

std::string choice(const ExperimentConfig& c, const std::string& key, std::initializer_list<const char*> options) {
    const auto& v = c.get(key);
    for (const char* o : options)
        if (v == o) return v;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : "|") + o;
    throw ConfigError("parameter '" + key + "' = '" + v + "', expected one of " + list);
}

std::vector<Point> parse_points(const std::string& key, const std::string& text) {
    std::vector<Point> out;
    for (const auto& part : split(text, ';')) {
        Point p;
        for (const auto& c : split(part, ',')) p.push_back(static_cast<int>(parse_int(key, c)));
        if (p.size() != 2) throw ConfigError("parameter '" + key + "': points are 'x,y' separated by ';'");
        out.push_back(std::move(p));
    }
    return out;
}

std::string to_csv(const std::function<void(std::ostream&)>& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

json box_json(const BoxRegion& r) { return {{"lower", r.lower()}, {"upper", r.upper()}}; }

constexpr std::int64_t kMaxVertices = 20'000'000;

BoxRegion checked_box(const BoxRegion& box) {
    if (box.vertex_count() > kMaxVertices) throw ConfigError("box too large: " + box.describe());
    return box;
}

ProxyMode proxy_mode(const ExperimentConfig& c) {
    if (choice(c, "proxy", {"boundary", "volume"}) == "boundary") return ProxyMode::boundary();
    return ProxyMode::volume(c.get_double("theta"));
}

// Equal-strength (or growth) competition on one environment, with the
// witness check wherever the partition is the FPP-Voronoi partition.
json compete_once(const Environment& env, const std::vector<Point>& sources, ProxyMode mode, const std::string& dynamics,
                  const std::vector<double>& rates, std::uint64_t seed, Sink* sink) {
    Partition p;
    bool voronoi_cells = dynamics == "voronoi";
    if (dynamics == "voronoi") {
        p = fpp_voronoi(env, sources, Exec{1});
    } else {
        const auto res = dynamics == "coupled" ? simulate_richardson(env, sources, rates)
                                               : simulate_richardson(env.region(), sources, rates, seed);
        expect(verify_trace(env.region(), sources, res.trace), "growth trace violates the colouring rules");
        if (dynamics == "coupled" && std::all_of(rates.begin(), rates.end(), [](double r) { return r == 1.0; })) {
            expect(res.partition.owner == fpp_voronoi(env, sources, Exec{1}).owner,
                   "coupled growth differs from the FPP-Voronoi partition");
            voronoi_cells = true;
        }
        if (sink) sink->push_back({"trace.csv", to_csv([&](std::ostream& os) { write_trace_csv(env.region(), res.trace, os); })});
        p = res.partition;
    }
    if (voronoi_cells && env.spec().is_continuous()) {
        expect(p.tie_count == 0, "equidistant vertex under continuous weights");
        expect(p.all_connected(), "disconnected Voronoi cell");
    }
    const bool boundary = coexistence_proxy(p, ProxyMode::boundary());
    json rec{{"coexist", coexistence_proxy(p, mode)}, {"boundary_coexist", boundary}, {"witness", nullptr},
             {"ties", p.tie_count}};
    if (voronoi_cells && boundary) {
        const auto paths = extract_disjoint_geodesics(p, env);
        const auto check = verify_disjoint_witness(env, p, paths);
        expect(check.ok, "disjoint geodesic witness rejected: " + check.reason);
        rec["witness"] = true;
    }
    for (int i = 0; i < p.k(); ++i)
        rec["share_" + std::to_string(i)] = static_cast<double>(p.cell_sizes[i]) / static_cast<double>(p.region.vertex_count());
    if (sink) sink->push_back({"partition.csv", to_csv([&](std::ostream& os) { write_partition_csv(p, os); })});
    return rec;
}

void check_sources(const BoxRegion& box, const std::vector<Point>& sources) {
    for (const auto& s : sources)
        if (!box.contains(s)) throw ConfigError("source " + to_string(s) + " outside " + box.describe());
    for (std::size_t i = 0; i < sources.size(); ++i)
        for (std::size_t j = i + 1; j < sources.size(); ++j)
            if (sources[i] == sources[j]) throw ConfigError("duplicate source " + to_string(sources[i]));
}

Plan plan_env(const ExperimentConfig& c) {
    const int d = static_cast<int>(int_in(c, "d", 2, 6));
    const int R = static_cast<int>(int_in(c, "box_radius", 1, 1 << 20));
    const auto box = checked_box(BoxRegion::centered(Point(d, 0), R));
    const auto spec = c.weights();
    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    plan.replica = [=](std::uint64_t seed, Sink* sink) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        const auto w = env.canonical_weights();
        const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
        json rec{{"mean_weight", env.mean_weight()}, {"min_weight", *lo}, {"max_weight", *hi},
                 {"ks_statistic", nullptr}, {"ks_reject_1pct", nullptr}};
        if (spec.is_continuous()) {
            const double ks = env.ks_statistic();
            rec["ks_statistic"] = ks;
            rec["ks_reject_1pct"] = ks > 1.628 / std::sqrt(static_cast<double>(w.size()));
        }
        if (sink) {
            std::ostringstream os(std::ios::binary);
            save_environment(env, os);
            sink->push_back({"environment.fppenv", os.str()});
        }
        return rec;
    };
    return plan;
}

Plan plan_metric_oracle(const ExperimentConfig& c) {
    const auto spec = c.weights();
    std::vector<std::pair<int, int>> shapes;
    for (int w = 2; w <= 8; ++w)
        for (int h = 2; w * h <= kBruteForceMaxVertices && w * h <= 16; ++h) shapes.emplace_back(w, h);
    Plan plan;
    plan.environment = {{"weights", spec.describe()}, {"boxes", "all w x h with w, h >= 2 and w h <= 16"}};
    plan.replica = [=](std::uint64_t seed, Sink*) -> std::optional<json> {
        const auto [w, h] = shapes[seed % shapes.size()];
        const BoxRegion box({0, 0}, {w - 1, h - 1});
        const auto env = Environment::make(box, spec, seed);
        std::int64_t pairs = 0, enumerated = 0, ties = 0;
        for (VertexId s : {VertexId{0}, static_cast<VertexId>(box.vertex_count() / 2)}) {
            const Point src = box.point(s);
            const auto pm = passage_map(env, src);
            ties += pm.tie_count();
            for (VertexId t = 0; t < box.vertex_count(); ++t) {
                const auto bf = brute_force_passage_time(env, src, box.point(t));
                enumerated += bf.paths_enumerated;
                ++pairs;
                expect(pm.time(t) == bf.time, "Dijkstra time differs from enumeration at " + to_string(box.point(t)));
                if (spec.is_continuous()) expect(bf.minimizers == 1, "continuous weights with several minimizers");
                if (bf.minimizers == 1)
                    expect(geodesic(pm, t).vertices == bf.path.vertices,
                           "Dijkstra geodesic differs from enumeration at " + to_string(box.point(t)));
            }
        }
        if (spec.is_continuous()) expect(ties == 0, "exact tie under continuous weights");
        return json{{"width", w}, {"height", h}, {"pairs", pairs}, {"paths_enumerated", enumerated},
                    {"ties", ties}, {"exact_match", true}};
    };
    return plan;
}

Plan plan_passage_map(const ExperimentConfig& c) {
    const int d = static_cast<int>(int_in(c, "d", 2, 6));
    const int R = static_cast<int>(int_in(c, "box_radius", 1, 1 << 20));
    const auto box = checked_box(BoxRegion::centered(Point(d, 0), R));
    const auto spec = c.weights();
    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    plan.replica = [=](std::uint64_t seed, Sink* sink) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        const Point origin(d, 0);
        const auto pm = passage_map(env, origin);
        // Certificate: every edge satisfies T(v) <= T(u) + t(u, v), with equality on tree edges.
        for (VertexId v = 0; v < box.vertex_count(); ++v) {
            for (int a = 0; a < d; ++a) {
                const VertexId u = box.step(v, a, +1);
                if (u == kNoVertex) continue;
                const Time t = env.time(v, a);
                expect(pm.time(u) <= pm.time(v) + t && pm.time(v) <= pm.time(u) + t, "passage map violates an edge bound");
            }
            if (const VertexId p = pm.pred(v); p != kNoVertex)
                expect(pm.time(v) == pm.time(p) + Time::from_double(pm.in_weight(v)), "predecessor link is not tight");
        }
        Time far = Time::zero();
        double sum = 0;
        for (const auto& t : pm.times()) {
            far = std::max(far, t);
            sum += t.to_double();
        }
        if (sink) sink->push_back({"passage_map.csv", to_csv([&](std::ostream& os) { write_passage_map_csv(pm, os); })});
        return json{{"max_time", far.to_double()},
                    {"mean_time", sum / static_cast<double>(box.vertex_count())},
                    {"corner_time", pm.time(0).to_double()},
                    {"ties", pm.tie_count()}};
    };
    return plan;
}

Plan plan_ends(const ExperimentConfig& c) {
    const int B = static_cast<int>(int_in(c, "box_radius", 2, 1 << 14));
    const int R = static_cast<int>(int_in(c, "R", 1, B));
    const int r = static_cast<int>(int_in(c, "r", 0, R - 1));
    const auto box = checked_box(BoxRegion::centered({0, 0}, B));
    const auto spec = c.weights();
    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    plan.setup = {{"r", r}, {"R", R}};
    plan.replica = [=](std::uint64_t seed, Sink*) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        const auto report = tree_end_count(GeodesicTree(passage_map(env, Point{0, 0})), r, R);
        expect(report.count >= 1, "geodesic tree has no branch reaching the outer radius");
        auto rec = end_count_record(report, seed);
        rec.erase("seed");
        rec["count_ge_4"] = report.count >= 4;
        return rec;
    };
    plan.finish = [](const std::vector<json>& records, json& extras, Sink&) {
        std::map<int, std::int64_t> hist;
        for (const auto& rec : records) ++hist[rec.at("count").get<int>()];
        json dist = json::object();
        for (const auto& [k, v] : hist) dist[std::to_string(k)] = v;
        extras["count_distribution"] = dist;
    };
    return plan;
}

Plan plan_merge(const ExperimentConfig& c) {
    const int dist = static_cast<int>(int_in(c, "distance", 1, 1 << 14));
    const int width = static_cast<int>(int_in(c, "width", 1, 1 << 14));
    const auto off = parse_points("offset", c.get("offset"));
    if (off.size() != 1) throw ConfigError("parameter 'offset': expected one point");
    const Point x{0, 0}, y = off[0], target{dist, 0};
    const auto box = checked_box(BoxRegion({-width, -width}, {dist + width, width}));
    if (!box.contains(y)) throw ConfigError("offset point outside the box");
    const auto spec = c.weights();
    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    plan.setup = {{"x", x}, {"y", y}, {"target", target}};
    plan.replica = [=](std::uint64_t seed, Sink*) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        auto rec = merge_record(coalescence_merge(env, x, y, target), seed);
        rec.erase("seed");
        return rec;
    };
    return plan;
}

Plan plan_shape(const ExperimentConfig& c) {
    const int dirs = static_cast<int>(int_in(c, "directions", 4, 4096));
    const int n = static_cast<int>(int_in(c, "n", 1, 1 << 12));
    const double tol = c.get_double("angle_tol");
    if (!(tol > 0 && tol < std::numbers::pi / 4)) throw ConfigError("parameter 'angle_tol' must lie in (0, pi/4)");
    const auto spec = c.weights();
    const auto angles = uniform_angles(dirs);
    const auto targets = direction_targets(angles, n);
    Plan plan;
    plan.environment = {{"box", box_json(shape_box(n))}, {"weights", spec.describe()}};
    plan.setup = {{"directions", dirs}, {"n", n}, {"angle_tol", tol}};
    plan.replica = [=](std::uint64_t seed, Sink*) -> std::optional<json> {
        const auto row = shape_replica(spec, targets, n, seed);
        int discarded = 0;
        MeanSummary mean;
        for (double v : row) std::isnan(v) ? void(++discarded) : mean.add(v);
        return json{{"mu", row}, {"discarded_directions", discarded}, {"mean_mu", mean.count ? json(mean.mean) : json()}};
    };
    plan.finish = [=](const std::vector<json>& records, json& extras, Sink& artifacts) {
        std::vector<std::vector<double>> rows;
        for (const auto& rec : records) {
            std::vector<double> row;
            for (const auto& v : rec.at("mu")) row.push_back(v.is_null() ? std::nan("") : v.get<double>());
            rows.push_back(std::move(row));
        }
        const auto est = summarize_shape(angles, targets, n, rows);
        json mu = json::array(), se = json::array();
        for (const auto& s : est.mu_hat) {
            mu.push_back(s.count ? json(s.mean) : json());
            const auto e = s.stderr_of_mean();
            se.push_back(e ? json(*e) : json());
        }
        json shape{{"mu", mu},
                   {"stderr", se},
                   {"symmetry_defect", est.symmetry_defect},
                   {"pooled_rel_stderr", est.pooled_rel_stderr},
                   {"symmetric_within_3se", est.symmetry_defect < 3 * est.pooled_rel_stderr},
                   {"convexity_dent", est.convexity_dent},
                   {"convex_within_3se", est.convexity_dent <= 3 * est.pooled_rel_stderr},
                   {"hull_vertices", est.hull.size()},
                   {"sides", nullptr}};
        if (est.hull.size() >= 3) shape["sides"] = count_sides(est, tol).count;
        if (!spec.is_continuous() && !rows.empty())
            expect(est.symmetry_defect == 0, "constant-weight shape is not exactly symmetric");
        extras["shape"] = shape;
        artifacts.push_back({"shape.csv", to_csv([&](std::ostream& os) { write_shape_csv(est, os); })});
        artifacts.push_back({"hull.csv", to_csv([&](std::ostream& os) { write_hull_csv(est.hull, os); })});
    };
    return plan;
}

std::string delta_key(double delta) {
    std::ostringstream os;
    os << "A_delta_" << delta;
    return os.str();
}

Plan plan_busemann(const ExperimentConfig& c) {
    const int B = static_cast<int>(int_in(c, "box_radius", 4, 1 << 12));
    const int outer = static_cast<int>(int_in(c, "probe_outer", 1, B - 1));
    const int stride = static_cast<int>(int_in(c, "probe_stride", 1, outer));
    const double theta = c.get_double("theta");
    const double M = double_in(c, "M", 0, outer);
    const auto deltas = c.get_doubles("deltas");
    for (double d : deltas)
        if (!(d > 0)) throw ConfigError("parameter 'deltas' must be positive");
    const auto box = checked_box(BoxRegion::centered({0, 0}, B));
    const auto spec = c.weights();
    const Point origin{0, 0};
    const auto probes = probe_shell(origin, 1, outer, stride);
    if (fit_linear_functional(probes, std::vector<double>(probes.size(), 0.0)).sigma_min <= 0)
        throw ConfigError("probe design is degenerate");
    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    plan.setup = {{"theta", theta}, {"M", M}, {"probes", probes.size()}, {"deltas", deltas}};
    plan.replica = [=](std::uint64_t seed, Sink* sink) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        const auto ray = busemann_ray(env, theta, origin);
        const BusemannField field(env, ray);
        const auto bp = busemann_probes(field, origin, probes);
        const auto fit = fit_linear_functional(bp);
        const double dev = linearity_deviation(bp, fit.rho, M);

        // Two probes recomputed from their own maps: same value, exact antisymmetry.
        const auto pm0 = passage_map(env, origin);
        double oscillation = 0;
        for (std::size_t i : {std::size_t{0}, probes.size() / 2}) {
            const auto pmy = passage_map(env, probes[i]);
            const auto s = busemann_series(pm0, pmy, ray), back = busemann_series(pmy, pm0, ray);
            expect(s.last() == bp.values[i], "Busemann field and per-probe series disagree");
            for (std::size_t k = 0; k < s.values.size(); ++k)
                expect(s.values[k] == -back.values[k], "Busemann antisymmetry fails");
            if (i == 0) {
                oscillation = s.oscillation();
                if (sink) sink->push_back({"series.csv", to_csv([&](std::ostream& os) { write_series_csv(s, os); })});
            }
        }
        json rec{{"rho_0", fit.rho.gradient[0]},
                 {"rho_1", fit.rho.gradient[1]},
                 {"rho_norm", fit.rho.norm()},
                 {"rho_angle", fit.rho.angle()},
                 {"rms_residual", fit.rms_residual},
                 {"sigma_min", fit.sigma_min},
                 {"deviation", dev},
                 {"ray_targets", ray.targets.size()},
                 {"oscillation", oscillation}};
        for (double d : deltas) rec[delta_key(d)] = dev < d;
        return rec;
    };
    plan.finish = [](const std::vector<json>& records, json& extras, Sink& artifacts) {
        constexpr int kBins = 36;
        std::vector<std::int64_t> hist(kBins, 0);
        std::ostringstream os;
        os.precision(17);
        os << "replica,rho_0,rho_1\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            const double a = records[i].at("rho_angle").get<double>();
            ++hist[std::min(kBins - 1, static_cast<int>(a / (2 * std::numbers::pi) * kBins))];
            os << i << ',' << records[i].at("rho_0").get<double>() << ',' << records[i].at("rho_1").get<double>() << '\n';
        }
        extras["gradient_angle_histogram"] = {{"bins", kBins}, {"counts", hist}};
        artifacts.push_back({"gradients.csv", os.str()});
    };
    return plan;
}

Plan plan_coexistence(const ExperimentConfig& c) {
    const int B = static_cast<int>(int_in(c, "box_radius", 1, 1 << 14));
    const auto box = checked_box(BoxRegion::centered({0, 0}, B));
    const auto sources = parse_points("sources", c.get("sources"));
    check_sources(box, sources);
    const auto dynamics = choice(c, "dynamics", {"voronoi", "coupled", "independent"});
    auto rates = c.get_doubles("rates");
    if (rates.empty()) rates.assign(sources.size(), 1.0);
    if (rates.size() != sources.size()) throw ConfigError("parameter 'rates': one rate per source");
    for (double r : rates)
        if (!(r > 0)) throw ConfigError("parameter 'rates' must be positive");
    const auto mode = proxy_mode(c);
    const auto spec = c.weights();
    if (dynamics == "coupled" && spec.family() != WeightFamily::Exponential)
        throw ConfigError("coupled dynamics need exponential weights");
    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    plan.setup = {{"sources", sources}, {"dynamics", dynamics}, {"rates", rates}, {"proxy", c.get("proxy")}};
    plan.replica = [=](std::uint64_t seed, Sink* sink) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        return compete_once(env, sources, mode, dynamics, rates, seed, sink);
    };
    return plan;
}

Plan plan_duality(const ExperimentConfig& c, bool dry) {
    const int B = static_cast<int>(int_in(c, "box_radius", 1, 1 << 14));
    const int k = static_cast<int>(int_in(c, "k", 1, 64));
    const double delta = double_in(c, "delta", 0, 1e9);
    const double M = double_in(c, "M", 0, 1e9);
    const double min_radius = double_in(c, "min_radius", 0, 1e9);
    const auto how = choice(c, "functionals", {"even", "shape"});
    const auto variant = choice(c, "placement", {"circle", "inductive"}) == "circle" ? PlacementVariant::Circle
                                                                                     : PlacementVariant::Inductive;
    const double offset = c.get_double("angle_offset");
    const double norm = c.get_double("gradient_norm");
    if (!(norm > 0)) throw ConfigError("parameter 'gradient_norm' must be positive");
    const int shape_dirs = static_cast<int>(int_in(c, "shape_directions", 8, 4096));
    const int shape_n = static_cast<int>(int_in(c, "shape_n", 1, 1 << 12));
    const int shape_reps = static_cast<int>(int_in(c, "shape_replicas", 1, 1 << 20));
    const double tol = c.get_double("angle_tol");
    if (!(tol > 0 && tol < std::numbers::pi / 4)) throw ConfigError("parameter 'angle_tol' must lie in (0, pi/4)");
    const auto mode = proxy_mode(c);
    const auto spec = c.weights();
    const auto box = checked_box(BoxRegion::centered({0, 0}, B));

    Plan plan;
    plan.environment = {{"box", box_json(box)}, {"weights", spec.describe()}};
    if (dry) return plan;

    std::vector<LinearFunctional> fs;
    json origin_info{{"functionals", how}};
    if (how == "even") {
        for (int i = 0; i < k; ++i) fs.push_back(LinearFunctional::from_angle(offset + 2 * std::numbers::pi * i / k, norm));
    } else {
        const auto est = estimate_shape(spec, uniform_angles(shape_dirs), shape_n, shape_reps,
                                        derive_seed(c.seed, 0xD0A1D0A1ULL));
        if (est.hull.size() < 3) throw DomainError("shape estimate has a degenerate hull");
        const auto sides = count_sides(est, tol);
        origin_info["sides"] = sides.count;
        origin_info["sides_at_least_k"] = sides.count >= k;
        for (int i = 0; i < k; ++i) {
            const double a = offset + 2 * std::numbers::pi * i / k;
            fs.push_back(supporting_functional(est, {std::cos(a), std::sin(a)}).rho);
        }
    }
    const std::vector<double> deltas(k, delta), radii(k, M);
    const auto placement = place_coexistence_points(fs, deltas, radii, variant, min_radius);
    check_sources(box, placement.points);
    plan.setup = {{"origin", origin_info}, {"placement", placement_json(placement)}, {"proxy", c.get("proxy")}};
    const auto sources = placement.points;
    plan.replica = [=](std::uint64_t seed, Sink* sink) -> std::optional<json> {
        const auto env = Environment::make(box, spec, seed);
        return compete_once(env, sources, mode, "voronoi", {}, seed, sink);
    };
    return plan;
}

Plan make_plan(const ExperimentConfig& c, bool dry) {
    if (c.kind == "env") return plan_env(c);
    if (c.kind == "metric-oracle") return plan_metric_oracle(c);
    if (c.kind == "passage-map") return plan_passage_map(c);
    if (c.kind == "ends") return plan_ends(c);
    if (c.kind == "merge") return plan_merge(c);
    if (c.kind == "shape") return plan_shape(c);
    if (c.kind == "busemann-linearity") return plan_busemann(c);
    if (c.kind == "coexistence") return plan_coexistence(c);
    if (c.kind == "duality") return plan_duality(c, dry);
    throw ConfigError("unknown experiment kind '" + c.kind + "'");
}

}  // namespace

ExperimentConfig make_config(const std::map<std::string, std::string>& kv, std::string_view command) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> rest = kv;
    auto take = [&](const char* key) -> std::optional<std::string> {
        const auto it = rest.find(key);
        if (it == rest.end()) return std::nullopt;
        std::string v = it->second;
        rest.erase(it);
        return v;
    };
    std::string default_kind;
    for (const auto& k : experiment_kinds())
        if (k.command == command && default_kind.empty()) default_kind = k.kind;
    if (default_kind.empty()) throw ConfigError("unknown command '" + std::string(command) + "'");
    cfg.kind = take("kind").value_or(default_kind);
    const auto kinds = experiment_kinds();
    const auto info = std::find_if(kinds.begin(), kinds.end(), [&](const KindInfo& k) { return k.kind == cfg.kind; });
    if (info == kinds.end()) throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
    if (info->command != command)
        throw ConfigError("kind '" + cfg.kind + "' belongs to the '" + info->command + "' command");

    if (auto v = take("seed")) cfg.seed = parse_u64("seed", *v);
    if (auto v = take("replicas")) {
        const long long r = parse_int("replicas", *v);
        if (r < 0 || r > 100'000'000) throw ConfigError("parameter 'replicas' out of range");
        cfg.replicas = static_cast<int>(r);
    }
    if (auto v = take("workers")) {
        const long long w = parse_int("workers", *v);
        if (w < 0 || w > 4096) throw ConfigError("parameter 'workers' out of range");
        cfg.workers = static_cast<int>(w);
    }
    if (auto v = take("replay_seed")) cfg.replay_seed = parse_u64("replay_seed", *v);

    const auto& defaults = kind_defaults().at(cfg.kind);
    for (const auto& [key, value] : rest)
        if (!defaults.count(key)) throw ConfigError("unknown parameter '" + key + "' for kind '" + cfg.kind + "'");
    cfg.params = defaults;
    for (const auto& [key, value] : rest) cfg.params[key] = value;
    make_plan(cfg, true);
    return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const Plan plan = make_plan(cfg, false);
    const Exec exec{cfg.workers};

    const bool replay = cfg.replay_seed.has_value();
    const int n = replay ? 1 : cfg.replicas;
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) seeds[i] = replay ? *cfg.replay_seed : derive_seed(cfg.seed, static_cast<std::uint64_t>(i));

    std::vector<std::optional<json>> results(static_cast<std::size_t>(n));
    Sink first_artifacts;
    parallel_for(n, exec, [&](std::int64_t i) {
        try {
            results[i] = plan.replica(seeds[i], i == 0 ? &first_artifacts : nullptr);
        } catch (const AssertionFailure& e) {
            throw AssertionFailure("replica " + std::to_string(i) + " (seed " + std::to_string(seeds[i]) + "): " + e.what(),
                                   seeds[i]);
        } catch (const ModelViolation& e) {
            throw AssertionFailure("replica " + std::to_string(i) + " (seed " + std::to_string(seeds[i]) + "): " + e.what(),
                                   seeds[i]);
        }
    });

    ExperimentReport out;
    Aggregator agg;
    std::int64_t discarded = 0;
    for (int i = 0; i < n; ++i) {
        if (!results[i]) {
            ++discarded;
            continue;
        }
        agg.add(*results[i]);
        json rec{{"replica", i}, {"seed", seeds[i]}};
        rec.update(*results[i]);
        out.records.push_back(std::move(rec));
    }

    json aggregates = agg.to_json();
    aggregates["setup"] = plan.setup;
    out.artifacts = std::move(first_artifacts);
    if (plan.finish) {
        json extras = json::object();
        plan.finish(out.records, extras, out.artifacts);
        for (auto& [key, value] : extras.items()) aggregates[key] = value;
    }

    json config = json::object();
    for (const auto& line : split(cfg.canonical_text(), '\n')) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        config[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.report = {{"schema_version", kReportSchemaVersion},
                  {"kind", cfg.kind},
                  {"config", config},
                  {"config_hash", cfg.hash()},
                  {"master_seed", cfg.seed},
                  {"replicas", {{"configured", n}, {"completed", n - discarded}, {"discarded", discarded}}},
                  {"environment", plan.environment},
                  {"aggregates", aggregates},
                  {"execution", {{"workers", cfg.workers}, {"threads", exec.threads()}, {"wall_seconds", seconds}}}};
    return out;
}

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& bytes) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + (dir / name).string());
        os << bytes;
    };
    write("report.json", r.report.dump(2) + "\n");
    write("aggregates.json", r.aggregates().dump(2) + "\n");
    std::string lines;
    for (const auto& rec : r.records) lines += rec.dump() + "\n";
    write("replicas.jsonl", lines);
    for (const auto& a : r.artifacts) write(a.name, a.bytes);
}

}  // namespace fpp
