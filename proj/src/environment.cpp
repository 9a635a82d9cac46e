#include "fpp/environment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "fpp/errors.hpp"
#include "fpp/random.hpp"

namespace fpp {

namespace {

constexpr char kMagic[] = "FPPENV1";
constexpr std::size_t kMagicLen = 7;
constexpr double kMaxWeight = 0x1p40;

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}
void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}
void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}
    std::uint64_t u64() { return take(8); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)); }
    double f64() { return std::bit_cast<double>(u64()); }

private:
    std::uint64_t take(int n) {
        unsigned char b[8];
        is_.read(reinterpret_cast<char*>(b), n);
        if (is_.gcount() != n) throw LoadError("environment file truncated or corrupted");
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{b[i]} << (8 * i);
        return v;
    }
    std::istream& is_;
};

}  // namespace

Environment::Environment(BoxRegion region, WeightSpec spec, std::uint64_t seed)
    : region_(std::move(region)), spec_(spec), seed_(seed) {
    weights_.assign(static_cast<std::size_t>(region_.vertex_count()) * region_.dim(),
                    std::numeric_limits<double>::quiet_NaN());
}

Environment Environment::make(const BoxRegion& region, const WeightSpec& spec, std::uint64_t seed) {
    Environment env(region, spec, seed);
    const int d = region.dim();
    Point p(d);
    for (VertexId v = 0; v < region.vertex_count(); ++v) {
        for (int a = 0; a < d; ++a) p[a] = region.coord(v, a);
        for (int a = 0; a < d; ++a) {
            if (p[a] == region.upper()[a]) continue;
            const double u = uniform_open01(edge_key(seed, p, a));
            double w = quantize_weight(spec.quantile(u));
            if (w <= 0) w = 0x1p-64;
            env.weights_[env.slot(v, a)] = w;
        }
    }
    env.finalize();
    return env;
}

Environment Environment::from_canonical(const BoxRegion& region, const WeightSpec& spec, std::uint64_t seed,
                                        std::span<const double> weights) {
    if (static_cast<std::int64_t>(weights.size()) != region.edge_count())
        throw LoadError("weight count does not match box edge count");
    Environment env(region, spec, seed);
    const auto slots = region.canonical_edge_slots();
    for (std::size_t s = 0; s < slots.size(); ++s)
        if (slots[s] >= 0) env.weights_[s] = weights[static_cast<std::size_t>(slots[s])];
    env.finalize();
    return env;
}

void Environment::finalize() {
    std::vector<double> present;
    present.reserve(static_cast<std::size_t>(region_.edge_count()));
    for (double w : weights_)
        if (!std::isnan(w)) present.push_back(w);
    for (double w : present) {
        if (!(w > 0) || !(w < kMaxWeight))
            throw ModelViolation("edge weight " + std::to_string(w) + " outside (0, 2^40)");
        if (quantize_weight(w) != w) throw LoadError("edge weight not on the 2^-64 grid");
    }
    if (spec_.is_continuous()) {
        std::sort(present.begin(), present.end());
        const auto tie = std::adjacent_find(present.begin(), present.end());
        if (tie != present.end())
            throw ModelViolation("exact tie between edge weights (" + std::to_string(*tie) +
                                 ") under a continuous weight family; seed " + std::to_string(seed_));
    }
    times_.resize(weights_.size());
    for (std::size_t s = 0; s < weights_.size(); ++s)
        times_[s] = std::isnan(weights_[s]) ? Time::infinity() : Time::from_double(weights_[s]);
}

double Environment::edge_weight(std::span<const int> u, std::span<const int> v) const {
    if (!region_.contains(u) || !region_.contains(v))
        throw DomainError("edge " + to_string(u) + "-" + to_string(v) + " outside environment box");
    if (!adjacent(u, v)) throw DomainError("vertices " + to_string(u) + " and " + to_string(v) + " are not adjacent");
    int axis = 0;
    while (u[axis] == v[axis]) ++axis;
    const auto lower = u[axis] < v[axis] ? u : v;
    return weight(region_.index(lower), axis);
}

double Environment::min_incident_weight(std::span<const int> v) const {
    if (!region_.contains(v) || region_.on_boundary(v))
        throw DomainError("vertex " + to_string(v) + " is not interior; incident edge set incomplete");
    const VertexId id = region_.index(v);
    double m = std::numeric_limits<double>::infinity();
    for (int a = 0; a < region_.dim(); ++a) {
        m = std::min(m, weight(id, a));
        m = std::min(m, weight(region_.step(id, a, -1), a));
    }
    return m;
}

std::vector<double> Environment::canonical_weights() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(region_.edge_count()));
    for (double w : weights_)
        if (!std::isnan(w)) out.push_back(w);
    return out;
}

double Environment::ks_statistic() const {
    auto w = canonical_weights();
    std::sort(w.begin(), w.end());
    const double n = static_cast<double>(w.size());
    double dmax = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double f = spec_.cdf(w[i]);
        dmax = std::max({dmax, (i + 1) / n - f, f - i / n});
    }
    return dmax;
}

double Environment::mean_weight() const {
    double s = 0;
    std::size_t n = 0;
    for (double w : weights_)
        if (!std::isnan(w)) { s += w; ++n; }
    return n ? s / n : 0.0;
}

void save_environment(const Environment& env, const std::filesystem::path& path, bool cache_weights) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    save_environment(env, os, cache_weights);
    if (!os) throw ConfigError("write to " + path.string() + " failed");
}

void save_environment(const Environment& env, std::ostream& os, bool cache_weights) {
    os.write(kMagic, kMagicLen);
    const auto& r = env.region();
    put_u32(os, static_cast<std::uint32_t>(r.dim()));
    for (int c : r.lower()) put_u32(os, static_cast<std::uint32_t>(c));
    for (int c : r.upper()) put_u32(os, static_cast<std::uint32_t>(c));
    put_u32(os, static_cast<std::uint32_t>(env.spec().family()));
    put_f64(os, env.spec().param0());
    put_f64(os, env.spec().param1());
    put_u64(os, env.seed());
    os.put(cache_weights ? 1 : 0);
    if (cache_weights)
        for (double w : env.canonical_weights()) put_f64(os, w);
}

Environment load_environment(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw LoadError("cannot open " + path.string());
    char magic[kMagicLen];
    is.read(magic, kMagicLen);
    if (is.gcount() != static_cast<std::streamsize>(kMagicLen)) throw LoadError("environment file truncated or corrupted");
    if (std::memcmp(magic, kMagic, kMagicLen - 1) != 0) throw LoadError("not an environment file (bad magic)");
    if (magic[kMagicLen - 1] != kMagic[kMagicLen - 1])
        throw LoadError(std::string("environment format version mismatch: ") + magic[kMagicLen - 1]);
    Reader in(is);
    const std::uint32_t d = in.u32();
    if (d < 2 || d > 16) throw LoadError("corrupted header: dimension " + std::to_string(d));
    Point lo(d), hi(d);
    for (auto& c : lo) c = in.i32();
    for (auto& c : hi) c = in.i32();
    const std::uint32_t family = in.u32();
    const double p0 = in.f64(), p1 = in.f64();
    const std::uint64_t seed = in.u64();
    const std::uint8_t cached = in.u8();
    if (cached > 1) throw LoadError("corrupted header: cache flag");
    try {
        const BoxRegion region(lo, hi);
        const WeightSpec spec = WeightSpec::from_parts(family, p0, p1);
        if (!cached) return Environment::make(region, spec, seed);
        std::vector<double> w(static_cast<std::size_t>(region.edge_count()));
        for (auto& x : w) x = in.f64();
        if (is.peek() != std::char_traits<char>::eof()) throw LoadError("trailing bytes after weight array");
        return Environment::from_canonical(region, spec, seed, w);
    } catch (const ConfigError& e) {
        throw LoadError(std::string("corrupted header: ") + e.what());
    }
}

}  // namespace fpp
