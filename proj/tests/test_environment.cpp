#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"

using namespace fpp;

namespace {
BoxRegion square(int lo, int hi) { return BoxRegion({lo, lo}, {hi, hi}); }

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("fpp_test_" + name);
}
}  // namespace

TEST_CASE("box counts match enumeration") {
    for (const auto& box : {BoxRegion({0, 0}, {3, 5}), BoxRegion({-2, 1, 0}, {1, 2, 4}), BoxRegion({0, 0}, {0, 4})}) {
        std::int64_t edges = 0;
        for (VertexId v = 0; v < box.vertex_count(); ++v)
            for (int a = 0; a < box.dim(); ++a)
                if (box.step(v, a, 1) != kNoVertex) {
                    const auto p = box.point(v), q = box.point(box.step(v, a, 1));
                    CHECK(l1_norm(p - q) == 1);
                    ++edges;
                }
        CHECK(edges == box.edge_count());
        for (VertexId v = 0; v < box.vertex_count(); ++v) CHECK(box.index(box.point(v)) == v);
    }
    CHECK_THROWS_AS(BoxRegion({0, 0}, {-1, 3}), ConfigError);
    CHECK_THROWS_AS(BoxRegion({0}, {3}), ConfigError);
}

TEST_CASE("make_environment is deterministic") {
    const auto spec = WeightSpec::exponential(1.0);
    const auto a = Environment::make(square(0, 2), spec, 7);
    const auto b = Environment::make(square(0, 2), spec, 7);
    CHECK(a.canonical_weights() == b.canonical_weights());
    CHECK(a.canonical_weights() != Environment::make(square(0, 2), spec, 8).canonical_weights());
}

TEST_CASE("weights depend only on the edge, not on the box") {
    const auto spec = WeightSpec::uniform(0.5, 1.5);
    const auto small = Environment::make(square(0, 3), spec, 99);
    const auto big = Environment::make(square(-4, 6), spec, 99);
    for (VertexId v = 0; v < small.region().vertex_count(); ++v) {
        const auto p = small.region().point(v);
        for (int a = 0; a < 2; ++a) {
            auto q = p;
            ++q[a];
            if (!small.region().contains(q)) continue;
            CHECK(small.edge_weight(p, q) == big.edge_weight(p, q));
        }
    }
}

TEST_CASE("uniform(0,1) weights lie in the open interval") {
    const auto env = Environment::make(square(0, 20), WeightSpec::uniform(0, 1), 12345);
    for (double w : env.canonical_weights()) {
        CHECK(w > 0);
        CHECK(w < 1);
    }
}

TEST_CASE("exponential mean within 5 sigma") {
    const auto env = Environment::make(square(0, 10), WeightSpec::exponential(1.0), 2024);
    const double n = static_cast<double>(env.region().edge_count());
    CHECK(n == 220);
    CHECK(std::fabs(env.mean_weight() - 1.0) < 5.0 / std::sqrt(n));
}

TEST_CASE("Kolmogorov-Smirnov statistic per family") {
    const auto box = square(0, 60);
    for (const auto& spec : {WeightSpec::exponential(2.0), WeightSpec::uniform(0.2, 3.0),
                             WeightSpec::shifted_power(0.1, 1.5)}) {
        const auto env = Environment::make(box, spec, 4242);
        const double n = static_cast<double>(box.edge_count());
        // 1% critical value of the one-sample KS test.
        CHECK_MESSAGE(env.ks_statistic() < 1.628 / std::sqrt(n), spec.describe());
    }
}

TEST_CASE("edge_weight is symmetric and validates its input") {
    const auto env = Environment::make(square(0, 4), WeightSpec::exponential(1.0), 3);
    const Point u{1, 2}, v{2, 2};
    CHECK(env.edge_weight(u, v) == env.edge_weight(v, u));
    CHECK(env.edge_weight(u, v) == env.edge_weight(u, v));
    CHECK_THROWS_AS(env.edge_weight(Point{0, 0}, Point{1, 1}), DomainError);
    CHECK_THROWS_AS(env.edge_weight(Point{4, 4}, Point{5, 4}), DomainError);

    const auto flat = Environment::make(square(0, 4), WeightSpec::constant(1.0), 3);
    for (double w : flat.canonical_weights()) CHECK(w == 1.0);
}

TEST_CASE("min_incident_weight") {
    const auto flat = Environment::make(square(0, 4), WeightSpec::constant(1.0), 1);
    CHECK(flat.min_incident_weight(Point{2, 2}) == 1.0);
    CHECK_THROWS_AS(flat.min_incident_weight(Point{0, 2}), DomainError);

    const auto env = Environment::make(square(0, 4), WeightSpec::exponential(1.0), 5);
    const Point v{2, 3};
    const double y = env.min_incident_weight(v);
    for (const Point& n : {Point{1, 3}, Point{3, 3}, Point{2, 2}, Point{2, 4}}) CHECK(y <= env.edge_weight(v, n));
}

TEST_CASE("min of four rate-1 exponentials has mean 1/4") {
    const auto env = Environment::make(square(0, 200), WeightSpec::exponential(1.0), 77);
    double sum = 0;
    int count = 0;
    for (int x = 1; x < 200; ++x)
        for (int y = 1; y < 200; ++y) {
            sum += env.min_incident_weight(Point{x, y});
            ++count;
        }
    // sd of Exp(4) is 1/4; neighbouring vertices share edges, allow ~5 corrected standard errors.
    CHECK(std::fabs(sum / count - 0.25) < 5 * 0.25 * std::sqrt(2.0 / count));
}

TEST_CASE("weight family validation and moment flags") {
    CHECK_THROWS_AS(WeightSpec::exponential(0.0), ConfigError);
    CHECK_THROWS_AS(WeightSpec::exponential(-1.0), ConfigError);
    CHECK_THROWS_AS(WeightSpec::uniform(1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(WeightSpec::uniform(-0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(WeightSpec::shifted_power(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(WeightSpec::constant(0.0), ConfigError);

    const auto e = WeightSpec::exponential(3.0);
    CHECK(e.min_moment_finite(2));
    CHECK(e.exponential_moment_finite());
    CHECK(e.is_continuous());
    const auto heavy = WeightSpec::shifted_power(0.0, 0.4);
    CHECK_FALSE(heavy.min_moment_finite(3));
    CHECK_FALSE(heavy.exponential_moment_finite());
    CHECK(WeightSpec::shifted_power(0.0, 0.6).min_moment_finite(2));
    CHECK_FALSE(WeightSpec::constant(2.0).is_continuous());
}

TEST_CASE("exact weight ties abort under a continuous family") {
    const BoxRegion box({0, 0}, {1, 1});
    const std::vector<double> tied{0.25, 0.5, 0.5, 0.75};
    CHECK_THROWS_AS(Environment::from_canonical(box, WeightSpec::uniform(0, 1), 1, tied), ModelViolation);
    CHECK_NOTHROW(Environment::from_canonical(box, WeightSpec::constant(0.5), 1, std::vector<double>(4, 0.5)));
}

TEST_CASE("save and load round trip") {
    const auto env = Environment::make(BoxRegion({-3, 0}, {4, 6}), WeightSpec::shifted_power(0.2, 2.5), 0xfeedULL);
    const auto path = temp_file("roundtrip.bin");
    save_environment(env, path);
    const auto back = load_environment(path);
    CHECK(back.region() == env.region());
    CHECK(back.spec() == env.spec());
    CHECK(back.seed() == env.seed());
    const auto w1 = env.canonical_weights(), w2 = back.canonical_weights();
    REQUIRE(w1.size() == w2.size());
    CHECK(std::memcmp(w1.data(), w2.data(), w1.size() * sizeof(double)) == 0);

    SUBCASE("header-only file regenerates identical weights") {
        const auto hdr = temp_file("header.bin");
        save_environment(env, hdr, false);
        CHECK(load_environment(hdr).canonical_weights() == w1);
        std::filesystem::remove(hdr);
    }
    SUBCASE("truncated file") {
        const auto size = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, size - 5);
        CHECK_THROWS_AS(load_environment(path), LoadError);
    }
    SUBCASE("version mismatch") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(6);
        f.put('2');
        f.close();
        CHECK_THROWS_WITH_AS(load_environment(path), doctest::Contains("version"), LoadError);
    }
    SUBCASE("corrupted header") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(7);
        f.put(static_cast<char>(99));
        f.close();
        CHECK_THROWS_AS(load_environment(path), LoadError);
    }
    std::filesystem::remove(path);
}
