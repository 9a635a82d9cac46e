#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fpp/errors.hpp"
#include "fpp/stats.hpp"

using namespace fpp;

namespace {
// Endpoints of the Wilson interval as roots of (p - phat)^2 = z^2 p (1 - p) / n.
std::pair<double, double> wilson_roots(double phat, double n, double z) {
    const double a = 1 + z * z / n, b = -(2 * phat + z * z / n), c = phat * phat;
    const double disc = std::sqrt(b * b - 4 * a * c);
    return {(-b - disc) / (2 * a), (-b + disc) / (2 * a)};
}
}  // namespace

TEST_CASE("Wilson interval") {
    const auto all = wilson_interval(10, 10);
    CHECK(all.hi == doctest::Approx(1.0));
    CHECK(all.lo == doctest::Approx(0.7225).epsilon(1e-3));
    CHECK(all.lo == doctest::Approx(wilson_roots(1.0, 10, kZ95).first).epsilon(1e-12));
    for (auto [s, n] : {std::pair{0, 7}, {3, 11}, {250, 500}, {1, 1000}}) {
        const auto ci = wilson_interval(s, n);
        const auto [lo, hi] = wilson_roots(static_cast<double>(s) / n, n, kZ95);
        CHECK(ci.lo == doctest::Approx(lo).epsilon(1e-12));
        CHECK(ci.hi == doctest::Approx(hi).epsilon(1e-12));
    }
    CHECK(wilson_interval(0, 0).lo == 0);
    CHECK(wilson_interval(0, 0).hi == 1);
    CHECK_THROWS_AS(wilson_interval(3, 2), DomainError);
}

TEST_CASE("mean summary") {
    MeanSummary one;
    one.add(4.5);
    CHECK(one.mean == 4.5);
    CHECK_FALSE(one.stderr_of_mean().has_value());

    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(3, 2);
    std::vector<double> xs(1000);
    for (auto& x : xs) x = nd(rng);
    MeanSummary all;
    for (double x : xs) all.add(x);
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    CHECK(all.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(all.variance() == doctest::Approx(ss / 999).epsilon(1e-12));

    for (int t = 0; t < 50; ++t) {
        const std::size_t cut = rng() % xs.size();
        MeanSummary a, b;
        for (std::size_t i = 0; i < xs.size(); ++i) (i < cut ? a : b).add(xs[i]);
        CHECK(merge(a, b) == merge(b, a));
        CHECK(merge(a, b).mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(merge(a, b).variance() == doctest::Approx(ss / 999).epsilon(1e-10));
    }
    CHECK(merge(MeanSummary{}, one) == one);
}

TEST_CASE("aggregate records") {
    SUBCASE("empty") {
        const auto j = aggregate({});
        CHECK(j["records"] == 0);
        CHECK(j["fields"].empty());
    }
    SUBCASE("all-true proportion") {
        std::vector<nlohmann::json> recs(10, {{"seed", 1}, {"ok", true}});
        const auto j = aggregate(recs);
        CHECK(j["fields"]["ok"]["proportion"] == 1.0);
        CHECK(j["fields"]["ok"]["wilson95"][0].get<double>() == doctest::Approx(0.7225).epsilon(1e-3));
        CHECK_FALSE(j["fields"].contains("seed"));
    }
    SUBCASE("single record") {
        const nlohmann::json r{{"t", 2.5}};
        const auto j = aggregate(std::vector<nlohmann::json>{r});
        CHECK(j["fields"]["t"]["mean"] == 2.5);
        CHECK(j["fields"]["t"]["stderr"].is_null());
    }
    SUBCASE("nulls are counted as missing") {
        std::vector<nlohmann::json> recs{{{"x", 1.0}}, {{"x", nullptr}}, {{"x", 3.0}}};
        const auto j = aggregate(recs);
        CHECK(j["fields"]["x"]["mean"] == 2.0);
        CHECK(j["fields"]["x"]["missing"] == 1);
    }
    SUBCASE("mixed schemas are rejected") {
        std::vector<nlohmann::json> extra{{{"x", 1.0}}, {{"x", 2.0}, {"y", true}}};
        CHECK_THROWS_AS(aggregate(extra), DomainError);
        std::vector<nlohmann::json> missing{{{"x", 1.0}, {"y", true}}, {{"x", 2.0}}};
        CHECK_THROWS_AS(aggregate(missing), DomainError);
        std::vector<nlohmann::json> retyped{{{"x", 1.0}}, {{"x", true}}};
        CHECK_THROWS_AS(aggregate(retyped), DomainError);
    }
    SUBCASE("merge is commutative on random splits") {
        std::mt19937_64 rng(3);
        std::vector<nlohmann::json> recs;
        for (int i = 0; i < 200; ++i)
            recs.push_back({{"seed", i}, {"hit", rng() % 3 == 0}, {"v", std::ldexp(double(rng() % 1000), -7)}});
        const auto whole = aggregate(recs);
        for (int t = 0; t < 20; ++t) {
            Aggregator a, b;
            for (const auto& r : recs) (rng() % 2 ? a : b).add(r);
            CHECK(merge(a, b) == merge(b, a));
            CHECK(merge(a, b).to_json().dump() == merge(b, a).to_json().dump());
            const auto m = merge(a, b).to_json();
            CHECK(m["fields"]["hit"]["successes"] == whole["fields"]["hit"]["successes"]);
            CHECK(m["fields"]["v"]["mean"].get<double>() ==
                  doctest::Approx(whole["fields"]["v"]["mean"].get<double>()).epsilon(1e-12));
        }
    }
}
