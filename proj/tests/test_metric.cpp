#include <random>
#include <sstream>

#include "doctest.h"
#include "fpp/errors.hpp"
#include "fpp/metric.hpp"
#include "fpp/random.hpp"

using namespace fpp;

namespace {

std::vector<BoxRegion> oracle_boxes() {
    // Every d=2 box shape with at most 16 vertices and at least 2 vertices.
    std::vector<BoxRegion> boxes;
    for (int w = 1; w <= 16; ++w)
        for (int h = 1; w * h <= 16; ++h)
            if (w * h >= 2) boxes.emplace_back(Point{0, 0}, Point{w - 1, h - 1});
    return boxes;
}

}  // namespace

TEST_CASE("constant weights give c times the L1 distance") {
    const auto env = Environment::make(BoxRegion({-3, -3}, {5, 5}), WeightSpec::constant(1.0), 0);
    const auto pm = passage_map(env, Point{0, 0});
    CHECK(passage_time(pm, Point{2, 2}) == Time::from_double(4.0));
    CHECK(passage_time(pm, Point{0, 0}) == Time::zero());
    CHECK(pm.tie_count() > 0);
    CHECK_FALSE(geodesic(pm, Point{2, 2}).unique);

    const auto env3 = Environment::make(BoxRegion({0, 0}, {3, 3}), WeightSpec::constant(2.5), 0);
    const auto bf = brute_force_passage_time(env3, Point{0, 1}, Point{3, 3});
    CHECK(bf.time == Time::from_double(2.5 * 5));
}

TEST_CASE("4x4 oracle box: every target matches exhaustive enumeration") {
    const auto env = Environment::make(BoxRegion({0, 0}, {3, 3}), WeightSpec::uniform(0, 1), 31337);
    const Point src{1, 0};
    const auto pm = passage_map(env, src);
    CHECK(pm.tie_count() == 0);
    for (VertexId v = 0; v < 16; ++v) {
        const auto target = env.region().point(v);
        const auto bf = brute_force_passage_time(env, src, target);
        CHECK(bf.time == pm.time(v));
        CHECK(std::fabs(bf.time.to_double() - pm.time(v).to_double()) < 1e-12);
        const auto path = geodesic(pm, target);
        CHECK(path.vertices == bf.path.vertices);
        CHECK(bf.minimizers == 1);
    }
}

TEST_CASE("2x2 box: oracle value equals engine value") {
    const auto env = Environment::make(BoxRegion({0, 0}, {1, 1}), WeightSpec::uniform(0, 1), 17);
    const auto bf = brute_force_passage_time(env, Point{0, 0}, Point{1, 1});
    CHECK(bf.paths_enumerated == 2);
    CHECK(bf.time == passage_time(passage_map(env, Point{0, 0}), Point{1, 1}));
}

TEST_CASE("brute force trivial cases and refusal") {
    const auto env = Environment::make(BoxRegion({0, 0}, {3, 4}), WeightSpec::exponential(1.0), 5);
    const auto same = brute_force_passage_time(env, Point{2, 2}, Point{2, 2});
    CHECK(same.time == Time::zero());
    CHECK(same.path.vertices.size() == 1);
    const auto big = Environment::make(BoxRegion({0, 0}, {4, 4}), WeightSpec::exponential(1.0), 5);
    CHECK_THROWS_WITH_AS(brute_force_passage_time(big, Point{0, 0}, Point{1, 1}), doctest::Contains("20"), DomainError);
}

TEST_CASE("oracle equivalence over 100 seeded environments") {
    const auto boxes = oracle_boxes();
    std::mt19937_64 pick(8);
    for (int rep = 0; rep < 100; ++rep) {
        const auto& box = boxes[rep % boxes.size()];
        const auto env = Environment::make(box, WeightSpec::exponential(1.0), derive_seed(1000, rep));
        const auto src = box.point(static_cast<VertexId>(pick() % box.vertex_count()));
        const auto pm = passage_map(env, src);
        REQUIRE(pm.tie_count() == 0);
        for (VertexId v = 0; v < box.vertex_count(); ++v) {
            const auto bf = brute_force_passage_time(env, src, box.point(v));
            REQUIRE(bf.time == pm.time(v));
            REQUIRE(bf.path.vertices == geodesic(pm, v).vertices);
        }
    }
}

TEST_CASE("passage map invariants") {
    const auto env = Environment::make(BoxRegion({0, 0}, {30, 30}), WeightSpec::exponential(1.0), 404);
    const Point src{12, 7};
    const auto pm = passage_map(env, src);
    const auto& box = env.region();
    CHECK(pm.tie_count() == 0);
    for (VertexId v = 0; v < box.vertex_count(); ++v) {
        if (v == pm.source_id()) {
            CHECK(pm.time(v) == Time::zero());
            continue;
        }
        CHECK(pm.time(v) > Time::zero());
        CHECK(pm.time(v) == pm.time(pm.pred(v)) + Time::from_double(pm.in_weight(v)));
        for (int a = 0; a < 2; ++a) {
            const VertexId u = box.step(v, a, 1);
            if (u == kNoVertex) continue;
            const Time w = env.time(v, a);
            CHECK(pm.time(v) <= pm.time(u) + w);
            CHECK(pm.time(u) <= pm.time(v) + w);
        }
    }
}

TEST_CASE("passage_time symmetry and monotonicity in the box") {
    const auto env = Environment::make(BoxRegion({-20, -20}, {20, 20}), WeightSpec::uniform(0.1, 2.0), 9);
    const Point x{-3, 4}, y{6, -2};
    CHECK(passage_time(passage_map(env, x), y) == passage_time(passage_map(env, y), x));

    Time previous = Time::infinity();
    for (int r = 6; r <= 20; r += 2) {
        const auto region = BoxRegion::centered({0, 0}, r);
        const Time t = passage_time(passage_map(env, x, region), y);
        CHECK(t <= previous);
        previous = t;
    }
    CHECK_THROWS_AS(passage_map(env, Point{30, 0}), DomainError);
    CHECK_THROWS_AS(passage_map(env, x, BoxRegion::centered({0, 0}, 25)), DomainError);
    CHECK_THROWS_AS(passage_time(passage_map(env, x), Point{0, 21}), DomainError);
}

TEST_CASE("nested boxes: geodesics stabilize once they fit inside") {
    const int outer = 40;
    const auto env = Environment::make(BoxRegion::centered({0, 0}, outer), WeightSpec::exponential(1.0), 19);
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> coord(-8, 8);
    double bias_small = 0;
    int pairs = 0;
    for (int t = 0; t < 40; ++t, ++pairs) {
        const Point x{coord(rng), coord(rng)}, y{coord(rng), coord(rng)};
        const auto bulk = geodesic(passage_map(env, x), y);
        int extent = 0;
        for (const auto& v : bulk.vertices) extent = std::max(extent, sup_norm(v));
        for (int r = 8; r < outer; r += 4) {
            const auto pm = passage_map(env, x, BoxRegion::centered({0, 0}, r));
            const auto local = geodesic(pm, y);
            CHECK(local.weight >= bulk.weight);
            // Uniqueness: the bulk geodesic is optimal in any box containing it.
            if (r >= extent) CHECK(local == bulk);
            if (r == 8) bias_small += (local.weight - bulk.weight).to_double() / bulk.weight.to_double();
        }
    }
    MESSAGE("mean relative boundary bias at radius 8: " << bias_small / pairs);
    CHECK(bias_small >= 0);
}

TEST_CASE("geodesics") {
    const auto env = Environment::make(BoxRegion({0, 0}, {40, 40}), WeightSpec::exponential(1.0), 11);
    const Point src{20, 20};
    const auto pm = passage_map(env, src);

    const auto trivial = geodesic(pm, src);
    CHECK(trivial.vertices.size() == 1);
    CHECK(trivial.weight == Time::zero());

    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
        const VertexId v = static_cast<VertexId>(rng() % env.region().vertex_count());
        const auto path = geodesic(pm, v);
        CHECK(path.unique);
        CHECK(path.self_avoiding());
        CHECK(path.weight == pm.time(v));
        CHECK(path_weight(env, path.vertices) == path.weight);
        // Every prefix of a geodesic is the geodesic to its endpoint.
        for (std::size_t k = 0; k < path.vertices.size(); k += 3) {
            const auto sub = geodesic(pm, path.vertices[k]);
            CHECK(std::equal(sub.vertices.begin(), sub.vertices.end(), path.vertices.begin()));
        }
    }
}

TEST_CASE("metric axioms on sampled triples") {
    std::mt19937 rng(21);
    for (int e = 0; e < 5; ++e) {
        const auto env = Environment::make(BoxRegion({0, 0}, {15, 15}), WeightSpec::exponential(1.0), derive_seed(5, e));
        std::vector<PassageMap> maps;
        for (VertexId v = 0; v < env.region().vertex_count(); ++v) maps.push_back(passage_map(env, env.region().point(v)));
        for (int t = 0; t < 200; ++t) {
            const VertexId x = rng() % 256, y = rng() % 256, z = rng() % 256;
            CHECK(maps[x].time(y) == maps[y].time(x));
            CHECK(maps[x].time(y) <= maps[x].time(z) + maps[z].time(y));
        }
    }
}

TEST_CASE("geodesic tree") {
    const auto env = Environment::make(BoxRegion({0, 0}, {3, 3}), WeightSpec::uniform(0, 1), 77);
    const Point root{2, 1};
    const auto pm = passage_map(env, root);
    const auto tree = geodesic_tree(pm);
    CHECK(tree.vertex_count() == 16);
    CHECK(tree.edge_count() == 15);
    CHECK(tree.bfs_order().size() == 16);
    for (VertexId v = 0; v < 16; ++v) {
        const auto ids = tree.path_from_root(v);
        std::vector<Point> pts;
        for (VertexId id : ids) pts.push_back(env.region().point(id));
        CHECK(path_weight(env, pts) == pm.time(v));
        CHECK(pts == brute_force_passage_time(env, root, env.region().point(v)).path.vertices);
    }
}

TEST_CASE("passage map CSV export") {
    const auto env = Environment::make(BoxRegion({0, 0}, {2, 1}), WeightSpec::constant(1.0), 0);
    const auto pm = passage_map(env, Point{0, 0});
    std::ostringstream os;
    write_passage_map_csv(pm, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x0,x1,T,pred_x0,pred_x1");
    std::getline(is, line);
    CHECK(line == "0,0,0,,");
    std::getline(is, line);
    CHECK(line == "0,1,1,0,0");
    int rows = 2;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 6);
}
