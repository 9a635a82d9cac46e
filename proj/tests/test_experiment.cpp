#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fpp/errors.hpp"
#include "fpp/experiment.hpp"
#include "fpp/parallel.hpp"

using namespace fpp;
using nlohmann::json;

namespace {

ExperimentConfig config(const std::string& command, std::map<std::string, std::string> kv) {
    return make_config(kv, command);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("key-value parsing") {
    const auto kv = parse_key_values("# header\nkind = shape\n  n=40  # trailing\n\nweights = uniform(0, 1)\n");
    CHECK(kv.size() == 3);
    CHECK(kv.at("kind") == "shape");
    CHECK(kv.at("n") == "40");
    CHECK(kv.at("weights") == "uniform(0, 1)");
    CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values(" = 3\n"), ConfigError);
}

TEST_CASE("weight spec parsing") {
    CHECK(parse_weight_spec("exponential(1)") == WeightSpec::exponential(1));
    CHECK(parse_weight_spec(" uniform( 0.5 , 2 ) ") == WeightSpec::uniform(0.5, 2));
    CHECK(parse_weight_spec("shifted-power(1,3)") == WeightSpec::shifted_power(1, 3));
    CHECK(parse_weight_spec("constant(2)") == WeightSpec::constant(2));
    CHECK_THROWS_AS(parse_weight_spec("exponential(-1)"), ConfigError);
    CHECK_THROWS_AS(parse_weight_spec("exponential(1,2)"), ConfigError);
    CHECK_THROWS_AS(parse_weight_spec("uniform(1)"), ConfigError);
    CHECK_THROWS_AS(parse_weight_spec("gamma(2)"), ConfigError);
    CHECK_THROWS_AS(parse_weight_spec("exponential"), ConfigError);
    CHECK_THROWS_AS(parse_weight_spec("exponential(abc)"), ConfigError);
}

TEST_CASE("config validation happens before any computation") {
    SUBCASE("defaults and lifted keys") {
        const auto c = config("shape", {{"seed", "9"}, {"replicas", "3"}, {"workers", "2"}, {"n", "40"}});
        CHECK(c.kind == "shape");
        CHECK(c.seed == 9);
        CHECK(c.replicas == 3);
        CHECK(c.workers == 2);
        CHECK(c.get_int("n") == 40);
        CHECK(c.get_int("directions") == 32);
        CHECK_FALSE(c.params.count("seed"));
    }
    SUBCASE("every command has a default kind") {
        for (const auto& k : experiment_kinds()) CHECK_NOTHROW(config(k.command, {{"kind", k.kind}}));
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(config("nope", {}), ConfigError);
        CHECK_THROWS_AS(config("shape", {{"kind", "ends"}}), ConfigError);
        CHECK_THROWS_AS(config("shape", {{"bogus", "1"}}), ConfigError);
        CHECK_THROWS_AS(config("shape", {{"n", "ten"}}), ConfigError);
        CHECK_THROWS_AS(config("shape", {{"angle_tol", "1"}}), ConfigError);
        CHECK_THROWS_AS(config("shape", {{"replicas", "-1"}}), ConfigError);
        CHECK_THROWS_AS(config("env", {{"weights", "exponential(0)"}}), ConfigError);
        CHECK_THROWS_AS(config("env", {{"d", "6"}, {"box_radius", "40"}}), ConfigError);
        CHECK_THROWS_AS(config("compete", {{"sources", "0,0;0,0"}}), ConfigError);
        CHECK_THROWS_AS(config("compete", {{"sources", "0,0;99,0"}}), ConfigError);
        CHECK_THROWS_AS(config("compete", {{"rates", "1"}}), ConfigError);
        CHECK_THROWS_AS(config("compete", {{"dynamics", "coupled"}, {"weights", "uniform(0,1)"}}), ConfigError);
        CHECK_THROWS_AS(config("metric", {{"kind", "ends"}, {"r", "100"}}), ConfigError);
        CHECK_THROWS_AS(config("busemann", {{"deltas", "0.1,-1"}}), ConfigError);
        CHECK_THROWS_AS(config("duality", {{"placement", "spiral"}}), ConfigError);
    }
}

TEST_CASE("config hash covers the experiment but not the worker count") {
    const auto a = config("shape", {{"workers", "1"}, {"n", "40"}});
    const auto b = config("shape", {{"workers", "4"}, {"n", "40"}});
    const auto c = config("shape", {{"workers", "1"}, {"n", "41"}});
    const auto d = config("shape", {{"workers", "1"}, {"n", "40"}, {"seed", "2"}});
    CHECK(a.hash().size() == 16);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    CHECK(a.hash() != d.hash());
    CHECK(a.canonical_text().find("workers") == std::string::npos);
}

TEST_CASE("zero replicas give an empty report with the full schema") {
    const auto r = run_experiment(config("compete", {{"replicas", "0"}, {"box_radius", "12"}, {"sources", "-3,0;3,0"}}));
    CHECK(r.records.empty());
    CHECK(r.report.at("schema_version") == kReportSchemaVersion);
    CHECK(r.report.at("replicas").at("configured") == 0);
    CHECK(r.report.at("replicas").at("completed") == 0);
    CHECK(r.aggregates().at("records") == 0);
    CHECK(r.aggregates().at("fields").empty());
    for (const char* key : {"kind", "config", "config_hash", "master_seed", "environment", "execution"})
        CHECK(r.report.contains(key));
}

TEST_CASE("aggregates do not depend on the worker count") {
    const std::vector<std::pair<std::string, std::map<std::string, std::string>>> runs = {
        {"env", {{"box_radius", "6"}}},
        {"metric", {{"kind", "metric-oracle"}}},
        {"metric", {{"kind", "passage-map"}, {"box_radius", "8"}}},
        {"metric", {{"kind", "ends"}, {"box_radius", "20"}, {"r", "4"}, {"R", "20"}}},
        {"metric", {{"kind", "merge"}, {"distance", "30"}, {"width", "5"}}},
        {"shape", {{"n", "12"}, {"directions", "16"}}},
        {"busemann", {{"box_radius", "24"}, {"probe_outer", "8"}, {"probe_stride", "2"}, {"M", "4"}}},
        {"compete", {{"box_radius", "12"}, {"sources", "-4,0;4,0"}, {"dynamics", "coupled"}}},
        {"compete", {{"box_radius", "12"}, {"sources", "-4,0;4,0;0,5"}, {"dynamics", "independent"}}},
        {"duality", {{"box_radius", "15"}, {"M", "5"}}},
    };
    for (const auto& [command, kv] : runs) {
        CAPTURE(command);
        auto serial = kv, parallel = kv;
        serial["workers"] = "1";
        parallel["workers"] = "4";
        serial["replicas"] = parallel["replicas"] = "6";
        const auto a = run_experiment(config(command, serial));
        const auto b = run_experiment(config(command, parallel));
        CHECK(a.aggregates().dump() == b.aggregates().dump());
        CHECK(a.report.at("replicas").at("completed") == 6);
        CHECK(a.records == b.records);
        CHECK(a.report.at("config_hash") == b.report.at("config_hash"));
    }
}

TEST_CASE("a replica replays from its recorded seed") {
    const auto cfg = config("compete", {{"replicas", "5"}, {"box_radius", "12"}, {"sources", "-4,0;4,0"}});
    const auto full = run_experiment(cfg);
    REQUIRE(full.records.size() == 5);
    auto replay = cfg;
    replay.replay_seed = full.records[3].at("seed").get<std::uint64_t>();
    const auto one = run_experiment(replay);
    REQUIRE(one.records.size() == 1);
    auto expected = full.records[3];
    auto got = one.records[0];
    expected.erase("replica");
    got.erase("replica");
    CHECK(expected == got);
}

TEST_CASE("the lowest failing replica is reported whatever the schedule") {
    for (int workers : {1, 4}) {
        try {
            parallel_for(16, Exec{workers}, [](std::int64_t i) {
                if (i % 5 == 3) throw AssertionFailure("bad", static_cast<std::uint64_t>(i));
            });
            FAIL("expected a failure");
        } catch (const AssertionFailure& e) {
            CHECK(e.seed == 3);
        }
    }
}

TEST_CASE("report files") {
    const auto r = run_experiment(config("shape", {{"replicas", "3"}, {"n", "10"}, {"directions", "8"}}));
    const auto dir = std::filesystem::temp_directory_path() / "fpp_test_experiment_report";
    std::filesystem::remove_all(dir);
    write_report(r, dir);
    const auto report = json::parse(read_file(dir / "report.json"));
    CHECK(report.at("schema_version") == kReportSchemaVersion);
    CHECK(json::parse(read_file(dir / "aggregates.json")) == r.aggregates());
    std::istringstream lines(read_file(dir / "replicas.jsonl"));
    int count = 0;
    for (std::string line; std::getline(lines, line); ++count) CHECK(json::parse(line).at("replica") == count);
    CHECK(count == 3);
    CHECK(read_file(dir / "shape.csv").rfind("angle,", 0) == 0);
    CHECK(read_file(dir / "hull.csv").rfind("index,", 0) == 0);
    CHECK(report.at("aggregates").at("shape").contains("symmetry_defect"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("constant weights run every kind that accepts them") {
    const auto r = run_experiment(config("shape", {{"replicas", "2"}, {"n", "20"}, {"weights", "constant(1)"}}));
    CHECK(r.aggregates().at("shape").at("symmetry_defect") == 0.0);
    CHECK(r.aggregates().at("shape").at("sides") == 4);
}
