// Wall-clock comparison of the serial reference kernels against the OpenMP ones.
//
//   fpp_bench [--radius R] [--sources K] [--replicas N] [--workers W]

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "fpp/competition.hpp"
#include "fpp/experiment.hpp"
#include "fpp/metric.hpp"

namespace {

template <typename Fn>
double seconds(Fn&& fn, int repeats = 3) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const std::string& name, double s, double baseline) {
    std::cout << std::left << std::setw(40) << name << std::right << std::setw(12) << std::fixed << std::setprecision(4) << s
              << " s" << std::setw(10) << std::setprecision(2) << baseline / s << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpp kernel benchmarks"};
    int radius = 150, sources = 4, replicas = 16, workers = 0;
    app.add_option("--radius", radius, "box radius")->capture_default_str();
    app.add_option("--sources", sources, "competing sources")->capture_default_str();
    app.add_option("--replicas", replicas, "replicas for the orchestrator run")->capture_default_str();
    app.add_option("--workers", workers, "parallel worker count (0: OpenMP default)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    using namespace fpp;
    const Exec par{workers};
    std::cout << "threads: " << par.threads() << ", box radius " << radius << ", " << sources << " sources\n";

    const auto box = BoxRegion::centered({0, 0}, radius);
    const auto env = Environment::make(box, WeightSpec::exponential(1), 7);
    std::vector<Point> src;
    for (int i = 0; i < sources; ++i) {
        const double a = 2 * std::numbers::pi * i / sources;
        src.push_back({static_cast<int>(std::lround(radius / 2.0 * std::cos(a))),
                       static_cast<int>(std::lround(radius / 2.0 * std::sin(a)))});
    }

    const double dijkstra = seconds([&] { (void)passage_map(env, Point{0, 0}); });
    row("passage_map (single source)", dijkstra, dijkstra);

    const double reference = seconds([&] { (void)fpp_voronoi_reference(env, src, box); });
    row("voronoi, serial multi-source reference", reference, reference);
    row("voronoi, per-source maps, 1 worker", seconds([&] { (void)fpp_voronoi(env, src, Exec{1}); }), reference);
    row("voronoi, per-source maps, parallel", seconds([&] { (void)fpp_voronoi(env, src, par); }), reference);

    auto cfg = make_config({{"box_radius", "30"}, {"replicas", std::to_string(replicas)}}, "duality");
    cfg.workers = 1;
    const double serial = seconds([&] { (void)run_experiment(cfg); }, 1);
    row("duality replicas, 1 worker", serial, serial);
    cfg.workers = workers;
    row("duality replicas, parallel", seconds([&] { (void)run_experiment(cfg); }, 1), serial);
    return 0;
}
