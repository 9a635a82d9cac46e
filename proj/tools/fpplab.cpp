// fpplab: run one FPP experiment and write its report directory.
//
// Exit codes: 0 success, 1 configuration error, 2 replica assertion failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fpp/errors.hpp"
#include "fpp/experiment.hpp"

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::optional<int> workers;
    std::optional<std::uint64_t> replay_seed;
    std::string out = "fpp-out";
    bool quiet = false;
};

std::map<std::string, std::string> gather(const Options& o) {
    std::map<std::string, std::string> kv;
    if (!o.config_file.empty()) {
        std::ifstream is(o.config_file);
        if (!is) throw fpp::ConfigError("cannot read config file " + o.config_file);
        std::ostringstream text;
        text << is.rdbuf();
        kv = fpp::parse_key_values(text.str());
    }
    // Command-line values override the file.
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw fpp::ConfigError("--set expects key=value, got '" + s + "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (o.seed) kv["seed"] = std::to_string(*o.seed);
    if (o.replicas) kv["replicas"] = std::to_string(*o.replicas);
    if (o.workers) kv["workers"] = std::to_string(*o.workers);
    if (o.replay_seed) kv["replay_seed"] = std::to_string(*o.replay_seed);
    return kv;
}

std::string summary_line(const nlohmann::json& agg, const std::string& field) {
    if (!agg.at("fields").contains(field)) return {};
    const auto& f = agg.at("fields").at(field);
    std::ostringstream os;
    if (f.at("type") == "proportion")
        os << field << ": " << f.at("proportion") << " [" << f.at("wilson95")[0] << ", " << f.at("wilson95")[1] << "]";
    else
        os << field << ": mean " << f.at("mean") << " stderr " << f.at("stderr");
    return os.str();
}

int run(const std::string& command, const Options& o) {
    const auto cfg = fpp::make_config(gather(o), command);
    const auto report = fpp::run_experiment(cfg);
    fpp::write_report(report, o.out);
    if (!o.quiet) {
        const auto& r = report.report;
        std::cout << r.at("kind").get<std::string>() << ": " << r.at("replicas").at("completed") << "/"
                  << r.at("replicas").at("configured") << " replicas, config " << r.at("config_hash").get<std::string>()
                  << ", " << r.at("execution").at("wall_seconds") << " s -> " << o.out << "\n";
        for (const char* field : {"boundary_coexist", "coexist", "witness", "count_ge_4", "merged", "exact_match", "deviation"})
            if (auto line = summary_line(report.aggregates(), field); !line.empty()) std::cout << "  " << line << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"First-passage percolation experiments"};
    app.require_subcommand(1);
    Options opts;
    std::string chosen;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"env", "generate environments and check weight statistics"},
        {"metric", "passage times: metric-oracle, passage-map, ends, merge"},
        {"shape", "time constant and limit-shape estimate"},
        {"busemann", "Busemann approximants and linear fits"},
        {"compete", "multi-source competition and coexistence"},
        {"duality", "coexistence from placed sources"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config_file, "key = value file")->check(CLI::ExistingFile);
        sub->add_option("--set", opts.sets, "override one parameter (key=value), repeatable");
        sub->add_option("--seed", opts.seed, "master seed");
        sub->add_option("--replicas", opts.replicas, "replica count");
        sub->add_option("--workers", opts.workers, "worker threads (0: OpenMP default)");
        sub->add_option("--replay-seed", opts.replay_seed, "run one replica with this seed");
        sub->add_option("--out", opts.out, "output directory")->capture_default_str();
        sub->add_flag("--quiet", opts.quiet, "no summary on stdout");
        sub->callback([&chosen, name = name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(chosen, opts);
    } catch (const fpp::AssertionFailure& e) {
        std::cerr << "assertion failure: " << e.what() << "\nreplay with --replay-seed " << e.seed << "\n";
        return 2;
    } catch (const fpp::ModelViolation& e) {
        std::cerr << "model violation: " << e.what() << "\n";
        return 2;
    } catch (const fpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fpp::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fpp::LoadError& e) {
        std::cerr << "load error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
