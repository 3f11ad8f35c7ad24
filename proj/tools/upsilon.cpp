#include "upsilon/benchmark.hpp"
#include "upsilon/machine.hpp"
#include "upsilon/program_io.hpp"
#include "upsilon/report.hpp"
#include "upsilon/stats.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace upsilon;

int main(int argc, char** argv) {
    CLI::App app{"Universal intelligence benchmark: simplicity-weighted agent evaluation"};
    app.set_version_flag("--version", UPSILON_VERSION);
    app.require_subcommand(1);

    std::optional<std::size_t> workers;
    app.add_option("--workers", workers, "Worker threads (results do not depend on it)");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Measure the configured agents; writes report.json, rows.csv, manifest.json");
    run->add_option("config", config_path, "Run configuration file")->required();

    std::string out_dir;
    std::uint64_t seed = 0;
    StudyOptions study_opts;
    auto* study = app.add_subcommand("example-study", "Copy-environment study of three scripted agents");
    study->add_option("--out", out_dir, "Output directory")->required();
    study->add_option("--seed", seed, "Master seed")->required();
    study->add_option("--cycles", study_opts.cycles, "Cycles per episode")->capture_default_str();
    study->add_option("--episodes", study_opts.episodes, "Episodes for stochastic agents")->capture_default_str();

    std::size_t max_len = 0;
    std::string fixtures_out;
    auto* enumerate = app.add_subcommand("enumerate", "List valid programs in shortlex order");
    enumerate->add_option("--max-len", max_len, "Maximum program length in bits")->required();
    enumerate->add_option("--fixtures", fixtures_out, "Also write them as a fixture file");

    std::size_t permutations = 3;
    auto* sensitivity = app.add_subcommand("sensitivity", "Re-run the measure under permuted opcode tables");
    sensitivity->add_option("--config", config_path, "Run configuration file")->required();
    sensitivity->add_option("--permutations", permutations, "Machines, identity included")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (run->parsed()) return run_benchmark(config_path, workers, std::cerr);
    if (sensitivity->parsed()) return run_sensitivity(config_path, permutations, workers, std::cout, std::cerr);

    if (study->parsed()) {
        try {
            const auto result = run_example_study(out_dir, seed, study_opts);
            for (const auto& p : result.phases)
                std::cout << p.agent << ": cycles 2-101 " << p.short_term << ", cycles 102-5001 " << p.medium_term
                          << ", cycles 5002-" << study_opts.cycles << ' ' << p.long_term << '\n';
        } catch (const std::invalid_argument& e) {
            std::cerr << "upsilon: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "upsilon: example study failed: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }

    if (enumerate->parsed()) {
        try {
            const MachineConfig machine;
            const auto programs = enumerate_programs(max_len, machine);
            CompensatedSum kraft;
            for (std::size_t i = 0; i < programs.size(); ++i) {
                std::cout << i << ' ' << format_fixture_line(programs[i].bits) << ' '
                          << (programs[i].instructions.empty() ? "(empty)" : programs[i].listing()) << '\n';
                kraft.add(prior_weight(programs[i]).value());
            }
            std::cerr << programs.size() << " programs, Kraft sum " << format_number(kraft.value()) << '\n';
            if (!fixtures_out.empty()) write_fixture_file(fixtures_out, programs);
        } catch (const std::invalid_argument& e) {
            std::cerr << "upsilon: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "upsilon: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }
    return 2;
}
