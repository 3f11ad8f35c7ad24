// Acceptance suite: one PASS/FAIL line per criterion. argv[1] is the CLI
// binary, argv[2] a scratch directory. Exit status is nonzero if any fails.

#include "upsilon/benchmark.hpp"
#include "upsilon/environments.hpp"
#include "upsilon/machine.hpp"
#include "upsilon/measure.hpp"
#include "upsilon/stats.hpp"
#include "upsilon/valuation.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <unordered_set>
#include <sys/wait.h>
#include <vector>

using namespace upsilon;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and sizes.
constexpr std::uint64_t kSeed = 1;
constexpr double kBandLow = 0.48;
constexpr double kBandHigh = 0.52;
constexpr std::size_t kStudyEpisodes = 10000;
constexpr std::size_t kStudyCycles = 6000;
constexpr double kStudySeconds = 60.0;
constexpr double kExactTol = 1e-12;         // "exact" closed forms, double rounding only
constexpr double kUniformDiscTol = 0.01;
constexpr std::size_t kUniformDiscEpisodes = 10000;
constexpr double kHarmonicTol = 1e-6;
constexpr std::size_t kSummableHorizon = 10000;
constexpr std::size_t kSummableEpisodes = 10;
constexpr std::size_t kSummableLength = 24;
const double kSummableSlack = std::ldexp(1.0, -20);
constexpr std::size_t kKraftLength = 20;
constexpr std::size_t kOrderingEpisodes = 100;
constexpr double kOrderingConfidence = 0.95;
constexpr std::size_t kCopyActions = 10;
constexpr std::size_t kSensitivityMachines = 3;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " - " << detail << std::endl;
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(10);
    s << x;
    return s.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream b;
    b << in.rdbuf();
    return b.str();
}

void criterion1(const fs::path& scratch) {
    StudyOptions opts;
    opts.cycles = kStudyCycles;
    opts.episodes = kStudyEpisodes;
    opts.gammas = {};
    const auto t0 = std::chrono::steady_clock::now();
    const auto study = run_example_study(scratch / "study", kSeed, opts);
    const double secs = seconds_since(t0);

    const auto& u = study.profile.at("uniform");
    const auto& p = study.profile.at("piecewise");
    bool ok = secs <= kStudySeconds;
    std::size_t bad_uniform = 0, bad_piecewise = 0;
    double worst = 0.0;
    for (std::size_t k = 2; k <= kStudyCycles; ++k) {
        const double x = u[k - 1];
        worst = std::max(worst, std::abs(x - 0.5));
        if (!(x >= kBandLow && x <= kBandHigh)) ++bad_uniform;
        if (k <= 101 && p[k - 1] != 0.0) ++bad_piecewise;
        if (k >= 102 && k <= 5001 && p[k - 1] != 1.0) ++bad_piecewise;
        if (k > 5001 && !(p[k - 1] >= kBandLow && p[k - 1] <= kBandHigh)) ++bad_piecewise;
    }
    ok = ok && bad_uniform == 0 && bad_piecewise == 0;
    std::ostringstream d;
    d << "per-cycle uniform outside [" << kBandLow << "," << kBandHigh << "]: " << bad_uniform
      << ", piecewise violations: " << bad_piecewise << ", max |uniform-0.5| = " << fmt(worst);
    for (const auto& ph : study.phases)
        if (ph.agent != "opt")
            d << "; " << ph.agent << " phases " << fmt(ph.short_term) << "/" << fmt(ph.medium_term) << "/"
              << fmt(ph.long_term);
    d << "; " << fmt(secs) << " s (limit " << kStudySeconds << ")";
    report(1, ok, d.str());
}

void criterion2() {
    const auto env = make_copy_env(SpaceConfig{});
    ValuationParams dp;
    dp.mode = ValueMode::Discounted;
    dp.gamma = 0.9;
    dp.horizon = 1000000;
    dp.trunc_epsilon = 1e-17;
    dp.episodes = 1;
    dp.seed = kSeed;
    const double v_opt = discounted_value(builtin_agent("opt", env.space), env, dp).mean;

    dp.episodes = kUniformDiscEpisodes;
    const double v_uni = discounted_value(builtin_agent("uniform", env.space), env, dp).mean;

    ValuationParams hp;
    hp.mode = ValueMode::Harmonic;
    hp.horizon = 100000000;
    hp.trunc_epsilon = 5e-7;
    hp.episodes = 1;
    hp.seed = kSeed;
    const double v_harm = harmonic_value(builtin_agent("opt", env.space), env, hp).mean;
    const double harm_target = 1.0 - 6.0 / (std::numbers::pi * std::numbers::pi);

    const bool ok = std::abs(v_opt - 0.9) <= kExactTol && std::abs(v_uni - 0.45) <= kUniformDiscTol &&
                    std::abs(v_harm - harm_target) <= kHarmonicTol;
    report(2, ok,
           "opt@0.9 = " + fmt(v_opt) + " (|d| " + fmt(std::abs(v_opt - 0.9)) + " <= " + fmt(kExactTol) +
               "), uniform@0.9 = " + fmt(v_uni) + " (target 0.45 +- " + fmt(kUniformDiscTol) +
               "), harmonic opt = " + fmt(v_harm) + " (target " + fmt(harm_target) + " +- " + fmt(kHarmonicTol) + ")");
}

void criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    const MachineConfig machine;
    const SpaceConfig space;
    const auto programs = enumerate_programs(kSummableLength, machine);
    const std::vector<std::string> agents = {"rand", "basic", "2back", "opt", "uniform", "piecewise"};
    const std::uint64_t D = space.reward_denominator;

    std::uint64_t rollouts = 0, violations = 0, value_violations = 0, estimates = 0;
    double max_value = 0.0;
    ValuationParams params;
    params.mode = ValueMode::Summable;
    params.horizon = kSummableHorizon;
    params.episodes = kSummableEpisodes;
    params.seed = kSeed;
    for (std::size_t i = 0; i < programs.size(); ++i) {
        const auto src = program_source("p" + std::to_string(i), programs[i], machine, space);
        for (const auto& name : agents) {
            const auto agent = builtin_agent(name, space);
            // Full-horizon integer accounting, no early stop.
            for (std::size_t ep = 0; ep < kSummableEpisodes; ++ep) {
                auto env = src.make(derive_seed(kSeed, {stream::environment, i, ep}));
                auto a = agent.make();
                Rng rng(derive_seed(kSeed, {stream::agent, i, ep}));
                std::uint64_t total = 0;
                rollout(*a, *env, rng, kSummableHorizon, ep, [&](std::size_t, const Percept& p, const Environment&) {
                    total += p.reward_numerator;
                    return true;
                });
                ++rollouts;
                if (total > D) ++violations;
            }
            auto pe = params;
            pe.environment_stream = i;
            const auto v = summable_value(agent, src, pe);
            ++estimates;
            max_value = std::max(max_value, v.mean);
            if (v.mean > 1.0 + kSummableSlack) ++value_violations;
            for (double x : v.episode_values)
                if (x > 1.0 + kSummableSlack) ++value_violations;
        }
    }
    const bool ok = violations == 0 && value_violations == 0;
    report(3, ok,
           std::to_string(programs.size()) + " programs x " + std::to_string(agents.size()) + " agents, " +
               std::to_string(rollouts) + " rollouts of " + std::to_string(kSummableHorizon) +
               " cycles: budget violations " + std::to_string(violations) + "; " + std::to_string(estimates) +
               " estimates, max value " + fmt(max_value) + ", above 1+2^-20: " + std::to_string(value_violations) +
               "; " + fmt(seconds_since(t0)) + " s");
}

void criterion4() {
    const MachineConfig machine;
    // key = (length << 32) | value
    std::unordered_set<std::uint64_t> valid;
    std::vector<std::pair<std::size_t, std::uint64_t>> list;
    for (std::size_t len = 1; len <= kKraftLength; ++len) {
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
            try {
                decode_program(BitString::from_uint(v, static_cast<unsigned>(len)), machine);
            } catch (const InvalidProgram&) {
                continue;
            }
            valid.insert((static_cast<std::uint64_t>(len) << 32) | v);
            list.emplace_back(len, v);
        }
    }
    std::size_t prefix_clashes = 0;
    for (const auto& [len, v] : list)
        for (std::size_t l = 1; l < len; ++l)
            if (valid.contains((static_cast<std::uint64_t>(l) << 32) | (v >> (len - l)))) ++prefix_clashes;
    CompensatedSum kraft;
    for (const auto& [len, v] : list) kraft.add(std::ldexp(1.0, -static_cast<int>(len)));
    const bool enum_match = enumerate_programs(kKraftLength, machine).size() == list.size();
    const bool ok = prefix_clashes == 0 && kraft.value() <= 1.0 && enum_match;
    report(4, ok,
           std::to_string(list.size()) + " valid strings of length <= " + std::to_string(kKraftLength) +
               ", prefix clashes " + std::to_string(prefix_clashes) + ", Kraft sum " + fmt(kraft.value()) +
               ", enumerator agrees: " + (enum_match ? "yes" : "no"));
}

void criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    EnsembleSpec spec;
    spec.max_program_length_bits = 24;
    spec.dedup_horizon = 8;
    spec.seed = kSeed;
    const SpaceConfig space;
    const auto ensemble = build_ensemble(spec, MachineConfig{}, space);
    ValuationParams params;
    params.mode = ValueMode::Summable;
    params.episodes = kOrderingEpisodes;
    params.confidence = kOrderingConfidence;
    params.seed = kSeed;
    const std::vector<AgentSpec> agents = {builtin_agent("rand", space), builtin_agent("basic", space),
                                           builtin_agent("2back", space)};
    const auto cmp = compare_agents(agents, ensemble, params);
    const auto& rand = cmp.results[0];
    const auto& basic = cmp.results[1];
    const auto& back2 = cmp.results[2];
    // pairs: (rand, basic), (rand, 2back), (basic, 2back); first - second.
    const auto& rb = cmp.pairs[0];
    const auto& b2 = cmp.pairs[2];
    const bool ok = back2.upsilon > basic.upsilon && basic.upsilon > rand.upsilon && rb.ci_high < 0.0 &&
                    b2.ci_high < 0.0;
    std::ostringstream d;
    d << ensemble.members.size() << " classes from " << ensemble.enumerated_count << " programs; Y(rand) "
      << fmt(rand.upsilon) << ", Y(basic) " << fmt(basic.upsilon) << ", Y(2back) " << fmt(back2.upsilon)
      << "; rand-basic " << fmt(rb.difference) << " CI [" << fmt(rb.ci_low) << "," << fmt(rb.ci_high)
      << "], basic-2back " << fmt(b2.difference) << " CI [" << fmt(b2.ci_low) << "," << fmt(b2.ci_high) << "]; "
      << fmt(seconds_since(t0)) << " s";
    report(5, ok, d.str());
}

void criterion6() {
    const MachineConfig machine;
    const auto fx = compile_fixture("copy", machine);
    const auto vm = fx.program_source(machine);
    std::size_t mismatches = 0;
    const std::uint64_t sequences = std::uint64_t{1} << kCopyActions;
    for (std::uint64_t s = 0; s < sequences; ++s) {
        auto a = vm.make(kSeed);
        auto b = fx.native.make(kSeed);
        bool same = a->step(std::nullopt) == b->step(std::nullopt);
        for (std::size_t k = 0; k < kCopyActions && same; ++k) {
            const Action act{static_cast<std::uint32_t>((s >> k) & 1u)};
            same = a->step(act) == b->step(act);
        }
        if (!same) ++mismatches;
    }
    report(6, mismatches == 0,
           std::to_string(sequences) + " action sequences of length " + std::to_string(kCopyActions) +
               ", percept mismatches: " + std::to_string(mismatches));
}

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void criterion7(const std::string& cli, const fs::path& scratch) {
    bool ok = true;
    std::string detail;
    std::vector<std::string> reports;
    for (int workers : {1, 4}) {
        const fs::path dir = scratch / ("repro_w" + std::to_string(workers));
        fs::create_directories(dir);
        std::ofstream(dir / "run.cfg") << "seed = " << kSeed << "\n"
                                       << "output_dir = " << (dir / "out").string() << "\n"
                                       << "workers = " << workers << "\n"
                                       << "ensemble.max_length_bits = 24\n"
                                       << "valuation.episodes = 100\n"
                                       << "agents = rand, basic, 2back\n";
        const int rc = run_cli(cli, "run " + (dir / "run.cfg").string());
        if (rc != 0) {
            ok = false;
            detail += "run with " + std::to_string(workers) + " workers exited " + std::to_string(rc) + "; ";
        }
        reports.push_back(slurp(dir / "out" / "report.json"));
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    ok = ok && same;
    report(7, ok,
           detail + "report.json from 1 and 4 workers " + (same ? "byte-identical" : "DIFFER") + " (" +
               std::to_string(reports[0].size()) + " bytes)");
}

void criterion8(const std::string& cli, const fs::path& scratch) {
    const fs::path dir = scratch / "sensitivity";
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "seed = " << kSeed << "\n"
                                   << "output_dir = " << (dir / "out").string() << "\n"
                                   << "ensemble.max_length_bits = 24\n"
                                   << "valuation.episodes = 100\n"
                                   << "agents = rand, basic, 2back\n";
    const int rc = run_cli(cli, "sensitivity --config " + (dir / "run.cfg").string() + " --permutations " +
                                    std::to_string(kSensitivityMachines) + " > " + (dir / "table.txt").string());
    bool ok = rc == 0;
    std::ostringstream d;
    d << "exit " << rc;
    try {
        const auto doc = nlohmann::json::parse(slurp(dir / "out" / "sensitivity.json"));
        const auto& machines = doc.at("machines");
        ok = ok && machines.size() == kSensitivityMachines;
        d << ", " << machines.size() << " machines";
        for (const auto& m : machines) {
            ok = ok && m.at("results").size() == 3 && m.at("ordering_preserved").is_boolean();
            d << "; m" << m.at("machine").get<int>() << ":";
            for (const auto& r : m.at("results"))
                d << ' ' << r.at("agent").get<std::string>() << '=' << fmt(r.at("upsilon").get<double>());
            d << " preserved=" << (m.at("ordering_preserved").get<bool>() ? "yes" : "no");
        }
    } catch (const std::exception& e) {
        ok = false;
        d << ", bad sensitivity.json: " << e.what();
    }
    report(8, ok, d.str() + " (report-only)");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <upsilon-cli> <scratch-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    const std::vector<std::function<void()>> checks = {
        [&] { criterion1(scratch); }, criterion2, criterion3, criterion4, criterion5, criterion6,
        [&] { criterion7(cli, scratch); }, [&] { criterion8(cli, scratch); }};
    for (std::size_t i = 0; i < checks.size(); ++i) {
        try {
            checks[i]();
        } catch (const std::exception& e) {
            report(static_cast<int>(i + 1), false, std::string("threw: ") + e.what());
        }
    }
    std::cout << "criterion 9: EXCLUDED - absolute upsilon values, the maximal-upsilon agent and human/chess "
                 "comparisons are out of scope"
              << std::endl;
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
