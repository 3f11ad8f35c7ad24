#include "doctest.h"
#include "json.hpp"

#include "upsilon/run_config.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace upsilon;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("upsilon_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string err;
};

Run run_cli(const fs::path& dir, const std::string& config, const std::string& extra = "") {
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << "output_dir = " << (dir / "out").string() << "\n" << config;
    const std::string cmd = std::string(UPSILON_CLI) + " " + extra + " run " + cfg.string() + " 2> " +
                            (dir / "stderr.txt").string() + " > /dev/null";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "stderr.txt")};
}

json report(const fs::path& dir) { return json::parse(slurp(dir / "out" / "report.json")); }

const json& agent_entry(const json& r, const std::string& name) {
    for (const auto& a : r.at("agents"))
        if (a.at("name") == name) return a;
    throw std::runtime_error("no agent " + name);
}

std::string fake(const std::string& args) { return std::string(FAKE_AGENT) + " " + args; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    const auto cfg = parse_run_config("seed = 9  # trailing comment\nvaluation.episodes = 7\nagents = rand,  2back\n");
    CHECK(cfg.seed == 9);
    CHECK(cfg.valuation.episodes == 7);
    CHECK(cfg.agents == std::vector<std::string>{"rand", "2back"});
    CHECK(cfg.ensemble.max_program_length_bits == 24);
    CHECK(cfg.ensemble.dedup_horizon == std::optional<std::size_t>{8});
    CHECK(cfg.entries.size() == 3);

    CHECK_THROWS_AS(parse_run_config("valuation.episodes = 7\n"), ConfigError);                 // no seed
    CHECK_THROWS_AS(parse_run_config("seed = 1\nseed = 2\n"), ConfigError);                     // repeated
    CHECK_THROWS_AS(parse_run_config("seed = 1\nbogus = 2\n"), ConfigError);                    // unknown key
    CHECK_THROWS_AS(parse_run_config("seed = x\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = 1\nvaluation.mode = fancy\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = 1\nvaluation.gamma = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = 1\nensemble.max_length_bits = 99\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = 1\nagents = rand, wizard\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = 1\nensemble.source = native\n"), ConfigError);     // no environments
    CHECK_THROWS_AS(parse_run_config("seed = 1\nagent.ext.command = x\n"), ConfigError);        // not listed
    CHECK_THROWS_AS(parse_run_config("seed = 1\nmachine.opcodes = INC,INC\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = 1\nno equals sign\n"), ConfigError);
    CHECK(parse_run_config("seed = 1\nensemble.dedup_horizon = 0\n").ensemble.dedup_horizon == std::nullopt);
}

TEST_CASE("invalid configs exit with status 2") {
    const auto dir = scratch("invalid");
    auto r = run_cli(dir, "seed = 1\nagents = rand, wizard\n");
    CHECK(r.code == 2);
    CHECK(r.err.find("wizard") != std::string::npos);
    CHECK(run_cli(dir, "agents = rand\n").code == 2);
    // copy is not summable
    CHECK(run_cli(dir, "seed = 1\nspaces.observations = 1\nensemble.source = native\nensemble.environments = copy\n")
              .code == 2);
    // copy uses a single observation symbol
    CHECK(run_cli(dir, "seed = 1\nvaluation.mode = discounted\nensemble.source = native\n"
                       "ensemble.environments = copy\n")
              .code == 2);
    CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("constant environment scores one") {
    const auto dir = scratch("constant");
    const auto r = run_cli(dir, "seed = 3\nensemble.source = native\nensemble.environments = constant:255\n"
                                "valuation.episodes = 5\nvaluation.horizon = 50\n");
    REQUIRE(r.code == 0);
    const auto rep = report(dir);
    CHECK(rep.at("agents").size() == 3);
    for (const auto& a : rep.at("agents")) {
        CHECK(a.at("upsilon").get<double>() == 1.0);
        CHECK(a.at("ci_half_width").get<double>() == 0.0);
    }
    for (const auto& c : rep.at("comparisons")) CHECK_FALSE(c.at("significant").get<bool>());
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("runs are reproducible and the CSV matches the JSON") {
    const auto dir = scratch("repro");
    const std::string cfg = "seed = 12\nensemble.max_length_bits = 18\nvaluation.episodes = 6\nvaluation.horizon = 100\n";
    REQUIRE(run_cli(dir, cfg, "--workers 1").code == 0);
    const auto first = slurp(dir / "out" / "report.json");
    const auto first_csv = slurp(dir / "out" / "rows.csv");
    REQUIRE(run_cli(dir, cfg, "--workers 3").code == 0);
    CHECK(slurp(dir / "out" / "report.json") == first);
    CHECK(slurp(dir / "out" / "rows.csv") == first_csv);

    const auto rep = json::parse(first);
    std::map<std::pair<std::uint64_t, std::string>, std::pair<double, double>> from_json;
    for (const auto& env : rep.at("environments"))
        for (const auto& v : env.at("values"))
            from_json[{env.at("program_id").get<std::uint64_t>(), v.at("agent").get<std::string>()}] = {
                env.at("weight").get<double>(), v.at("mean").get<double>()};

    std::istringstream csv(first_csv);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "program_id,length_bits,weight,agent,value_mean,value_ci,episodes");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 7);
        const auto it = from_json.find({std::stoull(f[0]), f[3]});
        REQUIRE(it != from_json.end());
        CHECK(std::stod(f[2]) == it->second.first);
        CHECK(std::stod(f[4]) == it->second.second);
        CHECK(f[6] == "6");
        ++rows;
    }
    CHECK(rows == from_json.size());
    CHECK(rows == rep.at("environments").size() * 3);

    // the weighted sum of rows reproduces each agent's upsilon
    for (const auto& a : rep.at("agents")) {
        double sum = 0.0;
        for (const auto& [key, wm] : from_json)
            if (key.second == a.at("name")) sum += wm.first * wm.second;
        CHECK(sum == doctest::Approx(a.at("upsilon").get<double>()).epsilon(1e-12));
    }
}

TEST_CASE("external agent matches the built-in policy it mimics") {
    const auto dir = scratch("external");
    const auto r = run_cli(dir, "seed = 4\nspaces.observations = 1\nensemble.source = native\n"
                                "ensemble.environments = copy\nvaluation.mode = discounted\nvaluation.gamma = 0.5\n"
                                "valuation.episodes = 4\nvaluation.horizon = 40\nagents = ext, opt\n"
                                "agent.ext.command = " + fake("const 1") + "\n");
    REQUIRE(r.code == 0);
    const auto rep = report(dir);
    CHECK(agent_entry(rep, "ext").at("upsilon") == agent_entry(rep, "opt").at("upsilon"));
    CHECK(agent_entry(rep, "ext").at("timeout_warnings") == 0);
}

TEST_CASE("silent external agent times out into uniform actions") {
    const auto dir = scratch("silent");
    const auto r = run_cli(dir, "seed = 4\nspaces.observations = 1\nensemble.source = native\n"
                                "ensemble.environments = copy\nvaluation.mode = discounted\n"
                                "valuation.episodes = 3\nvaluation.horizon = 6\nvaluation.epsilon = 1e-9\n"
                                "agents = ext\nagent.ext.command = " + fake("silent") +
                                "\nagent.ext.timeout_ms = 5\n");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("timed out") != std::string::npos);
    const auto a = agent_entry(report(dir), "ext");
    CHECK(a.at("timeout_warnings") == 3 * 5);
    CHECK(a.at("failed_episodes") == 0);
}

TEST_CASE("malformed external replies fail their rollouts") {
    const auto dir = scratch("garbage");
    const std::string base = "seed = 4\nensemble.source = native\nensemble.environments = constant:0,0,100; constant:0,1\n"
                             "valuation.episodes = 3\nvaluation.horizon = 6\nagents = ext, rand\n";
    const auto r = run_cli(dir, base + "agent.ext.command = " + fake("garbage") + "\n");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("failed") != std::string::npos);
    const auto rep = report(dir);
    const auto a = agent_entry(rep, "ext");
    CHECK(a.at("failed_episodes") == 6);
    CHECK(a.at("excluded_environments") == 2);
    CHECK(agent_entry(rep, "rand").at("failed_episodes") == 0);

    CHECK(run_cli(dir, base + "agent.ext.command = " + fake("nohandshake") + "\n").code == 1);
}

TEST_CASE("an agent that dies mid-run loses only those rollouts") {
    const auto dir = scratch("die");
    const auto r = run_cli(dir, "seed = 4\nensemble.source = native\nensemble.environments = constant:100,0,5\n"
                                "valuation.episodes = 4\nvaluation.horizon = 5\nagents = ext\n"
                                "agent.ext.command = " + fake("die 7") + "\n");
    REQUIRE(r.code == 0);
    const auto a = agent_entry(report(dir), "ext");
    CHECK(a.at("failed_episodes").get<int>() >= 1);
    CHECK(a.at("failed_episodes").get<int>() < 4);
    CHECK(a.at("upsilon").get<double>() == doctest::Approx(105.0 / 255.0));
}

TEST_CASE("enumerate subcommand") {
    const auto dir = scratch("enumerate");
    const std::string cmd = std::string(UPSILON_CLI) + " enumerate --max-len 12 --fixtures " +
                            (dir / "fx.txt").string() + " > " + (dir / "list.txt").string() + " 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto list = slurp(dir / "list.txt");
    CHECK(list.rfind("0 len=1 hex=1", 0) == 0);
    const auto fx = slurp(dir / "fx.txt");
    CHECK(fx.rfind("len=1 hex=1\n", 0) == 0);
}

}
