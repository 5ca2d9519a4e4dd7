#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "umdp-cli-test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

Result run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(UMDP_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string first_line(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    return line;
}

// p_lower column of results.csv, as text so equality is bit-exact.
std::vector<std::string> lower_column(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    std::vector<std::string> col;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream s(line);
        std::string c;
        while (std::getline(s, c, ',')) cells.push_back(c);
        col.push_back(cells.at(cells.size() - 3));
    }
    return col;
}

// Small 2D unicycle run that finishes in seconds.
std::string small(const fs::path& out) {
    return "--preset unicycle2d-phi2 --grid 10,10 --n-samples 2000 --runs 20 --set simulation.sweep_cells=5 "
           "--set simulation.trajectories=2 -o " +
           out.string();
}

} // namespace

TEST_CASE("run writes every export with the documented headers") {
    const fs::path out = work_dir() / "run";
    Result r = run("run " + small(out));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(first_line(out / "results.csv") == "state_index,region_lower_0,region_lower_1,region_upper_0,region_upper_1,"
                                             "p_lower,p_upper,action");
    CHECK(first_line(out / "sweep.csv") == "cell_index,x_center_0,x_center_1,p_lower,empirical,ci_low,ci_high");
    CHECK(first_line(out / "trajectories" / "episode_0000.csv") == "step,x_0,x_1,action,labels,accepted");
    CHECK(fs::exists(out / "strategy.csv"));

    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    for (const char* key : {"alpha", "e_avg", "iterations", "residual", "timings"}) CHECK_MESSAGE(j.contains(key), key);
    CHECK(j["timings"].contains("total"));
    CHECK(j["alpha"].get<double>() == doctest::Approx(0.01));
    CHECK(j["e_avg"].get<double>() >= 0.0);
    // stdout carries the same summary
    CHECK(nlohmann::json::parse(r.out)["e_avg"] == j["e_avg"]);
}

TEST_CASE("second abstraction with the same inputs comes from the cache") {
    const fs::path out = work_dir() / "cache";
    Result a = run("abstract " + small(out));
    REQUIRE_MESSAGE(a.code == 0, a.err);
    CHECK(nlohmann::json::parse(a.out)["cache_hit"] == false);
    Result b = run("abstract " + small(out));
    REQUIRE(b.code == 0);
    CHECK(nlohmann::json::parse(b.out)["cache_hit"] == true);
    Result c = run("abstract " + small(out) + " --seed 5");
    REQUIRE(c.code == 0);
    CHECK(nlohmann::json::parse(c.out)["cache_hit"] == false);
    Result d = run("abstract " + small(out) + " --no-cache");
    REQUIRE(d.code == 0);
    CHECK(nlohmann::json::parse(d.out)["cache_hit"] == false);
}

TEST_CASE("exported abstraction re-synthesizes to bit-identical lower bounds") {
    const fs::path first = work_dir() / "export", second = work_dir() / "import";
    REQUIRE(run("abstract " + small(first)).code == 0);
    REQUIRE(run("synthesize " + small(first)).code == 0);
    Result r = run("synthesize " + small(second) + " --abstraction " + (first / "abstraction.json").string());
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto a = lower_column(first / "results.csv"), b = lower_column(second / "results.csv");
    REQUIRE(a.size() == 100);
    CHECK(a == b);
}

TEST_CASE("simulate reuses a saved strategy") {
    const fs::path out = work_dir() / "resim";
    REQUIRE(run("synthesize " + small(out)).code == 0);
    Result r = run("simulate " + small(out));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["simulation"]["runs"] == 20);
}

TEST_CASE("configuration errors name the file, line and key") {
    const fs::path cfg = work_dir() / "bad.json";
    std::ofstream(cfg) << "{\n  \"preset\": \"pendulum-phi1\",\n  \"noise\": {\n    \"n_samples\": 100,\n"
                          "    \"bogus\": 1\n  }\n}\n";
    Result r = run("abstract -c " + cfg.string() + " -o " + (work_dir() / "bad").string());
    CHECK(r.code == 2);
    CHECK_MESSAGE(r.err.find(cfg.string() + ":5: noise.bogus: unknown key") != std::string::npos, r.err);

    const fs::path broken = work_dir() / "broken.json";
    std::ofstream(broken) << "{\n  \"noise\": {\n    \"n_samples\": ,\n  }\n}\n";
    Result b = run("abstract -c " + broken.string());
    CHECK(b.code == 2);
    CHECK_MESSAGE(b.err.find(broken.string() + ":3") != std::string::npos, b.err);

    Result v = run("abstract --preset pendulum-phi1 --set synthesis.mode=sideways -o " + (work_dir() / "bad").string());
    CHECK(v.code == 2);
    CHECK(v.err.find("synthesis.mode") != std::string::npos);
}

TEST_CASE("exit codes separate input problems from numeric failures") {
    CHECK(run("abstract --no-such-flag").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("abstract").code == 2); // neither preset nor config
    CHECK(run("abstract --preset no-such-preset").code == 2);

    Result missing = run("abstract --preset pendulum-phi1 --samples /nonexistent/samples.csv -o " +
                         (work_dir() / "missing").string());
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/nonexistent/samples.csv") != std::string::npos);

    // eps_c = 1e-4 needs about 69000 samples for beta_c = 1e-3
    Result few = run("abstract --preset pendulum-phi1 --grid 10,10 --n-samples 1000 --eps-c 0.0001 -o " +
                     (work_dir() / "few").string());
    CHECK(few.code == 3);
    CHECK(few.err.find("support learning needs") != std::string::npos);
}
