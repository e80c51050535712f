#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "heterosync/config.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("HETEROSYNC_CLI");
    REQUIRE_MESSAGE(p != nullptr, "HETEROSYNC_CLI must point at the binary");
    return p;
}

int run_cmd(const std::string& tail) {
    std::string cmd = "'" + cli_path() + "' " + tail + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path kScratch = "cli_scratch";

struct Scratch {
    Scratch() {
        fs::remove_all(kScratch);
        fs::create_directories(kScratch);
    }
};
Scratch scratch_once; // NOLINT

std::string tiny_moments(const std::string& out) {
    return "kind = moments\nout = " + (kScratch / out).string() +
           "\ncoupling.sigma = 1.5\ngrid.t_end = 5\ngrid.dt = 0.01\ninit.v.1 = 0.01\ninit.v.2 = 0.01\n"
           "record.stride = 10\n";
}

} // namespace

TEST_CASE("run writes an annotated csv and a replayable config echo") {
    auto cfg = kScratch / "m.cfg";
    write_file(cfg, tiny_moments("m-out"));
    CHECK(run_cmd("run " + cfg.string()) == 0);

    auto csv = kScratch / "m-out" / "moments.csv";
    std::string text = slurp(csv);
    CHECK(text.rfind("# artifact = ", 0) == 0);
    CHECK(text.find("# kind = moments\n") != std::string::npos);
    CHECK(text.find("# seed = 42\n") != std::string::npos);
    CHECK(text.find("# config = ") != std::string::npos);
    CHECK(text.find("\nt,mu1,mu2,v1,v2\n") != std::string::npos);

    auto echo = kScratch / "m-out" / "config.cfg";
    auto c = hs::ExperimentConfig::parse_file(echo.string());
    CHECK(c.serialize() == slurp(echo));
    CHECK(c.grid.t_end == 5.0);
}

TEST_CASE("identical experiments produce byte-identical tables") {
    auto ca = kScratch / "rep-a.cfg", cb = kScratch / "rep-b.cfg";
    write_file(ca, tiny_moments("rep-a-out"));
    write_file(cb, tiny_moments("rep-b-out"));
    REQUIRE(run_cmd("run " + ca.string()) == 0);
    REQUIRE(run_cmd("run " + cb.string()) == 0);
    CHECK(slurp(kScratch / "rep-a-out" / "moments.csv") == slurp(kScratch / "rep-b-out" / "moments.csv"));
}

TEST_CASE("thread cap does not change the numbers") {
    auto mk = [&](const std::string& tag) {
        std::string text =
            "kind = network-quenched\nout = " + (kScratch / (tag + "-out")).string() +
            "\ncoupling.sigma = 0.9\npop.1.size = 60\npop.2.size = 60\ngrid.t_end = 2\ngrid.dt = 0.01\n"
            "record.stride = 5\n";
        auto p = kScratch / (tag + ".cfg");
        write_file(p, text);
        return p;
    };
    auto one = mk("thr1"), four = mk("thr4");
    std::string base = "'" + cli_path() + "' run ";
    REQUIRE(std::system(("HETEROSYNC_THREADS=1 " + base + one.string() + " > /dev/null 2>&1").c_str()) == 0);
    REQUIRE(std::system(("HETEROSYNC_THREADS=4 " + base + four.string() + " > /dev/null 2>&1").c_str()) == 0);
    CHECK(slurp(kScratch / "thr1-out" / "stats.csv") == slurp(kScratch / "thr4-out" / "stats.csv"));
    CHECK(slurp(kScratch / "thr1-out" / "traces.csv") == slurp(kScratch / "thr4-out" / "traces.csv"));
}

TEST_CASE("config errors exit 1 and leave nothing behind") {
    auto cfg = kScratch / "bad.cfg";
    write_file(cfg, "kind = moments\nout = " + (kScratch / "bad-out").string() + "\nmystery = 1\n");
    CHECK(run_cmd("run " + cfg.string()) == 1);
    CHECK(!fs::exists(kScratch / "bad-out"));
    CHECK(run_cmd("run " + (kScratch / "missing.cfg").string()) == 1);
}

TEST_CASE("numerical failures exit 2") {
    auto cfg = kScratch / "blow.cfg";
    write_file(cfg, "kind = moments\nout = " + (kScratch / "blow-out").string() +
                        "\ncoupling.j.1.1 = 5e6\ngrid.t_end = 5\ngrid.dt = 0.01\ninit.mu.1 = 1\n");
    CHECK(run_cmd("run " + cfg.string()) == 2);
}

TEST_CASE("preset emits a parseable config file") {
    CHECK(run_cmd("preset fig3d-sweep --out " + (kScratch / "pre").string()) == 0);
    auto c = hs::ExperimentConfig::parse_file((kScratch / "pre" / "fig3d-sweep.cfg").string());
    CHECK(c.kind == hs::ExperimentKind::FhnMoments);
    CHECK(run_cmd("preset no-such-preset") == 1);
}

TEST_CASE("usage errors exit 1 and help exits 0") {
    CHECK(run_cmd("") == 1);
    CHECK(run_cmd("frobnicate") == 1);
    CHECK(run_cmd("--help") == 0);
    CHECK(run_cmd("run") == 1); // missing config argument
}
