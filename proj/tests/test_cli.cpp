// Conformance tests for the command-line front door: exit codes, the
// key=value result block, and byte-for-byte idempotence.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;

#ifndef PPCMT_CLI_PATH
#error "PPCMT_CLI_PATH must point at the built binary"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(PPCMT_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 512> buf;
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) result.stdout_text += buf.data();
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string value_of(const std::string& block, const std::string& key) {
    const std::string needle = key + "=";
    std::istringstream lines(block);
    std::string line;
    while (std::getline(lines, line))
        if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
    return {};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ppcmt_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("exit code conformance") {
    TempDir tmp;
    CHECK(run("definitely-not-a-command").exit_code == 1);
    CHECK(run("metrics --bogus-flag x").exit_code == 1);
    CHECK(run("metrics --pred " + tmp.file("none.xyz") + " --gt " + tmp.file("none.xyz"))
              .exit_code == 2);

    std::ofstream bad(tmp.file("bad.xyz"));
    bad << "1 2 two\n";
    bad.close();
    std::ofstream ok(tmp.file("ok.xyz"));
    ok << "0 0 0\n1 0 0\n";
    ok.close();
    CHECK(run("metrics --pred " + tmp.file("bad.xyz") + " --gt " + tmp.file("ok.xyz")).exit_code ==
          2);

    std::ofstream three(tmp.file("three.xyz"));
    three << "0 0 0\n1 0 0\n2 0 0\n";
    three.close();
    // EMD size mismatch: invariant violation
    CHECK(run("metrics --pred " + tmp.file("ok.xyz") + " --gt " + tmp.file("three.xyz") +
              " --which emd")
              .exit_code == 3);
    // subset count above population
    CHECK(run("decompose --input " + tmp.file("ok.xyz") + " --subsets 9 --out-prefix " +
              tmp.file("sub"))
              .exit_code == 3);
}

TEST_CASE("metrics on identical clouds") {
    TempDir tmp;
    REQUIRE(run("synth --shape sphere --points 64 --seed 3 --out " + tmp.file("s.xyz"))
                .exit_code == 0);
    const RunResult r = run("metrics --pred " + tmp.file("s.xyz") + " --gt " + tmp.file("s.xyz") +
                            " --which cd,fscore --tau 0.01");
    CHECK(r.exit_code == 0);
    CHECK(value_of(r.stdout_text, "cd_l1") == "0");
    CHECK(value_of(r.stdout_text, "fscore") == "1");
    CHECK(value_of(r.stdout_text, "fscore.tau") == "0.01");
}

TEST_CASE("decompose balance through the CLI") {
    TempDir tmp;
    REQUIRE(run("synth --shape cylinder --points 1000 --seed 5 --out " + tmp.file("c.pcf"))
                .exit_code == 0);
    const RunResult r = run("decompose --input " + tmp.file("c.pcf") + " --subsets 4" +
                            " --out-prefix " + tmp.file("part"));
    CHECK(r.exit_code == 0);
    for (int u = 1; u <= 4; ++u) {
        CHECK(value_of(r.stdout_text, "subset_" + std::to_string(u) + ".points") == "250");
        CHECK(fs::exists(tmp.file("part_" + std::to_string(u) + ".xyz")));
    }
}

TEST_CASE("bench scan reports oracle agreement") {
    const RunResult r = run("bench scan --length 512 --channels 16 --runs 2");
    CHECK(r.exit_code == 0);
    const double rel = std::stod(value_of(r.stdout_text, "max_rel_diff"));
    CHECK(rel <= 1e-5);
}

TEST_CASE("subcommands are idempotent byte for byte") {
    TempDir tmp;
    REQUIRE(run("synth --shape torus --points 256 --seed 11 --out " + tmp.file("a.pcf"))
                .exit_code == 0);
    REQUIRE(run("synth --shape torus --points 256 --seed 11 --out " + tmp.file("b.pcf"))
                .exit_code == 0);
    CHECK(slurp(tmp.file("a.pcf")) == slurp(tmp.file("b.pcf")));

    REQUIRE(run("init-weights --config desk --seed 9 --out " + tmp.file("w1.pwt")).exit_code == 0);
    REQUIRE(run("init-weights --config desk --seed 9 --out " + tmp.file("w2.pwt")).exit_code == 0);
    CHECK(slurp(tmp.file("w1.pwt")) == slurp(tmp.file("w2.pwt")));

    REQUIRE(run("synth --shape sphere --points 512 --seed 1 --out " + tmp.file("in.xyz"))
                .exit_code == 0);
    for (const char* out : {"o1.pcf", "o2.pcf"})
        REQUIRE(run("complete --input " + tmp.file("in.xyz") + " --config desk --weights " +
                    tmp.file("w1.pwt") + " --out " + tmp.file(out))
                    .exit_code == 0);
    CHECK(slurp(tmp.file("o1.pcf")) == slurp(tmp.file("o2.pcf")));
}

TEST_CASE("synth crop partitions and honours explicit viewpoints") {
    TempDir tmp;
    const RunResult r = run("synth --shape sphere --points 100 --seed 2 --out " +
                            tmp.file("part.xyz") + " --crop-fraction 0.5 --viewpoint 1,0,0" +
                            " --out-missing " + tmp.file("miss.xyz"));
    CHECK(r.exit_code == 0);
    CHECK(value_of(r.stdout_text, "partial_points") == "50");
    CHECK(value_of(r.stdout_text, "removed_points") == "50");
    CHECK(value_of(r.stdout_text, "viewpoint") == "1,0,0");
}

TEST_CASE("sequence metrics and mmd over directories") {
    TempDir tmp;
    fs::create_directories(tmp.file("frames"));
    for (int i = 0; i < 3; ++i)
        REQUIRE(run("synth --shape sphere --points 64 --seed 4 --out " + tmp.file("frames") +
                    "/f" + std::to_string(i) + ".xyz")
                    .exit_code == 0);
    const RunResult seq = run("sequence-metrics --dir " + tmp.file("frames"));
    CHECK(seq.exit_code == 0);
    CHECK(value_of(seq.stdout_text, "frames") == "3");
    CHECK(value_of(seq.stdout_text, "consistency") == "0");  // identical frames

    const RunResult m = run("mmd --output " + tmp.file("frames") + "/f0.xyz --reference-dir " +
                            tmp.file("frames"));
    CHECK(m.exit_code == 0);
    CHECK(value_of(m.stdout_text, "mmd") == "0");
}
