#include "lejaq/kernel.hpp"
#include "lejaq/kernel_io.hpp"
#include "lejaq/measure.hpp"
#include "lejaq/scaling.hpp"
#include "lejaq/sparse_sym.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace lejaq;

namespace {

std::vector<EquilibriumKernel> roundtrip_kernels() {
    std::vector<EquilibriumKernel> out;
    Matrix g(2, 2);
    g << 3.0, 1.0, 1.0, 3.0;
    out.push_back(EquilibriumKernel::dense(g, Measure::uniform(2), 2.0));
    const SparseSymMatrix swap = SparseSymMatrix::from_edges(2, {{0, 1, 1.0}});
    out.push_back(diag_modified_kernel(swap, Measure::uniform(2), DiagMode::Strict));
    const SparseSymMatrix box =
        SparseSymMatrix::from_edges(2, {{0, 0, 1.0}, {1, 1, 1.0}, {0, 1, 2.0}});
    const ScalingResult r = sinkhorn_scale(pagerank_augment(box, 0.2), Measure::uniform(2));
    out.push_back(scaled_kernel(box, r.d, Measure::uniform(2), 0.2));
    return out;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
};

/// Runs the installed binary with stderr silenced and captures stdout.
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LEJAQ_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out << text;
}

/// Fresh scratch directory shared by the CLI cases in this file.
const std::string& work_dir() {
    static const std::string dir = [] {
        char tmpl[] = "/tmp/lejaq_cli_XXXXXX";
        const char* d = mkdtemp(tmpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

}  // namespace

TEST_CASE("kernel files round trip byte for byte") {
    for (const EquilibriumKernel& k : roundtrip_kernels()) {
        std::ostringstream first;
        save_kernel(k, first);
        CHECK(first.str().rfind("lejaq.kernel.v1\n", 0) == 0);

        std::istringstream in(first.str());
        const EquilibriumKernel back = load_kernel(in);
        CHECK(back.form() == k.form());
        CHECK(back.size() == k.size());
        CHECK(back.capacity() == k.capacity());
        CHECK((back.to_dense() - k.to_dense()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.measure().values() - k.measure().values()).cwiseAbs().maxCoeff() == 0.0);

        std::ostringstream second;
        save_kernel(back, second);
        CHECK(second.str() == first.str());
        CHECK(kernel_hash(back) == kernel_hash(k));
        CHECK(kernel_hash(k).rfind("fnv1a64:", 0) == 0);
        CHECK(kernel_hash(k).size() == 8 + 16);
    }
}

TEST_CASE("kernel loader rejects malformed input") {
    std::istringstream no_magic("form dense\n");
    CHECK_THROWS_AS(load_kernel(no_magic), std::invalid_argument);
    std::istringstream bad_form("lejaq.kernel.v1\nform diagonal\n");
    CHECK_THROWS_AS(load_kernel(bad_form), std::invalid_argument);
    std::istringstream truncated("lejaq.kernel.v1\nform dense\nn 2\n");
    CHECK_THROWS_AS(load_kernel(truncated), std::invalid_argument);
}

TEST_CASE("format_real survives a parse round trip") {
    for (double x : {1.0 / 3.0, 0.1, -2.5e-17, 1e300, 0.0}) {
        CHECK(std::stod(format_real(x)) == x);
    }
}

TEST_CASE("cli help and argument errors") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("kernel --help").exit_code == 0);
    CHECK(run_cli("--version").out == "lejaq 0.1.0\n");
    CHECK(run_cli("--no-such-flag").exit_code == 1);
    CHECK(run_cli("kernel --input /no/such/file.el --measure uniform --out -").exit_code == 1);
    CHECK(run_cli("").exit_code == 1);  // a subcommand is required
}

TEST_CASE("cli pipeline is deterministic end to end") {
    const std::string& dir = work_dir();
    spit(dir + "/c4.el", "0 1\n1 2\n2 3\n0 3\n");
    spit(dir + "/f.txt", "0.5\n1\n0.25\n0.75\n");

    const std::string kern = " kernel --input " + dir + "/c4.el --measure uniform" +
                             " --method diag_strict --out " + dir;
    CHECK(run_cli(kern + "/a.kern").exit_code == 0);
    CHECK(run_cli(kern + "/b.kern").exit_code == 0);
    CHECK(slurp(dir + "/a.kern") == slurp(dir + "/b.kern"));

    const std::string leja = " leja --kernel " + dir + "/a.kern --n 6 --out " + dir;
    CHECK(run_cli(leja + "/a.seq").exit_code == 0);
    CHECK(run_cli(leja + "/b.seq").exit_code == 0);
    CHECK(slurp(dir + "/a.seq") == slurp(dir + "/b.seq"));

    const RunResult est = run_cli("estimate --kernel " + dir + "/a.kern --sequence " + dir +
                                  "/a.seq --function " + dir + "/f.txt --bound");
    CHECK(est.exit_code == 0);
    CHECK(est.out.find("integral") != std::string::npos);
    CHECK(est.out.find("bound_equal") != std::string::npos);

    const std::string ver = " verify --kernel " + dir + "/a.kern --sequence " + dir +
                            "/a.seq --function " + dir + "/f.txt --n-grid 1,2,4 --format csv --out " +
                            dir;
    const RunResult v1 = run_cli(ver + "/a.csv");
    CHECK(v1.exit_code == 0);
    CHECK(run_cli(ver + "/b.csv").exit_code == 0);
    CHECK(slurp(dir + "/a.csv") == slurp(dir + "/b.csv"));
    CHECK(slurp(dir + "/a.csv").rfind("# lejaq", 0) == 0);
}

TEST_CASE("cli rejects a sequence from a different kernel") {
    const std::string& dir = work_dir();
    spit(dir + "/p4.el", "0 1\n1 2\n2 3\n");
    CHECK(run_cli("kernel --input " + dir + "/p4.el --measure uniform --method diag_strict" +
                  " --out " + dir + "/other.kern")
              .exit_code == 0);
    const RunResult bad = run_cli("estimate --kernel " + dir + "/other.kern --sequence " + dir +
                                  "/a.seq --function " + dir + "/f.txt");
    CHECK(bad.exit_code == 1);
}

TEST_CASE("cli reports numerical failure as exit two") {
    const std::string& dir = work_dir();
    // A hand-written swap kernel: equilibrium for the uniform measure but
    // with a -1 eigenvalue, so the witness solve behind --bound must refuse.
    spit(dir + "/indef.kern",
         "lejaq.kernel.v1\nform sparse\nn 2\ncapacity 0.5\nnonnegative 1\n"
         "measure\n0.5\n0.5\nentries 2\n1 0 1\n0 1 1\nend\n");
    spit(dir + "/fneg.txt", "1\n-1\n");
    CHECK(run_cli("leja --kernel " + dir + "/indef.kern --n 4 --out " + dir + "/sk.seq")
              .exit_code == 0);
    const RunResult r = run_cli("estimate --kernel " + dir + "/indef.kern --sequence " + dir +
                                "/sk.seq --function " + dir + "/fneg.txt --bound");
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli honors config files with command-line precedence") {
    const std::string& dir = work_dir();
    spit(dir + "/cfg.ini", "[kernel]\nmethod=diag_strict\n");
    const RunResult from_cfg = run_cli("--config " + dir + "/cfg.ini kernel --input " + dir +
                                       "/c4.el --measure uniform --out " + dir + "/cfg.kern");
    CHECK(from_cfg.exit_code == 0);
    CHECK(from_cfg.out.find("method diag_strict") != std::string::npos);
    CHECK(slurp(dir + "/cfg.kern") == slurp(dir + "/a.kern"));

    const RunResult override_cfg =
        run_cli("--config " + dir + "/cfg.ini kernel --input " + dir +
                "/c4.el --measure uniform --method diag_graph --out " + dir + "/ov.kern");
    CHECK(override_cfg.exit_code == 0);
    CHECK(override_cfg.out.find("method diag_graph") != std::string::npos);
}

TEST_CASE("cli verify flags an unbalanced kernel") {
    const std::string& dir = work_dir();
    // Strengthen one edge (both stored triplets, keeping the file symmetric)
    // so the potential is no longer constant.
    std::string text = slurp(dir + "/a.kern");
    for (const auto& [needle, patch] :
         {std::pair<std::string, std::string>{"\n1 0 1\n", "\n1 0 3\n"},
          std::pair<std::string, std::string>{"\n0 1 1\n", "\n0 1 3\n"}}) {
        const auto at = text.find(needle);
        REQUIRE(at != std::string::npos);
        text.replace(at, needle.size(), patch);
    }
    spit(dir + "/broken.kern", text);
    const RunResult r = run_cli("verify --kernel " + dir + "/broken.kern");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("passed 0") != std::string::npos);
}
