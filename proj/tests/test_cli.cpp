#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MQSTAB_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mqstab_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("infsup subcommand writes the reference rows") {
    const fs::path dir = fresh_dir("infsup");
    const RunResult r = run_cli("infsup --degree 2,3 --levels 1,2 --elements 8,128 --out " + dir.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "infsup.csv");
    CHECK(csv.find("p,L,n,beta") != std::string::npos);
    CHECK(csv.find("2,1,8,0.8641") != std::string::npos);
    CHECK(csv.find("3,2,128,0.9167") != std::string::npos);
    CHECK(csv.rfind("#", 0) == 0);  // meta line first
}

TEST_CASE("infsup skips invalid cases and still succeeds") {
    const fs::path dir = fresh_dir("infsup_skip");
    const RunResult r = run_cli("infsup --degree 2 --levels 1 --elements 7,8 --out " + dir.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "infsup.csv");
    CHECK(csv.find("2,1,8,0.8641") != std::string::npos);
    CHECK(csv.find("2,1,7,") == std::string::npos);

    // every case invalid -> nonzero exit
    const RunResult bad = run_cli("infsup --degree 2 --levels 1 --elements 7 --out " + dir.string());
    CHECK(bad.exit_code != 0);
}

TEST_CASE("run subcommand: argument errors exit with 1") {
    const fs::path dir = fresh_dir("run_err");
    CHECK(run_cli("run --test 9 --out " + dir.string()).exit_code == 1);
    CHECK(run_cli("run --test 2 --method nope --out " + dir.string()).exit_code == 1);
    CHECK(run_cli("bogus-subcommand").exit_code == 1);
    CHECK(run_cli("run").exit_code == 1);  // missing --test
}

TEST_CASE("run subcommand emits report and solution files") {
    const fs::path dir = fresh_dir("run_ok");
    const RunResult r =
        run_cli("run --test 2 --method mq --degree 3 --elements 64 --out " + dir.string());
    CHECK(r.exit_code == 0);

    const auto report = lines_of(dir / "report.csv");
    REQUIRE(report.size() == 3);
    CHECK(report[0].rfind("# mqstab run", 0) == 0);
    CHECK(report[1] ==
          "test,method,p1,p2,ne1,ne2,L,cb,rel_l2,rel_h1,min,diff,cond,dofs,seconds");
    CHECK(report[2].rfind("2,mq,3,,64,,5,0.1,", 0) == 0);

    const auto solution = lines_of(dir / "solution.csv");
    REQUIRE(solution.size() > 2);
    CHECK(solution[1] == "x,u");
    CHECK(static_cast<int>(solution.size()) == 2 + 256);
}

TEST_CASE("run output is deterministic across invocations") {
    const fs::path d1 = fresh_dir("det1");
    const fs::path d2 = fresh_dir("det2");
    const std::string args = "run --test 2 --method mq --degree 2 --elements 32 --levels 2 --grid 64";
    CHECK(run_cli(args + " --out " + d1.string()).exit_code == 0);
    CHECK(run_cli(args + " --out " + d2.string()).exit_code == 0);
    // bitwise identical up to the trailing wall-time column
    const auto strip_seconds = [](const fs::path& p) {
        std::string all;
        for (const auto& line : lines_of(p)) {
            const auto cut = line.rfind(',');
            all += line.substr(0, cut);
            all += '\n';
        }
        return all;
    };
    CHECK(strip_seconds(d1 / "report.csv") == strip_seconds(d2 / "report.csv"));
    CHECK(slurp(d1 / "solution.csv") == slurp(d2 / "solution.csv"));
}

TEST_CASE("convergence subcommand writes rates, empty on a single mesh") {
    const fs::path dir = fresh_dir("conv");
    const RunResult r = run_cli(
        "convergence --test 2 --method galerkin --degree 2 --elements 8,16 --out " + dir.string());
    CHECK(r.exit_code == 0);
    const auto rows = lines_of(dir / "convergence.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[1] == "test,method,p1,p2,ne1,ne2,L,cb,rel_l2,rate_l2,rel_h1,rate_h1,dofs,seconds");
    // first row carries no rate: ...,rel_l2,,rel_h1,,...
    CHECK(rows[2].find(",,") != std::string::npos);

    const RunResult single = run_cli(
        "convergence --test 2 --method galerkin --degree 2 --elements 8 --out " + dir.string());
    CHECK(single.exit_code == 0);
    const auto one = lines_of(dir / "convergence.csv");
    REQUIRE(one.size() == 3);
    CHECK(one[2].find(",,") != std::string::npos);

    // no exact solution -> argument error
    CHECK(run_cli("convergence --test 3 --elements 8,16 --out " + dir.string()).exit_code == 1);
}

TEST_CASE("condition subcommand compares methods on a mesh list") {
    const fs::path dir = fresh_dir("cond");
    const RunResult r = run_cli(
        "condition --test 2 --degree 3 --elements 16,32 --method galerkin,mq --out " + dir.string());
    CHECK(r.exit_code == 0);
    const auto rows = lines_of(dir / "condition.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[1] == "test,method,p1,p2,ne1,ne2,L,cb,dofs,cond,seconds");
    CHECK(rows[2].rfind("2,galerkin,3,", 0) == 0);
    CHECK(rows[4].rfind("2,mq,3,", 0) == 0);
}

TEST_CASE("threaded sweeps produce the same bytes as single-threaded") {
    const fs::path d1 = fresh_dir("thr1");
    const fs::path d2 = fresh_dir("thr2");
    const std::string args = "infsup --degree 2,3 --levels 1,2 --elements 8,16,32";
    CHECK(run_cli(args + " --threads 1 --out " + d1.string()).exit_code == 0);
    CHECK(run_cli(args + " --threads 2 --out " + d2.string()).exit_code == 0);
    const auto a = lines_of(d1 / "infsup.csv");
    const auto b = lines_of(d2 / "infsup.csv");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] == b[i]);  // meta differs in threads=
}
