#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = RDMOL_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::path("cli_scratch") / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
};

const std::string kSmallStudy = R"([study]
Ns = 4, 8
N_ref = 32
times = 0.5, 1.0
consistency_times = 0.5
fit_time = 0.5
c_hat_fit_N = 4
)";

}  // namespace

TEST_CASE("help exits cleanly") { REQUIRE(run("--help") == 0); }

TEST_CASE("missing subcommand is a usage error") { REQUIRE(run("") != 0); }

TEST_CASE("simulate writes a deterministic trajectory") {
    Scratch s1("sim1"), s2("sim2");
    REQUIRE(run("--out " + s1.dir.string() + " simulate --N 12 --times 0.25,0.5") == 0);
    REQUIRE(run("--out " + s2.dir.string() + " simulate --N 12 --times 0.25,0.5") == 0);
    for (const char* f : {"trajectory.csv", "monitors.csv", "manifest.json"}) {
        REQUIRE(fs::exists(s1.dir / f));
        REQUIRE(fs::exists(s2.dir / f));
    }
    REQUIRE(slurp(s1.dir / "trajectory.csv") == slurp(s2.dir / "trajectory.csv"));
    REQUIRE(slurp(s1.dir / "monitors.csv") == slurp(s2.dir / "monitors.csv"));

    const auto manifest = nlohmann::json::parse(slurp(s1.dir / "manifest.json"));
    REQUIRE(manifest.contains("command"));
    REQUIRE(manifest["problem"]["k1"] == 1.0);
}

TEST_CASE("config validation failures exit with code 2") {
    Scratch s("badcfg");
    write_file(s.dir / "bad.cfg", "[problem]\nbogus = 1\n");
    REQUIRE(run("--config " + (s.dir / "bad.cfg").string() + " --out " + s.dir.string() +
                " simulate --N 8") == 2);
    write_file(s.dir / "neg.cfg", "[problem]\nkA = -1\n");
    REQUIRE(run("--config " + (s.dir / "neg.cfg").string() + " --out " + s.dir.string() +
                " simulate --N 8") == 2);
    REQUIRE(run("--config no_such_file.cfg --out " + s.dir.string() + " simulate") != 0);
}

TEST_CASE("unreachable step tolerances exit with code 3") {
    Scratch s("stiff");
    write_file(s.dir / "stiff.cfg",
               "[integrator]\ndt_init = 5e-3\ndt_min = 5e-3\nrel_tol = 1e-12\nabs_tol = 1e-14\n");
    REQUIRE(run("--config " + (s.dir / "stiff.cfg").string() + " --out " + s.dir.string() +
                " simulate --N 32 --times 0.5") == 3);
}

TEST_CASE("projection table") {
    Scratch s("proj");
    REQUIRE(run("--out " + s.dir.string() + " project --expr x --Ns 8,16,32") == 0);
    REQUIRE(fs::exists(s.dir / "projection.csv"));
    const std::string out = slurp("cli_stdout.txt");
    REQUIRE(out.find("order=") != std::string::npos);
    REQUIRE(run("--out " + s.dir.string() + " project --expr \"x +\" --Ns 8") == 2);
}

TEST_CASE("kernel distance table") {
    Scratch s("kern");
    REQUIRE(run("--out " + s.dir.string() + " kernels --t 0.1 --Ns 4,8,16") == 0);
    const std::string csv = slurp(s.dir / "kernels.csv");
    REQUIRE(csv.rfind("N,distance\n4,", 0) == 0);
}

TEST_CASE("multicell expansion artifacts") {
    Scratch s("mc");
    write_file(s.dir / "abc.network",
               "[species]\nA\nB\nC\n\n[reaction]\nsource = A + B\ntarget = C\nrate = 1\n\n"
               "[reaction]\nsource = C\ntarget = A + B\nrate = 2\n");
    REQUIRE(run("--out " + s.dir.string() + " multicell --network " +
                (s.dir / "abc.network").string() + " --cells 3 --transport 0.9,1.35,1.8") == 0);
    const std::string net = slurp(s.dir / "expanded.network");
    REQUIRE(net.find("A_3") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(s.dir / "multicell.json"));
    REQUIRE(j["species"] == 9);
    REQUIRE(j["reactions"] == 18);
    REQUIRE(j["conservation_laws"].size() == 2);
    // malformed network file
    write_file(s.dir / "broken.network", "[reaction]\nsource = A\n");
    REQUIRE(run("--out " + s.dir.string() + " multicell --network " +
                (s.dir / "broken.network").string() + " --cells 2 --transport 1") == 2);
}

TEST_CASE("consistency subcommand with a reduced study") {
    Scratch s("consist");
    write_file(s.dir / "small.cfg", kSmallStudy);
    REQUIRE(run("--config " + (s.dir / "small.cfg").string() + " --out " + s.dir.string() +
                " consistency") == 0);
    const std::string csv = slurp(s.dir / "consistency.csv");
    REQUIRE(csv.rfind("N,t,res_sup,res_l2\n", 0) == 0);
}

TEST_CASE("convergence subcommand with a reduced study") {
    Scratch s("conv");
    write_file(s.dir / "small.cfg", kSmallStudy);
    REQUIRE(run("--threads 2 --config " + (s.dir / "small.cfg").string() + " --out " +
                s.dir.string() + " convergence") == 0);
    for (const char* f : {"errors.csv", "consistency.csv", "report.json", "convergence.svg",
                          "manifest.json"})
        REQUIRE(fs::exists(s.dir / f));
    const auto rep = nlohmann::json::parse(slurp(s.dir / "report.json"));
    REQUIRE(rep["flags"]["convergence"] == true);
    REQUIRE(rep["flags"]["conservation"] == true);
}
