#include <catch2/catch_amalgamated.hpp>

#include <bdflux/bdflux.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace bdflux;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bdflux_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& stdout_to = {}) {
    std::string cmd = std::string(BDFLUX_CLI_PATH) + " " + args;
    if (!stdout_to.empty())
        cmd += " > " + stdout_to.string() + " 2>&1";
    else
        cmd += " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* solve_conf =
    "model.name = burgers_arctan\n"
    "model.q_bar = 0.0625\n"
    "datum.preset = riemann\n"
    "datum.left = 1\n"
    "datum.right = 0\n"
    "grid.x_left = -2\n"
    "grid.x_right = 2\n"
    "grid.n = 201\n"
    "solver.epsilon = 0\n"
    "solver.t_end = 0.2\n"
    "solver.snapshot_times = 0.1\n";

} // namespace

TEST_CASE("solve writes a complete, deterministic run directory", "[cli]") {
    TempDir tmp;
    fs::path conf = tmp.path / "run.conf";
    write_file(conf, solve_conf);

    fs::path out1 = tmp.path / "run1";
    REQUIRE(run_cli("solve --config " + conf.string() + " --out " + out1.string() +
                    " --svg off") == 0);
    for (const char* name : {"meta.json", "diag.csv", "report.json", "snap_0.csv",
                             "snap_0.1.csv", "snap_0.2.csv"})
        CHECK(fs::exists(out1 / name));
    CHECK_FALSE(fs::exists(out1 / "plots"));

    // same config, second directory: byte-identical artifacts
    fs::path out2 = tmp.path / "run2";
    REQUIRE(run_cli("solve --config " + conf.string() + " --out " + out2.string() +
                    " --svg off") == 0);
    CHECK(read_file(out1 / "diag.csv") == read_file(out2 / "diag.csv"));
    CHECK(read_file(out1 / "snap_0.2.csv") == read_file(out2 / "snap_0.2.csv"));
    CHECK(read_file(out1 / "meta.json") == read_file(out2 / "meta.json"));

    // meta.json re-ingests as a config and reproduces the run
    fs::path out3 = tmp.path / "run3";
    REQUIRE(run_cli("solve --config " + (out1 / "meta.json").string() + " --out " +
                    out3.string() + " --svg off") == 0);
    CHECK(read_file(out1 / "snap_0.2.csv") == read_file(out3 / "snap_0.2.csv"));
    CHECK(read_file(out1 / "diag.csv") == read_file(out3 / "diag.csv"));

    // the snapshots parse back onto the configured grid
    GridField fin = read_snapshot_csv(out1 / "snap_0.2.csv");
    CHECK(fin.grid.n == 201);
    CHECK(fin.t == 0.2);
    CHECK(sup_norm(fin) <= 1.0 + 1e-9);
}

TEST_CASE("wave reports the classification and tabulates the profile", "[cli]") {
    TempDir tmp;
    fs::path conf = tmp.path / "wave.conf";
    write_file(conf,
               "model.name = burgers_arctan\n"
               "model.q_bar = 0.0625\n"
               "wave.b_minus = 1\n"
               "wave.b_plus = 0\n");
    fs::path out = tmp.path / "wave";
    REQUIRE(run_cli("wave --config " + conf.string() + " --out " + out.string() +
                    " --svg off") == 0);

    Config rep = Config::load(out / "report.json");
    CHECK(rep.get_string("class") == "discontinuous");
    CHECK(rep.get_double("speed") == Catch::Approx(0.5).margin(1e-12));
    CHECK(rep.get_double("b1") == Catch::Approx(0.85355339059327376).margin(1e-8));
    CHECK(rep.get_double("b2") == Catch::Approx(0.14644660940672624).margin(1e-8));

    CsvTable t = read_csv(out / "wave.csv");
    CHECK(t.column("xi") == 0);
    CHECK(t.column("b") == 1);
    CHECK(t.column("q_hat") == 2);
    REQUIRE(t.rows.size() >= 1601);
    // b decreases from near b_minus to near b_plus across the table
    CHECK(t.rows.front()[1] > 0.99);
    CHECK(t.rows.back()[1] < 0.01);
}

TEST_CASE("converge runs the resolution ladder against the wave oracle", "[cli]") {
    TempDir tmp;
    fs::path conf = tmp.path / "conv.conf";
    write_file(conf,
               "model.name = burgers_arctan\n"
               "model.q_bar = 0.25\n"
               "datum.preset = wave\n"
               "wave.b_minus = 1\n"
               "wave.b_plus = 0\n"
               "grid.x_left = -8\n"
               "grid.x_right = 8\n"
               "solver.t_end = 0.2\n"
               "study.resolutions = 81, 161\n");
    fs::path out = tmp.path / "conv";
    REQUIRE(run_cli("converge --config " + conf.string() + " --out " + out.string() +
                    " --svg off") == 0);
    CsvTable t = read_csv(out / "study.csv");
    REQUIRE(t.rows.size() == 2);
    std::size_t ce = t.column("l1_error");
    CHECK(t.rows[1][ce] < t.rows[0][ce]);  // error drops under refinement
    Config rep = Config::load(out / "report.json");
    CHECK(rep.get_string("wave_class") == "continuous");
    CHECK(rep.get_double("min_observed_order") > 0.3);
}

TEST_CASE("configuration problems exit with code 2", "[cli]") {
    TempDir tmp;
    fs::path out = tmp.path / "o";
    // missing file
    CHECK(run_cli("solve --config " + (tmp.path / "absent.conf").string() + " --out " +
                  out.string()) == 2);
    // unknown model
    fs::path bad1 = tmp.path / "bad1.conf";
    write_file(bad1, "model.name = nosuch\ndatum.preset = constant\n"
                     "grid.x_left = 0\ngrid.x_right = 1\ngrid.n = 32\nsolver.t_end = 0.1\n");
    CHECK(run_cli("solve --config " + bad1.string() + " --out " + out.string()) == 2);
    // missing required key (solver.t_end)
    fs::path bad2 = tmp.path / "bad2.conf";
    write_file(bad2, "model.name = burgers_arctan\ndatum.preset = constant\n"
                     "grid.x_left = 0\ngrid.x_right = 1\ngrid.n = 32\n");
    CHECK(run_cli("solve --config " + bad2.string() + " --out " + out.string()) == 2);
    // malformed grammar names the line (stderr captured with stdout)
    fs::path bad3 = tmp.path / "bad3.conf";
    write_file(bad3, "model.name = burgers_arctan\ngarbage line\n");
    fs::path log = tmp.path / "log.txt";
    CHECK(run_cli("solve --config " + bad3.string() + " --out " + out.string(), log) == 2);
    CHECK(read_file(log).find("line 2") != std::string::npos);
    // bad command line
    CHECK(run_cli("") == 2);
    CHECK(run_cli("solve --nonsense x") == 2);
    // selfsim requires a zero-flux model
    fs::path bad4 = tmp.path / "bad4.conf";
    write_file(bad4, std::string(solve_conf));
    CHECK(run_cli("selfsim --config " + bad4.string() + " --out " + out.string()) == 2);
}

TEST_CASE("numeric failures exit with code 3 and leave failure.txt", "[cli]") {
    TempDir tmp;
    // release run held far past the jump lifetime: every snapshot on the
    // ladder has already lost the initial jump, so the similarity fit has
    // nothing to work with
    fs::path conf = tmp.path / "late.conf";
    write_file(conf,
               "model.name = zero_flux_beta\n"
               "model.q_bar = 1\n"
               "model.beta = 3\n"
               "datum.preset = riemann\n"
               "datum.left = 1\n"
               "datum.right = 0\n"
               "grid.x_left = -3\n"
               "grid.x_right = 3\n"
               "grid.n = 101\n"
               "solver.t_end = 50\n");
    fs::path out = tmp.path / "late";
    CHECK(run_cli("selfsim --config " + conf.string() + " --out " + out.string() +
                  " --svg off") == 3);
    REQUIRE(fs::exists(out / "failure.txt"));
    CHECK(read_file(out / "failure.txt").find("selfsim") != std::string::npos);
}

TEST_CASE("verify passes a clean run and rejects a tampered one", "[cli]") {
    TempDir tmp;
    fs::path conf = tmp.path / "run.conf";
    write_file(conf, solve_conf);
    fs::path run = tmp.path / "run";
    REQUIRE(run_cli("solve --config " + conf.string() + " --out " + run.string() +
                    " --svg off") == 0);

    fs::path log = tmp.path / "verify.txt";
    CHECK(run_cli("verify --run " + run.string(), log) == 0);
    std::string lines = read_file(log);
    CHECK(lines.find("max_principle") != std::string::npos);
    CHECK(lines.find("FAIL") == std::string::npos);
    Config rep = Config::load(run / "report.json");
    CHECK(rep.get_string("passed") == "true");

    // push the final snapshot above the initial range: range check must trip
    GridField fin = read_snapshot_csv(run / "snap_0.2.csv");
    for (auto& v : fin.u) v += 0.1;
    write_snapshot_csv(run / "snap_0.2.csv", fin);
    CHECK(run_cli("verify --run " + run.string(), log) == 1);
    CHECK(read_file(log).find("FAIL") != std::string::npos);

    // missing directory is a configuration error
    CHECK(run_cli("verify --run " + (tmp.path / "nope").string()) == 2);
}
