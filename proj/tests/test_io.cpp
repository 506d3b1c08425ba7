#include <catch2/catch_amalgamated.hpp>

#include <bdflux/bdflux.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace bdflux;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bdflux_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

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

} // namespace

TEST_CASE("doubles survive the text round trip bit for bit", "[io]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int k = 0; k < 2000; ++k) {
        double v = std::ldexp(mant(rng), expo(rng));
        CHECK(parse_double(format_double(v)) == v);
    }
    for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, 6.25e-4, 1e308, 5e-324})
        CHECK(parse_double(format_double(v)) == v);
    CHECK(parse_double("  42 ") == 42.0);
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("csv tables round trip and report malformed lines", "[io]") {
    TempDir tmp;
    fs::path p = tmp.path / "table.csv";
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({U(rng), U(rng), U(rng)});
    write_csv(p, {"a", "b", "c"}, rows);

    CsvTable t = read_csv(p);
    REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(t.rows[i][j] == rows[i][j]);
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(t.column("missing"), std::invalid_argument);

    // CRLF input parses the same
    fs::path crlf = tmp.path / "crlf.csv";
    write_file(crlf, "x,y\r\n1,2\r\n3,4\r\n");
    CsvTable tc = read_csv(crlf);
    REQUIRE(tc.rows.size() == 2);
    CHECK(tc.rows[1][1] == 4.0);

    // cell-count mismatch names the line
    fs::path bad = tmp.path / "bad.csv";
    write_file(bad, "x,y\n1,2\n3\n");
    try {
        read_csv(bad);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    CHECK_THROWS_AS(read_csv(tmp.path / "absent.csv"), std::runtime_error);
}

TEST_CASE("snapshot files are self-describing", "[io]") {
    TempDir tmp;
    Grid g{-1.5, 2.5, 81};
    GridField f(g, 0.375);
    for (int i = 0; i < g.n; ++i)
        f.u[static_cast<std::size_t>(i)] = std::sin(3.0 * g.x(i));

    fs::path p = tmp.path / "snap.csv";
    write_snapshot_csv(p, f);
    GridField back = read_snapshot_csv(p);
    CHECK(back.grid == g);
    CHECK(back.t == f.t);
    for (std::size_t i = 0; i < f.u.size(); ++i) CHECK(back.u[i] == f.u[i]);

    // non-uniform abscissae are rejected
    fs::path warped = tmp.path / "warped.csv";
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) {
        double x = 0.01 * i * i;
        rows.push_back({x, 1.0, 0.0});
    }
    write_csv(warped, {"x", "u", "t"}, rows);
    CHECK_THROWS_AS(read_snapshot_csv(warped), std::runtime_error);

    fs::path tiny = tmp.path / "tiny.csv";
    write_csv(tiny, {"x", "u", "t"}, {{0.0, 1.0, 0.0}, {0.1, 1.0, 0.0}});
    CHECK_THROWS_AS(read_snapshot_csv(tiny), std::runtime_error);
}

TEST_CASE("config grammar, typing and diagnostics", "[io]") {
    Config c = Config::parse_text(
        "# run setup\n"
        "model.name = burgers_arctan   # trailing comment\n"
        "model.q_bar = 0.0625\n"
        "grid.n = 801\n"
        "run.snapshot_times = 0.1, 0.2, 0.4\n"
        "run.verbose = on\n"
        "\n");
    CHECK(c.get_string("model.name") == "burgers_arctan");
    CHECK(c.get_double("model.q_bar") == 0.0625);
    CHECK(c.get_int("grid.n") == 801);
    CHECK(c.get_bool("run.verbose", false));
    CHECK(c.get_bool("run.quiet", false) == false);
    CHECK(c.get_double_list("run.snapshot_times") == std::vector<double>{0.1, 0.2, 0.4});
    CHECK(c.get_double("run.t_end", 1.5) == 1.5);
    CHECK_FALSE(c.has("run.t_end"));

    CHECK_THROWS_AS(c.get_string("missing.key"), ConfigError);
    CHECK_THROWS_AS(c.get_int("model.q_bar"), ConfigError);
    CHECK_THROWS_AS(c.get_double("model.name"), ConfigError);

    // parse errors carry 1-based line numbers
    try {
        Config::parse_text("model.name = ok\nnot a key value line\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    try {
        Config::parse_text("model.q_bar = 1\nmodel.q_bar = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(Config::parse_text("flatkey = 1\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_text(" = 1\n"), ConfigError);
}

TEST_CASE("config survives the json round trip and auto-detecting load", "[io]") {
    TempDir tmp;
    Config c = Config::parse_text(
        "model.name = burgers_arctan\n"
        "model.q_bar = 0.0625\n"
        "run.snapshot_times = 0.1, 0.2\n");
    nlohmann::json j = c.to_json();
    CHECK(j["model"]["name"] == "burgers_arctan");
    Config back = Config::from_json(j);
    CHECK(back.entries() == c.entries());

    // json file with typed scalars and an array flattens to the same keys
    fs::path jp = tmp.path / "meta.json";
    write_file(jp, R"({"model": {"name": "burgers_arctan", "q_bar": 0.0625},
                      "grid": {"n": 801},
                      "run": {"snapshot_times": [0.1, 0.2], "verbose": true}})");
    Config cj = Config::load(jp);
    CHECK(cj.get_string("model.name") == "burgers_arctan");
    CHECK(cj.get_double("model.q_bar") == 0.0625);
    CHECK(cj.get_int("grid.n") == 801);
    CHECK(cj.get_double_list("run.snapshot_times") == std::vector<double>{0.1, 0.2});
    CHECK(cj.get_bool("run.verbose", false));

    // text file goes through the text parser
    fs::path tp = tmp.path / "run.conf";
    write_file(tp, "model.name = zero_flux_beta\nmodel.beta = 3\n");
    Config ct = Config::load(tp);
    CHECK(ct.get_string("model.name") == "zero_flux_beta");
    CHECK(ct.get_double("model.beta") == 3.0);
    CHECK_THROWS_AS(Config::load(tmp.path / "absent.conf"), std::runtime_error);
}

TEST_CASE("svg plots are written with axes, series and legend", "[io]") {
    TempDir tmp;
    fs::path p = tmp.path / "plot.svg";
    SvgSeries a;
    a.label = "profile";
    for (double x : linspace(0.0, 1.0, 65)) {
        a.x.push_back(x);
        a.y.push_back(std::cos(6.0 * x));
    }
    SvgSeries b;
    b.label = "floor";
    b.color = "#d62728";
    b.x = {0.0, 1.0};
    b.y = {-1.0, -1.0};
    write_svg_lines(p, "test plot", {a, b});

    std::string svg = read_file(p);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("test plot") != std::string::npos);
    CHECK(svg.find("profile") != std::string::npos);
    CHECK(svg.find("#d62728") != std::string::npos);
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
    size_t polylines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1))
        ++polylines;
    CHECK(polylines == 2);

    SvgSeries mismatch;
    mismatch.x = {0.0, 1.0};
    mismatch.y = {0.0};
    CHECK_THROWS_AS(write_svg_lines(tmp.path / "bad.svg", "t", {mismatch}),
                    std::invalid_argument);
}
