#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "phi4lab/config.hpp"
#include "phi4lab/field_io.hpp"
#include "phi4lab/rng.hpp"
#include "phi4lab/coefficients.hpp"

using namespace phi4lab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("default profiles") {
    const LabConfig smoke = default_config("smoke");
    CHECK(smoke.dim == 1);
    CHECK(smoke.points == 64);
    CHECK(smoke.dt == 1e-3);
    CHECK(smoke.epsilon == 0.1);
    CHECK(smoke.ells == std::vector<double>{2.0, 4.0, 8.0});

    const LabConfig full = default_config("full");
    CHECK(full.dim == 3);
    CHECK(full.points == 32);
    CHECK(full.dt == 5e-4);

    CHECK_THROWS_AS(default_config("quick"), std::invalid_argument);
}

TEST_CASE("parser accepts an empty document and comments") {
    const LabConfig cfg = parse_config("");
    CHECK(cfg.points == 64);
    CHECK(cfg.seed == 2026);

    const LabConfig c2 = parse_config(
        "# a comment\n"
        "\n"
        "points = 128   # trailing comment\n"
        "ells = 1, 2.5, 8\n"
        "seed = 99\n");
    CHECK(c2.points == 128);
    CHECK(c2.ells == std::vector<double>{1.0, 2.5, 8.0});
    CHECK(c2.seed == 99);
    // untouched keys keep their base values
    CHECK(c2.epsilon == 0.1);
}

TEST_CASE("parser reports the offending line") {
    const auto message_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string("no throw");
    };
    CHECK(message_of("dim = 1\nnonsense\n").find("config line 2") == 0);
    CHECK(message_of("typo_key = 3\n").find("unknown key 'typo_key'") !=
          std::string::npos);
    CHECK(message_of("dt = fast\n").find("not a number") !=
          std::string::npos);
    CHECK(message_of("dt = 1e-3junk\n").find("trailing junk") !=
          std::string::npos);
    CHECK(message_of("points = 8.5\n").find("not an integer") !=
          std::string::npos);
    CHECK(message_of("points =\n").find("empty value") != std::string::npos);
    CHECK(message_of("ells = 1,,2\n").find("empty entry") !=
          std::string::npos);
}

TEST_CASE("validation rejects out-of-range physics knobs") {
    CHECK_THROWS_WITH_AS(parse_config("epsilon = 0.3\n"),
                         doctest::Contains("exponent table"),
                         std::invalid_argument);
    CHECK_NOTHROW(parse_config("epsilon = 0.25\n"));
    CHECK_THROWS_AS(parse_config("points = 48\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("dim = 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("replicas = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("ells = -1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("dt = 0\n"), std::invalid_argument);
}

TEST_CASE("load_config reads a file over a base") {
    const std::string path = tmp_path("phi4lab_cfg_test.cfg");
    {
        std::ofstream out(path);
        out << "points = 32\nout_dir = elsewhere\n";
    }
    LabConfig base;
    base.seed = 7;
    const LabConfig cfg = load_config(path, base);
    CHECK(cfg.points == 32);
    CHECK(cfg.out_dir == "elsewhere");
    CHECK(cfg.seed == 7);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"),
                    std::runtime_error);
}

TEST_CASE("field snapshots round trip bitwise") {
    const TorusGrid g = make_torus_grid(2, 16);
    Rng rng(11);
    const Field f = synthesize_holder_field(g, 0.7, 1.3, rng, 2);
    const std::string path = tmp_path("phi4lab_field_test.fld");
    save_field(f, path);
    const Field back = load_field(path);
    REQUIRE(back.grid().dim == 2);
    REQUIRE(back.grid().points_per_axis == 16);
    REQUIRE(back.components() == 2);
    CHECK(back.grid().side_length == f.grid().side_length);
    auto a = f.values();
    auto b = back.values();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    std::remove(path.c_str());
}

TEST_CASE("field loader rejects foreign and truncated files") {
    CHECK_THROWS_AS(load_field("/nonexistent/field.fld"),
                    std::runtime_error);

    const std::string junk = tmp_path("phi4lab_junk_test.fld");
    {
        std::ofstream out(junk, std::ios::binary);
        out << "definitely not a field snapshot";
    }
    CHECK_THROWS_WITH_AS(load_field(junk),
                         doctest::Contains("not a field snapshot"),
                         std::runtime_error);
    std::remove(junk.c_str());

    // a valid header cut off mid-payload
    const TorusGrid g = make_torus_grid(1, 8);
    const std::string path = tmp_path("phi4lab_trunc_test.fld");
    save_field(Field::constant(g, 1.5), path);
    const std::string whole = slurp(path);
    {
        std::ofstream out(path, std::ios::binary);
        out.write(whole.data(), static_cast<long>(whole.size() - 12));
    }
    CHECK_THROWS_WITH_AS(load_field(path), doctest::Contains("truncated"),
                         std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("csv output is byte-deterministic") {
    const auto emit = [](const std::string& path) {
        CsvWriter csv(path, {"a", "b", "c"});
        csv.row({CsvWriter::num(1), CsvWriter::num(0.1),
                 CsvWriter::num(-2.5e-7)});
        csv.row({CsvWriter::num(2), CsvWriter::num(1.0 / 3.0),
                 CsvWriter::num(1e300)});
    };
    const std::string p1 = tmp_path("phi4lab_csv_a.csv");
    const std::string p2 = tmp_path("phi4lab_csv_b.csv");
    emit(p1);
    emit(p2);
    const std::string body = slurp(p1);
    CHECK(body == slurp(p2));
    CHECK(body.find("a,b,c\n") == 0);
    // LF only, no CR anywhere
    CHECK(body.find('\r') == std::string::npos);
    // shortest-round-trip formatting keeps values exact
    CHECK(std::stod(CsvWriter::num(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(CsvWriter::num(1.5) == "1.5");
    CHECK(CsvWriter::num(42) == "42");
    std::remove(p1.c_str());
    std::remove(p2.c_str());

    CsvWriter csv(tmp_path("phi4lab_csv_c.csv"), {"x", "y"});
    CHECK_THROWS_AS(csv.row({"only-one"}), std::invalid_argument);
}

TEST_CASE("verdict files parse back with the expected shape") {
    const std::string path = tmp_path("phi4lab_verdict_test.json");
    write_verdict(path, "demo",
                  {{"first", 1.5, 2.0, true, "with a note"},
                   {"second", 3.0, 2.0, false, ""}},
                  {{{"config", 0.0}, {"margin", 0.25}}});
    const auto doc = nlohmann::json::parse(slurp(path));
    CHECK(doc["scenario"] == "demo");
    REQUIRE(doc["criteria"].size() == 2);
    CHECK(doc["criteria"][0]["criterion"] == "first");
    CHECK(doc["criteria"][0]["observed"] == 1.5);
    CHECK(doc["criteria"][0]["threshold"] == 2.0);
    CHECK(doc["criteria"][0]["pass"] == true);
    CHECK(doc["criteria"][0]["note"] == "with a note");
    CHECK(!doc["criteria"][1].contains("note"));
    CHECK(doc["pass"] == false);  // one failing criterion sinks the file
    REQUIRE(doc["entries"].size() == 1);
    CHECK(doc["entries"][0]["margin"] == 0.25);

    // no rows -> no entries key at all
    write_verdict(path, "demo", {{"only", 0.0, 1.0, true, ""}});
    const auto lean = nlohmann::json::parse(slurp(path));
    CHECK(!lean.contains("entries"));
    CHECK(lean["pass"] == true);
    std::remove(path.c_str());
}
