#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "flexplan/config.hpp"
#include "flexplan/csv.hpp"

using namespace flexplan;

TEST_CASE("config parsing") {
    Config cfg = Config::from_string(
        "# comment\n"
        "alpha_db_per_km = 0.21\n"
        "grid_slots=320\n"
        "  menu_round_down = true \n"
        "\n"
        "name = test run\n");
    CHECK(cfg.get_double("alpha_db_per_km", 0.2) == doctest::Approx(0.21));
    CHECK(cfg.get_int("grid_slots", 400) == 320);
    CHECK(cfg.get_bool("menu_round_down", false));
    CHECK(cfg.get_string("name", "") == "test run");
    CHECK(cfg.get_double("missing", 1.5) == 1.5);
    CHECK(!cfg.has("missing"));

    CHECK_THROWS(Config::from_string("not a key value line\n"));
    CHECK_THROWS((void)Config::from_string("x = abc\n").get_double("x", 0.0));
    CHECK_THROWS((void)Config::from_string("x = maybe\n").get_bool("x", false));
}

TEST_CASE("environment overrides config values") {
    Config cfg = Config::from_string("alpha_db_per_km = 0.2\n");
    setenv("FLEXPLAN_ALPHA_DB_PER_KM", "0.25", 1);
    CHECK(cfg.get_double("alpha_db_per_km", 0.0) == doctest::Approx(0.25));
    CHECK(cfg.has("alpha_db_per_km"));
    unsetenv("FLEXPLAN_ALPHA_DB_PER_KM");
    CHECK(cfg.get_double("alpha_db_per_km", 0.0) == doctest::Approx(0.2));
}

TEST_CASE("csv round trip with comments") {
    CsvTable table;
    table.comments = {"generated by a test"};
    table.header = {"a", "b"};
    table.rows = {{"1", format_double(0.1)}, {"2", format_double(12345.678901234567)}};
    write_csv("csv_rt.csv", table);

    CsvTable loaded = read_csv("csv_rt.csv");
    CHECK(loaded.comments == table.comments);
    CHECK(loaded.header == table.header);
    CHECK(loaded.rows == table.rows);
    CHECK(std::stod(loaded.rows[1][1]) == 12345.678901234567);  // exact round trip
    CHECK(loaded.column("b") == 1);
    CHECK(loaded.column("zz") == -1);
    CHECK_THROWS(loaded.require_columns({"zz"}));
    std::remove("csv_rt.csv");

    CHECK_THROWS(read_csv("/nonexistent/file.csv"));
}
