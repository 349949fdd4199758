#include "darkcool/error.hpp"
#include "darkcool/run_config.hpp"
#include "darkcool/tasks.hpp"
#include "doctest.h"

using namespace darkcool;
using nlohmann::json;

TEST_SUITE("run_config") {
  TEST_CASE("preset drive with overrides") {
    auto doc = json::parse(R"({"task": "spectrum", "drive": {"preset": "fig3", "g42": 3.5},
                               "scan": {"lo": -8, "hi": 8, "points": 101}})");
    const auto cfg = parse_run_config(doc);
    CHECK(cfg.task == Task::spectrum);
    CHECK(cfg.drive.g41 == doctest::Approx(0.04));
    CHECK(cfg.drive.g42 == doctest::Approx(3.5));
    REQUIRE(cfg.scan.has_value());
    CHECK(cfg.scan->points == 101);
  }

  TEST_CASE("missing and unknown keys name the offending path") {
    auto doc = json::parse(R"({"task": "spectrum", "drive": {"g_p": 1e-4},
                               "scan": {"lo": -8, "hi": 8, "points": 101}})");
    CHECK_THROWS_WITH_AS(parse_run_config(doc), doctest::Contains("drive.g"), ConfigError);
    doc = json::parse(R"({"task": "spectrum", "drive": {"preset": "fig3"}, "colour": 1,
                          "scan": {"lo": -8, "hi": 8, "points": 101}})");
    CHECK_THROWS_WITH_AS(parse_run_config(doc), doctest::Contains("colour"), ConfigError);
    doc = json::parse(R"({"task": "mcwf", "drive": {"preset": "fig3"}})");
    CHECK_THROWS_AS(parse_run_config(doc), ConfigError);
  }

  TEST_CASE("dotted overrides") {
    json doc = json::parse(R"({"drive": {"preset": "fig3"}})");
    apply_override(doc, "drive.delta_p=-0.5");
    apply_override(doc, "output.directory=somewhere");
    CHECK(doc["drive"]["delta_p"].get<double>() == -0.5);
    CHECK(doc["output"]["directory"].get<std::string>() == "somewhere");
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  }

  TEST_CASE("explicit form round-trips") {
    auto doc = json::parse(R"({"task": "temperature", "species": {"preset": "hg"},
                               "drive": {"preset": "fig3_1"},
                               "scan": {"lo": -800, "hi": -100, "points": 8, "unit": "recoil"}})");
    const auto a = parse_run_config(doc);
    const auto b = parse_run_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
    REQUIRE(b.species.has_value());
    CHECK(b.species->mass() == doctest::Approx(a.species->mass()));
  }

  TEST_CASE("task names and CSV headers") {
    for (auto t : {Task::spectrum, Task::friction, Task::diffusion, Task::temperature, Task::mcwf,
                   Task::validate}) {
      CHECK(parse_task(to_string(t)) == t);
      CHECK_FALSE(csv_header(t).empty());
    }
    CHECK(csv_header(Task::temperature) ==
          "delta_p_gamma,delta_p_recoil,eta_scaled,d_scaled,t_scaled,status");
    CHECK_THROWS_AS(parse_task("dance"), ConfigError);
    CHECK_THROWS_AS(preset_fragment("fig9"), ConfigError);
  }
}
