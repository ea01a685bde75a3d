#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ionsim/io.hpp"

using namespace ionsim::io;
namespace fs = std::filesystem;

TEST_CASE("config parse, typed access, diagnostics") {
  const std::string text =
      "# comment\n"
      "[run]\n"
      "seed = 42\n"
      "out = results   # trailing comment\n"
      "\n"
      "[readout]\n"
      "p_f = 3.0e-3\n"
      "n_pulses = 400\n"
      "enabled = true\n";
  const auto cfg = Config::parse(text, "test.ini");
  CHECK(cfg.get_u64("run", "seed") == 42);
  CHECK(cfg.get_string("run", "out") == "results");
  CHECK(cfg.get_double("readout", "p_f") == doctest::Approx(3e-3));
  CHECK(cfg.get_int("readout", "n_pulses") == 400);
  CHECK(cfg.get_bool("readout", "enabled"));
  CHECK(cfg.get_int("readout", "absent", 7) == 7);

  CHECK_THROWS_AS(cfg.get_double("run", "out"), ConfigError);
  CHECK_THROWS_AS(cfg.get_string("nope", "x"), ConfigError);
  // the diagnostic names the line of the offending key
  try {
    (void)cfg.get_int("readout", "p_f");
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("test.ini:7") != std::string::npos);
  }
}

TEST_CASE("config syntax errors") {
  CHECK_THROWS_AS(Config::parse("key = 1\n", "x"), ConfigError);       // outside section
  CHECK_THROWS_AS(Config::parse("[a\nk = 1\n", "x"), ConfigError);     // unterminated
  CHECK_THROWS_AS(Config::parse("[a]\nnovalue\n", "x"), ConfigError);  // no '='
  CHECK_THROWS_AS(Config::parse("[a]\nk = 1\nk = 2\n", "x"), ConfigError); // duplicate
}

TEST_CASE("schema rejects unknown sections and keys") {
  const auto cfg = Config::parse("[run]\nseed = 1\nbogus = 2\n", "x");
  CHECK_THROWS_AS(cfg.check_schema({{"run", {"seed"}}}), ConfigError);
  CHECK_NOTHROW(cfg.check_schema({{"run", {"seed", "bogus"}}}));
  const auto cfg2 = Config::parse("[mystery]\nk = 1\n", "x");
  CHECK_THROWS_AS(cfg2.check_schema({{"run", {"seed"}}}), ConfigError);
}

TEST_CASE("config round-trips through serialize") {
  const auto cfg = Config::parse("[b]\nz = 3\na = 1\n[a]\nk = hello world\n", "x");
  const std::string s1 = cfg.serialize();
  const auto cfg2 = Config::parse(s1, "y");
  CHECK(cfg2.serialize() == s1);
  CHECK(cfg2.get_string("a", "k") == "hello world");
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("csv writer emits header block, units and stable formatting") {
  CsvWriter w("demo", {"x", "y"}, {"s", ""});
  w.comment("note: 1");
  w.row({1.0, 0.5});
  w.row({2.5e-7, 1.0 / 3.0});
  const std::string out = w.serialize("deadbeef");
  CHECK(out.find("# demo\n") == 0);
  CHECK(out.find("# note: 1\n") != std::string::npos);
  CHECK(out.find("# config_hash: deadbeef\n") != std::string::npos);
  CHECK(out.find("# units: s,-\n") != std::string::npos);
  CHECK(out.find("x,y\n") != std::string::npos);
  CHECK(out.find("2.5e-07,0.333333333333\n") != std::string::npos);
  CHECK_THROWS(w.row({1.0})); // width mismatch
}

TEST_CASE("atomic_write leaves no temp file and replaces contents") {
  const fs::path dir = fs::temp_directory_path() / "ionsim_io_test";
  fs::remove_all(dir);
  const fs::path f = dir / "a.csv";
  atomic_write(f, "one\n");
  atomic_write(f, "two\n");
  std::ifstream in(f);
  std::string got((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(got == "two\n");
  CHECK(!fs::exists(dir / "a.csv.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("manifest JSON carries the run identity") {
  RunManifest m;
  m.subcommand = "ssro";
  m.target = "readout-histograms";
  m.seed = 7;
  m.config_hash = "00ff";
  m.version = kToolkitVersion;
  m.outputs = {"a.csv", "b.csv"};
  const std::string j = m.to_json();
  CHECK(j.find("\"subcommand\": \"ssro\"") != std::string::npos);
  CHECK(j.find("\"seed\": 7") != std::string::npos);
  CHECK(j.find("a.csv") != std::string::npos);
}
