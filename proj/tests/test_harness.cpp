#include "doctest.h"

#include "flowlab/config.hpp"
#include "flowlab/csv.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/experiment.hpp"
#include "flowlab/linalg.hpp"
#include "flowlab/regime.hpp"
#include "flowlab/version.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace flowlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// fresh scratch directory per test case
std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "flowlab_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

int run_tool(const std::string& args) {
#ifdef FLOWLAB_TOOL_PATH
  const std::string cmd = std::string(FLOWLAB_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
#else
  (void)args;
  return -1;
#endif
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("config: parses dotted keys, comments, and duplicate overrides") {
  const Config cfg = Config::parse(
      "# leading comment\n"
      "\n"
      "a.b = 1.5\n"
      "  name =  hello world \n"
      "flag=true   # trailing comment\n"
      "a.b = 2.5\n"
      "empty.value =\n");
  CHECK(cfg.entries.size() == 4);
  CHECK(cfg.get_double("a.b") == 2.5);  // the last assignment wins
  CHECK(cfg.get_string("name") == "hello world");
  CHECK(cfg.get_bool("flag", false) == true);
  CHECK(cfg.get_string("empty.value") == "");
  CHECK(cfg.has("a.b"));
  CHECK(!cfg.has("a.c"));

  CHECK_THROWS_WITH_AS(Config::parse("just words\n"),
                       "config line 1: expected key = value", ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("ok = 1\nbroken line\n"),
                       "config line 2: expected key = value", ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse(" = 3\n"), "config line 1: empty key", ConfigError);
}

TEST_CASE("config: serializes sorted and hashes stably") {
  Config a;
  a.set("zeta", "1");
  a.set("alpha", "2");
  a.set("mid.key", "x");
  CHECK(a.serialize() == "alpha = 2\nmid.key = x\nzeta = 1\n");

  // logically equal configs hash equal regardless of insertion order
  Config b;
  b.set("mid.key", "x");
  b.set("zeta", "1");
  b.set("alpha", "2");
  CHECK(a.hash() == b.hash());
  CHECK(Config::parse(a.serialize()).entries == a.entries);

  b.set("alpha", "3");
  CHECK(a.hash() != b.hash());

  // FNV-1a over the empty serialization is the offset basis
  CHECK(Config{}.hash() == 14695981039346656037ULL);
}

TEST_CASE("config: typed getters validate their inputs") {
  Config cfg = Config::parse(
      "num = -3.25e2\n"
      "int = 42\n"
      "neg = -7\n"
      "yes = on\n"
      "no = off\n"
      "list = 1, 2.5 ,3\n"
      "badnum = abc\n"
      "traild = 1.5x\n"
      "traili = 3.7\n"
      "badbool = maybe\n"
      "empties = ,\n");
  CHECK(cfg.get_double("num") == -325.0);
  CHECK(cfg.get_double("missing", 9.5) == 9.5);
  CHECK(cfg.get_int("int") == 42);
  CHECK(cfg.get_int("neg") == -7);
  CHECK(cfg.get_int("missing", 11) == 11);
  CHECK(cfg.get_bool("yes", false) == true);
  CHECK(cfg.get_bool("no", true) == false);
  CHECK(cfg.get_bool("missing", true) == true);
  CHECK(cfg.get_double_list("list", "0") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(cfg.get_double_list("missing", "4,5") == std::vector<double>{4.0, 5.0});

  CHECK_THROWS_WITH_AS(cfg.get_string("nope"), "config: missing required key 'nope'", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_double("badnum"),
                       "config key 'badnum': expected a number, got 'abc'", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_double("traild"),
                       "config key 'traild': trailing characters in '1.5x'", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_int("badnum"),
                       "config key 'badnum': expected an integer, got 'abc'", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_int("traili"),
                       "config key 'traili': trailing characters in '3.7'", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_bool("badbool", false),
                       "config key 'badbool': expected a boolean, got 'maybe'", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_double_list("empties", "1"),
                       "config key 'empties': expected a list of numbers", ConfigError);
}

TEST_CASE("config: loads files and reports unreadable paths") {
  const std::string dir = scratch("config_load");
  const std::string path = dir + "/run.cfg";
  {
    std::ofstream out(path);
    out << "experiment.kind = classify\nclassify.resolution = 7\n";
  }
  const Config cfg = Config::load(path);
  CHECK(cfg.get_string("experiment.kind") == "classify");
  CHECK(cfg.get_int("classify.resolution") == 7);

  const std::string missing = dir + "/absent.cfg";
  CHECK_THROWS_WITH_AS(Config::load(missing), ("config: cannot open '" + missing + "'").c_str(),
                       ConfigError);
}

TEST_CASE("csv: decimal rendering round-trips and files are written verbatim") {
  for (double v : {1.0 / 3.0, -0.0, 2.718281828459045, 1e-300, 6.02e23, 5.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(5.0) == "5");
  CHECK(format_double(0.5) == "0.5");

  const std::string dir = scratch("csv");
  write_csv(dir + "/t.csv", {"a", "b"}, {{"1", "x"}, {"2", "y"}});
  CHECK(slurp(dir + "/t.csv") == "a,b\n1,x\n2,y\n");

  // refuses silently-unwritable paths
  CHECK_THROWS_AS(write_csv(dir + "/no_dir/t.csv", {"a"}, {}), ConfigError);
}

TEST_CASE("drift: built from configuration keys") {
  Config cfg;
  const DriftField dz = drift_from_config(cfg);  // defaults
  CHECK(dz.kind == DriftKind::zero);
  CHECK(dz.dim == 2);
  CHECK(dz.T == 1.0);

  cfg.set("drift.kind", "constant");
  cfg.set("drift.value", "0.7,-0.1");
  cfg.set("drift.T", "2");
  const DriftField dc = drift_from_config(cfg);
  CHECK(dc.kind == DriftKind::constant);
  CHECK(dc.dim == 2);
  CHECK(dc.T == 2.0);
  const Vec c = dc.eval(0.3, vec2(5.0, 5.0));
  CHECK(c[0] == 0.7);
  CHECK(c[1] == -0.1);

  cfg.set("drift.kind", "smooth_bump");
  cfg.set("drift.dim", "1");
  cfg.set("drift.amplitude", "0.25");
  const DriftField db = drift_from_config(cfg);
  CHECK(db.kind == DriftKind::smooth_bump);
  CHECK(db.dim == 1);

  cfg.set("drift.kind", "counterexample_f");
  cfg.set("drift.alpha", "0.6");
  cfg.set("drift.eps", "0.04");
  cfg.set("drift.t1", "1.5");
  const DriftField df = drift_from_config(cfg);
  CHECK(df.kind == DriftKind::counterexample_f);
  CHECK(df.alpha == 0.6);
  CHECK(df.eps == 0.04);
  CHECK(df.t1 == 1.5);
  CHECK(df.dim == 2);

  cfg.set("drift.kind", "counterexample_h");
  const DriftField dh = drift_from_config(cfg);
  CHECK(dh.kind == DriftKind::counterexample_h);
  CHECK(dh.alpha == 0.6);

  cfg.set("drift.kind", "spiral");
  CHECK_THROWS_WITH_AS(drift_from_config(cfg), "drift.kind: unknown kind 'spiral'", ConfigError);
  cfg.set("drift.kind", "constant");
  cfg.set("drift.value", "1,2,3,4");
  CHECK_THROWS_AS(drift_from_config(cfg), ConfigError);
}

TEST_CASE("experiment: runs write the declared outputs plus a manifest") {
  const std::string dir = scratch("blowup_run");
  Config cfg;
  cfg.set("experiment.kind", "blowup-demo");
  cfg.set("mc.n_paths", "8");
  cfg.set("paths.n_steps", "64");
  cfg.set("blowup.deltas", "0.04,0.02");

  const RunManifest m = run_experiment(cfg, dir);
  CHECK(m.config_hash == cfg.hash());
  CHECK(m.version_tag == version_string);
  CHECK(m.master_seed == 12345);  // paths.seed default
  CHECK(m.wall_ms >= 0.0);
  REQUIRE(m.outputs == std::vector<std::string>{"blowup.csv", "blowup.svg"});
  for (const auto& f : m.outputs) CHECK(fs::exists(dir + "/" + f));

  // the manifest file mirrors the returned record
  const std::string manifest = slurp(dir + "/manifest.txt");
  char hash_line[64];
  std::snprintf(hash_line, sizeof(hash_line), "config_hash = %016llx\n",
                static_cast<unsigned long long>(cfg.hash()));
  CHECK(manifest.find(hash_line) != std::string::npos);
  CHECK(manifest.find(std::string("version = ") + version_string + "\n") != std::string::npos);
  CHECK(manifest.find("seed = 12345\n") != std::string::npos);
  CHECK(manifest.find("output = blowup.csv\n") != std::string::npos);
  CHECK(manifest.find("output = blowup.svg\n") != std::string::npos);

  // the blowup table has one row per cutoff and a fixed header
  const std::string csv = slurp(dir + "/blowup.csv");
  CHECK(csv.rfind("delta,mean,std_error,n,censored\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("experiment: outputs are byte-identical across worker counts") {
  Config oc;
  oc.set("experiment.kind", "oracle-check");
  oc.set("oracle.tuples", "0.3:0.1:0.5:1:0.6;0.2:0.3:1:10:0.6");
  oc.set("mc.n", "20000");
  oc.set("mc.workers", "1");
  const std::string d1 = scratch("oracle_w1");
  run_experiment(oc, d1);
  oc.set("mc.workers", "4");
  const std::string d4 = scratch("oracle_w4");
  run_experiment(oc, d4);
  CHECK(slurp(d1 + "/oracle.csv") == slurp(d4 + "/oracle.csv"));

  Config bd;
  bd.set("experiment.kind", "blowup-demo");
  bd.set("mc.n_paths", "16");
  bd.set("paths.n_steps", "64");
  bd.set("mc.workers", "1");
  const std::string b1 = scratch("blowup_w1");
  run_experiment(bd, b1);
  bd.set("mc.workers", "3");
  const std::string b3 = scratch("blowup_w3");
  run_experiment(bd, b3);
  CHECK(slurp(b1 + "/blowup.csv") == slurp(b3 + "/blowup.csv"));
}

TEST_CASE("experiment: failed runs remove their partial outputs") {
  const std::string dir = scratch("fail_run");
  // occupy the second output name with a non-empty directory so its write fails
  fs::create_directories(dir + "/flow.svg/occupied");
  Config cfg;
  cfg.set("experiment.kind", "simulate-flow");
  cfg.set("paths.n_steps", "32");
  CHECK_THROWS_AS(run_experiment(cfg, dir), ConfigError);
  CHECK(!fs::exists(dir + "/flow.csv"));      // written first, then discarded
  CHECK(!fs::exists(dir + "/manifest.txt"));  // never reached

  Config bad;
  bad.set("experiment.kind", "warp-drive");
  CHECK_THROWS_WITH_AS(run_experiment(bad, scratch("bad_kind")),
                       "experiment.kind: unknown kind 'warp-drive'", ConfigError);
  CHECK_THROWS_WITH_AS(run_experiment(Config{}, scratch("no_kind")),
                       "config: missing required key 'experiment.kind'", ConfigError);
}

TEST_CASE("experiment: the environment seed overrides the configured one") {
  Config cfg;
  cfg.set("experiment.kind", "classify");
  cfg.set("classify.resolution", "5");
  cfg.set("paths.seed", "42");

  const RunManifest base = run_experiment(cfg, scratch("seed_base"));
  CHECK(base.master_seed == 42);

  setenv("FLOWLAB_SEED", "777", 1);
  const RunManifest env = run_experiment(cfg, scratch("seed_env"));
  CHECK(env.master_seed == 777);

  setenv("FLOWLAB_SEED", "xyz", 1);
  CHECK_THROWS_WITH_AS(run_experiment(cfg, scratch("seed_bad")),
                       "FLOWLAB_SEED: expected an unsigned integer, got 'xyz'", ConfigError);
  unsetenv("FLOWLAB_SEED");

  const RunManifest after = run_experiment(cfg, scratch("seed_after"));
  CHECK(after.master_seed == 42);
}

TEST_CASE("regime diagram: covers the classification grid") {
  const std::string dir = scratch("diagram");
  Config cfg;
  cfg.set("classify.resolution", "9");
  const std::vector<std::string> files = emit_regime_diagram(cfg, dir);
  CHECK(files == std::vector<std::string>{"regime_diagram.csv", "regime_diagram.svg"});
  const std::string csv = slurp(dir + "/regime_diagram.csv");
  CHECK(csv.rfind("q,alpha,two_over_q,label\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 9 * 9);

  // every row carries one of the three labels
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  int strong = 0, non = 0, indet = 0;
  while (std::getline(in, line)) {
    if (line.find("StrongExistence") != std::string::npos) ++strong;
    else if (line.find("NonExistence") != std::string::npos) ++non;
    else if (line.find("Indeterminate") != std::string::npos) ++indet;
  }
  CHECK(strong + non + indet == 81);
  CHECK(strong > 0);
  CHECK(non > 0);
  CHECK(indet > 0);

  const std::string svg = slurp(dir + "/regime_diagram.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
}

TEST_CASE("cli: exit codes separate configuration, numerical, and success paths") {
#ifndef FLOWLAB_TOOL_PATH
  FAIL("FLOWLAB_TOOL_PATH not defined");
#else
  const std::string out = scratch("cli");
  CHECK(run_tool("classify --out " + out + "/ok --set classify.resolution=5") == 0);
  CHECK(run_tool("classify --out " + out + "/cfg --set classify.resolution=abc") == 2);
  CHECK(run_tool("no-such-subcommand") == 2);
  // grid nodes collapse under an absurd grading exponent: a numerical failure
  CHECK(run_tool("simulate-flow --out " + out +
                 "/num --set drift.kind=counterexample_f --set paths.grading=40") == 3);
  CHECK(fs::exists(out + "/ok/manifest.txt"));
  CHECK(!fs::exists(out + "/num/manifest.txt"));
#endif
}

} // TEST_SUITE
