#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cbcond/cli.hpp"
#include "cbcond/config.hpp"
#include "cbcond/extinction.hpp"
#include "cbcond/laws.hpp"
#include "cbcond/scale.hpp"

using namespace cbcond;

namespace {

const std::string kConfigs = CBCOND_CONFIG_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string cfg(const std::string& name) { return kConfigs + "/" + name + ".json"; }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("info summaries") {
  auto r = run({"info", "--mech", cfg("linear_plus_quadratic")});
  CHECK(r.code == 0);
  CHECK(lines(r.out).back() == "Subcritical; Grey holds; E_x[ζ] finite; xlogx holds");
  r = run({"info", "--mech", cfg("quadratic")});
  CHECK(lines(r.out).back() == "Critical; Grey holds; E_x[ζ] infinite");
  r = run({"info", "--mech", cfg("stable_tail")});
  CHECK(lines(r.out).back() == "Critical; Grey holds; E_x[ζ] finite");
}

TEST_CASE("exit codes") {
  CHECK(run({"info"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"info", "--mech", kConfigs + "/missing.json"}).code == 2);
  CHECK(run({"law", "--mech", cfg("quadratic"), "--kind", "yaglom", "--lambda", "1"}).code == 2);
  CHECK(run({"mc", "nope", "--mech", cfg("quadratic")}).code == 2);
  CHECK(run({"--version"}).code == 0);
  const auto tmp = std::filesystem::temp_directory_path() / "cbcond_bad.json";
  std::ofstream(tmp) << "{\"alpha\": 0,\n \"sigma2\": }";
  const auto r = run({"info", "--mech", tmp.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("verify passes on the bundled configs") {
  for (const char* name : {"quadratic", "linear_plus_quadratic", "stable_1.5_triplet"}) {
    const auto r = run({"verify", "--mech", cfg(name)});
    CHECK_MESSAGE(r.code == 0, r.out);
  }
  const auto r = run({"verify", "--mech", cfg("quadratic")});
  CHECK(r.out.find("n/a (critical)") != std::string::npos);
}

TEST_CASE("tables are thin wrappers over the library") {
  const auto m = mechanism_from_text(read_file(cfg("linear_plus_quadratic")));
  const ExtinctionKernel k(m);
  const ScaleFunction sf(k);
  auto r = run({"phi", "--mech", cfg("linear_plus_quadratic"), "--lambda", "0.5,2"});
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == "lambda,phi,est_error");
  CHECK(ls[1].rfind("0.5," + cli::format_number(k.phi(0.5)) + ",", 0) == 0);

  r = run({"scale-table", "--mech", cfg("linear_plus_quadratic"), "--xmin", "1", "--xmax", "2", "--n", "2"});
  ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[2] == "2," + cli::format_number(sf.W(2.0)) + "," + cli::format_number(sf.W_prime(2.0)) + "," +
                     cli::format_number(sf.stationary_density(2.0)));

  r = run({"law", "--mech", cfg("linear_plus_quadratic"), "--kind", "vq", "--q", "0.5", "--lambda", "1.5"});
  ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[1].rfind("1.5," + cli::format_number(vq_lt(k, 0.5, 1.5)) + ",", 0) == 0);

  r = run({"oracle", "--family", "stable(1.5)", "--quantity", "W", "--args", "4"});
  CHECK(lines(r.out)[1] == cli::format_number(2.0 / std::tgamma(1.5)));

  r = run({"potential", "--mech", cfg("quadratic"), "--x", "1", "--mass"});
  CHECK(lines(r.out)[1] == "1,inf");
}

TEST_CASE("mc output is byte-identical for a fixed seed and worker count") {
  const std::vector<std::string> args{"mc", "near-extinction", "--mech", cfg("quadratic"), "--seed", "5",
                                      "--n", "2000", "--t", "5", "--workers", "3"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  for (const char* key : {"estimate", "half_width", "ess", "diagnostics", "target", "ks"}) CHECK(j.contains(key));
}

TEST_CASE("output directory and manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "cbcond_cli_out";
  std::filesystem::remove_all(dir);
  const auto r = run({"mc", "transition", "--mech", cfg("quadratic"), "--n", "500", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto man = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
  for (const auto& f : man["outputs"]) CHECK(std::filesystem::exists(dir / f.get<std::string>()));
  CHECK(man["config_hash"] == cli::fnv1a_hex(read_file(cfg("quadratic"))));
  CHECK(man["version"] == cli::kVersion);
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
}
