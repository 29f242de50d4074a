#include <sstream>
#include <string>

#include "json.hpp"

#include "affvol/cli.hpp"
#include "affvol/config.hpp"
#include "affvol/errors.hpp"
#include "doctest.h"

using namespace affvol;
using nlohmann::json;

namespace {

const char* rough_desk = R"(# rough Heston desk parameters
kernel.type = power_law
kernel.alpha = 0.6
model.lambda = 0.3
model.theta = 0.05
model.sigma = 0.3
model.rho = -0.7
model.V0 = 0.04
cmd.T = 1.0
)";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cmd(const std::string& command, const RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = run(command, cfg, out, err);
  return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("flat key = value documents") {
    const RunConfig c = parse_config(rough_desk);
    CHECK(c.kernel.type == "power_law");
    CHECK(c.kernel.alpha == 0.6);
    const ModelParams m = c.model_params();
    CHECK(m.beta == doctest::Approx(0.015).epsilon(1e-15));
    CHECK(m.a == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(m.rho == -0.7);
    CHECK(c.numerics.n == 500);
  }

  TEST_CASE("JSON documents and report members") {
    const RunConfig a = parse_config(R"({"kernel.type": "constant", "model.beta": 0.1, "model.lambda": 1.0, "cmd.u": "0,1"})");
    CHECK(a.model_params().beta == 0.1);
    CHECK(a.cmd.u == cplx(0.0, 1.0));
    const RunConfig b = parse_config(R"({"schema": 1, "config": {"model.V0": 0.2}, "result": {}})");
    CHECK(b.model.V0 == 0.2);
  }

  TEST_CASE("overrides win over the document") {
    const RunConfig c = parse_config(rough_desk, {{"model.rho", "-0.5"}, {"kernel.alpha", "0.7"}});
    CHECK(c.model.rho == -0.5);
    CHECK(c.kernel.alpha == 0.7);
  }

  TEST_CASE("problems are aggregated") {
    try {
      parse_config("model.bogus = 1\nmodel.rho = 3\nkernel.type = nope\nnumerics.n = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.problems().size() >= 4);
      const std::string all = e.what();
      CHECK(all.find("model.bogus") != std::string::npos);
      CHECK(all.find("kernel.type") != std::string::npos);
      CHECK(all.find("numerics.n") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("model.lambda = 1\nmodel.beta = 0.1\nmodel.theta = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.theta = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.a = 0.1\nmodel.sigma = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("this is not a pair\n"), ConfigError);
    CHECK_NOTHROW(parse_config("model.a = 0.25\nmodel.sigma = 0.5\n"));
  }

  TEST_CASE("configuration survives a JSON round trip exactly") {
    const RunConfig c = parse_config(rough_desk, {{"cmd.u", "0.5,-1.25"}, {"cmd.strikes", "[0.9, 1.0, 1.1]"}});
    const json j = config_to_json(c);
    const RunConfig back = parse_config(j.dump());
    CHECK(config_to_json(back) == j);
    CHECK(back.cmd.u == c.cmd.u);
    CHECK(back.cmd.strikes == c.cmd.strikes);
    CHECK(parse_complex(format_complex(cplx(0.1, 1.0 / 3.0))) == cplx(0.1, 1.0 / 3.0));

    const RunConfig e = parse_config("kernel.type = \"exp_sum\"\nkernel.atoms = [[0.5, 1.0], [0.25, 3.0]]\n");
    CHECK(e.kernel_spec()(0.0) == 0.75);
    CHECK(config_to_json(parse_config(config_to_json(e).dump())) == config_to_json(e));
    CHECK_THROWS_AS(parse_config("kernel.type = exp_sum\n"), ConfigError);
  }

  TEST_CASE("cf at u = v = w = 0 is one") {
    const Outcome o = run_cmd("cf", parse_config(rough_desk));
    REQUIRE(o.code == exit_ok);
    const json j = json::parse(o.out);
    CHECK(j["schema"] == 1);
    CHECK(j["command"] == "cf");
    CHECK(j["result"]["value_re"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(j["result"]["value_im"].get<double>() == doctest::Approx(0.0));
    CHECK(o.err.empty());
  }

  TEST_CASE("price with zero variance is intrinsic") {
    const RunConfig c = parse_config("cmd.strikes = [0.8]\n");
    const Outcome o = run_cmd("price", c);
    REQUIRE(o.code == exit_ok);
    const json j = json::parse(o.out);
    CHECK(j["result"][0]["price"].get<double>() == doctest::Approx(0.2).epsilon(1e-9));
  }

  TEST_CASE("CSV headers") {
    const RunConfig c = parse_config(rough_desk, {{"numerics.n", "50"}, {"cmd.paths", "200"}, {"cmd.steps", "20"}});
    CHECK(first_line(execute("resolvent", c)) == "t,R,cumulative_R");
    CHECK(first_line(execute("riccati", parse_config(rough_desk, {{"numerics.n", "50"}, {"cmd.u", "0,1"}}))) ==
          "t,re,im");
    CHECK(first_line(execute("simulate", c)) == "statistic,value");
    const std::string dump = execute("simulate", parse_config(rough_desk, {{"cmd.paths", "3"}, {"cmd.steps", "10"},
                                                                          {"cmd.dump_paths", "true"}}));
    CHECK(first_line(dump) == "path,t,V");
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 1 + 3 * 11);
  }

  TEST_CASE("lift-compare errors fall with the atom count") {
    const RunConfig c = parse_config(rough_desk, {{"numerics.n", "200"},
                                                  {"numerics.atom_counts", "[5, 20, 80]"},
                                                  {"cmd.u", "0,1"},
                                                  {"cmd.paths", "2000"},
                                                  {"cmd.steps", "50"}});
    const json j = json::parse(execute("lift-compare", c));
    const auto& rows = j["result"]["riccati"];
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(rows[i]["psi_error"].get<double>() < rows[i - 1]["psi_error"].get<double>());
    CHECK(j["result"]["moments"].contains("within_3se"));
  }

  TEST_CASE("exit codes and error records") {
    const Outcome bad = run_cmd("lift-compare", parse_config(rough_desk, {{"cmd.w", "-1"}}));
    CHECK(bad.code == exit_validation);
    CHECK(bad.out.empty());
    CHECK(json::parse(bad.err).contains("error"));

    const Outcome blow = run_cmd("riccati", parse_config("model.lambda = 0\nmodel.beta = 0\nmodel.sigma = 1\n"
                                                         "cmd.v = 10\ncmd.T = 5\nnumerics.n = 200\n"));
    CHECK(blow.code == exit_numerical);
    CHECK(blow.out.empty());
    CHECK(!blow.err.empty());

    CHECK(run_cmd("nonsense", parse_config("")).code == exit_validation);
    CHECK(exit_code_for(ConfigError({"x"})) == exit_validation);
    CHECK(exit_code_for(NumericalError("x")) == exit_numerical);
  }
}
