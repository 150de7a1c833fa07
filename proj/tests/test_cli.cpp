#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "srw/cli.hpp"
#include "srw/numerics.hpp"

using namespace srw;
using namespace srw::cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "srwalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("srwalk_test_" + name);
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(call({}).code == exit_usage);
  CHECK(call({"nonsense"}).code == exit_usage);
  CHECK(call({"--help"}).code == exit_pass);
  CHECK(call({"simulate", "--p", "0.5", "--horizon", "10"}).code == exit_pass);
  CHECK(call({"simulate", "--p", "1.5", "--horizon", "10"}).code == exit_usage);
  CHECK(call({"simulate", "--p", "abc", "--horizon", "10"}).code == exit_usage);
  CHECK(call({"simulate", "--p", "0.5"}).code == exit_usage);
  CHECK(call({"simulate", "--p", "0.5", "--horizon", "10", "--dist", "cauchy"}).code == exit_usage);
  CHECK(call({"simulate", "--p", "0.5", "--horizon", "10", "--bogus", "1"}).code == exit_usage);
  CHECK(call({"fluct", "--p", "0.4"}).code == exit_usage);
  CHECK(call({"fluct", "--p", "0.75", "--checkpoints", "16", "--horizon", "100"}).code == exit_usage);
  CHECK(call({"bridge", "--p", "0.75", "--grid", "0.5,0.25"}).code == exit_usage);
  CHECK(call({"exact", "--p", "0.75", "--n", "1,2", "--checkpoints", "3"}).code == exit_usage);
  CHECK(call({"exact", "--p", "0.4", "--n", "10", "--variance-limit"}).code == exit_usage);
  CHECK(call({"enumerate", "--p", "0.5", "--n", "11"}).code == exit_usage);
  CHECK(call({"enumerate", "--dist", "gaussian", "--p", "0.5", "--n", "3"}).code == exit_usage);
  CHECK(call({"equivalence", "--p", "0.6", "--q", "0.8"}).code == exit_pass);
  CHECK(call({"equivalence", "--p", "0.6", "--q", "0.7"}).code == exit_test_failure);
  CHECK(call({"equivalence", "--dist", "lattice:2", "--p", "0.6"}).code == exit_pass);
  CHECK(call({"equivalence", "--dist", "lattice:2", "--p", "0.6", "--q", "0.7", "--n", "3"}).code == exit_pass);
  CHECK(call({"equivalence"}).code == exit_usage);
}

TEST_CASE("simulate output is byte-identical across runs and worker counts") {
  const auto a = call({"simulate", "--dist", "lattice:2", "--p", "0.7", "--horizon", "5000", "--seed", "9"});
  const auto b = call({"simulate", "--dist", "lattice:2", "--p", "0.7", "--horizon", "5000", "--seed", "9",
                       "--workers", "3"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("n,S_1,S_2,V_1,V_2,M_terminal_flag", 0) == 0);
  const auto c = call({"simulate", "--dist", "lattice:2", "--p", "0.7", "--horizon", "5000", "--seed", "10"});
  CHECK(a.out != c.out);
}

TEST_CASE("p = 1 simulate") {
  const auto r = call({"simulate", "--p", "1", "--horizon", "5", "--checkpoints", "5"});
  CHECK(r.code == 0);
  CHECK((r.out.find("\n5,5,") != std::string::npos || r.out.find("\n5,-5,") != std::string::npos));
}

TEST_CASE("config file with flag override") {
  std::istringstream cfg("# comment\n--p = 0.6\nhorizon=100\n\nseed = 4 # trailing\n");
  const auto s = parse_config(cfg);
  CHECK(s.at("p") == "0.6");
  CHECK(s.at("horizon") == "100");
  CHECK(s.at("seed") == "4");
  std::istringstream bad("p 0.6\n");
  CHECK_THROWS_AS(parse_config(bad), UsageError);

  const auto path = temp_file("config.cfg");
  {
    std::ofstream f(path);
    f << "p = 0.6\nhorizon = 50\nseed = 4\n";
  }
  const auto from_file = call({"simulate", "--config", path.string()});
  const auto explicit_flags = call({"simulate", "--p", "0.6", "--horizon", "50", "--seed", "4"});
  CHECK(from_file.code == 0);
  CHECK(from_file.out == explicit_flags.out);
  const auto overridden = call({"simulate", "--config", path.string(), "--seed", "5"});
  const auto seed5 = call({"simulate", "--p", "0.6", "--horizon", "50", "--seed", "5"});
  CHECK(overridden.out == seed5.out);
  CHECK(call({"simulate", "--config", (path.string() + ".missing")}).code == exit_usage);
  std::filesystem::remove(path);
}

TEST_CASE("run config parsing") {
  Settings s{{"p", "0.75"}, {"n", "1e3,2000"}, {"grid", "0.1, 0.2"}};
  const auto cfg = make_run_config("exact", s);
  CHECK(cfg.checkpoints == std::vector<std::uint64_t>{1000, 2000});
  CHECK(cfg.grid == std::vector<double>{0.1, 0.2});
  CHECK(cfg.format == "json");
  CHECK(make_run_config("simulate", {}).format == "csv");
  CHECK_THROWS_AS(make_run_config("exact", {{"alpha", "1.5"}}), UsageError);
  CHECK_THROWS_AS(make_run_config("exact", {{"seed", "-3"}}), UsageError);
  const auto echo = cfg.echo();
  CHECK_FALSE(echo.contains("workers"));
  CHECK_FALSE(echo.contains("out"));
}

TEST_CASE("exact report") {
  const auto r = call({"exact", "--p", "0.75", "--n", "1,2,3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == kSchemaVersion);
  CHECK(j["command"] == "exact");
  const auto& rows = j["rows"];
  CHECK(rows[1]["a_n"].get<double>() == doctest::Approx(1.75));
  CHECK(rows[2]["a_n"].get<double>() == doctest::Approx(2.40625));
  CHECK(rows[1]["m_n"].get<double>() == doctest::Approx(8.0 / 7.0));

  const auto v = nlohmann::json::parse(call({"exact", "--p", "0.6", "--n", "100", "--variance-limit"}).out);
  CHECK(v["variance_limit"].get<double>() == doctest::Approx(5.0));
}

TEST_CASE("reports are identical apart from timing") {
  const std::vector<std::string> args{"bridge", "--p", "0.75", "--checkpoints", "16", "--horizon", "1024",
                                      "--paths", "200", "--seed", "3"};
  auto a_args = args, b_args = args;
  a_args.insert(a_args.end(), {"--workers", "1"});
  b_args.insert(b_args.end(), {"--workers", "2"});
  const auto a = call(a_args);
  const auto b = call(b_args);
  CHECK(a.code != exit_usage);
  const auto ja = nlohmann::json::parse(a.out);
  const auto jb = nlohmann::json::parse(b.out);
  CHECK(ja.contains("timing"));
  CHECK(strip_timing(ja) == strip_timing(jb));
  CHECK_FALSE(strip_timing(ja).contains("timing"));
}

TEST_CASE("enumerate and its cross-check") {
  const auto r = call({"enumerate", "--p", "0.6", "--n", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("-2,0.4") != std::string::npos);

  const auto d = make_rademacher();
  auto pmf = enumerate_exact_pmf(d, 0.6, 4);
  CHECK(enumeration_cross_check(pmf, d, 0.6, 4).pass);
  // move a little mass outward: the variance no longer matches a_n^2 m_n
  pmf[{4.0}] += 1e-6;
  pmf[{2.0}] -= 1e-6;
  const auto bad = enumeration_cross_check(pmf, d, 0.6, 4);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_error > 1e-7);
}

TEST_CASE("output file") {
  const auto path = temp_file("out.csv");
  const auto r = call({"simulate", "--p", "0.3", "--horizon", "20", "--out", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "n,S_1,V_1,M_terminal_flag,a_n");
  std::filesystem::remove(path);
}
