#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "otclt/cli.hpp"
#include "otclt/inference.hpp"
#include "otclt/measure.hpp"
#include "otclt/report.hpp"

using namespace otclt;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("doubles serialize with 17 significant digits and round-trip") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(1.0) == "1");
  const double v = 1.0 / 12.0;
  const std::string s = format_double(v);
  CHECK(std::stod(s) == v);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "\"inf\"");
}

TEST_CASE("clt report JSON has the fixed schema and key order") {
  CltReport report;
  report.statistic = 0.25;
  report.sigma_sq_hat = 0.0833;
  report.stderr_value = 0.01;
  report.ci_lo = 0.2304;
  report.ci_hi = 0.2696;
  report.alpha = 0.05;
  report.n = 100;
  report.m = 50;
  report.lambda = 100.0 / 150.0;
  report.center_note = "CI targets E T_c(P_n,Q), not T_c(P,Q)";
  const std::string json = to_json(report);
  const std::string expected =
      "{\"schema_version\":1,\"statistic\":0.25,\"sigma_sq_hat\":0.083299999999999999,"
      "\"stderr\":0.01,\"ci_lo\":0.23039999999999999,\"ci_hi\":0.26960000000000001,"
      "\"alpha\":0.050000000000000003,\"n\":100,\"m\":50,\"lambda\":0.66666666666666663,"
      "\"es_bound\":null,\"center_note\":\"CI targets E T_c(P_n,Q), not T_c(P,Q)\","
      "\"degenerate_variance\":false}";
  CHECK(json == expected);

  // Parses as valid JSON with exactly the published keys.
  const auto parsed = nlohmann::json::parse(json);
  CHECK(parsed.size() == 13);
  CHECK(parsed["schema_version"] == 1);
}

TEST_CASE("atomic writes leave no temporary behind") {
  const std::string path = temp_path("otclt_atomic.json");
  write_atomic(path, "{\"a\":1}");
  CHECK(slurp(path) == "{\"a\":1}");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("potential JSON round trip") {
  PotentialVector p;
  p.side = PotentialVector::Side::Q;
  p.values = {0.0, -1.5, 2.25};
  p.anchored_at = 0;
  const std::string path = temp_path("otclt_potential.json");
  write_atomic(path, to_json(p));
  const PotentialVector back = potential_from_json_file(path);
  CHECK(back.side == PotentialVector::Side::Q);
  REQUIRE(back.values.size() == 3);
  CHECK(back.values[1] == -1.5);
  CHECK(back.anchored_at.value() == 0);
  std::filesystem::remove(path);
}

TEST_CASE("cli solve writes a valid plan report deterministically") {
  const std::string p_path = temp_path("otclt_cli_p.csv");
  const std::string q_path = temp_path("otclt_cli_q.csv");
  const std::string out_path = temp_path("otclt_cli_plan.json");
  write_file(p_path, "0\n1\n");
  write_file(q_path, "0.25\n1.25\n");

  const std::vector<std::string> argv{"solve", "--cost", "power:2", "--p", p_path,
                                      "--q",   q_path,  "--out",   out_path};
  CHECK(run_cli(argv) == 0);
  const std::string first = slurp(out_path);
  const auto parsed = nlohmann::json::parse(first);
  CHECK(parsed["objective"].get<double>() == doctest::Approx(0.0625));
  CHECK(parsed["entries"].size() == 2);

  CHECK(run_cli(argv) == 0);
  CHECK(slurp(out_path) == first);  // byte-identical rerun

  std::filesystem::remove(p_path);
  std::filesystem::remove(q_path);
  std::filesystem::remove(out_path);
}

TEST_CASE("cli infer-two reports lambda = n/(n+m)") {
  const std::string p_path = temp_path("otclt_cli_x.csv");
  const std::string q_path = temp_path("otclt_cli_y.csv");
  write_file(p_path, "0\n0.5\n1\n");
  write_file(q_path, "0.6\n1.6\n");
  const std::string out_path = temp_path("otclt_cli_two.json");
  CHECK(run_cli({"infer-two", "--cost", "power:2", "--p", p_path, "--q", q_path, "--alpha",
                 "0.05", "--out", out_path}) == 0);
  const auto parsed = nlohmann::json::parse(slurp(out_path));
  CHECK(parsed["lambda"].get<double>() == doctest::Approx(3.0 / 5.0));
  CHECK(parsed["n"] == 3);
  CHECK(parsed["m"] == 2);
  std::filesystem::remove(p_path);
  std::filesystem::remove(q_path);
  std::filesystem::remove(out_path);
}

TEST_CASE("cli error paths use distinct exit codes and name the problem") {
  CHECK(run_cli({"nonsense"}) == 1);
  CHECK(run_cli({"solve", "--cost", "power:2"}) == 1);  // missing required flags
  CHECK(run_cli({"solve", "--cost", "power:0.5", "--p", "x.csv", "--q", "y.csv"}) == 1);
  CHECK(run_cli({"solve", "--cost", "power:2", "--p", "/nonexistent_otclt.csv", "--q",
                 "/nonexistent_otclt.csv"}) == 1);

  // Identical samples: the delta method degenerates -> input error.
  const std::string p_path = temp_path("otclt_cli_same.csv");
  write_file(p_path, "0\n1\n");
  CHECK(run_cli({"wp-ci", "--cost", "power:2", "--p", p_path, "--q", p_path}) == 1);
  std::filesystem::remove(p_path);
}

TEST_CASE("cli transform applies the c-transform to a potential file") {
  const std::string p_path = temp_path("otclt_cli_tp.csv");
  const std::string q_path = temp_path("otclt_cli_tq.csv");
  const std::string f_path = temp_path("otclt_cli_tf.json");
  const std::string out_path = temp_path("otclt_cli_tg.json");
  write_file(p_path, "0\n1\n");
  write_file(q_path, "1\n");
  write_file(f_path, "{\"side\":\"P\",\"values\":[0.0,0.0]}");
  CHECK(run_cli({"transform", "--cost", "power:2", "--p", p_path, "--q", q_path, "--potential",
                 f_path, "--out", out_path}) == 0);
  const auto parsed = nlohmann::json::parse(slurp(out_path));
  CHECK(parsed["side"] == "Q");
  CHECK(parsed["values"][0].get<double>() == doctest::Approx(0.0));  // min(1, 0)
  for (const auto& path : {p_path, q_path, f_path, out_path}) std::filesystem::remove(path);
}

TEST_CASE("cli simulate produces a summary with the oracle default variance") {
  const std::string out_path = temp_path("otclt_cli_sim.json");
  const std::string csv_path = temp_path("otclt_cli_sim.csv");
  CHECK(run_cli({"simulate", "--cost", "power:2", "--p-law", "unif:0:1", "--q-law",
                 "unif:0.5:1.5", "--n", "40", "--m", "40", "--reps", "8", "--seed", "1",
                 "--out", out_path, "--csv", csv_path}) == 0);
  const auto parsed = nlohmann::json::parse(slurp(out_path));
  CHECK(parsed["theory_sigma_sq"].get<double>() == doctest::Approx(1.0 / 12).epsilon(1e-6));
  CHECK(parsed["statistics"].size() == 8);
  const std::string csv = slurp(csv_path);
  CHECK(csv.substr(0, csv.find('\n')) == "rep,statistic,standardized");
  std::filesystem::remove(out_path);
  std::filesystem::remove(csv_path);
}
