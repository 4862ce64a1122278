#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "efilt/config.hpp"
#include "efilt/errors.hpp"
#include "efilt/reproduce.hpp"
#include "efilt/runner.hpp"

using namespace efilt;

namespace {

std::string error_of(std::string_view text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_text(std::string_view text, std::string& out, std::string& err) {
  std::ostringstream o, e;
  int code = 0;
  try {
    code = execute(parse_config(text), o, e);
  } catch (const std::exception& ex) {
    code = exit_code_for(ex);
  }
  out = o.str();
  err = e.str();
  return code;
}

}  // namespace

TEST_CASE("defaults are filled in") {
  const RunConfig c = parse_config("command = filter\nT = 2\nalpha2 = 0.9\n");
  CHECK(c.command == "filter");
  CHECK(c.params.at("Q") == "1");
  CHECK(c.params.at("codec") == "fourier");
  CHECK(c.seed == 1);
  CHECK(c.trials == 0);
  CHECK(c.workers == 1);
  CHECK(c.format == OutputFormat::csv);
}

TEST_CASE("validation errors name the line and the constraint") {
  CHECK(error_of("command = filter\nT = 0\nalpha2 = 0.9\n").find("line 2") != std::string::npos);
  CHECK(error_of("command = filter\nT = 0\nalpha2 = 0.9\n").find("T must be an integer >= 1") != std::string::npos);
  CHECK(error_of("command = purify\nn = 4\nm = 2\np = 1.2\n").find("line 4") != std::string::npos);
  CHECK(error_of("command = filter\nT = 2\nalpha2 = 0.9\nshade = blue\n").find("unknown key 'shade'") !=
        std::string::npos);
  CHECK(error_of("command = filter\nalpha2 = 0.9\n").find("missing required key 'T'") != std::string::npos);
  CHECK(error_of("command = filter\nT = 2\n").find("alpha2") != std::string::npos);
  CHECK(error_of("command = filter\nT = 2\nalpha2 = 0.5\ntrials = 1\n") != "");
  CHECK(error_of("command = filter\nT = 2\nalpha2 = 0.5\nworkers = 0\n") != "");
  CHECK(error_of("command = filter\nT = 2\nalpha2 = 0.5\n", {"T=-1"}).find("override 1") != std::string::npos);
  CHECK(error_of("command = thresholds\nfidelity = 0.9\n[sweep]\nfidelity = 0.1, 0.2\n") != "");
  CHECK(error_of("garbage\n").find("line 1") != std::string::npos);
  CHECK(error_of("") != "");
}

TEST_CASE("sweeps") {
  const RunConfig c = parse_config(
      "command = sweep\n[command]\ntarget = purify\nn = 4\nm = 2\np = 0.5\n[sweep]\np = linspace(0, 1, 5)\n"
      "n = 4, 6\n");
  REQUIRE(c.sweep.size() == 2);
  CHECK(c.sweep[0].values == std::vector<std::string>{"0", "0.25", "0.5", "0.75", "1"});
  const ResultTable t = run(c);
  CHECK(t.rows.size() == 10);
  CHECK(t.columns.front() == "sweep_p");
  CHECK(error_of("command = sweep\n[command]\ntarget = purify\nn = 4\nm = 2\np = 0.5\n[sweep]\np = 0.5\n") != "");
  CHECK(error_of("command = sweep\n[command]\ntarget = purify\nn = 4\nm = 2\np = 0.5\n[sweep]\n"
                 "p = 0.1, 0.2\nn = 4, 5\nm = 1, 2\nn = 6, 7\n") != "");
  // Sweep values are validated per point.
  CHECK(error_of("command = sweep\n[command]\ntarget = purify\nn = 4\nm = 2\np = 0.5\n[sweep]\np = 0.5, 1.5\n") !=
        "");
}

TEST_CASE("property: serialize is a fixed point of parse") {
  const char* texts[] = {
      "command = purify\nn = 4\nm = 2\np = 0.8\n",
      "command = filter\nT = 3\nalpha2 = 0.7\nseed = 99\ntrials = 100\nworkers = 4\nformat = json\n",
      "command = classical\nT = 4\nkind = nonlinear-phase\nnl_sigma = 0.05\n",
      "command = sweep\n[command]\ntarget = series\nT = 2\ngamma = 0.1\nlength = 3\n[sweep]\nQ = 1, 2, 3\n",
      "command = filter\nT = 4\nalphas = 0.9, 0.8, 0.7, 0.6\n"};
  for (const char* text : texts) {
    const RunConfig once = parse_config(text);
    const std::string s1 = serialize(once);
    const RunConfig twice = parse_config(s1);
    CHECK(serialize(twice) == s1);
    CHECK(config_hash(twice) == config_hash(once));
    CHECK(twice.params == once.params);
  }
  const RunConfig p = parse_config("command = purify\nn = 4\nm = 2\np = 0.8\n");
  CHECK(p.params.at("p") == "0.8");
  CHECK(p.params.at("n") == "4");
}

TEST_CASE("hash ignores the output path but not the seed") {
  const RunConfig a = parse_config("command = thresholds\nfidelity = 0.9\n");
  const RunConfig b = parse_config("command = thresholds\nfidelity = 0.9\noutput = x.csv\n");
  const RunConfig c = parse_config("command = thresholds\nfidelity = 0.9\nseed = 2\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 18);
}

TEST_CASE("format_real round trips") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, 0.0}) CHECK(std::stod(format_real(v)) == v);
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("CSV output is deterministic and complete") {
  const char* text = "command = filter\nT = 4\nalpha2 = 0.8\nsources = 2\ntrials = 500\nworkers = 2\nseed = 5\n";
  std::string out1, out2, err;
  CHECK(run_text(text, out1, err) == 0);
  CHECK(run_text(text, out2, err) == 0);
  CHECK(out1 == out2);
  CHECK(out1.find('\r') == std::string::npos);
  CHECK(out1.rfind("# efilt 0.1.0\n", 0) == 0);
  CHECK(out1.find("seed=5 workers=2 trials=500") != std::string::npos);
  CHECK(out1.find("0.84999999999999987") != std::string::npos);

  std::string out3;
  run_text("command = filter\nT = 4\nalpha2 = 0.8\nsources = 2\ntrials = 500\nworkers = 2\nseed = 6\n", out3, err);
  CHECK(out3 != out1);
}

TEST_CASE("JSON output") {
  std::string out, err;
  CHECK(run_text("command = purify\nn = 4\nm = 2\np = 0.8\nformat = json\n", out, err) == 0);
  const auto j = nlohmann::json::parse(out);
  CHECK(j["command"] == "purify");
  CHECK(j["rows"][0]["F_prime"].get<double>() == doctest::Approx(3.4 / 3.6));
  CHECK(j["rows"][0]["decoder_kind"] == "fourier");
}

TEST_CASE("exit codes") {
  std::string out, err;
  CHECK(run_text("command = filter\nT = 0\nalpha2 = 0.8\n", out, err) == 2);
  CHECK(run_text("command = filter\nT = 64\nsources = 64\nalpha2 = 0.5\n", out, err) == 3);
  CHECK(err.find("dimension") != std::string::npos);
  CHECK(run_text("command = series\nT = 3\ngamma = 0.1\nlength = 1\nQ = 20\n", out, err) == 0);
  CHECK(run_text("command = filter\nT = 3\nalpha2 = 0.8\ncodec = hadamard\n", out, err) == 2);
  CHECK(run_text("command = filter\nT = 2\nalpha2 = 0.8\ncodec = custom\ncodec_file = /nonexistent\n", out, err) ==
        2);
  CHECK(run_text("command = reproduce\nsubset = bogus\n", out, err) == 2);
  CHECK(exit_code_for(NumericalCheckError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("commands produce their documented columns") {
  const std::pair<const char*, std::vector<std::string>> cases[] = {
      {"command = protocol1\nS = 4\nR = 2\np = 0.8\n",
       {"S", "R", "p", "decoder_kind", "fidelity_closed", "fidelity_constructed", "fidelity_from_y", "Y", "Y_bound",
        "balanced", "p_success"}},
      {"command = protocol2\nS = 2\nT = 4\nalpha2 = 0.8\n",
       {"S", "T", "alpha2", "sum_a4", "fidelity_closed", "fidelity_constructed"}},
      {"command = coherent\nT = 4\nalpha2 = 0.8\n",
       {"T", "alpha2", "lambda", "phi", "current", "current_mc", "current_mc_stderr", "visibility"}},
      {"command = thresholds\nfidelity = 0.9\n", {"fidelity", "bb84_secure", "werner_entangled", "at_boundary"}},
      {"command = compare-codecs\nT = 4\n",
       {"codec", "T", "alpha2", "Q", "p_success", "p_success_error", "fidelity", "visibility", "reduction_factor",
        "optimal", "max_deviation"}}};
  for (const auto& [text, columns] : cases) {
    CHECK(run(parse_config(text)).columns == columns);
  }
  const ResultTable c = run(parse_config("command = coherent\nT = 4\nalpha2 = 0.8\n"));
  CHECK(std::get<double>(c.rows[0][4]) == doctest::Approx(0.825));
  CHECK(std::holds_alternative<std::monostate>(c.rows[0][5]));
}

TEST_CASE("filter variants") {
  const ResultTable internal = run(parse_config("command = filter\nT = 4\nalpha2 = 0.8\nnoise = internal\n"));
  CHECK(std::get<double>(internal.rows[0][9]) == doctest::Approx(0.05).epsilon(1e-12));
  const ResultTable lengths = run(parse_config("command = filter\nT = 2\ngamma = 0.2\nlength = 1\nQ = 2\n"));
  CHECK(std::get<double>(lengths.rows[0][9]) == doctest::Approx(series_error_analytic(0.2, 1, 2, 2)));
  const ResultTable alphas = run(parse_config("command = filter\nT = 4\nalphas = 0.95, 0.9, 0.85, 0.8\n"));
  CHECK(std::get<double>(alphas.rows[0][8]) == doctest::Approx(0.765625).epsilon(1e-12));
  CHECK(error_of("command = filter\nT = 4\nalpha2 = 0.5\ngamma = 0.2\n") != "");
}

TEST_CASE("reproduce subsets") {
  const auto one = reproduce("thresholds, 1");
  REQUIRE(one.size() == 2);
  CHECK(one[0].id == 1);
  CHECK(one[1].name == "thresholds");
  CHECK(one[0].passed);
  CHECK(one[1].passed);
  CHECK_THROWS_AS(reproduce("13"), ConfigError);
}
