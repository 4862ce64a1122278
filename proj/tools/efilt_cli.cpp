// efilt: run error-filtration simulations from a config file and/or flags.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "efilt/config.hpp"
#include "efilt/errors.hpp"
#include "efilt/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw efilt::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error-filtration simulator"};
  app.set_version_flag("--version", std::string("efilt ") + efilt::kVersion);

  std::string config_path;
  std::string command;
  std::vector<std::string> sets;
  std::string seed, trials, workers, format, output;
  app.add_option("command", command, "Command to run (overrides the config file)");
  app.add_option("-c,--config", config_path, "Config file");
  app.add_option("-s,--set", sets, "Parameter override key=value (repeatable)");
  app.add_option("--seed", seed, "Root RNG seed");
  app.add_option("--trials", trials, "Monte-Carlo trials (0 = exact only)");
  app.add_option("--workers", workers, "Worker threads");
  app.add_option("--format", format, "csv or json");
  app.add_option("-o,--output", output, "Output file (default stdout)");
  app.footer("Commands: filter series purify protocol1 protocol2 classical coherent compare-codecs thresholds "
             "reproduce sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  efilt::RunConfig cfg;
  try {
    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    std::vector<std::string> overrides;
    auto push = [&](const char* key, const std::string& value) {
      if (!value.empty()) overrides.push_back(std::string(key) + "=" + value);
    };
    push("seed", seed);
    push("trials", trials);
    push("workers", workers);
    push("format", format);
    push("output", output);
    overrides.insert(overrides.end(), sets.begin(), sets.end());
    cfg = efilt::parse_config(text, overrides,
                              command.empty() ? std::nullopt : std::optional<std::string>(command));
  } catch (const std::exception& e) {
    std::cerr << "efilt: config error: " << e.what() << "\n";
    return efilt::exit_code_for(e) == 1 ? 2 : efilt::exit_code_for(e);
  }
  return efilt::execute(cfg, std::cout, std::cerr);
}
