#pragma once

// Executes a RunConfig and renders the result table as CSV or JSON with a
// reproducibility header.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "efilt/config.hpp"
#include "efilt/filtration.hpp"

namespace efilt {

using Cell = std::variant<std::monostate, std::string, double, long long, bool>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct CodecComparison {
  FiltrationOutcome fourier;
  FiltrationOutcome hadamard;
  CodecReport fourier_report;
  CodecReport hadamard_report;
  double max_deviation = 0.0;
};

/// Same input and noise through the Fourier and Hadamard codecs (two sources,
/// so visibility is compared too). Throws NumericalCheckError if any outcome
/// differs by more than 1e-12.
CodecComparison compare_codecs(std::size_t transmission, double alpha2, std::size_t segments = 1);

/// Runs the configured command (expanding sweeps).
ResultTable run(const RunConfig& cfg);

std::string render(const RunConfig& cfg, const ResultTable& table);

/// Runs, renders and writes to cfg.output (or `out`). Returns the process exit
/// code: 0 ok, 1 unexpected failure, 2 config error, 3 dimension cap,
/// 4 numerical check failure (including a failed reproduce battery).
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Exit code for an in-flight exception (same mapping as execute).
int exit_code_for(const std::exception& e);

}  // namespace efilt
