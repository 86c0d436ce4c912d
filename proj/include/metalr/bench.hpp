#pragma once

#include "metalr/config.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace metalr {

/// A table of already formatted cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 output: CRLF line ends, fields quoted when they hold a comma,
/// quote or line break. Each `comments` entry becomes a leading "# " line.
void write_csv(std::ostream& os, const Table& table, const std::vector<std::string>& comments = {});
std::string csv_field(const std::string& field);
nlohmann::json to_json(const Table& table);

/// "%.17g" formatting, so that values round-trip.
std::string format_double(double value);

/// Subspace error over the grid t_l1 x n_l1 (both config lists). Repeat r
/// uses the same meta-parameters and light tasks in every cell.
struct SubspaceCell {
  Index t = 0, n = 0;
  std::vector<double> errors;  // one per repeat
  double median = 0.0;
};
std::vector<SubspaceCell> bench_subspace(const Config& config, std::uint64_t seed, unsigned threads = 1);
Table to_table(const std::vector<SubspaceCell>& cells);

enum class TminStage { Cluster, Classify };

/// Smallest t reaching accuracy >= 0.99 in at least a `confidence` fraction
/// of trials. The search range comes from t_h (cluster) or t_l2 (classify):
/// "lo, hi", or a single value meaning "2, value". Success rates are assumed
/// non-decreasing in t. When even hi falls short the result is censored.
struct TminResult {
  double confidence = 0.0;
  Index t_min = 0;
  bool censored = false;
};
struct TminReport {
  TminStage stage = TminStage::Cluster;
  Index trials = 0;
  std::vector<TminResult> results;        // for `confidence` and 0.5
  std::map<Index, double> success_rate;   // every t evaluated
};
TminReport bench_tmin(TminStage stage, const Config& config, std::uint64_t seed, unsigned threads = 1);
Table to_table(const TminReport& report);

/// EM against the spectral estimate on the same data, for every gamma2 in
/// gamma2_grid and `repeats` independent pools.
struct EmCompareRow {
  Index repeat = 0;
  double gamma2 = 0.0;
  double spectral_error = 0.0;
  double em_error = 0.0;
  int em_iterations = 0;
  bool em_converged = false;
  bool em_collapsed = false;
};
std::vector<EmCompareRow> bench_em(const Config& config, std::uint64_t seed, unsigned threads = 1);
Table to_table(const std::vector<EmCompareRow>& rows);

/// Binary search for the smallest t in [lo, hi] with rate(t) >= confidence,
/// assuming rate is non-decreasing. When rate(hi) falls short, returns hi
/// and sets `censored`.
Index smallest_passing(Index lo, Index hi, double confidence, const std::function<double(Index)>& rate, bool& censored);

}  // namespace metalr
