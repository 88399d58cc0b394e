#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace madrom::train {

struct TraceRow {
  std::int64_t iteration = 0;
  double loss = 0.0;
  std::optional<double> relative_l2;
  double lr = 0.0;
  double elapsed_ms = 0.0;
  std::string phase;  // e.g. "pretrain", "source", "target"

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct RunTrace {
  std::vector<TraceRow> rows;

  /// Rows with the given phase (all rows when `phase` is empty).
  RunTrace filter(const std::string& phase) const;
  std::optional<double> final_relative_l2() const;

  /// Columns: iteration,loss,relative_l2,lr,elapsed_ms,phase. Missing errors
  /// are written as empty fields; doubles use 17 significant digits.
  void write_csv(std::ostream& os) const;
  static RunTrace read_csv(std::istream& is);

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

}  // namespace madrom::train
