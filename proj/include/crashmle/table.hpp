#ifndef CRASHMLE_TABLE_HPP
#define CRASHMLE_TABLE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crashmle {

enum class OutcomeMode { severity, frequency };

/// One row per accident (severity mode) or per road-segment period
/// (frequency mode). Numeric columns keep their insertion order so that a
/// table written back to CSV reproduces the input layout.
///
/// Immutable after construction; the `with_*` / `subset` members return
/// modified copies.
class ObservationTable {
 public:
  static ObservationTable severity(std::string outcome_column,
                                   std::vector<std::string> labels,
                                   std::vector<int> outcome_index,
                                   std::vector<std::string> column_names,
                                   std::vector<std::vector<double>> columns);

  static ObservationTable frequency(std::string outcome_column,
                                    std::vector<std::int64_t> counts,
                                    std::vector<std::string> column_names,
                                    std::vector<std::vector<double>> columns);

  [[nodiscard]] OutcomeMode mode() const { return mode_; }
  [[nodiscard]] std::size_t n_rows() const { return n_rows_; }
  [[nodiscard]] const std::string& outcome_column() const { return outcome_column_; }

  [[nodiscard]] const std::vector<std::string>& column_names() const { return names_; }
  [[nodiscard]] bool has_column(std::string_view name) const;
  // Throws DataError for unknown names.
  [[nodiscard]] std::span<const double> column(std::string_view name) const;

  // Severity mode only: declared label order and per-row index into it.
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::span<const int> outcome_index() const { return outcome_index_; }
  // Frequency mode only.
  [[nodiscard]] std::span<const std::int64_t> counts() const { return counts_; }

  // Rows dropped at ingestion because a required cell was missing.
  [[nodiscard]] std::size_t dropped_rows() const { return dropped_rows_; }

  [[nodiscard]] ObservationTable subset(std::span<const std::size_t> rows) const;
  // Replaces the column if present, appends it otherwise.
  [[nodiscard]] ObservationTable with_column(const std::string& name,
                                             std::vector<double> values) const;
  [[nodiscard]] ObservationTable with_outcomes(std::vector<int> outcome_index) const;
  [[nodiscard]] ObservationTable with_counts(std::vector<std::int64_t> counts) const;
  [[nodiscard]] ObservationTable with_dropped_rows(std::size_t dropped) const;

 private:
  ObservationTable() = default;
  void check_invariants() const;

  OutcomeMode mode_ = OutcomeMode::severity;
  std::size_t n_rows_ = 0;
  std::string outcome_column_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::string> labels_;
  std::vector<int> outcome_index_;
  std::vector<std::int64_t> counts_;
  std::size_t dropped_rows_ = 0;
};

struct LoadOptions {
  OutcomeMode mode = OutcomeMode::severity;
  std::string outcome_column;
  // Severity: allowed labels, in model order. When empty, labels are taken
  // in order of first appearance.
  std::vector<std::string> outcome_labels;
  // Numeric columns to keep. Empty means every non-outcome column.
  std::vector<std::string> columns;
};

// Listwise deletion: a row with an empty or NA cell in the outcome or any
// kept column is dropped and counted. Throws DataError on unreadable files,
// unknown labels, negative or non-integer counts and non-numeric cells.
ObservationTable load_csv(const std::filesystem::path& path, const LoadOptions& options);
ObservationTable read_csv(std::istream& in, const LoadOptions& options);

// Outcome column first, then numeric columns in table order.
void write_csv(const ObservationTable& table, std::ostream& out);
void write_csv(const ObservationTable& table, const std::filesystem::path& path);

// Flag must be 0/1. Returns (rows with flag 1, rows with flag 0), each in
// original order.
std::pair<ObservationTable, ObservationTable> split_by_flag(const ObservationTable& table,
                                                            std::string_view flag_column);

}  // namespace crashmle

#endif  // CRASHMLE_TABLE_HPP
