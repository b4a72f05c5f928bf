#include "crashmle/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "crashmle/csv.hpp"
#include "crashmle/errors.hpp"

namespace crashmle {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" ||
         cell == ".";
}

double parse_number(const std::string& cell, std::string_view column, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw DataError("non-numeric cell '" + cell + "' in column '" + std::string(column) +
                    "' (line " + std::to_string(line) + ")");
  }
  return value;
}

std::int64_t parse_count(const std::string& cell, std::string_view column, std::size_t line) {
  const double value = parse_number(cell, column, line);
  if (value < 0) {
    throw DataError("negative count " + cell + " in column '" + std::string(column) + "' (line " +
                    std::to_string(line) + ")");
  }
  if (value != std::floor(value) || value > 9.0e15) {
    throw DataError("non-integer count " + cell + " in column '" + std::string(column) +
                    "' (line " + std::to_string(line) + ")");
  }
  return static_cast<std::int64_t>(value);
}

}  // namespace

ObservationTable ObservationTable::severity(std::string outcome_column,
                                            std::vector<std::string> labels,
                                            std::vector<int> outcome_index,
                                            std::vector<std::string> column_names,
                                            std::vector<std::vector<double>> columns) {
  ObservationTable t;
  t.mode_ = OutcomeMode::severity;
  t.outcome_column_ = std::move(outcome_column);
  t.labels_ = std::move(labels);
  t.outcome_index_ = std::move(outcome_index);
  t.names_ = std::move(column_names);
  t.columns_ = std::move(columns);
  t.n_rows_ = t.outcome_index_.size();
  t.check_invariants();
  return t;
}

ObservationTable ObservationTable::frequency(std::string outcome_column,
                                             std::vector<std::int64_t> counts,
                                             std::vector<std::string> column_names,
                                             std::vector<std::vector<double>> columns) {
  ObservationTable t;
  t.mode_ = OutcomeMode::frequency;
  t.outcome_column_ = std::move(outcome_column);
  t.counts_ = std::move(counts);
  t.names_ = std::move(column_names);
  t.columns_ = std::move(columns);
  t.n_rows_ = t.counts_.size();
  t.check_invariants();
  return t;
}

void ObservationTable::check_invariants() const {
  if (names_.size() != columns_.size()) throw DataError("column name/value count mismatch");
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].size() != n_rows_) {
      throw DataError("column '" + names_[c] + "' has " + std::to_string(columns_[c].size()) +
                      " values, expected " + std::to_string(n_rows_));
    }
    for (double v : columns_[c]) {
      if (!std::isfinite(v)) throw DataError("non-finite value in column '" + names_[c] + "'");
    }
    if (std::count(names_.begin(), names_.end(), names_[c]) > 1) {
      throw DataError("duplicate column '" + names_[c] + "'");
    }
  }
  if (mode_ == OutcomeMode::severity) {
    const int n_labels = static_cast<int>(labels_.size());
    for (int idx : outcome_index_) {
      if (idx < 0 || idx >= n_labels) throw DataError("outcome index outside the label set");
    }
  } else {
    for (auto c : counts_) {
      if (c < 0) throw DataError("negative count");
    }
  }
}

bool ObservationTable::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::span<const double> ObservationTable::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("unknown column '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

ObservationTable ObservationTable::subset(std::span<const std::size_t> rows) const {
  ObservationTable t = *this;
  t.n_rows_ = rows.size();
  for (auto& col : t.columns_) col.clear();
  t.outcome_index_.clear();
  t.counts_.clear();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    t.columns_[c].reserve(rows.size());
    for (auto r : rows) t.columns_[c].push_back(columns_[c].at(r));
  }
  for (auto r : rows) {
    if (mode_ == OutcomeMode::severity) {
      t.outcome_index_.push_back(outcome_index_.at(r));
    } else {
      t.counts_.push_back(counts_.at(r));
    }
  }
  return t;
}

ObservationTable ObservationTable::with_column(const std::string& name,
                                               std::vector<double> values) const {
  ObservationTable t = *this;
  const auto it = std::find(t.names_.begin(), t.names_.end(), name);
  if (it == t.names_.end()) {
    t.names_.push_back(name);
    t.columns_.push_back(std::move(values));
  } else {
    t.columns_[static_cast<std::size_t>(it - t.names_.begin())] = std::move(values);
  }
  t.check_invariants();
  return t;
}

ObservationTable ObservationTable::with_outcomes(std::vector<int> outcome_index) const {
  if (mode_ != OutcomeMode::severity) throw DataError("with_outcomes on a frequency table");
  if (outcome_index.size() != n_rows_) throw DataError("outcome vector length mismatch");
  ObservationTable t = *this;
  t.outcome_index_ = std::move(outcome_index);
  t.check_invariants();
  return t;
}

ObservationTable ObservationTable::with_counts(std::vector<std::int64_t> counts) const {
  if (mode_ != OutcomeMode::frequency) throw DataError("with_counts on a severity table");
  if (counts.size() != n_rows_) throw DataError("count vector length mismatch");
  ObservationTable t = *this;
  t.counts_ = std::move(counts);
  t.check_invariants();
  return t;
}

ObservationTable ObservationTable::with_dropped_rows(std::size_t dropped) const {
  ObservationTable t = *this;
  t.dropped_rows_ = dropped;
  return t;
}

ObservationTable read_csv(std::istream& in, const LoadOptions& options) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw DataError("csv: missing header row");

  std::vector<std::string> header;
  for (const auto& h : records.front()) header.push_back(trim(h));
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!position.emplace(header[i], i).second) {
      throw DataError("csv: duplicate header '" + header[i] + "'");
    }
  }

  const auto outcome_it = position.find(options.outcome_column);
  if (outcome_it == position.end()) {
    throw DataError("csv: outcome column '" + options.outcome_column + "' not found");
  }
  const std::size_t outcome_pos = outcome_it->second;

  std::vector<std::string> names;
  std::vector<std::size_t> keep;
  if (options.columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i != outcome_pos) {
        names.push_back(header[i]);
        keep.push_back(i);
      }
    }
  } else {
    for (const auto& name : options.columns) {
      if (name == options.outcome_column) continue;
      if (std::find(names.begin(), names.end(), name) != names.end()) continue;
      const auto it = position.find(name);
      if (it == position.end()) throw DataError("csv: column '" + name + "' not found");
      names.push_back(name);
      keep.push_back(it->second);
    }
  }

  std::vector<std::string> labels = options.outcome_labels;
  const bool open_labels = labels.empty();
  std::vector<std::vector<double>> columns(names.size());
  std::vector<int> outcome_index;
  std::vector<std::int64_t> counts;
  std::size_t dropped = 0;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t line = r + 1;
    if (rec.size() != header.size()) {
      throw DataError("csv: line " + std::to_string(line) + " has " + std::to_string(rec.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    const std::string outcome_cell = trim(rec[outcome_pos]);
    bool missing = is_missing(outcome_cell);
    for (auto k : keep) missing = missing || is_missing(trim(rec[k]));
    if (missing) {
      ++dropped;
      continue;
    }
    if (options.mode == OutcomeMode::severity) {
      auto it = std::find(labels.begin(), labels.end(), outcome_cell);
      if (it == labels.end()) {
        if (!open_labels) {
          throw DataError("unknown outcome label '" + outcome_cell + "' (line " +
                          std::to_string(line) + ")");
        }
        labels.push_back(outcome_cell);
        it = labels.end() - 1;
      }
      outcome_index.push_back(static_cast<int>(it - labels.begin()));
    } else {
      counts.push_back(parse_count(outcome_cell, options.outcome_column, line));
    }
    for (std::size_t c = 0; c < keep.size(); ++c) {
      columns[c].push_back(parse_number(trim(rec[keep[c]]), names[c], line));
    }
  }

  auto table = options.mode == OutcomeMode::severity
                   ? ObservationTable::severity(options.outcome_column, std::move(labels),
                                                std::move(outcome_index), std::move(names),
                                                std::move(columns))
                   : ObservationTable::frequency(options.outcome_column, std::move(counts),
                                                 std::move(names), std::move(columns));
  return table.with_dropped_rows(dropped);
}

ObservationTable load_csv(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  return read_csv(in, options);
}

void write_csv(const ObservationTable& table, std::ostream& out) {
  csv::Record header{table.outcome_column()};
  for (const auto& n : table.column_names()) header.push_back(n);
  csv::write_record(out, header);

  std::vector<std::span<const double>> cols;
  for (const auto& n : table.column_names()) cols.push_back(table.column(n));
  csv::Record rec;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    rec.clear();
    if (table.mode() == OutcomeMode::severity) {
      rec.push_back(table.labels()[static_cast<std::size_t>(table.outcome_index()[r])]);
    } else {
      rec.push_back(std::to_string(table.counts()[r]));
    }
    for (const auto& col : cols) rec.push_back(csv::format_double(col[r]));
    csv::write_record(out, rec);
  }
}

void write_csv(const ObservationTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(table, out);
}

std::pair<ObservationTable, ObservationTable> split_by_flag(const ObservationTable& table,
                                                            std::string_view flag_column) {
  const auto flag = table.column(flag_column);
  std::vector<std::size_t> ones;
  std::vector<std::size_t> zeros;
  for (std::size_t r = 0; r < flag.size(); ++r) {
    if (flag[r] == 1.0) {
      ones.push_back(r);
    } else if (flag[r] == 0.0) {
      zeros.push_back(r);
    } else {
      throw DataError("split flag '" + std::string(flag_column) + "' has non-binary value " +
                      csv::format_double(flag[r]) + " at row " + std::to_string(r));
    }
  }
  return {table.subset(ones), table.subset(zeros)};
}

}  // namespace crashmle
