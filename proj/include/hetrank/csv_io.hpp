#pragma once

// CSV ingestion and serialization for comparison logs and ground-truth files.
//
// Comparison CSV:   header with (at least) user, winner, loser columns; an
//                   optional `virtual` column marks virtual-node records.
// Ground-truth CSV: header `item,score`.
//
// Files ending in .tsv are read tab-separated, so ranking TSVs written by the
// CLI load directly as ground truth.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetrank/dataset.hpp"
#include "hetrank/errors.hpp"

namespace hetrank {

struct CsvSchema {
  std::string user = "user";
  std::string winner = "winner";
  std::string loser = "loser";
  std::string virtual_flag = "virtual";  // optional column
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based file line
  std::string reason;
};

struct IngestionReport {
  std::size_t rows = 0;  // data rows read, including rejected ones
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t self_comparisons = 0;
  std::vector<RejectedRow> rejected;
};

struct LoadedDataset {
  ComparisonDataset data;
  IngestionReport report;
};

namespace csv {

// Splits one CSV record. Handles RFC 4180 quoting within a single line.
inline std::vector<std::string> split_line(std::string_view line, char delim = ',') {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line, fields)
};

inline char delimiter_for(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".tsv" ? '\t' : ',';
}

inline Table read_table(const std::string& path) {
  const char delim = delimiter_for(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_line(line, delim);
    for (auto& f : fields) f = trim(f);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      table.rows.emplace_back(line_no, std::move(fields));
    }
  }
  if (in.bad()) throw IoError("error while reading file: " + path);
  if (!have_header) throw SchemaError("missing header row in " + path);
  return table;
}

inline std::optional<std::size_t> column_index(const std::vector<std::string>& header,
                                               std::string_view name) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  return std::nullopt;
}

inline std::size_t require_column(const std::vector<std::string>& header, const std::string& name,
                                  const std::string& path) {
  auto idx = column_index(header, name);
  if (!idx) throw SchemaError("missing column '" + name + "' in " + path);
  return *idx;
}

inline std::optional<double> parse_double(std::string_view text) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

inline bool parse_flag(std::string_view text) {
  return text == "1" || text == "true" || text == "TRUE" || text == "True";
}

class Interner {
 public:
  std::uint32_t intern(const std::string& label) {
    auto [it, inserted] = ids_.try_emplace(label, static_cast<std::uint32_t>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }
  std::optional<std::uint32_t> find(const std::string& label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> labels_;
};

}  // namespace csv

/// Reads a comparison log. Labels are interned to dense ids in order of first
/// appearance (real rows first, then virtual rows, the virtual label last), so
/// reloading the same file always yields the same ids.
inline LoadedDataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
  const csv::Table table = csv::read_table(path);
  const std::size_t user_col = csv::require_column(table.header, schema.user, path);
  const std::size_t winner_col = csv::require_column(table.header, schema.winner, path);
  const std::size_t loser_col = csv::require_column(table.header, schema.loser, path);
  const auto virtual_col = csv::column_index(table.header, schema.virtual_flag);
  const std::size_t width = std::max({user_col, winner_col, loser_col}) + 1;

  IngestionReport report;
  struct Row {
    std::string user, winner, loser;
    bool is_virtual;
  };
  std::vector<Row> real_rows;
  std::vector<Row> virtual_rows;
  for (const auto& [line, fields] : table.rows) {
    ++report.rows;
    if (fields.size() < width) {
      report.rejected.push_back({line, "too few fields"});
      continue;
    }
    Row row{fields[user_col], fields[winner_col], fields[loser_col], false};
    if (virtual_col && *virtual_col < fields.size()) row.is_virtual = csv::parse_flag(fields[*virtual_col]);
    if (row.user.empty() || row.winner.empty() || row.loser.empty()) {
      report.rejected.push_back({line, "empty field"});
      continue;
    }
    if (row.winner == row.loser) {
      ++report.self_comparisons;
      report.rejected.push_back({line, "self-comparison of item '" + row.winner + "'"});
      continue;
    }
    (row.is_virtual ? virtual_rows : real_rows).push_back(std::move(row));
  }

  csv::Interner users;
  csv::Interner items;
  std::vector<Comparison> records;
  std::set<std::tuple<UserId, ItemId, ItemId>> seen;
  auto add = [&](const Row& row, UserId u, ItemId w, ItemId l) {
    if (!seen.emplace(u, w, l).second) ++report.duplicates;
    records.push_back({u, w, l, row.is_virtual});
  };
  for (const Row& row : real_rows) {
    const UserId u = users.intern(row.user);
    const ItemId w = items.intern(row.winner);
    const ItemId l = items.intern(row.loser);
    add(row, u, w, l);
  }
  std::optional<ItemId> v_item;
  std::optional<UserId> v_user;
  if (!virtual_rows.empty()) {
    for (const Row& row : virtual_rows) {
      if (row.winner != kVirtualLabel) items.intern(row.winner);
      if (row.loser != kVirtualLabel) items.intern(row.loser);
    }
    v_item = items.intern(kVirtualLabel);
    v_user = users.intern(kVirtualLabel);
    for (const Row& row : virtual_rows) {
      if (row.user != kVirtualLabel || (row.winner != kVirtualLabel && row.loser != kVirtualLabel)) {
        throw SchemaError("virtual row must involve the virtual user and item in " + path);
      }
      add(row, *v_user, *items.find(row.winner), *items.find(row.loser));
    }
  }
  report.accepted = records.size();
  ComparisonDataset data(items.labels().size(), users.labels().size(), std::move(records),
                         items.labels(), users.labels(), v_item, v_user);
  return {std::move(data), std::move(report)};
}

inline void write_csv(const ComparisonDataset& data, std::ostream& out) {
  const bool with_flag = data.has_virtual_node();
  out << "user,winner,loser" << (with_flag ? ",virtual" : "") << '\n';
  for (const Comparison& c : data.records()) {
    out << csv::quote(data.user_label(c.user)) << ',' << csv::quote(data.item_label(c.winner)) << ','
        << csv::quote(data.item_label(c.loser));
    if (with_flag) out << ',' << (c.is_virtual ? 1 : 0);
    out << '\n';
  }
}

inline void write_csv(const ComparisonDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  write_csv(data, out);
  if (!out) throw IoError("error while writing file: " + path);
}

struct TruthEntry {
  std::string item;
  double score = 0.0;
};

/// Reads an `item,score` ground-truth file.
inline std::vector<TruthEntry> load_truth_csv(const std::string& path) {
  const csv::Table table = csv::read_table(path);
  const std::size_t item_col = csv::require_column(table.header, "item", path);
  const std::size_t score_col = csv::require_column(table.header, "score", path);
  std::vector<TruthEntry> out;
  std::set<std::string> seen;
  for (const auto& [line, fields] : table.rows) {
    if (fields.size() <= std::max(item_col, score_col)) {
      throw SchemaError("too few fields at line " + std::to_string(line) + " of " + path);
    }
    auto score = csv::parse_double(fields[score_col]);
    if (!score || !std::isfinite(*score)) {
      throw SchemaError("invalid score '" + fields[score_col] + "' at line " + std::to_string(line) +
                        " of " + path);
    }
    if (!seen.insert(fields[item_col]).second) {
      throw SchemaError("duplicate item '" + fields[item_col] + "' in " + path);
    }
    out.push_back({fields[item_col], *score});
  }
  return out;
}

inline void write_truth_csv(const std::vector<TruthEntry>& truth, std::ostream& out) {
  out << "item,score\n";
  std::ostringstream num;
  for (const TruthEntry& e : truth) {
    num.str("");
    num.precision(17);
    num << e.score;
    out << csv::quote(e.item) << ',' << num.str() << '\n';
  }
}

inline void write_truth_csv(const std::vector<TruthEntry>& truth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  write_truth_csv(truth, out);
}

/// Orders ground-truth scores by the dataset's real item ids. Every real item of
/// the dataset must have an entry.
inline GroundTruth align_truth(const ComparisonDataset& data, const std::vector<TruthEntry>& truth) {
  std::map<std::string, double> by_label;
  for (const TruthEntry& e : truth) by_label[e.item] = e.score;
  ScoreVector scores;
  for (ItemId i = 0; i < data.n_items(); ++i) {
    if (!data.is_real_item(i)) continue;
    const std::string label = data.item_label(i);
    auto it = by_label.find(label);
    if (it == by_label.end()) throw SchemaError("ground truth has no score for item '" + label + "'");
    scores.push_back(it->second);
  }
  return GroundTruth::from_scores(std::move(scores));
}

}  // namespace hetrank
