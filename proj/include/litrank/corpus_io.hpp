#pragma once
// WorldTree-format ingestion: fact tables and question files.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "litrank/common.hpp"

namespace litrank {

struct Fact {
  std::string uid;
  std::string text;
  std::string table_name;

  bool operator==(const Fact&) const = default;
};

class FactStore {
 public:
  // Throws InvariantError on a duplicate UID or empty text.
  void add(Fact fact) {
    if (fact.text.empty()) throw InvariantError("fact " + fact.uid + " has empty text");
    const auto [it, inserted] = index_.emplace(fact.uid, facts_.size());
    if (!inserted) {
      throw InvariantError("duplicate UID " + fact.uid + " in tables '" +
                           facts_[it->second].table_name + "' and '" + fact.table_name + "'");
    }
    facts_.push_back(std::move(fact));
  }

  const std::vector<Fact>& facts() const { return facts_; }
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }
  bool contains(const std::string& uid) const { return index_.contains(uid); }

  std::optional<std::size_t> find(const std::string& uid) const {
    const auto it = index_.find(uid);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const Fact& at(std::size_t i) const { return facts_.at(i); }

  bool operator==(const FactStore& other) const { return facts_ == other.facts_; }

 private:
  std::vector<Fact> facts_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Split { train, dev, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  throw InputError("unknown split '" + std::string(s) + "'");
}

struct Question {
  std::string qid;
  std::string stem;
  std::map<std::string, std::string> choices;
  std::string answer_key;
  // Kept in file order; roles are parsed but not used as labels.
  std::vector<std::string> gold;
  std::vector<std::string> gold_roles;

  bool operator==(const Question&) const = default;
};

struct Corpus {
  FactStore facts;
  std::map<Split, std::vector<Question>> questions;
};

// Header matching for skipped columns is a case-sensitive substring test.
inline constexpr std::string_view kSkipMarker = "[SKIP]";
inline constexpr std::string_view kUidHeader = "[SKIP] UID";

// Parses one table file into `store`. The table name is the file stem.
inline void load_fact_table(const std::filesystem::path& file, FactStore& store, Diagnostics& diag) {
  const auto lines = read_lines(file.string());
  if (lines.empty()) throw InputError("fact table " + file.string() + " has no header row");
  const auto header = split(lines.front(), '\t');
  std::optional<std::size_t> uid_col;
  std::vector<std::size_t> text_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == kUidHeader) uid_col = c;
    if (header[c].find(kSkipMarker) == std::string::npos) text_cols.push_back(c);
  }
  if (!uid_col) throw InputError("fact table " + file.string() + " has no '[SKIP] UID' column");

  const auto table = file.stem().string();
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (trim(lines[r]).empty()) continue;
    const auto cells = split(lines[r], '\t');
    const std::string uid = *uid_col < cells.size() ? std::string(trim(cells[*uid_col])) : "";
    if (uid.empty()) {
      diag.warn(table + ": row " + std::to_string(r + 1) + " has no UID, skipped");
      continue;
    }
    std::string text;
    for (const auto c : text_cols) {
      if (c >= cells.size()) continue;
      const auto cell = trim(cells[c]);
      if (cell.empty()) continue;
      if (!text.empty()) text += ' ';
      text += cell;
    }
    if (text.empty()) {
      diag.warn(table + ": fact " + uid + " has no text, skipped");
      continue;
    }
    store.add(Fact{uid, std::move(text), table});
  }
}

// Every *.tsv file in `dir`, visited in lexicographic filename order.
inline FactStore load_fact_tables(const std::filesystem::path& dir, Diagnostics& diag) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("fact table directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no .tsv fact tables in " + dir.string());
  FactStore store;
  for (const auto& f : files) load_fact_table(f, store, diag);
  return store;
}

// Splits "stem (A) x (B) y" into the stem and a letter->choice map.
inline void split_question_field(std::string_view field, std::string& stem,
                                 std::map<std::string, std::string>& choices) {
  struct Marker {
    std::size_t pos;
    std::string key;
  };
  std::vector<Marker> markers;
  for (std::size_t i = 0; i + 2 < field.size(); ++i) {
    if (field[i] != '(' || field[i + 2] != ')') continue;
    const char k = field[i + 1];
    if ((k >= 'A' && k <= 'E') || (k >= '1' && k <= '5')) markers.push_back({i, std::string(1, k)});
  }
  // Only a run that starts at "(A)" or "(1)" counts as the choice list.
  auto first = std::find_if(markers.begin(), markers.end(),
                            [](const Marker& m) { return m.key == "A" || m.key == "1"; });
  if (first == markers.end()) {
    stem = std::string(trim(field));
    return;
  }
  markers.erase(markers.begin(), first);
  stem = std::string(trim(field.substr(0, markers.front().pos)));
  for (std::size_t m = 0; m < markers.size(); ++m) {
    const auto begin = markers[m].pos + 3;
    const auto end = m + 1 < markers.size() ? markers[m + 1].pos : field.size();
    choices[markers[m].key] = std::string(trim(field.substr(begin, end - begin)));
  }
}

// "uid|ROLE uid|ROLE ..." -> uids and roles. Malformed entries are skipped with a warning.
inline void parse_explanation_field(std::string_view field, const std::string& qid,
                                    std::vector<std::string>& uids, std::vector<std::string>& roles,
                                    Diagnostics& diag) {
  for (const auto& raw : split(field, ' ')) {
    const auto entry = trim(raw);
    if (entry.empty()) continue;
    const auto bar = entry.find('|');
    if (bar == std::string_view::npos || bar == 0 || entry.find('|', bar + 1) != std::string_view::npos) {
      diag.warn(qid + ": unparseable explanation entry '" + std::string(entry) + "'");
      continue;
    }
    const auto uid = std::string(entry.substr(0, bar));
    if (std::find(uids.begin(), uids.end(), uid) != uids.end()) continue;
    uids.push_back(uid);
    roles.emplace_back(entry.substr(bar + 1));
  }
}

inline std::vector<Question> load_questions(const std::filesystem::path& path, Split split_kind,
                                            Diagnostics& diag) {
  const auto lines = read_lines(path.string());
  if (lines.empty()) throw InputError("question file " + path.string() + " is empty");
  const auto header = split(lines.front(), '\t');
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (trim(header[c]) == name) return c;
    return std::nullopt;
  };
  const auto qid_col = column("QuestionID");
  const auto question_col = column("question");
  const auto key_col = column("AnswerKey");
  const auto expl_col = column("explanation");
  if (!qid_col || !question_col || !key_col) {
    throw InputError("question file " + path.string() +
                     ": header must contain QuestionID, question and AnswerKey");
  }
  if (!expl_col && split_kind != Split::test) {
    throw InputError("question file " + path.string() + ": " + to_string(split_kind) +
                     " split requires an explanation column");
  }

  std::vector<Question> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (trim(lines[r]).empty()) continue;
    const auto cells = split(lines[r], '\t');
    auto cell = [&](std::optional<std::size_t> c) -> std::string_view {
      return c && *c < cells.size() ? trim(cells[*c]) : std::string_view{};
    };
    Question q;
    q.qid = std::string(cell(qid_col));
    if (q.qid.empty()) {
      diag.warn(path.filename().string() + ": row " + std::to_string(r + 1) + " has no QuestionID, skipped");
      continue;
    }
    split_question_field(cell(question_col), q.stem, q.choices);
    q.answer_key = std::string(cell(key_col));
    if (!q.answer_key.empty() && !q.choices.contains(q.answer_key)) {
      diag.warn(q.qid + ": answer key '" + q.answer_key + "' is not among the choices");
      q.answer_key.clear();
    }
    if (expl_col) parse_explanation_field(cell(expl_col), q.qid, q.gold, q.gold_roles, diag);
    out.push_back(std::move(q));
  }
  return out;
}

// Drops gold UIDs absent from the fact store. Returns how many were dropped.
inline std::size_t filter_gold(std::vector<Question>& questions, const FactStore& store, Diagnostics& diag) {
  std::size_t dropped = 0;
  for (auto& q : questions) {
    std::vector<std::string> uids;
    std::vector<std::string> roles;
    for (std::size_t i = 0; i < q.gold.size(); ++i) {
      if (store.contains(q.gold[i])) {
        uids.push_back(q.gold[i]);
        roles.push_back(i < q.gold_roles.size() ? q.gold_roles[i] : "");
      } else {
        ++dropped;
        diag.warn(q.qid + ": gold UID " + q.gold[i] + " not in fact store, dropped");
      }
    }
    q.gold = std::move(uids);
    q.gold_roles = std::move(roles);
  }
  return dropped;
}

// Stem plus the correct choice text; distractors are never included.
inline std::string build_query_text(const Question& q, Diagnostics* diag = nullptr) {
  const auto it = q.answer_key.empty() ? q.choices.end() : q.choices.find(q.answer_key);
  if (it == q.choices.end()) {
    if (diag) diag->warn(q.qid + ": no usable answer key, query uses the stem only");
    return q.stem;
  }
  return q.stem + " " + it->second;
}

// Canonical dump: "uid<TAB>text" per line.
inline void write_fact_dump(const std::filesystem::path& path, const FactStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& f : store.facts()) out << f.uid << '\t' << f.text << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

inline FactStore read_fact_dump(const std::filesystem::path& path, const std::string& table_name = "dump") {
  FactStore store;
  for (const auto& line : read_lines(path.string())) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError(path.string() + ": malformed dump line");
    store.add(Fact{line.substr(0, tab), line.substr(tab + 1), table_name});
  }
  return store;
}

}  // namespace litrank
