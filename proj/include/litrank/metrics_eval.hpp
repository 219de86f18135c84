#pragma once
// Average precision, MAP and recall@k over ranked UID lists; prediction files.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "litrank/common.hpp"
#include "litrank/sparse_retrieval.hpp"

namespace litrank {

// (1/|gold|) * sum over gold hits at 1-based rank r of hits_so_far / r.
// Gold items missing from the ranking contribute 0. Repeated UIDs count once.
inline double average_precision(const std::vector<std::string>& ranking, const std::vector<std::string>& gold) {
  const std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
  if (gold_set.empty()) throw std::invalid_argument("undefined AP: empty gold set");
  std::unordered_set<std::string> seen;
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (!gold_set.contains(ranking[r]) || !seen.insert(ranking[r]).second) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(gold_set.size());
}

inline double recall_at_k(const std::vector<std::string>& ranking, const std::vector<std::string>& gold,
                          std::size_t k) {
  const std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
  if (gold_set.empty()) throw std::invalid_argument("undefined recall: empty gold set");
  std::unordered_set<std::string> found;
  for (std::size_t r = 0; r < ranking.size() && r < k; ++r)
    if (gold_set.contains(ranking[r])) found.insert(ranking[r]);
  return static_cast<double>(found.size()) / static_cast<double>(gold_set.size());
}

inline const std::vector<std::size_t>& default_recall_cutoffs() {
  static const std::vector<std::size_t> ks{1, 8, 32, 64, 128, 256, 1024};
  return ks;
}

struct EvalReport {
  std::map<std::string, double> ap;  // per scoreable question
  double map = 0.0;
  std::map<std::size_t, double> recall;  // mean recall@k over scoreable questions
  std::size_t question_count = 0;        // scoreable questions
  std::size_t skipped = 0;               // questions with empty gold

  std::string table() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "questions scored : " << question_count << '\n';
    out << "questions skipped: " << skipped << '\n';
    out << "MAP              : " << map << '\n';
    for (const auto& [k, r] : recall) out << "recall@" << std::left << std::setw(10) << k << ": " << r << '\n';
    return out.str();
  }

  std::string key_values() const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "questions=" << question_count << '\n';
    out << "skipped=" << skipped << '\n';
    out << "map=" << map << '\n';
    for (const auto& [k, r] : recall) out << "recall@" << k << '=' << r << '\n';
    for (const auto& [q, a] : ap) out << "ap." << q << '=' << a << '\n';
    return out.str();
  }
};

// `golds` is keyed by question id. Questions with empty gold are
// skipped and counted. Throws if nothing is scoreable.
inline EvalReport mean_average_precision(const std::map<std::string, std::vector<std::string>>& rankings,
                                         const std::map<std::string, std::vector<std::string>>& golds,
                                         const std::vector<std::size_t>& cutoffs = default_recall_cutoffs()) {
  EvalReport rep;
  double sum = 0.0;
  std::map<std::size_t, double> recall_sum;
  for (const auto& [qid, gold] : golds) {
    if (gold.empty()) {
      ++rep.skipped;
      continue;
    }
    // A question with no predictions scores as an empty ranking.
    static const std::vector<std::string> kNone;
    const auto it = rankings.find(qid);
    const auto& ranking = it == rankings.end() ? kNone : it->second;
    const double ap = average_precision(ranking, gold);
    rep.ap[qid] = ap;
    sum += ap;
    for (const auto k : cutoffs) recall_sum[k] += recall_at_k(ranking, gold, k);
  }
  rep.question_count = rep.ap.size();
  if (rep.question_count == 0) throw std::invalid_argument("no scoreable questions");
  const double n = static_cast<double>(rep.question_count);
  rep.map = sum / n;
  for (const auto& [k, s] : recall_sum) rep.recall[k] = s / n;
  return rep;
}

// "questionID<TAB>factUID" lines, grouped by question in input order, best first.
inline void write_predictions(const std::filesystem::path& path, const std::vector<RankedList>& rankings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write predictions to " + path.string());
  for (const auto& r : rankings)
    for (const auto& e : r.entries) out << r.qid << '\t' << e.uid << '\n';
  out.flush();
  if (!out) throw InputError("write failed: " + path.string());
}

// Reads a prediction file back into per-question UID orderings (file order).
inline std::map<std::string, std::vector<std::string>> read_predictions(const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& line : read_lines(path.string())) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError(path.string() + ": malformed prediction line");
    out[line.substr(0, tab)].push_back(line.substr(tab + 1));
  }
  return out;
}

}  // namespace litrank
