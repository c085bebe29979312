#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/hnsw.hpp"
#include "i2v/knn.hpp"
#include "i2v/types.hpp"
#include "i2v/vocab.hpp"

namespace i2v {

struct CandidateEntry {
  std::string item;
  InteractionType interaction = InteractionType::View;
  float score = 0.0f;
};

struct CandidateSet {
  std::string query;
  std::optional<InteractionType> target;
  std::vector<CandidateEntry> entries;
  bool cold = false;  // set when a user history had no usable pairs
};

struct CandidateOptions {
  bool exclude_query_item = true;
  std::size_t overfetch_factor = 4;  // headroom for the interaction filter
};

// Retrieval backends share a tiny surface: top-k search plus access to the
// stored vector of a vocabulary row.
struct ExactSearcher {
  VectorView table;
  Metric metric = Metric::Cosine;

  std::vector<Scored> query(std::span<const float> q, std::size_t k) const {
    return exact_knn(q, table, k, metric);
  }
  std::span<const float> vector_of(std::uint32_t id) const {
    return table.row(id);
  }
  std::size_t size() const { return table.count; }
};

struct HnswSearcher {
  const HnswIndex* index = nullptr;
  std::size_t ef = 256;

  std::vector<Scored> query(std::span<const float> q, std::size_t k) const {
    return index->search(q, k, std::max(ef, k));
  }
  std::span<const float> vector_of(std::uint32_t id) const {
    return index->vector_of(id);
  }
  std::size_t size() const { return index->size(); }
};

// Nearest neighbors of a pair's embedding, filtered to the target
// interaction when one is given, the query's own item dropped, items
// deduplicated keeping their best score, truncated to k. Out-of-vocabulary
// queries yield nullopt (an explicit miss, distinct from an empty set).
template <typename Searcher>
std::optional<CandidateSet> candidates_for_pair(
    const PairToken& pair, std::optional<InteractionType> target,
    std::size_t k, const Searcher& searcher, const Vocabulary& vocab,
    const CandidateOptions& options = {}) {
  const auto query_index = vocab.find(pair);
  if (!query_index) return std::nullopt;

  CandidateSet out;
  out.query = pair.canonical();
  out.target = target;
  if (k == 0) return out;

  const std::size_t fetch = std::min(
      searcher.size(),
      std::max<std::size_t>(k, k * std::max<std::size_t>(
                                       1, options.overfetch_factor)));
  const auto scored = searcher.query(searcher.vector_of(*query_index), fetch);

  std::unordered_set<std::string> taken;
  for (const Scored& s : scored) {
    const PairToken& token = vocab.token(s.id);
    if (target && token.interaction != *target) continue;
    if (options.exclude_query_item && token.item == pair.item) continue;
    if (!taken.insert(token.item).second) continue;
    out.entries.push_back({token.item, token.interaction, s.score});
    if (out.entries.size() >= k) break;
  }
  return out;
}

// Union of the per-pair candidate sets of the last_n most recent usable
// history pairs. Duplicate items keep their maximum score; every item the
// user already touched is excluded. No usable history yields a cold set.
template <typename Searcher>
CandidateSet candidates_for_user(std::span<const PairToken> history,
                                 std::size_t per_pair_k, std::size_t last_n,
                                 std::optional<InteractionType> target,
                                 std::optional<InteractionType> source_filter,
                                 std::size_t k, const Searcher& searcher,
                                 const Vocabulary& vocab,
                                 const CandidateOptions& options = {}) {
  CandidateSet out;
  out.query = "history";
  out.target = target;

  std::vector<const PairToken*> usable;
  for (const PairToken& p : history) {
    if (source_filter && p.interaction != *source_filter) continue;
    if (!vocab.find(p)) continue;
    usable.push_back(&p);
  }
  if (usable.size() > last_n)
    usable.erase(usable.begin(),
                 usable.end() - static_cast<std::ptrdiff_t>(last_n));
  if (usable.empty()) {
    out.cold = true;
    return out;
  }

  std::unordered_set<std::string> history_items;
  for (const PairToken& p : history) history_items.insert(p.item);

  std::unordered_map<std::string, CandidateEntry> best;
  for (const PairToken* p : usable) {
    const auto set =
        candidates_for_pair(*p, target, per_pair_k, searcher, vocab, options);
    if (!set) continue;
    for (const CandidateEntry& e : set->entries) {
      if (history_items.count(e.item)) continue;
      auto [it, inserted] = best.emplace(e.item, e);
      if (!inserted && e.score > it->second.score) it->second = e;
    }
  }

  out.entries.reserve(best.size());
  for (auto& [item, entry] : best) out.entries.push_back(entry);
  std::sort(out.entries.begin(), out.entries.end(),
            [](const CandidateEntry& a, const CandidateEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  if (out.entries.size() > k) out.entries.resize(k);
  return out;
}

// Per-item sparse vectors counting, for each other item, the number of
// sessions where both were purchased. Symmetric, empty diagonal.
class CoPurchaseModel {
 public:
  static CoPurchaseModel build(std::span<const Session> sessions) {
    CoPurchaseModel model;
    for (const Session& s : sessions) {
      std::vector<std::string> purchased;
      for (const PairToken& e : s.events)
        if (e.interaction == InteractionType::Purchase)
          purchased.push_back(e.item);
      std::sort(purchased.begin(), purchased.end());
      purchased.erase(std::unique(purchased.begin(), purchased.end()),
                      purchased.end());
      for (std::size_t i = 0; i < purchased.size(); ++i)
        for (std::size_t j = i + 1; j < purchased.size(); ++j) {
          model.rows_[purchased[i]][purchased[j]] += 1;
          model.rows_[purchased[j]][purchased[i]] += 1;
        }
    }
    for (auto& [item, row] : model.rows_) {
      double sq = 0.0;
      for (const auto& [other, w] : row) sq += static_cast<double>(w) * w;
      model.norms_[item] = std::sqrt(sq);
    }
    return model;
  }

  double weight(const std::string& a, const std::string& b) const {
    auto it = rows_.find(a);
    if (it == rows_.end()) return 0.0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 0.0 : static_cast<double>(jt->second);
  }

  // Covered means the method can actually produce candidates: the item has a
  // row AND shares a partner with at least one other item.
  bool covers(const std::string& item) const {
    const auto set = candidates(item, 1);
    return set.has_value() && !set->entries.empty();
  }

  // Items ranked by cosine similarity between sparse co-purchase rows.
  // Items never co-purchased are unreachable: nullopt signals the miss.
  std::optional<CandidateSet> candidates(const std::string& item,
                                         std::size_t k) const {
    const auto row_it = rows_.find(item);
    if (row_it == rows_.end() || row_it->second.empty()) return std::nullopt;
    const auto& row = row_it->second;

    CandidateSet out;
    out.query = item;
    out.target = InteractionType::Purchase;

    // Candidates are exactly the rows with nonzero overlap: items sharing a
    // co-purchase partner with the query.
    std::map<std::string, double> dots;
    for (const auto& [partner, w] : row) {
      const auto partner_row = rows_.find(partner);
      for (const auto& [other, wo] : partner_row->second) {
        if (other == item) continue;
        dots[other] += static_cast<double>(w) * wo;
      }
    }

    const double qn = norms_.at(item);
    std::vector<CandidateEntry> entries;
    entries.reserve(dots.size());
    for (const auto& [other, dot] : dots) {
      const double denom = qn * norms_.at(other);
      if (denom == 0.0) continue;
      entries.push_back({other, InteractionType::Purchase,
                         static_cast<float>(dot / denom)});
    }
    std::sort(entries.begin(), entries.end(),
              [](const CandidateEntry& a, const CandidateEntry& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.item < b.item;
              });
    if (entries.size() > k) entries.resize(k);
    out.entries = std::move(entries);
    return out;
  }

  std::size_t item_count() const { return rows_.size(); }

 private:
  std::unordered_map<std::string, std::map<std::string, std::uint32_t>> rows_;
  std::unordered_map<std::string, double> norms_;
};

// Candidate line format: <query> \t <item>:<interaction>:<score>,... with
// six-decimal scores.
inline void write_candidate_line(std::ostream& out, const CandidateSet& set) {
  out << set.query << '\t';
  char buf[32];
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const CandidateEntry& e = set.entries[i];
    if (i) out << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(e.score));
    out << e.item << ':' << to_string(e.interaction) << ':' << buf;
  }
  out << '\n';
}

}  // namespace i2v
