#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/types.hpp"

namespace i2v {

// Whether a pair's hit set counts target events anywhere in a shared session
// or only strictly after the pair's first occurrence.
enum class HitScope : std::uint8_t {
  After = 0,
  Any = 1,
};

inline std::optional<HitScope> parse_scope(std::string_view s) {
  if (s == "after") return HitScope::After;
  if (s == "any") return HitScope::Any;
  return std::nullopt;
}

using HitSet = std::map<std::string, std::uint64_t>;  // item -> quantity

// For every distinct pair p in the test sessions, the items that received
// the target interaction in sessions containing p (quantities summed across
// sessions), excluding the identity pair p itself. Pairs whose set came out
// empty are kept so callers can report them as skipped.
struct HitSets {
  InteractionType target = InteractionType::Purchase;
  HitScope scope = HitScope::After;
  std::map<std::string, HitSet> by_pair;  // canonical pair -> hit set
};

inline HitSets build_hit_sets(std::span<const Session> test_sessions,
                              InteractionType target,
                              HitScope scope = HitScope::After) {
  HitSets out;
  out.target = target;
  out.scope = scope;
  for (const Session& s : test_sessions) {
    // First occurrence position of each distinct pair.
    std::unordered_map<std::string, std::size_t> first_pos;
    for (std::size_t pos = 0; pos < s.events.size(); ++pos)
      first_pos.emplace(s.events[pos].canonical(), pos);

    std::vector<std::pair<std::size_t, const PairToken*>> target_events;
    for (std::size_t pos = 0; pos < s.events.size(); ++pos)
      if (s.events[pos].interaction == target)
        target_events.emplace_back(pos, &s.events[pos]);

    for (const auto& [canon, pos] : first_pos) {
      auto& hit_set = out.by_pair[canon];  // created even when empty
      const auto pair = PairToken::parse(canon);
      for (const auto& [tpos, event] : target_events) {
        if (scope == HitScope::After && tpos <= pos) continue;
        // Identity exclusion: p != (l, i).
        if (pair->interaction == target && pair->item == event->item) continue;
        hit_set[event->item] += 1;
      }
    }
  }
  return out;
}

// Quantity-weighted fraction of the hit set's items present in the candidate
// item set. Callers must skip empty hit sets.
inline double hit_rate(const HitSet& hits,
                       const std::unordered_set<std::string>& candidate_items) {
  if (hits.empty()) throw ConfigError("hit_rate: empty hit set");
  std::uint64_t total = 0, captured = 0;
  for (const auto& [item, quantity] : hits) {
    total += quantity;
    if (candidate_items.count(item)) captured += quantity;
  }
  return static_cast<double>(captured) / static_cast<double>(total);
}

// Produces the candidate item set for a test pair; nullopt marks a miss
// (out-of-vocabulary query or a method that cannot serve the pair).
using CandidateItemsProvider =
    std::function<std::optional<std::unordered_set<std::string>>(
        const PairToken&)>;

struct HitRateReport {
  double average = 0.0;
  std::size_t evaluated = 0;  // the k of the mean
  std::size_t skipped = 0;    // empty hit sets plus provider misses
  std::vector<std::pair<std::string, double>> per_pair;  // sorted by pair

  bool has_data() const { return evaluated > 0; }
};

// Mean per-pair hit rate over the distinct evaluated pairs. Aggregation is
// order-independent: rates are summed in canonical pair order regardless of
// scheduling.
inline HitRateReport average_hit_rate(const HitSets& hit_sets,
                                      const CandidateItemsProvider& provider,
                                      int threads = 1) {
  std::vector<const std::pair<const std::string, HitSet>*> pairs;
  pairs.reserve(hit_sets.by_pair.size());
  for (const auto& entry : hit_sets.by_pair) pairs.push_back(&entry);

  std::vector<std::optional<double>> rates(pairs.size());
  auto evaluate_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& [canon, hits] = *pairs[i];
      if (hits.empty()) continue;
      const auto pair = PairToken::parse(canon);
      const auto candidates = provider(*pair);
      if (!candidates) continue;
      rates[i] = hit_rate(hits, *candidates);
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || pairs.size() < 2) {
    evaluate_range(0, pairs.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk =
        (pairs.size() + static_cast<std::size_t>(threads) - 1) /
        static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      if (begin >= pairs.size()) break;
      pool.emplace_back(evaluate_range, begin,
                        std::min(pairs.size(), begin + chunk));
    }
    for (auto& th : pool) th.join();
  }

  HitRateReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!rates[i]) {
      ++report.skipped;
      continue;
    }
    report.per_pair.emplace_back(pairs[i]->first, *rates[i]);
    sum += *rates[i];
  }
  report.evaluated = report.per_pair.size();
  if (report.evaluated > 0)
    report.average = sum / static_cast<double>(report.evaluated);
  return report;
}

// True when the method can produce a non-miss, non-empty set for the item.
using CoverageProbe = std::function<bool(const std::string&)>;

struct CoverageResult {
  double item_pct = 0.0;
  double traffic_pct = 0.0;
  bool has_data = false;
};

inline CoverageResult coverage_rate(
    const CoverageProbe& probe, const std::set<std::string>& active_items,
    const std::map<std::string, std::uint64_t>* traffic_weights = nullptr) {
  CoverageResult out;
  if (active_items.empty()) return out;
  out.has_data = true;

  std::size_t covered = 0;
  std::uint64_t traffic_total = 0, traffic_covered = 0;
  for (const std::string& item : active_items) {
    std::uint64_t w = 1;
    if (traffic_weights) {
      auto it = traffic_weights->find(item);
      w = it == traffic_weights->end() ? 0 : it->second;
    }
    traffic_total += w;
    if (probe(item)) {
      ++covered;
      traffic_covered += w;
    }
  }
  out.item_pct =
      100.0 * static_cast<double>(covered) / static_cast<double>(active_items.size());
  out.traffic_pct = traffic_total == 0
                        ? 0.0
                        : 100.0 * static_cast<double>(traffic_covered) /
                              static_cast<double>(traffic_total);
  return out;
}

// 100 * (model - baseline) / baseline; undefined for a zero baseline.
inline std::optional<double> percent_change(double model_rate,
                                            double baseline_rate) {
  if (baseline_rate == 0.0) return std::nullopt;
  return 100.0 * (model_rate - baseline_rate) / baseline_rate;
}

}  // namespace i2v
