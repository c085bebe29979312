#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/rng.hpp"
#include "i2v/taxonomy.hpp"
#include "i2v/types.hpp"
#include "i2v/vocab.hpp"

namespace i2v {

// Frequency-weighted unigram sampler: P(i) proportional to count_i^alpha.
// Sampling is a binary search over the cumulative weight array.
class UnigramTable {
 public:
  UnigramTable(const Vocabulary& vocab, double alpha = 0.75) {
    if (vocab.empty())
      throw DataError("unigram table requires a non-empty vocabulary");
    if (alpha < 0.0 || alpha > 1.0)
      throw ConfigError("unigram alpha must be in [0,1]");
    cumulative_.reserve(vocab.size());
    double running = 0.0;
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
      running += std::pow(static_cast<double>(vocab.count(i)), alpha);
      cumulative_.push_back(running);
    }
    total_ = running;
  }

  std::uint32_t sample(Rng& rng) const {
    const double u = rng.next_double() * total_;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return static_cast<std::uint32_t>(std::min(idx, cumulative_.size() - 1));
  }

  double probability(std::uint32_t i) const {
    const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - lo) / total_;
  }

  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

// Per-position custom negative targets for one session.
struct CustomNegativeSet {
  std::vector<std::vector<PairToken>> per_event;
};

// For each event (l, i), every (l, j) with j strictly above i in the
// purchase > cart > favorite > view order, provided (l, j) occurs nowhere in
// the session.
inline CustomNegativeSet interaction_negatives(const Session& session) {
  std::unordered_set<std::string> present;
  present.reserve(session.events.size() * 2);
  for (const PairToken& e : session.events) present.insert(e.canonical());

  CustomNegativeSet out;
  out.per_event.resize(session.events.size());
  for (std::size_t pos = 0; pos < session.events.size(); ++pos) {
    const PairToken& e = session.events[pos];
    for (int j = interaction_rank(e.interaction) + 1; j < kInteractionCount;
         ++j) {
      PairToken candidate(e.item, static_cast<InteractionType>(j));
      if (!present.count(candidate.canonical()))
        out.per_event[pos].push_back(std::move(candidate));
    }
  }
  return out;
}

// Draws the two same-taxonomy view negatives for view-only items. Peers are
// restricted to items whose view token survived the vocabulary cut.
class TaxonomyViewSampler {
 public:
  TaxonomyViewSampler(const Vocabulary& vocab, const TaxonomyMap& taxonomy) {
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
      const PairToken& t = vocab.token(i);
      if (t.interaction != InteractionType::View) continue;
      buckets_[taxonomy.taxonomy_of(t.item)].push_back(t.item);
    }
    for (auto& [tax, items] : buckets_) std::sort(items.begin(), items.end());
  }

  CustomNegativeSet negatives_for(const Session& session,
                                  const TaxonomyMap& taxonomy, Rng& rng) const {
    // An item qualifies when view is its only interaction in the session.
    std::unordered_map<std::string, unsigned> seen_kinds;
    for (const PairToken& e : session.events)
      seen_kinds[e.item] |= 1u << interaction_rank(e.interaction);
    const unsigned view_only = 1u << interaction_rank(InteractionType::View);

    CustomNegativeSet out;
    out.per_event.resize(session.events.size());
    for (std::size_t pos = 0; pos < session.events.size(); ++pos) {
      const PairToken& e = session.events[pos];
      if (seen_kinds.at(e.item) != view_only) continue;

      const auto bucket_it = buckets_.find(taxonomy.taxonomy_of(e.item));
      if (bucket_it == buckets_.end()) continue;
      const std::vector<std::string>& bucket = bucket_it->second;

      // Peers: bucket members other than the item itself.
      const auto self =
          std::lower_bound(bucket.begin(), bucket.end(), e.item);
      const bool has_self = self != bucket.end() && *self == e.item;
      const std::size_t peers = bucket.size() - (has_self ? 1 : 0);
      if (peers == 0) continue;

      auto pick = [&](std::size_t idx) -> const std::string& {
        if (has_self &&
            idx >= static_cast<std::size_t>(self - bucket.begin()))
          ++idx;
        return bucket[idx];
      };

      const std::size_t first = rng.below(peers);
      out.per_event[pos].emplace_back(pick(first), InteractionType::View);
      if (peers >= 2) {
        std::size_t second = rng.below(peers - 1);
        if (second >= first) ++second;
        out.per_event[pos].emplace_back(pick(second), InteractionType::View);
      }
    }
    return out;
  }

 private:
  std::unordered_map<std::string, std::vector<std::string>> buckets_;
};

inline CustomNegativeSet taxonomy_view_negatives(const Session& session,
                                                 const TaxonomyMap& taxonomy,
                                                 const Vocabulary& vocab,
                                                 std::uint64_t seed) {
  TaxonomyViewSampler sampler(vocab, taxonomy);
  Rng rng(seed);
  return sampler.negatives_for(session, taxonomy, rng);
}

inline constexpr int kNegativeRetryLimit = 16;

// k unigram draws rejecting excluded indices (the positive target and the
// center token). Bounded retries, so tiny vocabularies return fewer than k.
inline std::vector<std::uint32_t> sample_random_negatives(
    const UnigramTable& table, int k, std::span<const std::uint32_t> exclusions,
    Rng& rng) {
  std::vector<std::uint32_t> out;
  if (k <= 0) return out;
  out.reserve(static_cast<std::size_t>(k));
  for (int drawn = 0; drawn < k; ++drawn) {
    for (int attempt = 0; attempt < kNegativeRetryLimit; ++attempt) {
      const std::uint32_t idx = table.sample(rng);
      if (std::find(exclusions.begin(), exclusions.end(), idx) !=
          exclusions.end())
        continue;
      out.push_back(idx);
      break;
    }
  }
  return out;
}

}  // namespace i2v
