#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/rng.hpp"
#include "i2v/taxonomy.hpp"
#include "i2v/types.hpp"

namespace i2v {

// Synthetic corpus with planted structure:
//  - items are partitioned into clusters (clusters double as taxonomy ids);
//  - the item walk stays inside the current cluster with probability q_in;
//  - interactions follow a small Markov chain over the four kinds;
//  - non-view interactions re-engage the same item with probability p_stay;
//  - after an add-to-cart, with probability complement_prob the next event is
//    a purchase of the item's planted complement (a designated "head" item of
//    the same cluster), so co-interaction structure depends on the kind.
struct SyntheticConfig {
  std::uint32_t items = 100;
  std::uint32_t clusters = 5;
  std::uint32_t sessions = 10000;
  std::uint32_t min_session_len = 4;
  std::uint32_t max_session_len = 12;
  double q_in = 0.9;
  double p_favorite = 0.06;
  double p_cart = 0.08;
  double p_purchase = 0.04;
  double p_stay = 0.5;
  double complement_prob = 0.5;
  double head_fraction = 0.5;
  // When set, complements live in the next cluster (cameras -> memory
  // cards): purchase co-occurrence then crosses taxonomy lines while view
  // co-occurrence stays home, so the structure is interaction dependent.
  bool complement_cross_cluster = false;

  void validate() const {
    if (items == 0) throw ConfigError("synthetic config: items must be > 0");
    if (sessions == 0) throw ConfigError("synthetic config: sessions must be > 0");
    if (clusters == 0) throw ConfigError("synthetic config: clusters must be > 0");
    if (clusters > items)
      throw ConfigError("synthetic config: more clusters than items");
    if (min_session_len == 0 || min_session_len > max_session_len)
      throw ConfigError("synthetic config: invalid session length range");
    auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in01(q_in) || !in01(p_stay) || !in01(complement_prob) ||
        !in01(head_fraction))
      throw ConfigError("synthetic config: probabilities must be in [0,1]");
    if (p_favorite < 0 || p_cart < 0 || p_purchase < 0 ||
        p_favorite + p_cart + 2.0 * p_purchase > 1.0)
      throw ConfigError("synthetic config: interaction probabilities too large");
  }
};

struct SyntheticCorpus {
  std::vector<Session> sessions;
  TaxonomyMap taxonomy;
  std::unordered_map<std::string, std::uint32_t> cluster_of;
  // Planted cart -> purchase complement; items in single-item clusters have none.
  std::unordered_map<std::string, std::string> complement_of;
};

namespace detail {

inline std::string synthetic_item_name(std::uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "item%04u", i);
  return buf;
}

inline std::string synthetic_cluster_name(std::uint32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%02u", c);
  return buf;
}

// Interaction transition rows derived from the base emission probabilities.
// Carting doubles the chance of a purchase next; a purchase cools back down
// toward browsing.
inline std::array<std::array<double, 4>, 4> interaction_chain(
    const SyntheticConfig& cfg) {
  const double pf = cfg.p_favorite, pc = cfg.p_cart, pp = cfg.p_purchase;
  std::array<std::array<double, 4>, 4> rows{};
  rows[interaction_rank(InteractionType::View)] = {1 - pf - pc - pp, pf, pc, pp};
  rows[interaction_rank(InteractionType::Favorite)] = {1 - pf - pc - pp, pf, pc,
                                                       pp};
  rows[interaction_rank(InteractionType::AddToCart)] = {1 - pf - pc - 2 * pp, pf,
                                                        pc, 2 * pp};
  rows[interaction_rank(InteractionType::Purchase)] = {
      1 - pf - pc / 2 - pp / 2, pf, pc / 2, pp / 2};
  return rows;
}

inline InteractionType draw_interaction(const std::array<double, 4>& row,
                                        Rng& rng) {
  double u = rng.next_double();
  for (int k = 0; k < 3; ++k) {
    if (u < row[k]) return static_cast<InteractionType>(k);
    u -= row[k];
  }
  return InteractionType::Purchase;
}

}  // namespace detail

inline SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg,
                                          std::uint64_t seed) {
  cfg.validate();

  SyntheticCorpus corpus;
  const std::uint32_t n = cfg.items;
  const std::uint32_t k = cfg.clusters;

  // Contiguous, balanced cluster blocks.
  std::vector<std::uint32_t> cluster(n);
  std::vector<std::vector<std::uint32_t>> members(k);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(i) * k) / n);
    cluster[i] = c;
    members[c].push_back(i);
  }

  // Complements point into a head subset, rotating by the item's local index
  // so the purchase mass concentrates on head items. The target cluster is
  // the item's own, or the next cluster in cross-cluster mode.
  std::vector<std::int64_t> complement(n, -1);
  for (std::uint32_t c = 0; c < k; ++c) {
    const auto& block = members[c];
    const auto& targets =
        cfg.complement_cross_cluster ? members[(c + 1) % k] : members[c];
    const auto heads = static_cast<std::uint32_t>(std::max<std::size_t>(
        1, static_cast<std::size_t>(cfg.head_fraction * targets.size() + 0.5)));
    for (std::uint32_t j = 0; j < block.size(); ++j) {
      for (std::uint32_t step = 1; step <= heads; ++step) {
        const std::uint32_t target = targets[(j + step) % heads];
        if (target != block[j]) {
          complement[block[j]] = target;
          break;
        }
      }
    }
  }

  std::vector<std::string> item_names(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    item_names[i] = detail::synthetic_item_name(i);
    const std::string tax = detail::synthetic_cluster_name(cluster[i]);
    corpus.taxonomy.assign(item_names[i], tax);
    corpus.cluster_of.emplace(item_names[i], cluster[i]);
    if (complement[i] >= 0)
      corpus.complement_of.emplace(item_names[i], detail::synthetic_item_name(
                                                      complement[i]));
  }

  const auto chain = detail::interaction_chain(cfg);

  // Next item of the walk: same cluster with probability q_in (a different
  // member when one exists), otherwise a uniform item from another cluster.
  auto next_item = [&](std::uint32_t current, Rng& rng) -> std::uint32_t {
    const std::uint32_t c = cluster[current];
    const auto& block = members[c];
    const bool stay_cluster = k == 1 || rng.bernoulli(cfg.q_in);
    if (stay_cluster) {
      if (block.size() == 1) return current;
      std::uint32_t pick = block[rng.below(block.size() - 1)];
      if (pick == current) pick = block.back();
      return pick;
    }
    std::uint32_t pick = static_cast<std::uint32_t>(rng.below(n - block.size()));
    // Skip over the current cluster's contiguous block.
    if (pick >= block.front()) pick += static_cast<std::uint32_t>(block.size());
    return pick;
  };

  corpus.sessions.reserve(cfg.sessions);
  for (std::uint32_t s = 0; s < cfg.sessions; ++s) {
    Rng rng(mix_seed(seed, s));
    const std::uint32_t len =
        cfg.min_session_len +
        static_cast<std::uint32_t>(
            rng.below(cfg.max_session_len - cfg.min_session_len + 1));

    Session session;
    char sid[16];
    std::snprintf(sid, sizeof(sid), "s%06u", s);
    session.id = sid;
    session.events.reserve(len + 1);

    std::uint32_t item = static_cast<std::uint32_t>(rng.below(n));
    InteractionType prev = InteractionType::View;
    session.events.emplace_back(item_names[item], prev);

    while (session.events.size() < len) {
      const InteractionType kind =
          detail::draw_interaction(chain[interaction_rank(prev)], rng);
      if (kind == InteractionType::View || !rng.bernoulli(cfg.p_stay))
        item = next_item(item, rng);
      session.events.emplace_back(item_names[item], kind);
      prev = kind;

      // The complement purchase is a one-off spike; the walk resumes from
      // the carted item, so sessions keep their cluster coherence.
      if (kind == InteractionType::AddToCart && complement[item] >= 0 &&
          rng.bernoulli(cfg.complement_prob)) {
        prev = InteractionType::Purchase;
        session.events.emplace_back(
            item_names[static_cast<std::uint32_t>(complement[item])], prev);
      }
    }
    corpus.sessions.push_back(std::move(session));
  }
  return corpus;
}

}  // namespace i2v
