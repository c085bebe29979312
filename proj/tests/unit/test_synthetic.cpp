#include "i2v/synthetic.hpp"

#include <gtest/gtest.h>

#include "i2v/session_io.hpp"

namespace i2v {
namespace {

TEST(Synthetic, DegenerateConfigsAreErrors) {
  SyntheticConfig cfg;
  cfg.items = 10;
  cfg.clusters = 2;
  cfg.sessions = 0;
  EXPECT_THROW(generate_synthetic(cfg, 1), ConfigError);

  cfg.sessions = 5;
  cfg.items = 0;
  EXPECT_THROW(generate_synthetic(cfg, 1), ConfigError);

  cfg.items = 4;
  cfg.clusters = 9;
  EXPECT_THROW(generate_synthetic(cfg, 1), ConfigError);
}

TEST(Synthetic, FixedSeedIsReproducible) {
  SyntheticConfig cfg;
  cfg.items = 20;
  cfg.clusters = 4;
  cfg.sessions = 50;
  const auto a = generate_synthetic(cfg, 42);
  const auto b = generate_synthetic(cfg, 42);
  ASSERT_EQ(a.sessions.size(), b.sessions.size());
  for (std::size_t i = 0; i < a.sessions.size(); ++i) {
    EXPECT_EQ(a.sessions[i].id, b.sessions[i].id);
    EXPECT_EQ(a.sessions[i].events, b.sessions[i].events);
  }
  EXPECT_EQ(a.cluster_of, b.cluster_of);
  EXPECT_EQ(a.complement_of, b.complement_of);
}

TEST(Synthetic, DifferentSeedsDiffer) {
  SyntheticConfig cfg;
  cfg.items = 20;
  cfg.clusters = 4;
  cfg.sessions = 20;
  const auto a = generate_synthetic(cfg, 1);
  const auto b = generate_synthetic(cfg, 2);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.sessions.size() && !any_difference; ++i)
    any_difference = a.sessions[i].events != b.sessions[i].events;
  EXPECT_TRUE(any_difference);
}

// Monte Carlo check of the item walk: with q_in = 0.9 the fraction of
// adjacent event pairs sharing a cluster lands near 0.9 (same-item stays and
// complement insertions are within-cluster by construction).
TEST(Synthetic, WithinClusterAdjacencyMatchesQIn) {
  SyntheticConfig cfg;
  cfg.items = 100;
  cfg.clusters = 5;
  cfg.sessions = 10000;
  cfg.q_in = 0.9;
  const auto corpus = generate_synthetic(cfg, 7);

  std::uint64_t total = 0, within = 0;
  for (const Session& s : corpus.sessions) {
    for (std::size_t i = 1; i < s.events.size(); ++i) {
      ++total;
      if (corpus.cluster_of.at(s.events[i - 1].item) ==
          corpus.cluster_of.at(s.events[i].item))
        ++within;
    }
  }
  const double fraction = static_cast<double>(within) / static_cast<double>(total);
  EXPECT_GE(fraction, 0.88);
  EXPECT_LE(fraction, 0.92);
}

TEST(Synthetic, PureClustersWhenQInIsOneAndComplementsOff) {
  SyntheticConfig cfg;
  cfg.items = 40;
  cfg.clusters = 4;
  cfg.sessions = 200;
  cfg.q_in = 1.0;
  cfg.complement_prob = 0.0;
  const auto corpus = generate_synthetic(cfg, 3);
  for (const Session& s : corpus.sessions) {
    const auto cluster = corpus.cluster_of.at(s.events.front().item);
    for (const PairToken& e : s.events)
      ASSERT_EQ(corpus.cluster_of.at(e.item), cluster) << "session " << s.id;
  }
}

TEST(Synthetic, SessionLengthsStayInRange) {
  SyntheticConfig cfg;
  cfg.items = 30;
  cfg.clusters = 3;
  cfg.sessions = 300;
  cfg.min_session_len = 4;
  cfg.max_session_len = 9;
  const auto corpus = generate_synthetic(cfg, 5);
  for (const Session& s : corpus.sessions) {
    EXPECT_GE(s.events.size(), 4u);
    // A complement purchase may extend a session by one event.
    EXPECT_LE(s.events.size(), 10u);
  }
}

TEST(Synthetic, TaxonomyMatchesClusterAssignment) {
  SyntheticConfig cfg;
  cfg.items = 24;
  cfg.clusters = 3;
  cfg.sessions = 10;
  const auto corpus = generate_synthetic(cfg, 9);
  for (const auto& [item, cluster] : corpus.cluster_of) {
    const auto& bucket = corpus.taxonomy.items_in(corpus.taxonomy.taxonomy_of(item));
    EXPECT_TRUE(std::find(bucket.begin(), bucket.end(), item) != bucket.end());
    for (const std::string& peer : bucket)
      EXPECT_EQ(corpus.cluster_of.at(peer), cluster);
  }
}

TEST(Synthetic, ComplementsShareClusterAndDiffer) {
  SyntheticConfig cfg;
  cfg.items = 50;
  cfg.clusters = 5;
  cfg.sessions = 1;
  const auto corpus = generate_synthetic(cfg, 1);
  EXPECT_FALSE(corpus.complement_of.empty());
  for (const auto& [item, complement] : corpus.complement_of) {
    EXPECT_NE(item, complement);
    EXPECT_EQ(corpus.cluster_of.at(item), corpus.cluster_of.at(complement));
  }
}

TEST(Synthetic, GeneratedLogSurvivesTheParser) {
  SyntheticConfig cfg;
  cfg.items = 15;
  cfg.clusters = 3;
  cfg.sessions = 40;
  const auto corpus = generate_synthetic(cfg, 13);
  std::ostringstream out;
  serialize_sessions(corpus.sessions, out);
  std::istringstream in(out.str());
  const auto parsed = parse_sessions(in, 1);
  ASSERT_EQ(parsed.sessions.size(), corpus.sessions.size());
  for (std::size_t i = 0; i < parsed.sessions.size(); ++i)
    EXPECT_EQ(parsed.sessions[i].events, corpus.sessions[i].events);
}

}  // namespace
}  // namespace i2v
