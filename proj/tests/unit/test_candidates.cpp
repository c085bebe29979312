#include "i2v/candidates.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

namespace i2v {
namespace {

struct Fixture {
  std::vector<std::string> tokens;
  std::vector<float> vectors;
  Vocabulary vocab;
  std::size_t dim = 2;

  void add(const std::string& canon, float x, float y) {
    tokens.push_back(canon);
    vectors.push_back(x);
    vectors.push_back(y);
  }
  void finish() { vocab = Vocabulary::from_tokens(tokens); }
  ExactSearcher searcher() const {
    return ExactSearcher{VectorView{vectors.data(), tokens.size(), dim},
                         Metric::Cosine};
  }
};

Fixture make_fixture() {
  Fixture f;
  f.add("q|view", 1.0f, 0.0f);
  f.add("a|purchase", 0.9f, 0.1f);
  f.add("b|view", 0.8f, 0.2f);
  f.add("c|purchase", 0.7f, 0.3f);
  f.add("q|purchase", 0.95f, 0.05f);
  f.add("d|favorite", 0.5f, 0.5f);
  f.finish();
  return f;
}

TEST(CandidatesForPair, TargetFilterHolds) {
  const auto f = make_fixture();
  const auto set = candidates_for_pair(*PairToken::parse("q|view"),
                                       InteractionType::Purchase, 2,
                                       f.searcher(), f.vocab);
  ASSERT_TRUE(set);
  ASSERT_EQ(set->entries.size(), 2u);
  for (const auto& e : set->entries)
    EXPECT_EQ(e.interaction, InteractionType::Purchase);
  EXPECT_EQ(set->entries[0].item, "a");
  EXPECT_EQ(set->entries[1].item, "c");
}

TEST(CandidatesForPair, NoFilterMixesInteractions) {
  const auto f = make_fixture();
  const auto set = candidates_for_pair(*PairToken::parse("q|view"),
                                       std::nullopt, 4, f.searcher(), f.vocab);
  ASSERT_TRUE(set);
  std::set<InteractionType> kinds;
  for (const auto& e : set->entries) kinds.insert(e.interaction);
  EXPECT_GT(kinds.size(), 1u);
}

TEST(CandidatesForPair, QueryItemExcludedByDefault) {
  const auto f = make_fixture();
  const auto set = candidates_for_pair(*PairToken::parse("q|view"),
                                       std::nullopt, 5, f.searcher(), f.vocab);
  ASSERT_TRUE(set);
  for (const auto& e : set->entries) EXPECT_NE(e.item, "q");

  CandidateOptions keep;
  keep.exclude_query_item = false;
  const auto with_self =
      candidates_for_pair(*PairToken::parse("q|view"), std::nullopt, 5,
                          f.searcher(), f.vocab, keep);
  ASSERT_TRUE(with_self);
  bool has_q = false;
  for (const auto& e : with_self->entries) has_q |= e.item == "q";
  EXPECT_TRUE(has_q);
}

TEST(CandidatesForPair, ItemsDedupedKeepingBestScore) {
  Fixture f;
  f.add("q|view", 1.0f, 0.0f);
  f.add("a|view", 0.9f, 0.1f);
  f.add("a|purchase", 0.5f, 0.5f);
  f.add("b|view", 0.2f, 0.8f);
  f.finish();
  const auto set = candidates_for_pair(*PairToken::parse("q|view"),
                                       std::nullopt, 4, f.searcher(), f.vocab);
  ASSERT_TRUE(set);
  std::set<std::string> items;
  for (const auto& e : set->entries) EXPECT_TRUE(items.insert(e.item).second);
  ASSERT_EQ(set->entries[0].item, "a");
  EXPECT_EQ(set->entries[0].interaction, InteractionType::View);  // best form
  for (std::size_t i = 1; i < set->entries.size(); ++i)
    EXPECT_GE(set->entries[i - 1].score, set->entries[i].score);
}

TEST(CandidatesForPair, OutOfVocabularyIsAMissNotEmpty) {
  const auto f = make_fixture();
  const auto miss = candidates_for_pair(*PairToken::parse("nope|view"),
                                        std::nullopt, 3, f.searcher(), f.vocab);
  EXPECT_FALSE(miss.has_value());

  const auto empty = candidates_for_pair(*PairToken::parse("q|view"),
                                         InteractionType::Purchase, 0,
                                         f.searcher(), f.vocab);
  ASSERT_TRUE(empty.has_value());
  EXPECT_TRUE(empty->entries.empty());
}

TEST(CandidatesForUser, SinglePairMatchesPairCandidates) {
  const auto f = make_fixture();
  const std::vector<PairToken> history = {*PairToken::parse("q|view")};
  const auto user = candidates_for_user(history, 3, 4, std::nullopt,
                                        std::nullopt, 3, f.searcher(), f.vocab);
  const auto pair = candidates_for_pair(*PairToken::parse("q|view"),
                                        std::nullopt, 3, f.searcher(), f.vocab);
  ASSERT_TRUE(pair);
  ASSERT_EQ(user.entries.size(), pair->entries.size());
  for (std::size_t i = 0; i < user.entries.size(); ++i)
    EXPECT_EQ(user.entries[i].item, pair->entries[i].item);
  EXPECT_FALSE(user.cold);
}

TEST(CandidatesForUser, LastNLimitsContributors) {
  Fixture f;
  f.add("old|view", -1.0f, 0.0f);
  f.add("o1|view", -0.9f, -0.1f);
  f.add("new|view", 1.0f, 0.0f);
  f.add("n1|view", 0.9f, 0.1f);
  f.finish();
  std::vector<PairToken> history = {*PairToken::parse("old|view"),
                                    *PairToken::parse("new|view")};
  const auto user = candidates_for_user(history, 2, /*last_n=*/1, std::nullopt,
                                        std::nullopt, 4, f.searcher(), f.vocab);
  // Only the most recent pair contributes, so the old item's neighbor o1
  // (cosine ~ -1 to "new") may appear but only with its low score via "new".
  ASSERT_FALSE(user.entries.empty());
  EXPECT_EQ(user.entries[0].item, "n1");
}

TEST(CandidatesForUser, HistoryItemsExcludedAndDeduped) {
  const auto f = make_fixture();
  const std::vector<PairToken> history = {*PairToken::parse("q|view"),
                                          *PairToken::parse("a|purchase")};
  const auto user = candidates_for_user(history, 4, 4, std::nullopt,
                                        std::nullopt, 6, f.searcher(), f.vocab);
  std::set<std::string> items;
  for (const auto& e : user.entries) {
    EXPECT_NE(e.item, "q");
    EXPECT_NE(e.item, "a");
    EXPECT_TRUE(items.insert(e.item).second);
  }
}

TEST(CandidatesForUser, ColdWhenNothingUsable) {
  const auto f = make_fixture();
  const std::vector<PairToken> history = {*PairToken::parse("zzz|view")};
  const auto user = candidates_for_user(history, 3, 4, std::nullopt,
                                        std::nullopt, 3, f.searcher(), f.vocab);
  EXPECT_TRUE(user.cold);
  EXPECT_TRUE(user.entries.empty());
}

TEST(CandidatesForUser, SourceFilterSelectsPairs) {
  const auto f = make_fixture();
  const std::vector<PairToken> history = {*PairToken::parse("q|view"),
                                          *PairToken::parse("q|purchase")};
  const auto user =
      candidates_for_user(history, 3, 4, std::nullopt, InteractionType::View,
                          3, f.searcher(), f.vocab);
  EXPECT_FALSE(user.cold);  // the view pair qualifies
  const auto none =
      candidates_for_user(history, 3, 4, std::nullopt,
                          InteractionType::Favorite, 3, f.searcher(), f.vocab);
  EXPECT_TRUE(none.cold);
}

Session purchases(std::string id, std::initializer_list<const char*> items) {
  Session s;
  s.id = std::move(id);
  for (const char* item : items)
    s.events.emplace_back(item, InteractionType::Purchase);
  return s;
}

TEST(CoPurchase, CountsSessionsWithBothPurchased) {
  std::vector<Session> sessions = {purchases("s1", {"A", "B"}),
                                   purchases("s2", {"A", "B", "C"}),
                                   purchases("s3", {"B", "C"})};
  const auto model = CoPurchaseModel::build(sessions);
  EXPECT_EQ(model.weight("A", "B"), 2.0);
  EXPECT_EQ(model.weight("A", "C"), 1.0);
  EXPECT_EQ(model.weight("B", "C"), 2.0);
  EXPECT_EQ(model.weight("B", "A"), 2.0);  // symmetric
  EXPECT_EQ(model.weight("A", "A"), 0.0);  // diagonal excluded
}

TEST(CoPurchase, SinglePurchaseSessionsContributeNothing) {
  std::vector<Session> sessions = {purchases("s1", {"A"}),
                                   purchases("s2", {"B"})};
  const auto model = CoPurchaseModel::build(sessions);
  EXPECT_EQ(model.item_count(), 0u);
  EXPECT_FALSE(model.candidates("A", 3).has_value());
}

TEST(CoPurchase, RepeatedPurchaseInOneSessionCountsOnce) {
  Session s;
  s.id = "s";
  s.events.emplace_back("A", InteractionType::Purchase);
  s.events.emplace_back("A", InteractionType::Purchase);
  s.events.emplace_back("B", InteractionType::Purchase);
  const auto model = CoPurchaseModel::build(std::vector<Session>{s});
  EXPECT_EQ(model.weight("A", "B"), 1.0);
}

TEST(CoPurchase, RankingMatchesHandComputedCosines) {
  // Rows: A {B:2, C:1}; B {A:2, C:2}; C {A:1, B:2}.
  // cos(A, B) = 2 / (sqrt(5) * sqrt(8)), cos(A, C) = 4 / 5.
  std::vector<Session> sessions = {purchases("s1", {"A", "B"}),
                                   purchases("s2", {"A", "B", "C"}),
                                   purchases("s3", {"B", "C"})};
  const auto model = CoPurchaseModel::build(sessions);
  const auto set = model.candidates("A", 2);
  ASSERT_TRUE(set);
  ASSERT_EQ(set->entries.size(), 2u);
  EXPECT_EQ(set->entries[0].item, "C");
  EXPECT_NEAR(set->entries[0].score, 0.8f, 1e-6);
  EXPECT_EQ(set->entries[1].item, "B");
  EXPECT_NEAR(set->entries[1].score, 2.0 / std::sqrt(40.0), 1e-6);
  for (const auto& e : set->entries)
    EXPECT_EQ(e.interaction, InteractionType::Purchase);
}

TEST(CoPurchase, IdenticalVectorsScoreOne) {
  std::vector<Session> sessions = {purchases("s1", {"A", "C"}),
                                   purchases("s2", {"B", "C"})};
  const auto model = CoPurchaseModel::build(sessions);
  const auto set = model.candidates("A", 1);
  ASSERT_TRUE(set);
  ASSERT_EQ(set->entries.size(), 1u);
  EXPECT_EQ(set->entries[0].item, "B");
  EXPECT_NEAR(set->entries[0].score, 1.0f, 1e-9);
}

TEST(CoPurchase, NeverCoPurchasedItemIsAMiss) {
  std::vector<Session> sessions = {purchases("s1", {"A", "B"}),
                                   purchases("s2", {"C", "B"})};
  const auto model = CoPurchaseModel::build(sessions);
  EXPECT_FALSE(model.candidates("Z", 5).has_value());
  EXPECT_FALSE(model.covers("Z"));
  // A and C overlap through their shared partner B.
  EXPECT_TRUE(model.covers("A"));
  EXPECT_TRUE(model.covers("C"));
}

TEST(CoPurchase, StarCenterHasEmptyCandidatesAndNoCoverage) {
  // B is co-purchased with A and C, but A and C's rows only contain B, so
  // the center's own row overlaps nothing.
  std::vector<Session> sessions = {purchases("s1", {"A", "B"}),
                                   purchases("s2", {"C", "B"})};
  const auto model = CoPurchaseModel::build(sessions);
  const auto set = model.candidates("B", 3);
  ASSERT_TRUE(set.has_value());  // non-miss: B has a row
  EXPECT_TRUE(set->entries.empty());
  EXPECT_FALSE(model.covers("B"));
}

}  // namespace
}  // namespace i2v
