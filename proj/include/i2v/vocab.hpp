#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/types.hpp"

namespace i2v {

// Dense token <-> index mapping over pairs retained by the min_count filter.
// Indices are assigned by descending count, ties broken by canonical string,
// so a rebuilt vocabulary over a permuted corpus is identical.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(std::span<const Session> sessions,
                          std::uint64_t min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const Session& s : sessions)
      for (const PairToken& e : s.events) ++counts[e.canonical()];

    std::vector<std::pair<std::string, std::uint64_t>> kept;
    kept.reserve(counts.size());
    for (auto& [canon, n] : counts)
      if (n >= min_count) kept.emplace_back(canon, n);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });

    Vocabulary v;
    v.min_count_ = min_count;
    v.tokens_.reserve(kept.size());
    v.canonical_.reserve(kept.size());
    v.counts_.reserve(kept.size());
    for (auto& [canon, n] : kept) {
      auto token = PairToken::parse(canon);
      v.index_.emplace(canon, static_cast<std::uint32_t>(v.tokens_.size()));
      v.tokens_.push_back(std::move(*token));
      v.canonical_.push_back(canon);
      v.counts_.push_back(n);
      v.total_count_ += n;
    }
    return v;
  }

  // Assembles a vocabulary from an already-ordered token list (embedding file
  // loads); counts default to min_count when unknown.
  static Vocabulary from_tokens(std::span<const std::string> canonical_tokens,
                                std::uint64_t min_count = 1) {
    Vocabulary v;
    v.min_count_ = min_count;
    for (const std::string& canon : canonical_tokens) {
      auto token = PairToken::parse(canon);
      if (!token) throw DataError("invalid token in manifest: " + canon);
      v.index_.emplace(canon, static_cast<std::uint32_t>(v.tokens_.size()));
      v.tokens_.push_back(std::move(*token));
      v.canonical_.push_back(canon);
      v.counts_.push_back(min_count);
      v.total_count_ += min_count;
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  std::optional<std::uint32_t> find(const PairToken& t) const {
    return find_canonical(t.canonical());
  }

  std::optional<std::uint32_t> find_canonical(const std::string& canon) const {
    auto it = index_.find(canon);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const PairToken& token(std::uint32_t i) const { return tokens_[i]; }
  const std::string& canonical(std::uint32_t i) const { return canonical_[i]; }
  std::uint64_t count(std::uint32_t i) const { return counts_[i]; }
  std::uint64_t total_count() const { return total_count_; }
  std::uint64_t min_count() const { return min_count_; }

 private:
  std::vector<PairToken> tokens_;
  std::vector<std::string> canonical_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t total_count_ = 0;
  std::uint64_t min_count_ = 1;
};

}  // namespace i2v
