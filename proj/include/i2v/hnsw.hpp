#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/io_util.hpp"
#include "i2v/knn.hpp"
#include "i2v/rng.hpp"

namespace i2v {

inline constexpr std::string_view kIndexMagic = "HNW1";

struct HnswConfig {
  std::uint32_t links_per_vector = 64;  // M
  std::uint32_t ef_construction = 128;
  std::uint32_t ef_search = 256;
  double level_multiplier = 0.0;  // <= 0 means 1/ln(M)
  std::uint64_t seed = 1;
  Metric metric = Metric::Cosine;

  void validate() const {
    if (links_per_vector < 2) throw ConfigError("hnsw: M must be >= 2");
    if (ef_construction < links_per_vector)
      throw ConfigError("hnsw: ef_construction must be >= M");
  }
};

// Hierarchical navigable small world graph over embedding rows.
//
// Node levels are geometric with multiplier 1/ln(M). Insertion descends
// greedily through the upper layers, runs an ef_construction-bounded beam at
// each layer the node joins, and picks links with the diversity heuristic
// (a candidate is linked only if it is closer to the new node than to any
// link already chosen). Layer 0 keeps up to 2M links per node, upper layers
// up to M. Cosine mode stores row-normalized vectors, so every internal
// comparison is a plain dot product.
//
// Build is single-writer; afterwards the structure is immutable and queries
// are safe from any number of threads.
class HnswIndex {
 public:
  HnswIndex() = default;

  bool built() const { return count_ > 0; }
  std::size_t size() const { return count_; }
  std::uint32_t dim() const { return dim_; }
  Metric metric() const { return metric_; }
  std::uint32_t links_per_vector() const { return m_; }
  std::uint32_t entry_point() const { return entry_; }
  int max_level() const { return max_level_; }
  int level_of(std::uint32_t id) const {
    return static_cast<int>(links_[id].size()) - 1;
  }
  std::span<const std::uint32_t> neighbors(std::uint32_t id, int level) const {
    return links_[id][static_cast<std::size_t>(level)];
  }
  std::span<const float> vector_of(std::uint32_t id) const {
    return {vectors_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }

  static HnswIndex build(VectorView table, const HnswConfig& cfg) {
    cfg.validate();
    if (table.count == 0) throw DataError("hnsw: cannot index an empty table");

    HnswIndex index;
    index.dim_ = static_cast<std::uint32_t>(table.dim);
    index.metric_ = cfg.metric;
    index.m_ = cfg.links_per_vector;
    index.count_ = table.count;
    index.links_.resize(table.count);
    index.vectors_.resize(table.count * table.dim);
    for (std::size_t i = 0; i < table.count; ++i) {
      const auto row = table.row(i);
      float* dst = index.vectors_.data() + i * table.dim;
      if (cfg.metric == Metric::Cosine) {
        const float n = norm_f(row);
        const float inv = n == 0.0f ? 0.0f : 1.0f / n;
        for (std::size_t j = 0; j < table.dim; ++j) dst[j] = row[j] * inv;
      } else {
        std::copy(row.begin(), row.end(), dst);
      }
    }

    const double mult = cfg.level_multiplier > 0.0
                            ? cfg.level_multiplier
                            : 1.0 / std::log(static_cast<double>(cfg.links_per_vector));
    Rng rng(cfg.seed);
    VisitedSet visited(table.count);
    for (std::uint32_t id = 0; id < table.count; ++id) {
      const int level = std::min<int>(
          32, static_cast<int>(-std::log(rng.next_double_open()) * mult));
      index.insert(id, level, cfg.ef_construction, visited);
    }
    return index;
  }

  // Greedy descent to layer 1, then a beam of width max(ef, k) at layer 0.
  std::vector<Scored> search(std::span<const float> query, std::size_t k,
                             std::size_t ef) const {
    if (!built()) throw DataError("hnsw: index is empty");
    if (query.size() != dim_) throw ConfigError("hnsw: query dimension mismatch");
    if (k == 0) return {};
    ef = std::max(ef, k);

    std::vector<float> normalized;
    std::span<const float> q = query;
    if (metric_ == Metric::Cosine) {
      normalized.assign(query.begin(), query.end());
      const float n = norm_f(query);
      if (n != 0.0f)
        for (float& x : normalized) x /= n;
      q = normalized;
    }

    VisitedSet visited(count_);
    Scored ep{entry_, dot_f(q, vector_of(entry_))};
    for (int level = max_level_; level >= 1; --level)
      ep = search_layer(q, ep, 1, level, visited).front();
    auto results = search_layer(q, ep, ef, 0, visited);
    if (results.size() > k) results.resize(k);
    return results;
  }

  // Structural checks: link budgets, id bounds, layer consistency, and
  // reachability of every node from the entry point at layer 0.
  void validate() const {
    if (!built()) throw DataError("hnsw: index is empty");
    if (level_of(entry_) != max_level_)
      throw DataError("hnsw: entry point is not at the top level");
    for (std::uint32_t id = 0; id < count_; ++id) {
      const int top = level_of(id);
      if (top < 0) throw DataError("hnsw: node missing from every layer");
      for (int level = 0; level <= top; ++level) {
        const auto links = neighbors(id, level);
        const std::size_t cap = level == 0 ? 2 * std::size_t{m_} : m_;
        if (links.size() > cap)
          throw DataError("hnsw: link budget exceeded at node " +
                          std::to_string(id));
        for (std::uint32_t nb : links) {
          if (nb >= count_) throw DataError("hnsw: edge to unknown id");
          if (nb == id) throw DataError("hnsw: self edge");
          if (level_of(nb) < level)
            throw DataError("hnsw: edge to a node absent from its layer");
        }
      }
    }
    std::vector<char> seen(count_, 0);
    std::vector<std::uint32_t> stack{entry_};
    seen[entry_] = 1;
    std::size_t reached = 0;
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      stack.pop_back();
      ++reached;
      for (std::uint32_t nb : neighbors(id, 0)) {
        if (!seen[nb]) {
          seen[nb] = 1;
          stack.push_back(nb);
        }
      }
    }
    if (reached != count_)
      throw DataError("hnsw: " + std::to_string(count_ - reached) +
                      " nodes unreachable from the entry point");
  }

  // File layout: magic "HNW1"; u32 n, d, M, metric code, entry point, level
  // count; per node a u32 level followed by one length-prefixed u32 id array
  // per layer; then the stored vector table as 32-bit floats.
  void save(const std::string& path) const {
    if (!built()) throw DataError("hnsw: cannot save an empty index");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write index: " + path);
    detail::put_magic(out, kIndexMagic);
    detail::put_u32_le(out, static_cast<std::uint32_t>(count_));
    detail::put_u32_le(out, dim_);
    detail::put_u32_le(out, m_);
    detail::put_u32_le(out, static_cast<std::uint32_t>(metric_));
    detail::put_u32_le(out, entry_);
    detail::put_u32_le(out, static_cast<std::uint32_t>(max_level_ + 1));
    for (std::uint32_t id = 0; id < count_; ++id) {
      detail::put_u32_le(out, static_cast<std::uint32_t>(level_of(id)));
      for (const auto& layer : links_[id]) {
        detail::put_u32_le(out, static_cast<std::uint32_t>(layer.size()));
        for (std::uint32_t nb : layer) detail::put_u32_le(out, nb);
      }
    }
    for (float x : vectors_) detail::put_f32_le(out, x);
    if (!out) throw IoError("short write: " + path);
  }

  static HnswIndex load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index: " + path);
    detail::expect_magic(in, kIndexMagic);

    HnswIndex index;
    const std::uint32_t n = detail::get_u32_le(in);
    index.dim_ = detail::get_u32_le(in);
    index.m_ = detail::get_u32_le(in);
    const std::uint32_t metric_code = detail::get_u32_le(in);
    index.entry_ = detail::get_u32_le(in);
    const std::uint32_t level_count = detail::get_u32_le(in);
    if (n == 0 || index.dim_ == 0 || index.m_ < 2 || level_count == 0)
      throw DataError("hnsw: corrupt header in " + path);
    if (metric_code > 1) throw DataError("hnsw: unknown metric code");
    index.metric_ = static_cast<Metric>(metric_code);
    index.count_ = n;
    index.max_level_ = static_cast<int>(level_count) - 1;
    if (index.entry_ >= n) throw DataError("hnsw: entry point out of range");

    index.links_.resize(n);
    for (std::uint32_t id = 0; id < n; ++id) {
      const std::uint32_t level = detail::get_u32_le(in);
      if (level >= level_count) throw DataError("hnsw: node level out of range");
      index.links_[id].resize(level + 1);
      for (auto& layer : index.links_[id]) {
        const std::uint32_t len = detail::get_u32_le(in);
        if (len > 2 * index.m_) throw DataError("hnsw: link list too long");
        layer.resize(len);
        for (std::uint32_t& nb : layer) {
          nb = detail::get_u32_le(in);
          if (nb >= n) throw DataError("hnsw: edge to unknown id");
        }
      }
    }
    // Edges must stay inside their layer or searches would index past a
    // node's link lists.
    for (std::uint32_t id = 0; id < n; ++id)
      for (std::size_t level = 0; level < index.links_[id].size(); ++level)
        for (const std::uint32_t nb : index.links_[id][level])
          if (index.links_[nb].size() <= level)
            throw DataError("hnsw: edge to a node absent from its layer");
    if (index.level_of(index.entry_) != index.max_level_)
      throw DataError("hnsw: entry point level does not match header");

    index.vectors_.resize(static_cast<std::size_t>(n) * index.dim_);
    for (float& x : index.vectors_) x = detail::get_f32_le(in);
    return index;
  }

 private:
  // Epoch-stamped visited marks, reused across layer searches.
  struct VisitedSet {
    explicit VisitedSet(std::size_t n) : marks(n, 0) {}
    void reset() { ++epoch; }
    bool test_and_set(std::uint32_t id) {
      if (marks[id] == epoch) return true;
      marks[id] = epoch;
      return false;
    }
    std::vector<std::uint32_t> marks;
    std::uint32_t epoch = 0;
  };

  struct WorseFirst {
    bool operator()(const Scored& a, const Scored& b) const {
      return scored_better(a, b);
    }
  };
  struct BetterFirst {
    bool operator()(const Scored& a, const Scored& b) const {
      return scored_better(b, a);
    }
  };

  float sim(std::span<const float> q, std::uint32_t id) const {
    return dot_f(q, vector_of(id));
  }

  // Beam search inside one layer; returns up to ef nodes sorted best-first.
  std::vector<Scored> search_layer(std::span<const float> q, Scored entry,
                                   std::size_t ef, int level,
                                   VisitedSet& visited) const {
    visited.reset();
    visited.test_and_set(entry.id);

    std::priority_queue<Scored, std::vector<Scored>, BetterFirst> candidates;
    std::priority_queue<Scored, std::vector<Scored>, WorseFirst> results;
    candidates.push(entry);
    results.push(entry);

    while (!candidates.empty()) {
      const Scored current = candidates.top();
      candidates.pop();
      if (results.size() >= ef && scored_better(results.top(), current)) break;
      for (std::uint32_t nb :
           links_[current.id][static_cast<std::size_t>(level)]) {
        if (visited.test_and_set(nb)) continue;
        const Scored scored{nb, sim(q, nb)};
        if (results.size() < ef || scored_better(scored, results.top())) {
          candidates.push(scored);
          results.push(scored);
          if (results.size() > ef) results.pop();
        }
      }
    }

    std::vector<Scored> out;
    out.reserve(results.size());
    while (!results.empty()) {
      out.push_back(results.top());
      results.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  // Diversity heuristic: walk candidates best-first and keep one only if it
  // is closer to the base point than to every link kept so far.
  std::vector<std::uint32_t> select_neighbors(
      std::span<const Scored> candidates, std::size_t max_links) const {
    std::vector<std::uint32_t> selected;
    selected.reserve(std::min(max_links, candidates.size()));
    for (const Scored& c : candidates) {
      if (selected.size() >= max_links) break;
      bool keep = true;
      const auto cv = vector_of(c.id);
      for (std::uint32_t r : selected) {
        if (dot_f(cv, vector_of(r)) > c.score) {
          keep = false;
          break;
        }
      }
      if (keep) selected.push_back(c.id);
    }
    return selected;
  }

  void shrink_links(std::uint32_t id, int level, std::size_t cap) {
    auto& layer = links_[id][static_cast<std::size_t>(level)];
    const auto base = vector_of(id);
    std::vector<Scored> scored;
    scored.reserve(layer.size());
    for (std::uint32_t nb : layer) scored.push_back({nb, dot_f(base, vector_of(nb))});
    std::sort(scored.begin(), scored.end(), scored_better);
    layer = select_neighbors(scored, cap);
  }

  void insert(std::uint32_t id, int level, std::uint32_t ef_construction,
              VisitedSet& visited) {
    links_[id].resize(static_cast<std::size_t>(level) + 1);
    if (id == 0) {
      entry_ = id;
      max_level_ = level;
      return;
    }

    const auto q = vector_of(id);
    Scored ep{entry_, sim(q, entry_)};
    for (int l = max_level_; l > level; --l)
      ep = search_layer(q, ep, 1, l, visited).front();

    for (int l = std::min(level, max_level_); l >= 0; --l) {
      auto found = search_layer(q, ep, ef_construction, l, visited);
      auto chosen = select_neighbors(found, m_);
      links_[id][static_cast<std::size_t>(l)] = chosen;
      const std::size_t cap = l == 0 ? 2 * std::size_t{m_} : m_;
      for (std::uint32_t nb : chosen) {
        auto& back = links_[nb][static_cast<std::size_t>(l)];
        back.push_back(id);
        if (back.size() > cap) shrink_links(nb, l, cap);
      }
      ep = found.front();
    }

    if (level > max_level_) {
      entry_ = id;
      max_level_ = level;
    }
  }

  std::uint32_t dim_ = 0;
  Metric metric_ = Metric::Cosine;
  std::uint32_t m_ = 0;
  std::size_t count_ = 0;
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
  std::vector<float> vectors_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
};

}  // namespace i2v
