#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "i2v/errors.hpp"

namespace i2v {

enum class Metric : std::uint8_t {
  Cosine = 0,
  InnerProduct = 1,
};

constexpr std::string_view to_string(Metric m) {
  return m == Metric::Cosine ? "cosine" : "dot";
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "cosine") return Metric::Cosine;
  if (s == "dot" || s == "ip" || s == "inner") return Metric::InnerProduct;
  return std::nullopt;
}

struct VectorView {
  const float* data = nullptr;
  std::size_t count = 0;
  std::size_t dim = 0;

  std::span<const float> row(std::size_t i) const {
    return {data + i * dim, dim};
  }
};

struct Scored {
  std::uint32_t id = 0;
  float score = 0.0f;
};

// Ranking order used everywhere: higher score first, ties by ascending id.
inline bool scored_better(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

inline float dot_f(std::span<const float> a, std::span<const float> b) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline float norm_f(std::span<const float> a) {
  return std::sqrt(dot_f(a, a));
}

inline float similarity(std::span<const float> a, std::span<const float> b,
                        Metric metric) {
  const float d = dot_f(a, b);
  if (metric == Metric::InnerProduct) return d;
  const float na = norm_f(a), nb = norm_f(b);
  if (na == 0.0f || nb == 0.0f) return 0.0f;
  return d / (na * nb);
}

// Full scan over the table: top-k by descending score, ties by ascending id.
// k larger than the table returns every row ranked.
inline std::vector<Scored> exact_knn(std::span<const float> query,
                                     VectorView table, std::size_t k,
                                     Metric metric) {
  if (query.size() != table.dim)
    throw ConfigError("query dimension does not match table");
  if (k < 1) throw ConfigError("k must be >= 1");

  std::vector<Scored> scored(table.count);
  if (metric == Metric::Cosine) {
    const float qn = norm_f(query);
    for (std::size_t i = 0; i < table.count; ++i) {
      const auto r = table.row(i);
      const float rn = norm_f(r);
      const float denom = qn * rn;
      scored[i] = {static_cast<std::uint32_t>(i),
                   denom == 0.0f ? 0.0f : dot_f(query, r) / denom};
    }
  } else {
    for (std::size_t i = 0; i < table.count; ++i)
      scored[i] = {static_cast<std::uint32_t>(i), dot_f(query, table.row(i))};
  }

  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    scored_better);
  scored.resize(take);
  return scored;
}

}  // namespace i2v
