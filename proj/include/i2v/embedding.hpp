#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/rng.hpp"

namespace i2v {

// Input (u) and output (v) vector tables, one row of each per vocabulary
// index. Templated on the scalar so tests can run the exact same kernel in
// double precision against a finite-difference oracle.
template <typename T>
class EmbeddingMatrixT {
 public:
  EmbeddingMatrixT() = default;
  EmbeddingMatrixT(std::uint32_t rows, std::uint32_t dim)
      : rows_(rows),
        dim_(dim),
        input_(static_cast<std::size_t>(rows) * dim, T(0)),
        output_(static_cast<std::size_t>(rows) * dim, T(0)) {}

  std::uint32_t rows() const { return rows_; }
  std::uint32_t dim() const { return dim_; }

  std::span<T> input_row(std::uint32_t i) {
    return {input_.data() + static_cast<std::size_t>(i) * dim_, dim_};
  }
  std::span<const T> input_row(std::uint32_t i) const {
    return {input_.data() + static_cast<std::size_t>(i) * dim_, dim_};
  }
  std::span<T> output_row(std::uint32_t i) {
    return {output_.data() + static_cast<std::size_t>(i) * dim_, dim_};
  }
  std::span<const T> output_row(std::uint32_t i) const {
    return {output_.data() + static_cast<std::size_t>(i) * dim_, dim_};
  }

  std::span<T> input_data() { return input_; }
  std::span<const T> input_data() const { return input_; }
  std::span<T> output_data() { return output_; }
  std::span<const T> output_data() const { return output_; }

  bool all_finite() const {
    auto ok = [](std::span<const T> xs) {
      for (T x : xs)
        if (!std::isfinite(static_cast<double>(x))) return false;
      return true;
    };
    return ok(input_) && ok(output_);
  }

 private:
  std::uint32_t rows_ = 0;
  std::uint32_t dim_ = 0;
  std::vector<T> input_;
  std::vector<T> output_;
};

using EmbeddingMatrix = EmbeddingMatrixT<float>;

// Input rows uniform in [-0.5/d, 0.5/d] per coordinate, output rows zero.
template <typename T = float>
EmbeddingMatrixT<T> init_matrices(std::uint32_t vocab_size, std::uint32_t dim,
                                  std::uint64_t seed) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  EmbeddingMatrixT<T> m(vocab_size, dim);
  Rng rng(seed);
  const double scale = 0.5 / static_cast<double>(dim);
  for (T& x : m.input_data())
    x = static_cast<T>((rng.next_double() * 2.0 - 1.0) * scale);
  return m;
}

namespace detail {

// Dot products are clamped to +-8 before the sigmoid; beyond that the
// gradient signal is numerically negligible anyway.
inline constexpr double kSigmoidClamp = 8.0;

template <typename T>
T clamped(T x) {
  return std::clamp(x, T(-kSigmoidClamp), T(kSigmoidClamp));
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace detail

template <typename T>
struct SgnsScratch {
  std::vector<T> grad_center;
  std::vector<T> coefficients;
  std::vector<std::uint32_t> targets;
};

// One stochastic gradient-ascent step on
//   L = log sigma(u_c . v_pos) + sum_neg log sigma(-u_c . v_neg).
// All gradients are evaluated at the pre-update parameters (duplicate
// negative indices accumulate), then applied in place. Returns -L at the
// pre-update parameters.
template <typename T>
T sgns_update(EmbeddingMatrixT<T>& m, std::uint32_t center,
              std::uint32_t positive, std::span<const std::uint32_t> negatives,
              T lr, SgnsScratch<T>& scratch) {
  const std::uint32_t d = m.dim();
  std::span<T> u = m.input_row(center);

  scratch.grad_center.assign(d, T(0));
  scratch.coefficients.clear();
  scratch.targets.clear();
  scratch.targets.push_back(positive);
  scratch.targets.insert(scratch.targets.end(), negatives.begin(),
                         negatives.end());

  T loss = T(0);
  for (std::size_t j = 0; j < scratch.targets.size(); ++j) {
    const bool is_positive = j == 0;
    std::span<const T> v = m.output_row(scratch.targets[j]);
    const T x = detail::clamped(detail::dot(std::span<const T>(u), v));
    const T sig = T(1) / (T(1) + std::exp(-x));
    // -log sigma(x) for the positive, -log sigma(-x) for negatives.
    loss += is_positive ? std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    const T g = (is_positive ? T(1) : T(0)) - sig;
    scratch.coefficients.push_back(g);
    for (std::uint32_t i = 0; i < d; ++i) scratch.grad_center[i] += g * v[i];
  }

  for (std::size_t j = 0; j < scratch.targets.size(); ++j) {
    std::span<T> v = m.output_row(scratch.targets[j]);
    const T step = lr * scratch.coefficients[j];
    for (std::uint32_t i = 0; i < d; ++i) v[i] += step * u[i];
  }
  for (std::uint32_t i = 0; i < d; ++i) u[i] += lr * scratch.grad_center[i];

  return loss;
}

template <typename T>
T sgns_update(EmbeddingMatrixT<T>& m, std::uint32_t center,
              std::uint32_t positive, std::span<const std::uint32_t> negatives,
              T lr) {
  SgnsScratch<T> scratch;
  return sgns_update(m, center, positive, negatives, lr, scratch);
}

}  // namespace i2v
