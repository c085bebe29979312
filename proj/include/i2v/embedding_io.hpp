#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "i2v/embedding.hpp"
#include "i2v/errors.hpp"
#include "i2v/io_util.hpp"
#include "i2v/vocab.hpp"

namespace i2v {

inline constexpr std::string_view kEmbeddingMagic = "I2V1";

// Text format (word2vec compatible): first line "<n> <d>", then one line per
// token: "<canonical_token> <f_1> ... <f_d>".
inline void save_embeddings_text(const std::string& path,
                                 const Vocabulary& vocab,
                                 const EmbeddingMatrix& m,
                                 bool output_side = false) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write embeddings: " + path);
  out << m.rows() << ' ' << m.dim() << '\n';
  char buf[48];
  for (std::uint32_t i = 0; i < m.rows(); ++i) {
    out << vocab.canonical(i);
    const auto row = output_side ? m.output_row(i) : m.input_row(i);
    for (float x : row) {
      std::snprintf(buf, sizeof(buf), " %.6f", static_cast<double>(x));
      out << buf;
    }
    out << '\n';
  }
}

// Binary format: magic "I2V1", u32 n, u32 d (little endian), then n rows of
// d little-endian IEEE-754 floats. Row order matches the token manifest.
inline void save_embeddings_binary(const std::string& path,
                                   const EmbeddingMatrix& m,
                                   bool output_side = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings: " + path);
  detail::put_magic(out, kEmbeddingMagic);
  detail::put_u32_le(out, m.rows());
  detail::put_u32_le(out, m.dim());
  for (std::uint32_t i = 0; i < m.rows(); ++i) {
    const auto row = output_side ? m.output_row(i) : m.input_row(i);
    for (float x : row) detail::put_f32_le(out, x);
  }
  if (!out) throw IoError("short write: " + path);
}

// One canonical token per line, in row order.
inline void save_token_manifest(const std::string& path,
                                const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write token manifest: " + path);
  for (std::uint32_t i = 0; i < vocab.size(); ++i)
    out << vocab.canonical(i) << '\n';
}

struct LoadedEmbeddings {
  std::vector<std::string> tokens;
  std::uint32_t dim = 0;
  std::vector<float> vectors;  // row-major, tokens.size() x dim

  std::size_t count() const { return tokens.size(); }
  const float* row(std::size_t i) const { return vectors.data() + i * dim; }
};

inline LoadedEmbeddings load_embeddings_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings: " + path);
  LoadedEmbeddings out;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  std::istringstream header(line);
  std::uint64_t n = 0;
  if (!(header >> n >> out.dim) || out.dim == 0)
    throw ParseError("header must be '<n> <d>'", 1);
  out.tokens.reserve(n);
  out.vectors.reserve(n * out.dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) throw ParseError("missing token", line_no);
    out.tokens.push_back(token);
    for (std::uint32_t i = 0; i < out.dim; ++i) {
      float x;
      if (!(row >> x)) throw ParseError("expected " + std::to_string(out.dim) +
                                            " coordinates",
                                        line_no);
      out.vectors.push_back(x);
    }
  }
  if (out.tokens.size() != n)
    throw DataError("embedding file " + path + " declared " +
                    std::to_string(n) + " rows, found " +
                    std::to_string(out.tokens.size()));
  return out;
}

inline std::string token_manifest_path(const std::string& embeddings_path) {
  static constexpr std::string_view kBin = ".bin";
  if (embeddings_path.size() > kBin.size() &&
      embeddings_path.compare(embeddings_path.size() - kBin.size(),
                              kBin.size(), kBin) == 0)
    return embeddings_path.substr(0, embeddings_path.size() - kBin.size()) +
           ".tokens";
  return embeddings_path + ".tokens";
}

inline LoadedEmbeddings load_embeddings_binary(const std::string& path,
                                               const std::string& tokens_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings: " + path);
  detail::expect_magic(in, kEmbeddingMagic);
  LoadedEmbeddings out;
  const std::uint32_t n = detail::get_u32_le(in);
  out.dim = detail::get_u32_le(in);
  if (out.dim == 0) throw DataError("embedding dimension is zero: " + path);
  out.vectors.resize(static_cast<std::size_t>(n) * out.dim);
  for (float& x : out.vectors) x = detail::get_f32_le(in);

  std::ifstream tokens(tokens_path);
  if (!tokens) throw IoError("cannot open token manifest: " + tokens_path);
  std::string line;
  while (std::getline(tokens, line))
    if (!line.empty()) out.tokens.push_back(line);
  if (out.tokens.size() != n)
    throw DataError("token manifest " + tokens_path + " has " +
                    std::to_string(out.tokens.size()) + " rows, expected " +
                    std::to_string(n));
  return out;
}

// Sniffs the magic to decide between binary and text.
inline LoadedEmbeddings load_embeddings_auto(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open embeddings: " + path);
  char head[4] = {};
  probe.read(head, 4);
  probe.close();
  if (std::string_view(head, 4) == kEmbeddingMagic)
    return load_embeddings_binary(path, token_manifest_path(path));
  return load_embeddings_text(path);
}

}  // namespace i2v
