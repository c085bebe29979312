#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "i2v/embedding.hpp"
#include "i2v/errors.hpp"
#include "i2v/negatives.hpp"
#include "i2v/rng.hpp"
#include "i2v/taxonomy.hpp"
#include "i2v/types.hpp"
#include "i2v/vocab.hpp"

namespace i2v {

struct TrainConfig {
  std::uint32_t dim = 100;
  int window = 5;
  int epochs = 5;
  double initial_lr = 0.025;
  double min_lr = 0.0001;
  int k_random_negatives = 5;
  double alpha = 0.75;
  double subsample_t = 0.0;  // 0 disables frequent-token subsampling
  std::uint64_t min_count = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  bool deterministic = false;
  bool use_custom_negatives = true;
  bool verbose = false;

  void validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(min_lr > 0.0) || min_lr > initial_lr)
      throw ConfigError("require 0 < min_lr <= initial_lr");
    if (k_random_negatives < 0) throw ConfigError("negatives must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (deterministic && threads != 1)
      throw ConfigError("deterministic mode requires threads=1");
  }
};

struct TrainStats {
  std::uint64_t updates = 0;
  std::uint64_t center_tokens = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
};

// Collapses every token to its item's view form, so the vocabulary holds a
// single token per item.
inline std::vector<Session> no_interaction_mode(
    std::span<const Session> sessions) {
  std::vector<Session> out;
  out.reserve(sessions.size());
  for (const Session& s : sessions) {
    Session collapsed;
    collapsed.id = s.id;
    collapsed.events.reserve(s.events.size());
    for (const PairToken& e : s.events)
      collapsed.events.emplace_back(e.item, InteractionType::View);
    out.push_back(std::move(collapsed));
  }
  return out;
}

namespace detail {

// Number of (center, context) updates a session of length len contributes.
inline std::uint64_t window_updates(std::size_t len, int window) {
  std::uint64_t total = 0;
  const auto n = static_cast<std::ptrdiff_t>(len);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
    total += static_cast<std::uint64_t>(hi - lo);
  }
  return total;
}

struct PreparedSession {
  // Vocabulary index per event, -1 when out of vocabulary.
  std::vector<std::int32_t> token_index;
  // Interaction-ordered negatives per event, already resolved to indices.
  std::vector<std::vector<std::uint32_t>> interaction_negs;
};

struct TrainProgress {
  std::mutex mutex;
  double loss_sum = 0.0;
  std::uint64_t loss_count = 0;
  std::chrono::steady_clock::time_point started;
  std::chrono::steady_clock::time_point last_report;
};

}  // namespace detail

// Skip-gram training over session windows. Positives are in-window context
// tokens; negatives are the context event's custom negatives plus k unigram
// draws. The learning rate decays linearly from initial_lr to min_lr over
// the total scheduled updates. Threads partition sessions and update the
// shared matrices without locks; deterministic single-thread runs are
// bit-reproducible.
inline EmbeddingMatrix train(std::span<const Session> sessions,
                             const Vocabulary& vocab,
                             const TaxonomyMap& taxonomy,
                             const TrainConfig& cfg,
                             TrainStats* stats = nullptr) {
  cfg.validate();
  if (vocab.empty()) throw DataError("cannot train on an empty vocabulary");

  const auto started = std::chrono::steady_clock::now();
  EmbeddingMatrix matrices =
      init_matrices<float>(static_cast<std::uint32_t>(vocab.size()), cfg.dim,
                           cfg.seed);
  UnigramTable unigram(vocab, cfg.alpha);
  TaxonomyViewSampler tax_sampler(vocab, taxonomy);

  // Resolve token indices and the deterministic negatives once.
  std::vector<detail::PreparedSession> prepared(sessions.size());
  std::uint64_t per_epoch_updates = 0;
  std::uint64_t per_epoch_tokens = 0;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const Session& session = sessions[s];
    auto& prep = prepared[s];
    prep.token_index.reserve(session.events.size());
    std::size_t in_vocab = 0;
    for (const PairToken& e : session.events) {
      const auto idx = vocab.find(e);
      prep.token_index.push_back(idx ? static_cast<std::int32_t>(*idx) : -1);
      if (idx) ++in_vocab;
    }
    if (cfg.use_custom_negatives) {
      CustomNegativeSet inter = interaction_negatives(session);
      prep.interaction_negs.resize(session.events.size());
      for (std::size_t pos = 0; pos < session.events.size(); ++pos)
        for (const PairToken& neg : inter.per_event[pos])
          if (const auto idx = vocab.find(neg))
            prep.interaction_negs[pos].push_back(*idx);
    }
    per_epoch_updates += detail::window_updates(in_vocab, cfg.window);
    per_epoch_tokens += in_vocab;
  }

  // Scheduled totals assume no subsampling; with subsampling on, the decay
  // simply bottoms out at min_lr a little early.
  const std::uint64_t total_updates =
      per_epoch_updates * static_cast<std::uint64_t>(cfg.epochs);

  // Subsampling keep probability per vocabulary index.
  std::vector<double> keep_prob;
  if (cfg.subsample_t > 0.0) {
    keep_prob.resize(vocab.size(), 1.0);
    const double total = static_cast<double>(vocab.total_count());
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
      const double f = static_cast<double>(vocab.count(i)) / total;
      keep_prob[i] =
          std::min(1.0, std::sqrt(cfg.subsample_t / f) + cfg.subsample_t / f);
    }
  }

  std::atomic<std::uint64_t> update_counter{0};
  detail::TrainProgress progress;
  progress.started = started;
  progress.last_report = started;

  const double lr_span = cfg.initial_lr - cfg.min_lr;
  auto lr_at = [&](std::uint64_t t) {
    if (total_updates == 0) return cfg.initial_lr;
    const double frac = static_cast<double>(t) / static_cast<double>(total_updates);
    return std::max(cfg.min_lr, cfg.initial_lr - lr_span * frac);
  };

  auto worker = [&](std::size_t begin, std::size_t end) {
    SgnsScratch<float> scratch;
    std::vector<std::uint32_t> negs;
    std::vector<std::int32_t> positions;       // filtered token indices
    std::vector<std::uint32_t> event_of;       // original event per position
    double local_loss = 0.0;
    std::uint64_t local_count = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (std::size_t s = begin; s < end; ++s) {
        const Session& session = sessions[s];
        const auto& prep = prepared[s];
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                         static_cast<std::uint64_t>(s)));

        // Per-event custom negatives: precomputed interaction-ordered ones
        // plus this epoch's taxonomy view draws.
        std::vector<std::vector<std::uint32_t>> custom;
        if (cfg.use_custom_negatives) {
          custom = prep.interaction_negs;
          CustomNegativeSet taxo =
              tax_sampler.negatives_for(session, taxonomy, rng);
          for (std::size_t pos = 0; pos < session.events.size(); ++pos)
            for (const PairToken& neg : taxo.per_event[pos])
              if (const auto idx = vocab.find(neg)) custom[pos].push_back(*idx);
        }

        positions.clear();
        event_of.clear();
        for (std::size_t pos = 0; pos < session.events.size(); ++pos) {
          const std::int32_t idx = prep.token_index[pos];
          if (idx < 0) continue;
          if (!keep_prob.empty() &&
              !rng.bernoulli(keep_prob[static_cast<std::uint32_t>(idx)]))
            continue;
          positions.push_back(idx);
          event_of.push_back(static_cast<std::uint32_t>(pos));
        }

        const auto n = static_cast<std::ptrdiff_t>(positions.size());
        for (std::ptrdiff_t c = 0; c < n; ++c) {
          const auto center = static_cast<std::uint32_t>(positions[c]);
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - cfg.window);
          const std::ptrdiff_t hi =
              std::min<std::ptrdiff_t>(n - 1, c + cfg.window);
          for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            if (j == c) continue;
            const auto positive = static_cast<std::uint32_t>(positions[j]);

            negs.clear();
            if (cfg.use_custom_negatives) {
              const auto& base = custom[event_of[j]];
              negs.insert(negs.end(), base.begin(), base.end());
            }
            const std::uint32_t exclusions[2] = {positive, center};
            auto random_negs = sample_random_negatives(
                unigram, cfg.k_random_negatives, exclusions, rng);
            negs.insert(negs.end(), random_negs.begin(), random_negs.end());

            const std::uint64_t t =
                update_counter.fetch_add(1, std::memory_order_relaxed);
            const auto lr = static_cast<float>(lr_at(t));
            local_loss += sgns_update(matrices, center, positive,
                                      std::span<const std::uint32_t>(negs), lr,
                                      scratch);
            ++local_count;
          }
        }

        if (local_count >= 4096) {
          std::lock_guard<std::mutex> lock(progress.mutex);
          progress.loss_sum += local_loss;
          progress.loss_count += local_count;
          local_loss = 0.0;
          local_count = 0;
          if (cfg.verbose) {
            const auto now = std::chrono::steady_clock::now();
            if (now - progress.last_report > std::chrono::milliseconds(500)) {
              progress.last_report = now;
              const double secs =
                  std::chrono::duration<double>(now - progress.started).count();
              const std::uint64_t done =
                  update_counter.load(std::memory_order_relaxed);
              std::fprintf(stderr,
                           "\rlr=%.6f tokens/s=%.0f mean_loss=%.4f "
                           "progress=%.1f%%",
                           lr_at(done),
                           static_cast<double>(progress.loss_count) /
                               std::max(secs, 1e-9),
                           progress.loss_sum /
                               std::max<std::uint64_t>(1, progress.loss_count),
                           total_updates == 0
                               ? 100.0
                               : 100.0 * static_cast<double>(done) /
                                     static_cast<double>(total_updates));
              std::fflush(stderr);
            }
          }
        }
      }
    }

    std::lock_guard<std::mutex> lock(progress.mutex);
    progress.loss_sum += local_loss;
    progress.loss_count += local_count;
  };

  const int threads = std::min<int>(
      cfg.threads, static_cast<int>(std::max<std::size_t>(1, sessions.size())));
  if (threads <= 1) {
    worker(0, sessions.size());
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const std::size_t chunk =
        (sessions.size() + static_cast<std::size_t>(threads) - 1) /
        static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(sessions.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  if (cfg.verbose) std::fprintf(stderr, "\n");
  if (!matrices.all_finite())
    throw DataError("training produced non-finite embeddings");

  if (stats) {
    stats->updates = update_counter.load();
    stats->center_tokens =
        per_epoch_tokens * static_cast<std::uint64_t>(cfg.epochs);
    stats->mean_loss = progress.loss_count == 0
                           ? 0.0
                           : progress.loss_sum /
                                 static_cast<double>(progress.loss_count);
    stats->seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  }
  return matrices;
}

}  // namespace i2v
