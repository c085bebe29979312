#pragma once

// Item-interaction embeddings for recommendation candidate retrieval:
// session parsing, skip-gram training with interaction-aware negative
// sampling, exact and HNSW nearest-neighbor search, candidate generation,
// and hit-rate evaluation.

#include "i2v/candidates.hpp"
#include "i2v/embedding.hpp"
#include "i2v/embedding_io.hpp"
#include "i2v/errors.hpp"
#include "i2v/eval.hpp"
#include "i2v/hnsw.hpp"
#include "i2v/knn.hpp"
#include "i2v/manifest.hpp"
#include "i2v/negatives.hpp"
#include "i2v/report.hpp"
#include "i2v/rng.hpp"
#include "i2v/session_io.hpp"
#include "i2v/synthetic.hpp"
#include "i2v/taxonomy.hpp"
#include "i2v/trainer.hpp"
#include "i2v/types.hpp"
#include "i2v/vocab.hpp"
