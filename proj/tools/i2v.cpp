// Command-line pipeline: gen -> train -> index -> query / eval.
// Every stage reads and writes plain artifacts, so partial reruns are cheap.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 out-of-vocabulary.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "i2v/i2v.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitOov = 3;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

struct GenArgs {
  i2v::SyntheticConfig config;
  std::uint64_t seed = 1;
  std::string out_prefix;
};

int run_gen(const GenArgs& args) {
  const auto started = Clock::now();
  i2v::RunManifest manifest;
  manifest.command = "gen";
  manifest.seed = args.seed;

  auto corpus = i2v::generate_synthetic(args.config, args.seed);
  const double gen_ms = ms_since(started);

  const std::string sessions_path = args.out_prefix + ".sessions";
  const std::string taxonomy_path = args.out_prefix + ".taxonomy";
  const std::string truth_path = args.out_prefix + ".truth";
  i2v::save_sessions(corpus.sessions, sessions_path);
  {
    std::ofstream out(taxonomy_path);
    if (!out) throw i2v::IoError("cannot write " + taxonomy_path);
    corpus.taxonomy.save(out);
  }
  {
    std::ofstream out(truth_path);
    if (!out) throw i2v::IoError("cannot write " + truth_path);
    std::map<std::string, std::uint32_t> ordered(corpus.cluster_of.begin(),
                                                 corpus.cluster_of.end());
    for (const auto& [item, cluster] : ordered) {
      const auto comp = corpus.complement_of.find(item);
      out << item << '\t' << cluster << '\t'
          << (comp == corpus.complement_of.end() ? "-" : comp->second) << '\n';
    }
  }

  manifest.config = {
      {"items", args.config.items},
      {"clusters", args.config.clusters},
      {"sessions", args.config.sessions},
      {"min_session_len", args.config.min_session_len},
      {"max_session_len", args.config.max_session_len},
      {"q_in", args.config.q_in},
      {"p_favorite", args.config.p_favorite},
      {"p_cart", args.config.p_cart},
      {"p_purchase", args.config.p_purchase},
      {"p_stay", args.config.p_stay},
      {"complement_prob", args.config.complement_prob},
      {"head_fraction", args.config.head_fraction},
  };
  manifest.timings_ms.emplace_back("generate", gen_ms);
  manifest.timings_ms.emplace_back("write", ms_since(started) - gen_ms);
  manifest.add_input(sessions_path);
  manifest.add_input(taxonomy_path);
  manifest.add_input(truth_path);
  manifest.save(args.out_prefix + ".manifest.json");

  std::cerr << "wrote " << corpus.sessions.size() << " sessions to "
            << sessions_path << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string input;
  std::string taxonomy;
  std::string output_prefix;
  i2v::TrainConfig config;
  std::size_t min_session_len = i2v::kDefaultMinSessionLen;
  bool no_interaction = false;
  bool save_output_vectors = false;
  bool quiet = false;
};

int run_train(const TrainArgs& args) {
  i2v::RunManifest manifest;
  manifest.command = "train";
  manifest.seed = args.config.seed;
  manifest.add_input(args.input);

  auto t0 = Clock::now();
  auto parsed = i2v::load_sessions(args.input, args.min_session_len);
  std::vector<i2v::Session> sessions = std::move(parsed.sessions);
  std::cerr << "parsed " << sessions.size() << " sessions (" << parsed.dropped
            << " dropped by bounce filter)\n";
  manifest.timings_ms.emplace_back("parse", ms_since(t0));

  i2v::TrainConfig config = args.config;
  config.verbose = !args.quiet;
  if (args.no_interaction) {
    sessions = i2v::no_interaction_mode(sessions);
    config.use_custom_negatives = false;
  }

  i2v::TaxonomyMap taxonomy;
  if (!args.taxonomy.empty()) {
    manifest.add_input(args.taxonomy);
    taxonomy = i2v::TaxonomyMap::load(args.taxonomy);
  }
  taxonomy.cover_sessions(sessions);

  t0 = Clock::now();
  const auto vocab = i2v::Vocabulary::build(sessions, config.min_count);
  if (vocab.empty())
    throw i2v::DataError("vocabulary is empty after the min_count filter");
  std::cerr << "vocabulary: " << vocab.size() << " tokens\n";
  manifest.timings_ms.emplace_back("vocab", ms_since(t0));

  t0 = Clock::now();
  i2v::TrainStats stats;
  const auto matrices = i2v::train(sessions, vocab, taxonomy, config, &stats);
  manifest.timings_ms.emplace_back("train", ms_since(t0));
  std::cerr << "trained " << stats.updates << " updates, mean loss "
            << stats.mean_loss << "\n";

  t0 = Clock::now();
  i2v::save_embeddings_text(args.output_prefix + ".txt", vocab, matrices);
  i2v::save_embeddings_binary(args.output_prefix + ".bin", matrices);
  i2v::save_token_manifest(args.output_prefix + ".tokens", vocab);
  if (args.save_output_vectors)
    i2v::save_embeddings_binary(args.output_prefix + ".out.bin", matrices,
                                /*output_side=*/true);
  manifest.timings_ms.emplace_back("save", ms_since(t0));

  manifest.config = {
      {"dim", config.dim},
      {"window", config.window},
      {"epochs", config.epochs},
      {"initial_lr", config.initial_lr},
      {"min_lr", config.min_lr},
      {"k_random_negatives", config.k_random_negatives},
      {"alpha", config.alpha},
      {"subsample_t", config.subsample_t},
      {"min_count", config.min_count},
      {"min_session_len", args.min_session_len},
      {"threads", config.threads},
      {"deterministic", config.deterministic},
      {"no_interaction", args.no_interaction},
  };
  manifest.save(args.output_prefix + ".manifest.json");
  return kExitOk;
}

struct IndexArgs {
  std::string embeddings;
  std::string output;
  i2v::HnswConfig config;
  std::string metric = "cosine";
};

int run_index(const IndexArgs& args) {
  i2v::RunManifest manifest;
  manifest.command = "index";
  manifest.seed = args.config.seed;
  manifest.add_input(args.embeddings);

  i2v::HnswConfig config = args.config;
  const auto metric = i2v::parse_metric(args.metric);
  if (!metric) throw i2v::ConfigError("unknown metric: " + args.metric);
  config.metric = *metric;

  auto t0 = Clock::now();
  const auto loaded = i2v::load_embeddings_auto(args.embeddings);
  manifest.timings_ms.emplace_back("load", ms_since(t0));
  if (loaded.count() == 0) throw i2v::DataError("no embedding rows to index");

  t0 = Clock::now();
  const i2v::VectorView table{loaded.vectors.data(), loaded.count(),
                              loaded.dim};
  const auto index = i2v::HnswIndex::build(table, config);
  manifest.timings_ms.emplace_back("build", ms_since(t0));

  t0 = Clock::now();
  index.save(args.output);
  {
    std::ofstream out(args.output + ".tokens");
    if (!out) throw i2v::IoError("cannot write " + args.output + ".tokens");
    for (const std::string& token : loaded.tokens) out << token << '\n';
  }
  manifest.timings_ms.emplace_back("save", ms_since(t0));

  manifest.config = {
      {"metric", args.metric},
      {"links_per_vector", config.links_per_vector},
      {"ef_construction", config.ef_construction},
      {"rows", loaded.count()},
      {"dim", loaded.dim},
  };
  manifest.save(args.output + ".manifest.json");
  std::cerr << "indexed " << loaded.count() << " vectors into " << args.output
            << "\n";
  return kExitOk;
}

struct LoadedIndex {
  i2v::HnswIndex index;
  i2v::Vocabulary vocab;
};

LoadedIndex load_index_with_tokens(const std::string& path) {
  LoadedIndex out;
  out.index = i2v::HnswIndex::load(path);
  std::ifstream tokens(path + ".tokens");
  if (!tokens) throw i2v::IoError("cannot open token sidecar: " + path + ".tokens");
  std::vector<std::string> list;
  std::string line;
  while (std::getline(tokens, line))
    if (!line.empty()) list.push_back(line);
  if (list.size() != out.index.size())
    throw i2v::DataError("token sidecar does not match index size");
  out.vocab = i2v::Vocabulary::from_tokens(list);
  return out;
}

struct QueryArgs {
  std::string index_path;
  std::string token;
  std::string target;
  std::size_t k = 10;
  std::size_t ef = 256;
  bool keep_query_item = false;
};

int run_query(const QueryArgs& args) {
  const auto token = i2v::PairToken::parse(args.token);
  if (!token) throw i2v::ConfigError("invalid token: " + args.token);

  std::optional<i2v::InteractionType> target;
  if (!args.target.empty()) {
    target = i2v::parse_interaction(args.target);
    if (!target) throw i2v::ConfigError("unknown interaction: " + args.target);
  }

  const auto loaded = load_index_with_tokens(args.index_path);
  i2v::HnswSearcher searcher{&loaded.index, args.ef};
  i2v::CandidateOptions options;
  options.exclude_query_item = !args.keep_query_item;
  const auto set = i2v::candidates_for_pair(*token, target, args.k, searcher,
                                            loaded.vocab, options);
  if (!set) {
    std::cerr << "out of vocabulary: " << args.token << "\n";
    return kExitOov;
  }
  i2v::write_candidate_line(std::cout, *set);
  return kExitOk;
}

struct EvalArgs {
  std::string index_path;
  std::string copurchase_sessions;
  std::string test_path;
  std::string target = "purchase";
  std::size_t k = 20;
  std::size_t ef = 256;
  std::string scope = "after";
  std::string baseline;  // no-interaction | copurchase | random | (empty)
  std::string baseline_index;
  std::string baseline_sessions;
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t min_session_len = 1;
};

// Candidate items for one test pair under the interaction-aware embedding
// method: target-filtered nearest neighbors of the pair's own embedding.
i2v::CandidateItemsProvider embedding_provider(
    const LoadedIndex& loaded, std::optional<i2v::InteractionType> target,
    std::size_t k, std::size_t ef) {
  return [&loaded, target, k, ef](const i2v::PairToken& pair)
             -> std::optional<std::unordered_set<std::string>> {
    i2v::HnswSearcher searcher{&loaded.index, ef};
    const auto set =
        i2v::candidates_for_pair(pair, target, k, searcher, loaded.vocab);
    if (!set) return std::nullopt;
    std::unordered_set<std::string> items;
    for (const auto& e : set->entries) items.insert(e.item);
    return items;
  };
}

// The no-interaction ablation holds one embedding per item (stored under the
// item's view token); queries collapse the pair to its item and skip the
// interaction filter.
i2v::CandidateItemsProvider collapsed_provider(const LoadedIndex& loaded,
                                               std::size_t k, std::size_t ef) {
  return [&loaded, k, ef](const i2v::PairToken& pair)
             -> std::optional<std::unordered_set<std::string>> {
    const i2v::PairToken collapsed(pair.item, i2v::InteractionType::View);
    i2v::HnswSearcher searcher{&loaded.index, ef};
    const auto set = i2v::candidates_for_pair(collapsed, std::nullopt, k,
                                              searcher, loaded.vocab);
    if (!set) return std::nullopt;
    std::unordered_set<std::string> items;
    for (const auto& e : set->entries) items.insert(e.item);
    return items;
  };
}

i2v::CandidateItemsProvider copurchase_provider(
    const i2v::CoPurchaseModel& model, std::size_t k) {
  return [&model, k](const i2v::PairToken& pair)
             -> std::optional<std::unordered_set<std::string>> {
    const auto set = model.candidates(pair.item, k);
    if (!set) return std::nullopt;
    std::unordered_set<std::string> items;
    for (const auto& e : set->entries) items.insert(e.item);
    return items;
  };
}

// Random baseline: k uniform vocabulary tokens per query, passed through the
// same target-interaction filter as the real methods.
i2v::CandidateItemsProvider random_provider(
    const i2v::Vocabulary& vocab, std::optional<i2v::InteractionType> target,
    std::size_t k, std::uint64_t seed) {
  return [&vocab, target, k, seed](const i2v::PairToken& pair)
             -> std::optional<std::unordered_set<std::string>> {
    i2v::Rng rng(i2v::mix_seed(seed, std::hash<std::string>{}(pair.canonical())));
    std::unordered_set<std::string> items;
    for (std::size_t i = 0; i < k; ++i) {
      const auto id = static_cast<std::uint32_t>(rng.below(vocab.size()));
      const i2v::PairToken& token = vocab.token(id);
      if (target && token.interaction != *target) continue;
      if (token.item == pair.item) continue;
      items.insert(token.item);
    }
    return items;
  };
}

int run_eval(const EvalArgs& args) {
  const auto target = i2v::parse_interaction(args.target);
  if (!target) throw i2v::ConfigError("unknown interaction: " + args.target);
  const auto scope = i2v::parse_scope(args.scope);
  if (!scope) throw i2v::ConfigError("unknown scope: " + args.scope);
  if (args.index_path.empty() == args.copurchase_sessions.empty())
    throw i2v::ConfigError("exactly one of --index / --copurchase is required");

  auto test = i2v::load_sessions(args.test_path, args.min_session_len);
  const auto hit_sets = i2v::build_hit_sets(test.sessions, *target, *scope);

  std::set<std::string> active_items;
  std::map<std::string, std::uint64_t> traffic;
  for (const auto& s : test.sessions)
    for (const auto& e : s.events) {
      active_items.insert(e.item);
      ++traffic[e.item];
    }

  // Main method.
  LoadedIndex main_index;
  i2v::CoPurchaseModel main_copurchase;
  i2v::CandidateItemsProvider main_provider;
  i2v::CoverageProbe main_probe;
  std::string main_name;
  if (!args.index_path.empty()) {
    main_index = load_index_with_tokens(args.index_path);
    main_name = "embedding";
    main_provider = embedding_provider(main_index, *target, args.k, args.ef);
    main_probe = [&](const std::string& item) {
      const auto set = main_provider(
          i2v::PairToken(item, i2v::InteractionType::View));
      return set.has_value() && !set->empty();
    };
  } else {
    auto train_sessions =
        i2v::load_sessions(args.copurchase_sessions, args.min_session_len);
    main_copurchase = i2v::CoPurchaseModel::build(train_sessions.sessions);
    main_name = "copurchase";
    main_provider = copurchase_provider(main_copurchase, args.k);
    main_probe = [&](const std::string& item) {
      return main_copurchase.covers(item);
    };
  }

  std::vector<i2v::MethodReportRow> rows;
  i2v::MethodReportRow main_row;
  main_row.method = main_name;
  main_row.target = *target;
  main_row.candidate_size = args.k;
  main_row.hits = i2v::average_hit_rate(hit_sets, main_provider, args.threads);
  main_row.coverage = i2v::coverage_rate(main_probe, active_items, &traffic);

  // Optional baseline.
  LoadedIndex baseline_index;
  i2v::CoPurchaseModel baseline_copurchase;
  if (!args.baseline.empty()) {
    i2v::CandidateItemsProvider baseline_provider;
    i2v::CoverageProbe baseline_probe;
    if (args.baseline == "no-interaction") {
      if (args.baseline_index.empty())
        throw i2v::ConfigError("--baseline no-interaction needs --baseline-index");
      baseline_index = load_index_with_tokens(args.baseline_index);
      baseline_provider = collapsed_provider(baseline_index, args.k, args.ef);
      baseline_probe = [&](const std::string& item) {
        const auto set = baseline_provider(
            i2v::PairToken(item, i2v::InteractionType::View));
        return set.has_value() && !set->empty();
      };
    } else if (args.baseline == "copurchase") {
      if (args.baseline_sessions.empty())
        throw i2v::ConfigError("--baseline copurchase needs --baseline-sessions");
      auto train_sessions =
          i2v::load_sessions(args.baseline_sessions, args.min_session_len);
      baseline_copurchase = i2v::CoPurchaseModel::build(train_sessions.sessions);
      baseline_provider = copurchase_provider(baseline_copurchase, args.k);
      baseline_probe = [&](const std::string& item) {
        return baseline_copurchase.covers(item);
      };
    } else if (args.baseline == "random") {
      const i2v::Vocabulary& universe =
          !args.index_path.empty() ? main_index.vocab : baseline_index.vocab;
      if (universe.empty())
        throw i2v::ConfigError("--baseline random needs --index");
      baseline_provider = random_provider(universe, *target, args.k, args.seed);
      baseline_probe = [](const std::string&) { return true; };
    } else {
      throw i2v::ConfigError("unknown baseline: " + args.baseline);
    }

    i2v::MethodReportRow baseline_row;
    baseline_row.method = args.baseline;
    baseline_row.target = *target;
    baseline_row.candidate_size = args.k;
    baseline_row.hits =
        i2v::average_hit_rate(hit_sets, baseline_provider, args.threads);
    baseline_row.coverage =
        i2v::coverage_rate(baseline_probe, active_items, &traffic);

    main_row.baseline_name = args.baseline;
    if (main_row.hits.has_data() && baseline_row.hits.has_data())
      main_row.pct_change =
          i2v::percent_change(main_row.hits.average, baseline_row.hits.average);
    rows.push_back(main_row);
    rows.push_back(baseline_row);
  } else {
    rows.push_back(main_row);
  }

  i2v::write_report(std::cout, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"item-interaction embeddings for candidate retrieval"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic corpus");
  cmd_gen->add_option("--items", gen.config.items, "number of items");
  cmd_gen->add_option("--clusters", gen.config.clusters, "number of clusters");
  cmd_gen->add_option("--sessions", gen.config.sessions, "number of sessions");
  cmd_gen->add_option("--min-len", gen.config.min_session_len,
                      "minimum session length");
  cmd_gen->add_option("--max-len", gen.config.max_session_len,
                      "maximum session length");
  cmd_gen->add_option("--q-in", gen.config.q_in,
                      "within-cluster transition probability");
  cmd_gen->add_option("--p-favorite", gen.config.p_favorite,
                      "favorite emission probability");
  cmd_gen->add_option("--p-cart", gen.config.p_cart,
                      "add-to-cart emission probability");
  cmd_gen->add_option("--p-purchase", gen.config.p_purchase,
                      "purchase emission probability");
  cmd_gen->add_option("--p-stay", gen.config.p_stay,
                      "probability a non-view event re-engages the same item");
  cmd_gen->add_option("--complement-prob", gen.config.complement_prob,
                      "probability a cart is followed by a complement purchase");
  cmd_gen->add_option("--head-fraction", gen.config.head_fraction,
                      "fraction of each cluster eligible as complements");
  cmd_gen->add_option("--seed", gen.seed, "random seed");
  cmd_gen->add_option("--out", gen.out_prefix, "output path prefix")
      ->required();

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "train embeddings");
  cmd_train->add_option("--input", train.input, "session log")->required();
  cmd_train->add_option("--taxonomy", train.taxonomy, "taxonomy file");
  cmd_train->add_option("--output", train.output_prefix, "output path prefix")
      ->required();
  cmd_train->add_option("--dim", train.config.dim, "embedding dimension");
  cmd_train->add_option("--window", train.config.window, "context window");
  cmd_train->add_option("--epochs", train.config.epochs, "training epochs");
  cmd_train->add_option("--lr", train.config.initial_lr, "initial learning rate");
  cmd_train->add_option("--min-lr", train.config.min_lr, "final learning rate");
  cmd_train->add_option("--negatives", train.config.k_random_negatives,
                        "random negatives per update");
  cmd_train->add_option("--alpha", train.config.alpha,
                        "unigram distribution exponent");
  cmd_train->add_option("--subsample", train.config.subsample_t,
                        "frequent-token subsampling threshold (0 = off)");
  cmd_train->add_option("--min-count", train.config.min_count,
                        "vocabulary count threshold");
  cmd_train->add_option("--min-session-len", train.min_session_len,
                        "bounce filter threshold");
  cmd_train->add_option("--threads", train.config.threads, "worker threads");
  cmd_train->add_option("--seed", train.config.seed, "random seed");
  cmd_train->add_flag("--deterministic", train.config.deterministic,
                      "bit-reproducible single-thread mode");
  cmd_train->add_flag("--no-interaction", train.no_interaction,
                      "collapse interactions to one token per item");
  cmd_train->add_flag("--save-output-vectors", train.save_output_vectors,
                      "also write the output-side vectors");
  cmd_train->add_flag("--quiet", train.quiet,
                      "suppress progress reporting on stderr");

  IndexArgs index;
  auto* cmd_index = app.add_subcommand("index", "build an hnsw index");
  cmd_index->add_option("--embeddings", index.embeddings,
                        "embedding file (.bin or .txt)")
      ->required();
  cmd_index->add_option("--output", index.output, "index output path")
      ->required();
  cmd_index->add_option("--metric", index.metric, "cosine or dot");
  cmd_index->add_option("--M", index.config.links_per_vector,
                        "links per vector");
  cmd_index->add_option("--ef-construction", index.config.ef_construction,
                        "construction beam width");
  cmd_index->add_option("--seed", index.config.seed, "level draw seed");

  QueryArgs query;
  auto* cmd_query = app.add_subcommand("query", "query an index");
  cmd_query->add_option("--index", query.index_path, "index path")->required();
  cmd_query->add_option("--token", query.token, "query token item|interaction")
      ->required();
  cmd_query->add_option("--target", query.target,
                        "restrict results to one interaction");
  cmd_query->add_option("--k", query.k, "result count");
  cmd_query->add_option("--ef", query.ef, "search beam width");
  cmd_query->add_flag("--keep-query-item", query.keep_query_item,
                      "do not drop the query's own item");

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "hit-rate and coverage report");
  cmd_eval->add_option("--index", eval.index_path, "embedding index");
  cmd_eval->add_option("--copurchase", eval.copurchase_sessions,
                       "train sessions for a co-purchase main method");
  cmd_eval->add_option("--test", eval.test_path, "test session log")
      ->required();
  cmd_eval->add_option("--target", eval.target, "target interaction");
  cmd_eval->add_option("--k", eval.k, "candidate set size");
  cmd_eval->add_option("--ef", eval.ef, "search beam width");
  cmd_eval->add_option("--scope", eval.scope, "hit set scope: after or any");
  cmd_eval->add_option("--baseline", eval.baseline,
                       "no-interaction, copurchase, or random");
  cmd_eval->add_option("--baseline-index", eval.baseline_index,
                       "index for the no-interaction baseline");
  cmd_eval->add_option("--baseline-sessions", eval.baseline_sessions,
                       "sessions for the copurchase baseline");
  cmd_eval->add_option("--seed", eval.seed, "random baseline seed");
  cmd_eval->add_option("--threads", eval.threads, "evaluation threads");

  auto* cmd_version = app.add_subcommand("version", "print version and formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_index->parsed()) return run_index(index);
    if (cmd_query->parsed()) return run_query(query);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_version->parsed()) {
      std::cout << "i2v " << i2v::kToolVersion << "\nformats: embeddings "
                << i2v::kEmbeddingMagic << ", index " << i2v::kIndexMagic
                << "\n";
      return kExitOk;
    }
  } catch (const i2v::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const i2v::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
