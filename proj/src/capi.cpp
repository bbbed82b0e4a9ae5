// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "sessrec/sessrec.h"

#include <cstring>
#include <string>

#include "config.hpp"
#include "corpus.hpp"
#include "corpus_io.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "params.hpp"
#include "synthetic.hpp"
#include "trainer.hpp"

namespace {

thread_local std::string g_last_error;

sessrec_status fail(sessrec_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
sessrec_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SESSREC_OK;
  } catch (const sessrec::ConfigError& e) {
    return fail(SESSREC_ERR_CONFIG, e.what());
  } catch (const sessrec::IoError& e) {
    return fail(SESSREC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(SESSREC_ERR_RUNTIME, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct sessrec_corpus {
  sessrec::Corpus corpus;
  std::string dir;
};

struct sessrec_model {
  sessrec::ParameterStore params;
  sessrec::TrainConfig config;
};

extern "C" {

const char* sessrec_version(void) { return "1.0.0"; }

const char* sessrec_last_error(void) { return g_last_error.c_str(); }

void sessrec_string_free(char* s) { delete[] s; }

sessrec_status sessrec_preprocess(const char* events_tsv, const char* out_dir,
                                  int64_t gap_seconds, int64_t min_item_count,
                                  int64_t min_session_len,
                                  double train_fraction) {
  return guarded([&] {
    if (!events_tsv || !out_dir) {
      throw sessrec::ConfigError("preprocess: null path argument");
    }
    sessrec::PreprocessConfig config;
    config.gap_seconds = gap_seconds;
    config.min_item_count = min_item_count;
    config.min_session_len = static_cast<int>(min_session_len);
    config.train_fraction = train_fraction;
    config.validate();
    const auto events = sessrec::read_events_tsv(events_tsv);
    const sessrec::Corpus corpus = sessrec::preprocess(events, config);
    nlohmann::json echo;
    echo["gap_seconds"] = config.gap_seconds;
    echo["min_item_count"] = config.min_item_count;
    echo["min_session_len"] = config.min_session_len;
    echo["train_fraction"] = config.train_fraction;
    sessrec::save_corpus(corpus, out_dir, echo);
  });
}

sessrec_status sessrec_synth(const char* out_dir, int64_t n_users,
                             int64_t n_items, int64_t n_clusters,
                             int64_t sessions_per_user, double mean_session_len,
                             uint64_t seed) {
  return guarded([&] {
    if (!out_dir) throw sessrec::ConfigError("synth: null output directory");
    sessrec::SyntheticConfig config;
    config.n_users = static_cast<int>(n_users);
    config.n_items = static_cast<int>(n_items);
    config.n_clusters = static_cast<int>(n_clusters);
    config.sessions_per_user = static_cast<int>(sessions_per_user);
    config.mean_session_len = mean_session_len;
    config.seed = seed;
    const sessrec::SyntheticResult result = sessrec::generate_synthetic(config);
    sessrec::save_synthetic(result, config, out_dir);
  });
}

sessrec_status sessrec_corpus_open(const char* dir, sessrec_corpus** out) {
  return guarded([&] {
    if (!dir || !out) throw sessrec::ConfigError("corpus_open: null argument");
    auto handle = new sessrec_corpus{sessrec::load_corpus(dir), dir};
    *out = handle;
  });
}

void sessrec_corpus_close(sessrec_corpus* corpus) { delete corpus; }

sessrec_status sessrec_corpus_stats_json(const sessrec_corpus* corpus,
                                         char** out_json) {
  return guarded([&] {
    if (!corpus || !out_json) {
      throw sessrec::ConfigError("corpus_stats: null argument");
    }
    *out_json = dup_string(sessrec::load_corpus_meta(corpus->dir).dump(2));
  });
}

sessrec_status sessrec_corpus_graph_stats_json(const sessrec_corpus* corpus,
                                               char** out_json) {
  return guarded([&] {
    if (!corpus || !out_json) {
      throw sessrec::ConfigError("graph_stats: null argument");
    }
    const sessrec::GlobalHeteroGraph graph = sessrec::build_global_graph(
        corpus->corpus.train_sessions, corpus->corpus.item_vocab.size(),
        corpus->corpus.user_vocab.size());
    const sessrec::NeighborStats stats = sessrec::neighbor_stats(graph);
    nlohmann::json j;
    j["i2i_edges"] = stats.i2i_edges;
    j["u2i_edges"] = stats.u2i_edges;
    j["i2u_edges"] = stats.i2u_edges;
    auto histogram = [](const std::map<int, int>& degrees) {
      nlohmann::json h = nlohmann::json::object();
      for (const auto& [degree, count] : degrees) {
        h[std::to_string(degree)] = count;
      }
      return h;
    };
    j["i2i_in_degree_histogram"] = histogram(stats.i2i_degrees);
    j["u2i_in_degree_histogram"] = histogram(stats.u2i_degrees);
    j["i2u_in_degree_histogram"] = histogram(stats.i2u_degrees);
    *out_json = dup_string(j.dump(2));
  });
}

sessrec_status sessrec_corpus_dump_graph(const sessrec_corpus* corpus,
                                         const char* path) {
  return guarded([&] {
    if (!corpus || !path) throw sessrec::ConfigError("dump_graph: null argument");
    const sessrec::GlobalHeteroGraph graph = sessrec::build_global_graph(
        corpus->corpus.train_sessions, corpus->corpus.item_vocab.size(),
        corpus->corpus.user_vocab.size());
    sessrec::dump_global_graph(graph, path);
  });
}

sessrec_status sessrec_train(const sessrec_corpus* corpus,
                             const char* config_json, const char* out_dir,
                             sessrec_model** out_model) {
  return guarded([&] {
    if (!corpus || !config_json || !out_dir) {
      throw sessrec::ConfigError("train: null argument");
    }
    const sessrec::TrainConfig config =
        sessrec::TrainConfig::from_json_text(config_json);
    sessrec::TrainResult result = sessrec::train(corpus->corpus, config);
    sessrec::save_run(result, out_dir);
    if (out_model) {
      *out_model = new sessrec_model{std::move(result.params), result.config};
    }
  });
}

sessrec_status sessrec_model_open(const char* checkpoint_path,
                                  sessrec_model** out) {
  return guarded([&] {
    if (!checkpoint_path || !out) {
      throw sessrec::ConfigError("model_open: null argument");
    }
    auto [params, header] = sessrec::ParameterStore::load(checkpoint_path);
    if (!header.contains("config")) {
      throw sessrec::IoError("model_open: checkpoint header lacks a config");
    }
    const sessrec::TrainConfig config =
        sessrec::TrainConfig::from_json(header.at("config"));
    *out = new sessrec_model{std::move(params), config};
  });
}

void sessrec_model_close(sessrec_model* model) { delete model; }

sessrec_status sessrec_evaluate(const sessrec_model* model,
                                const sessrec_corpus* corpus,
                                const char* metrics_json_path) {
  return guarded([&] {
    if (!model || !corpus || !metrics_json_path) {
      throw sessrec::ConfigError("evaluate: null argument");
    }
    if (corpus->corpus.test_sessions.empty()) {
      throw sessrec::PreconditionError("evaluate: corpus has no test sessions");
    }
    const sessrec::GlobalHeteroGraph graph = sessrec::build_global_graph(
        corpus->corpus.train_sessions, corpus->corpus.item_vocab.size(),
        corpus->corpus.user_vocab.size());
    const sessrec::RankingResult result = sessrec::evaluate_model(
        model->params, model->config, graph, corpus->corpus.test_sessions,
        sessrec::default_ks());
    sessrec::write_metrics_json(result, metrics_json_path);
  });
}

sessrec_status sessrec_sweep(const sessrec_corpus* corpus,
                             const char* config_json, const char* grid_json,
                             const char* out_csv) {
  return guarded([&] {
    if (!corpus || !config_json || !grid_json || !out_csv) {
      throw sessrec::ConfigError("sweep: null argument");
    }
    const sessrec::TrainConfig base =
        sessrec::TrainConfig::from_json_text(config_json);
    nlohmann::json grid = nlohmann::json::parse(grid_json, nullptr, false);
    if (grid.is_discarded()) {
      throw sessrec::ConfigError("sweep: grid is not valid JSON");
    }
    const auto entries = sessrec::grid_search(corpus->corpus, base, grid);
    sessrec::write_sweep_csv(entries, out_csv);
  });
}

}  // extern "C"
