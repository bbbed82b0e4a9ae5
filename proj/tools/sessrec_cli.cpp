// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
//
// Command-line front end over the sessrec C API.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sessrec/sessrec.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int status_to_exit(sessrec_status status) {
  switch (status) {
    case SESSREC_OK:
      return kExitOk;
    case SESSREC_ERR_CONFIG:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

int report(sessrec_status status) {
  if (status != SESSREC_OK) {
    std::cerr << "error: " << sessrec_last_error() << "\n";
  }
  return status_to_exit(status);
}

std::string read_text_file(const std::string& path, int& exit_code) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    std::cerr << "error: cannot open '" << path << "'\n";
    exit_code = kExitRuntime;
    return {};
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  exit_code = kExitOk;
  return ss.str();
}

// Merges --set key=value pairs onto the config JSON. Values parse as JSON
// scalars when possible, else as strings. Unknown keys are rejected by the
// library's strict config parser.
bool apply_overrides(nlohmann::json& config,
                     const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: override '" << kv << "' is not key=value\n";
      return false;
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    config[key] = value;
  }
  return true;
}

struct CorpusHandle {
  sessrec_corpus* ptr = nullptr;
  ~CorpusHandle() { sessrec_corpus_close(ptr); }
};

struct ModelHandle {
  sessrec_model* ptr = nullptr;
  ~ModelHandle() { sessrec_model_close(ptr); }
};

int run_inspect(const std::string& dir, const std::string& dump_path) {
  CorpusHandle corpus;
  if (sessrec_status s = sessrec_corpus_open(dir.c_str(), &corpus.ptr);
      s != SESSREC_OK) {
    return report(s);
  }
  char* stats_text = nullptr;
  if (sessrec_status s = sessrec_corpus_stats_json(corpus.ptr, &stats_text);
      s != SESSREC_OK) {
    return report(s);
  }
  nlohmann::json meta = nlohmann::json::parse(stats_text);
  sessrec_string_free(stats_text);

  std::cout << "items:                " << meta.at("n_items").dump() << "\n"
            << "users:                " << meta.at("n_users").dump() << "\n"
            << "train sessions:       " << meta.at("n_train_sessions").dump() << "\n"
            << "test sessions:        " << meta.at("n_test_sessions").dump() << "\n"
            << "mean session length:  " << meta.at("mean_session_length").dump()
            << "\n";

  char* graph_text = nullptr;
  if (sessrec_status s = sessrec_corpus_graph_stats_json(corpus.ptr, &graph_text);
      s != SESSREC_OK) {
    return report(s);
  }
  nlohmann::json graph = nlohmann::json::parse(graph_text);
  sessrec_string_free(graph_text);
  std::cout << "i2i edges:            " << graph.at("i2i_edges").dump() << "\n"
            << "u2i edges:            " << graph.at("u2i_edges").dump() << "\n"
            << "i2u edges:            " << graph.at("i2u_edges").dump() << "\n";

  if (!dump_path.empty()) {
    if (sessrec_status s = sessrec_corpus_dump_graph(corpus.ptr, dump_path.c_str());
        s != SESSREC_OK) {
      return report(s);
    }
    std::cout << "graph dump:           " << dump_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"session-based recommendation engine"};
  app.require_subcommand(1);

  // preprocess
  auto* preprocess = app.add_subcommand(
      "preprocess", "split, filter and chronologically partition an event log");
  std::string pp_input, pp_out;
  std::int64_t pp_gap = 180, pp_min_item_count = 5, pp_min_session_len = 2;
  double pp_fraction = 0.8;
  preprocess->add_option("--input", pp_input, "events TSV file")->required();
  preprocess->add_option("--out", pp_out, "output corpus directory")->required();
  preprocess->add_option("--gap", pp_gap, "session gap threshold in seconds");
  preprocess->add_option("--min-item-count", pp_min_item_count,
                         "drop items occurring fewer times than this");
  preprocess->add_option("--min-session-len", pp_min_session_len,
                         "drop sessions shorter than this");
  preprocess->add_option("--train-fraction", pp_fraction,
                         "per-user fraction of sessions used for training");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string sy_out;
  std::int64_t sy_users = 50, sy_items = 200, sy_clusters = 4, sy_sessions = 100;
  double sy_mean_len = 8.0;
  std::uint64_t sy_seed = 7;
  synth->add_option("--out", sy_out, "output corpus directory")->required();
  synth->add_option("--users", sy_users, "number of users");
  synth->add_option("--items", sy_items, "number of items");
  synth->add_option("--clusters", sy_clusters, "number of preference clusters");
  synth->add_option("--sessions", sy_sessions, "sessions per user");
  synth->add_option("--mean-len", sy_mean_len, "mean session length");
  synth->add_option("--seed", sy_seed, "generator seed");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print corpus statistics");
  std::string in_dir, in_dump;
  inspect->add_option("dir", in_dir, "corpus directory")->required();
  inspect->add_option("--dump-graph", in_dump, "write global graph JSONL here");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string tr_data, tr_config, tr_out;
  std::vector<std::string> tr_overrides;
  train->add_option("--data", tr_data, "corpus directory")->required();
  train->add_option("--config", tr_config, "training config JSON file")->required();
  train->add_option("--out", tr_out, "run output directory")->required();
  train->add_option("--set", tr_overrides, "config override key=value");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "rank test prefixes");
  std::string ev_data, ev_checkpoint, ev_out;
  evaluate->add_option("--data", ev_data, "corpus directory")->required();
  evaluate->add_option("--checkpoint", ev_checkpoint, "checkpoint file")->required();
  evaluate->add_option("--out", ev_out,
                       "metrics.json path (default: next to the checkpoint)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "grid search over config fields");
  std::string sw_data, sw_config, sw_grid, sw_out;
  std::vector<std::string> sw_overrides;
  sweep->add_option("--data", sw_data, "corpus directory")->required();
  sweep->add_option("--config", sw_config, "base config JSON file")->required();
  sweep->add_option("--grid", sw_grid, "grid JSON file")->required();
  sweep->add_option("--out", sw_out, "sweep.csv path (default: ./sweep.csv)");
  sweep->add_option("--set", sw_overrides, "base config override key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (preprocess->parsed()) {
    return report(sessrec_preprocess(pp_input.c_str(), pp_out.c_str(), pp_gap,
                                     pp_min_item_count, pp_min_session_len,
                                     pp_fraction));
  }

  if (synth->parsed()) {
    return report(sessrec_synth(sy_out.c_str(), sy_users, sy_items, sy_clusters,
                                sy_sessions, sy_mean_len, sy_seed));
  }

  if (inspect->parsed()) return run_inspect(in_dir, in_dump);

  if (train->parsed()) {
    int code = kExitOk;
    const std::string text = read_text_file(tr_config, code);
    if (code != kExitOk) return code;
    nlohmann::json config = nlohmann::json::parse(text, nullptr, false);
    if (config.is_discarded()) {
      std::cerr << "error: '" << tr_config << "' is not valid JSON\n";
      return kExitUsage;
    }
    if (!apply_overrides(config, tr_overrides)) return kExitUsage;
    CorpusHandle corpus;
    if (sessrec_status s = sessrec_corpus_open(tr_data.c_str(), &corpus.ptr);
        s != SESSREC_OK) {
      return report(s);
    }
    return report(sessrec_train(corpus.ptr, config.dump().c_str(),
                                tr_out.c_str(), nullptr));
  }

  if (evaluate->parsed()) {
    CorpusHandle corpus;
    if (sessrec_status s = sessrec_corpus_open(ev_data.c_str(), &corpus.ptr);
        s != SESSREC_OK) {
      return report(s);
    }
    ModelHandle model;
    if (sessrec_status s = sessrec_model_open(ev_checkpoint.c_str(), &model.ptr);
        s != SESSREC_OK) {
      return report(s);
    }
    std::string out = ev_out;
    if (out.empty()) {
      out = (std::filesystem::path(ev_checkpoint).parent_path() / "metrics.json")
                .string();
      if (out == "metrics.json") out = "./metrics.json";
    }
    const int code = report(sessrec_evaluate(model.ptr, corpus.ptr, out.c_str()));
    if (code == kExitOk) std::cout << "metrics: " << out << "\n";
    return code;
  }

  if (sweep->parsed()) {
    int code = kExitOk;
    const std::string config_text = read_text_file(sw_config, code);
    if (code != kExitOk) return code;
    nlohmann::json config = nlohmann::json::parse(config_text, nullptr, false);
    if (config.is_discarded()) {
      std::cerr << "error: '" << sw_config << "' is not valid JSON\n";
      return kExitUsage;
    }
    if (!apply_overrides(config, sw_overrides)) return kExitUsage;
    const std::string grid_text = read_text_file(sw_grid, code);
    if (code != kExitOk) return code;
    CorpusHandle corpus;
    if (sessrec_status s = sessrec_corpus_open(sw_data.c_str(), &corpus.ptr);
        s != SESSREC_OK) {
      return report(s);
    }
    const std::string out = sw_out.empty() ? "sweep.csv" : sw_out;
    const int rc = report(sessrec_sweep(corpus.ptr, config.dump().c_str(),
                                        grid_text.c_str(), out.c_str()));
    if (rc == kExitOk) std::cout << "sweep: " << out << "\n";
    return rc;
  }

  return kExitUsage;
}
