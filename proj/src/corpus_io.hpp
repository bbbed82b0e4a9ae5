// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"

namespace sessrec {

// Reads a UTF-8 TSV with the mandatory header line
// "user_id<TAB>item_id<TAB>timestamp".
std::vector<InteractionEvent> read_events_tsv(const std::string& path);

// Corpus directory layout:
//   items.tsv, users.tsv          index<TAB>key, with a header row
//   train_sessions.jsonl          {"user":int,"items":[int...],"start":int}
//   test_sessions.jsonl
//   meta.json                     format_version, counts, config echo
void save_corpus(const Corpus& corpus, const std::string& dir,
                 const nlohmann::json& config_echo);
Corpus load_corpus(const std::string& dir);

nlohmann::json corpus_meta(const Corpus& corpus,
                           const nlohmann::json& config_echo);
nlohmann::json load_corpus_meta(const std::string& dir);

}  // namespace sessrec
