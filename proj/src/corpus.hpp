// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sessrec {

// One raw interaction record.
struct InteractionEvent {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
};

// Chronologically ordered item-index sequence owned by one user. Duplicates
// are permitted.
struct Session {
  int user_index = 0;
  std::vector<int> items;
  std::int64_t start_time = 0;
};

struct PreprocessConfig {
  std::int64_t gap_seconds = 180;
  std::int64_t min_item_count = 0;
  int min_session_len = 1;
  double train_fraction = 0.8;

  void validate() const;
};

// Bidirectional map between opaque string keys and dense indices. Index order
// is insertion order.
class Vocab {
 public:
  int add(const std::string& key);  // returns existing index if present
  std::optional<int> find(const std::string& key) const;
  const std::string& key(int index) const;
  int size() const { return static_cast<int>(keys_.size()); }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, int> index_;
};

struct Corpus {
  Vocab item_vocab;
  Vocab user_vocab;
  std::vector<Session> train_sessions;
  std::vector<Session> test_sessions;

  // Checks index ranges and the per-user chronological train/test ordering.
  void validate() const;
};

// Intermediate session representation before vocabulary assignment.
struct RawSession {
  std::vector<std::string> items;
  std::int64_t start_time = 0;
};

// Per-user session lists; user order is first appearance in the event input.
using UserSessions = std::vector<std::pair<std::string, std::vector<RawSession>>>;

// Sorts each user's events by timestamp (stable, so equal timestamps keep
// input order) and starts a new session whenever the gap to the previous
// event strictly exceeds gap_seconds.
UserSessions split_sessions(std::span<const InteractionEvent> events,
                            std::int64_t gap_seconds);

// Removes items occurring fewer than min_item_count times across all
// sessions, then drops sessions shorter than min_session_len. Single pass,
// no fixpoint. Users left with no sessions are dropped.
UserSessions filter_sessions(const UserSessions& sessions,
                             std::int64_t min_item_count, int min_session_len);

// Builds vocabularies (first-appearance order) and splits each user's
// sessions chronologically: the first ceil(train_fraction * n) go to train.
Corpus build_corpus(const UserSessions& sessions, double train_fraction);

// All (items[0..k), items[k]) pairs for k = 1..len-1. A length-1 session
// yields nothing.
struct PrefixInstance {
  int user_index = 0;
  std::vector<int> prefix;
  int target = 0;
};
std::vector<PrefixInstance> make_prefix_instances(const Session& session);
std::vector<PrefixInstance> make_prefix_instances(
    std::span<const Session> sessions);

// events.tsv -> corpus, applying the full preprocessing pipeline.
Corpus preprocess(std::span<const InteractionEvent> events,
                  const PreprocessConfig& config);

double mean_session_length(const Corpus& corpus);

}  // namespace sessrec
