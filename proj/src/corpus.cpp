// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace sessrec {

void PreprocessConfig::validate() const {
  if (gap_seconds <= 0) throw ConfigError("preprocess: gap_seconds must be positive");
  if (min_item_count < 0) throw ConfigError("preprocess: min_item_count must be >= 0");
  if (min_session_len < 1) throw ConfigError("preprocess: min_session_len must be >= 1");
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw ConfigError("preprocess: train_fraction must be in (0, 1]");
  }
}

int Vocab::add(const std::string& key) {
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const int idx = static_cast<int>(keys_.size());
  keys_.push_back(key);
  index_.emplace(key, idx);
  return idx;
}

std::optional<int> Vocab::find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::key(int index) const {
  if (index < 0 || index >= size()) {
    throw PreconditionError("vocab: index " + std::to_string(index) +
                            " out of range");
  }
  return keys_[static_cast<std::size_t>(index)];
}

void Corpus::validate() const {
  auto check = [&](const Session& s, const char* what) {
    if (s.items.empty()) {
      throw PreconditionError(std::string("corpus: empty ") + what + " session");
    }
    if (s.user_index < 0 || s.user_index >= user_vocab.size()) {
      throw PreconditionError("corpus: user index out of range");
    }
    for (int item : s.items) {
      if (item < 0 || item >= item_vocab.size()) {
        throw PreconditionError("corpus: item index out of range");
      }
    }
  };
  std::vector<std::int64_t> max_train(user_vocab.size(),
                                      std::numeric_limits<std::int64_t>::min());
  for (const Session& s : train_sessions) {
    check(s, "train");
    max_train[s.user_index] = std::max(max_train[s.user_index], s.start_time);
  }
  for (const Session& s : test_sessions) {
    check(s, "test");
    if (s.start_time < max_train[s.user_index]) {
      throw PreconditionError("corpus: test session precedes a train session");
    }
  }
}

UserSessions split_sessions(std::span<const InteractionEvent> events,
                            std::int64_t gap_seconds) {
  if (gap_seconds <= 0) throw ConfigError("split_sessions: gap_seconds must be positive");

  std::vector<std::string> user_order;
  std::unordered_map<std::string, std::vector<const InteractionEvent*>> by_user;
  for (const InteractionEvent& e : events) {
    if (e.user_id.empty() || e.item_id.empty()) {
      throw PreconditionError("split_sessions: empty user or item id");
    }
    if (e.timestamp < 0) {
      throw PreconditionError("split_sessions: negative timestamp");
    }
    auto [it, inserted] = by_user.try_emplace(e.user_id);
    if (inserted) user_order.push_back(e.user_id);
    it->second.push_back(&e);
  }

  UserSessions out;
  out.reserve(user_order.size());
  for (const std::string& user : user_order) {
    auto& evs = by_user[user];
    std::stable_sort(evs.begin(), evs.end(),
                     [](const InteractionEvent* a, const InteractionEvent* b) {
                       return a->timestamp < b->timestamp;
                     });
    // A new session starts when the gap to the previous event is strictly
    // greater than gap_seconds.
    std::vector<RawSession> sessions;
    std::int64_t prev_ts = 0;
    for (std::size_t i = 0; i < evs.size(); ++i) {
      const InteractionEvent* e = evs[i];
      if (i == 0 || e->timestamp - prev_ts > gap_seconds) {
        sessions.push_back(RawSession{{}, e->timestamp});
      }
      sessions.back().items.push_back(e->item_id);
      prev_ts = e->timestamp;
    }
    out.emplace_back(user, std::move(sessions));
  }
  return out;
}

UserSessions filter_sessions(const UserSessions& sessions,
                             std::int64_t min_item_count, int min_session_len) {
  if (min_item_count < 0) throw ConfigError("filter: min_item_count must be >= 0");
  if (min_session_len < 1) throw ConfigError("filter: min_session_len must be >= 1");

  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& [user, list] : sessions) {
    for (const RawSession& s : list) {
      for (const std::string& item : s.items) ++counts[item];
    }
  }

  UserSessions out;
  for (const auto& [user, list] : sessions) {
    std::vector<RawSession> kept;
    for (const RawSession& s : list) {
      RawSession filtered{{}, s.start_time};
      for (const std::string& item : s.items) {
        if (counts[item] >= min_item_count) filtered.items.push_back(item);
      }
      if (static_cast<int>(filtered.items.size()) >= min_session_len) {
        kept.push_back(std::move(filtered));
      }
    }
    if (!kept.empty()) out.emplace_back(user, std::move(kept));
  }
  return out;
}

Corpus build_corpus(const UserSessions& sessions, double train_fraction) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw ConfigError("build_corpus: train_fraction must be in (0, 1]");
  }
  Corpus corpus;
  bool any = false;
  for (const auto& [user, list] : sessions) {
    if (!list.empty()) any = true;
  }
  if (!any) throw PreconditionError("build_corpus: no sessions left after filtering");

  for (const auto& [user, list] : sessions) {
    const int user_index = corpus.user_vocab.add(user);
    std::vector<Session> indexed;
    indexed.reserve(list.size());
    for (const RawSession& raw : list) {
      Session s;
      s.user_index = user_index;
      s.start_time = raw.start_time;
      s.items.reserve(raw.items.size());
      for (const std::string& item : raw.items) {
        s.items.push_back(corpus.item_vocab.add(item));
      }
      indexed.push_back(std::move(s));
    }
    const int n = static_cast<int>(indexed.size());
    const int n_train = static_cast<int>(
        std::ceil(train_fraction * static_cast<double>(n)));
    for (int i = 0; i < n; ++i) {
      (i < n_train ? corpus.train_sessions : corpus.test_sessions)
          .push_back(std::move(indexed[i]));
    }
  }
  return corpus;
}

std::vector<PrefixInstance> make_prefix_instances(const Session& session) {
  std::vector<PrefixInstance> out;
  const int n = static_cast<int>(session.items.size());
  for (int k = 1; k < n; ++k) {
    PrefixInstance inst;
    inst.user_index = session.user_index;
    inst.prefix.assign(session.items.begin(), session.items.begin() + k);
    inst.target = session.items[k];
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<PrefixInstance> make_prefix_instances(
    std::span<const Session> sessions) {
  std::vector<PrefixInstance> out;
  for (const Session& s : sessions) {
    auto insts = make_prefix_instances(s);
    out.insert(out.end(), std::make_move_iterator(insts.begin()),
               std::make_move_iterator(insts.end()));
  }
  return out;
}

Corpus preprocess(std::span<const InteractionEvent> events,
                  const PreprocessConfig& config) {
  config.validate();
  UserSessions split = split_sessions(events, config.gap_seconds);
  UserSessions filtered =
      filter_sessions(split, config.min_item_count, config.min_session_len);
  return build_corpus(filtered, config.train_fraction);
}

double mean_session_length(const Corpus& corpus) {
  std::int64_t items = 0;
  std::int64_t sessions = 0;
  for (const Session& s : corpus.train_sessions) {
    items += static_cast<std::int64_t>(s.items.size());
    ++sessions;
  }
  for (const Session& s : corpus.test_sessions) {
    items += static_cast<std::int64_t>(s.items.size());
    ++sessions;
  }
  return sessions == 0 ? 0.0
                       : static_cast<double>(items) / static_cast<double>(sessions);
}

}  // namespace sessrec
