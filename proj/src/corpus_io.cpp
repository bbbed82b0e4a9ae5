// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "corpus_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "error.hpp"

namespace sessrec {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return is;
}

void save_vocab(const Vocab& vocab, const fs::path& path) {
  std::ofstream os = open_out(path);
  os << "index\tkey\n";
  for (int i = 0; i < vocab.size(); ++i) os << i << '\t' << vocab.key(i) << '\n';
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

Vocab load_vocab(const fs::path& path) {
  std::ifstream is = open_in(path);
  Vocab vocab;
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError("'" + path.string() + "': missing header row");
  }
  int expected = 0;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw IoError("'" + path.string() + "': malformed row '" + line + "'");
    }
    if (std::stoi(fields[0]) != expected) {
      throw IoError("'" + path.string() + "': non-contiguous indices");
    }
    if (vocab.add(fields[1]) != expected) {
      throw IoError("'" + path.string() + "': duplicate key '" + fields[1] + "'");
    }
    ++expected;
  }
  return vocab;
}

void save_sessions_jsonl(const std::vector<Session>& sessions,
                         const fs::path& path) {
  std::ofstream os = open_out(path);
  for (const Session& s : sessions) {
    nlohmann::json j;
    j["user"] = s.user_index;
    j["items"] = s.items;
    j["start"] = s.start_time;
    os << j.dump() << '\n';
  }
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<Session> load_sessions_jsonl(const fs::path& path) {
  std::ifstream is = open_in(path);
  std::vector<Session> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw IoError("'" + path.string() + "' line " + std::to_string(line_no) +
                    ": invalid JSON");
    }
    Session s;
    s.user_index = j.at("user").get<int>();
    s.items = j.at("items").get<std::vector<int>>();
    s.start_time = j.at("start").get<std::int64_t>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<InteractionEvent> read_events_tsv(const std::string& path) {
  std::ifstream is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError("'" + path + "': empty file, expected a header row");
  }
  auto header = split_tabs(strip_cr(line));
  if (header.size() != 3 || header[0] != "user_id" || header[1] != "item_id" ||
      header[2] != "timestamp") {
    throw IoError("'" + path +
                  "': expected header 'user_id\\titem_id\\ttimestamp'");
  }
  std::vector<InteractionEvent> events;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) +
                    ": expected 3 tab-separated fields");
    }
    InteractionEvent e;
    e.user_id = fields[0];
    e.item_id = fields[1];
    std::int64_t ts = 0;
    const auto [ptr, ec] = std::from_chars(
        fields[2].data(), fields[2].data() + fields[2].size(), ts);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) +
                    ": invalid timestamp '" + fields[2] + "'");
    }
    if (ts < 0) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) +
                    ": negative timestamp");
    }
    if (e.user_id.empty() || e.item_id.empty()) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) +
                    ": empty user or item id");
    }
    e.timestamp = ts;
    events.push_back(std::move(e));
  }
  return events;
}

nlohmann::json corpus_meta(const Corpus& corpus,
                           const nlohmann::json& config_echo) {
  nlohmann::json meta;
  meta["format_version"] = 1;
  meta["config"] = config_echo;
  meta["n_items"] = corpus.item_vocab.size();
  meta["n_users"] = corpus.user_vocab.size();
  meta["n_train_sessions"] = corpus.train_sessions.size();
  meta["n_test_sessions"] = corpus.test_sessions.size();
  meta["mean_session_length"] = mean_session_length(corpus);
  return meta;
}

void save_corpus(const Corpus& corpus, const std::string& dir,
                 const nlohmann::json& config_echo) {
  fs::create_directories(dir);
  const fs::path base(dir);
  save_vocab(corpus.item_vocab, base / "items.tsv");
  save_vocab(corpus.user_vocab, base / "users.tsv");
  save_sessions_jsonl(corpus.train_sessions, base / "train_sessions.jsonl");
  save_sessions_jsonl(corpus.test_sessions, base / "test_sessions.jsonl");
  std::ofstream os = open_out(base / "meta.json");
  os << corpus_meta(corpus, config_echo).dump(2) << '\n';
  if (!os) throw IoError("write to meta.json failed");
}

Corpus load_corpus(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::exists(base)) throw IoError("corpus directory '" + dir + "' not found");
  Corpus corpus;
  corpus.item_vocab = load_vocab(base / "items.tsv");
  corpus.user_vocab = load_vocab(base / "users.tsv");
  corpus.train_sessions = load_sessions_jsonl(base / "train_sessions.jsonl");
  corpus.test_sessions = load_sessions_jsonl(base / "test_sessions.jsonl");
  corpus.validate();
  return corpus;
}

nlohmann::json load_corpus_meta(const std::string& dir) {
  std::ifstream is = open_in(fs::path(dir) / "meta.json");
  nlohmann::json meta = nlohmann::json::parse(is, nullptr, false);
  if (meta.is_discarded()) {
    throw IoError("'" + dir + "/meta.json': invalid JSON");
  }
  return meta;
}

}  // namespace sessrec
