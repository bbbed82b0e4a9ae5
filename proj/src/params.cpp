// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "error.hpp"

namespace sessrec {

namespace {

constexpr char kMagic[8] = {'S', 'R', 'E', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_le(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

std::vector<ParameterStore::Spec> ParameterStore::layout(int d, int n_items,
                                                         int n_users) {
  std::vector<Spec> specs;
  auto mat = [&](const std::string& name, int r, int c) {
    specs.push_back({name, r, c, false});
  };
  auto bias = [&](const std::string& name) { specs.push_back({name, 1, d, true}); };

  mat("item_embedding", n_items, d);
  mat("user_embedding", n_users, d);

  mat("ggnn.w_out", d, d);
  mat("ggnn.w_in", d, d);
  bias("ggnn.b_out");
  bias("ggnn.b_in");
  for (const char* gate : {"z", "r", "h"}) {
    mat(std::string("ggnn.gru.w_") + gate, d, d);
    mat(std::string("ggnn.gru.u_") + gate, d, d);
    bias(std::string("ggnn.gru.b_") + gate);
  }

  for (const char* type : {"i2i", "u2i", "i2u"}) {
    mat(std::string("hetero.") + type + ".w_msg", d, d);
    mat(std::string("hetero.") + type + ".w_upd", 2 * d, d);
    bias(std::string("hetero.") + type + ".b");
  }

  mat("readout.w1", d, d);
  mat("readout.w2", d, d);
  mat("readout.q", d, 1);
  bias("readout.c");
  mat("readout.w3", 2 * d, d);

  mat("simnet.w_q", d, d);
  mat("simnet.w_k", d, d);
  mat("simnet.w_v", d, d);

  mat("fuse.w_s", 2 * d, 1);
  return specs;
}

ParameterStore ParameterStore::init(int d, int n_items, int n_users,
                                    std::uint64_t seed) {
  if (d <= 0) throw ConfigError("params: embedding size must be positive");
  if (n_items <= 0 || n_users <= 0) {
    throw ConfigError("params: vocabulary sizes must be positive");
  }
  ParameterStore store;
  store.d_ = d;
  store.n_items_ = n_items;
  store.n_users_ = n_users;

  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> dist(-bound, bound);

  for (const Spec& spec : layout(d, n_items, n_users)) {
    ad::Tensor t = ad::Tensor::zeros(spec.rows, spec.cols, /*requires_grad=*/true);
    if (!spec.is_bias) {
      auto v = t.values_mut();
      for (double& x : v) x = dist(rng);
    }
    store.tensors_.emplace(spec.name, std::move(t));
  }
  return store;
}

bool ParameterStore::has(const std::string& name) const {
  return tensors_.count(name) != 0;
}

ad::Tensor& ParameterStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw PreconditionError("params: unknown parameter '" + name + "'");
  }
  return it->second;
}

const ad::Tensor& ParameterStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw PreconditionError("params: unknown parameter '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

void ParameterStore::zero_all_grads() {
  for (auto& [_, t] : tensors_) t.zero_grad();
}

ParameterStore ParameterStore::clone() const {
  ParameterStore copy;
  copy.d_ = d_;
  copy.n_items_ = n_items_;
  copy.n_users_ = n_users_;
  for (const auto& [name, t] : tensors_) {
    auto v = t.values();
    copy.tensors_.emplace(
        name, ad::Tensor::from(t.rows(), t.cols(),
                               std::vector<double>(v.begin(), v.end()), true));
  }
  return copy;
}

void ParameterStore::save(const std::string& path,
                          const nlohmann::json& extra) const {
  nlohmann::json header = extra;
  header["format_version"] = kFormatVersion;
  header["d"] = d_;
  header["n_items"] = n_items_;
  header["n_users"] = n_users_;
  const std::string header_text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(header_text.size()));
  os.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  write_u32(os, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(t.rows()));
    write_u32(os, static_cast<std::uint32_t>(t.cols()));
    for (double v : t.values()) write_f64_le(os, v);
  }
  if (!os) throw IoError("checkpoint: write to '" + path + "' failed");
}

std::pair<ParameterStore, nlohmann::json> ParameterStore::load(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("checkpoint: '" + path + "' is not a checkpoint file");
  }
  if (read_u32(is) != kFormatVersion) {
    throw IoError("checkpoint: unsupported format version in '" + path + "'");
  }
  const std::uint32_t header_len = read_u32(is);
  std::string header_text(header_len, '\0');
  is.read(header_text.data(), header_len);
  nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
  if (header.is_discarded()) {
    throw IoError("checkpoint: corrupt header in '" + path + "'");
  }

  ParameterStore store;
  store.d_ = header.at("d").get<int>();
  store.n_items_ = header.at("n_items").get<int>();
  store.n_users_ = header.at("n_users").get<int>();

  const std::uint32_t count = read_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const int rows = static_cast<int>(read_u32(is));
    const int cols = static_cast<int>(read_u32(is));
    std::vector<double> values(static_cast<std::size_t>(rows) * cols);
    for (double& v : values) v = read_f64_le(is);
    if (!is) throw IoError("checkpoint: truncated tensor data in '" + path + "'");
    store.tensors_.emplace(
        name, ad::Tensor::from(rows, cols, std::move(values), true));
  }
  return {std::move(store), std::move(header)};
}

}  // namespace sessrec
