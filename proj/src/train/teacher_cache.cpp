// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/teacher_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dgkd/core/error.hpp"
#include "dgkd/core/hash.hpp"

namespace dgkd::train {
namespace {

constexpr char kMagic[8] = {'D', 'G', 'K', 'D', 'T', 'L', 'C', '1'};

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

template <class U>
void put(std::ostream& out, U value) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_floats(std::ostream& out, const std::vector<double>& values) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(values.size()));
  for (double v : values) put<float>(out, static_cast<float>(v));
}

class Reader {
 public:
  Reader(std::istream& in, std::filesystem::path path) : in_(in), path_(std::move(path)) {}

  template <class U>
  U get() {
    U value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(U));
    if (!in_) throw FormatError(path_.string() + ": truncated teacher logit cache");
    return value;
  }

  std::string get_string() {
    std::string s(get<std::uint32_t>(), '\0');
    in_.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!in_) throw FormatError(path_.string() + ": truncated teacher logit cache");
    return s;
  }

  std::vector<double> get_floats() {
    std::vector<double> v(get<std::uint32_t>());
    for (auto& x : v) x = get<float>();
    return v;
  }

 private:
  std::istream& in_;
  std::filesystem::path path_;
};

}  // namespace

const model::SpanLogits& TeacherLogitCache::at(const std::string& window_id) const {
  const auto it = entries.find(window_id);
  if (it == entries.end()) throw Error("teacher logit cache has no entry for window " + window_id);
  return it->second;
}

void TeacherLogitCache::merge(const TeacherLogitCache& other) {
  if (other.teacher_id != teacher_id || other.tokenizer_id != tokenizer_id) {
    throw Error("cannot merge teacher caches from different teachers or tokenizers");
  }
  for (const auto& [id, logits] : other.entries) entries[id] = logits;
}

std::string teacher_fingerprint(const model::Checkpoint& teacher) {
  Fnv1a h;
  h.update(model::to_json(teacher.model.config).dump());
  for (const auto& e : teacher.model.params) {
    h.update(e.name);
    h.update(e.value.values().data(), e.value.size() * sizeof(double));
  }
  return to_hex(h.digest());
}

TeacherLogitCache cache_teacher_logits(const model::Checkpoint& teacher, std::span<const data::Window> windows,
                                       const std::string& tokenizer_id) {
  if (teacher.meta.tokenizer_id != tokenizer_id) {
    throw Error("teacher was trained with tokenizer " + teacher.meta.tokenizer_id + " but windows use " +
                tokenizer_id);
  }
  TeacherLogitCache cache;
  cache.teacher_id = teacher_fingerprint(teacher);
  cache.tokenizer_id = tokenizer_id;
  for (const auto& w : windows) {
    auto logits = model::forward_span(teacher.model, w);
    for (auto& x : logits.start) x = to_f32(x);
    for (auto& x : logits.end) x = to_f32(x);
    cache.entries[w.window_id] = std::move(logits);
  }
  return cache;
}

void check_cache_covers(const TeacherLogitCache& cache, std::span<const data::Window> windows) {
  for (const auto& w : windows) {
    const auto& logits = cache.at(w.window_id);
    if (logits.start.size() != w.length() || logits.end.size() != w.length()) {
      throw Error("teacher logits for window " + w.window_id + " do not match its length");
    }
  }
}

void save_teacher_cache(const std::filesystem::path& path, const TeacherLogitCache& cache) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kTeacherCacheVersion);
  put_string(out, cache.teacher_id);
  put_string(out, cache.tokenizer_id);
  put<std::uint64_t>(out, cache.entries.size());
  for (const auto& [id, logits] : cache.entries) {
    put_string(out, id);
    put_floats(out, logits.start);
    put_floats(out, logits.end);
  }
  if (!out) throw Error("failed writing " + path.string());
}

TeacherLogitCache load_teacher_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open teacher logit cache " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + ": not a teacher logit cache");
  }
  Reader r(in, path);
  if (r.get<std::uint32_t>() != kTeacherCacheVersion) {
    throw FormatError(path.string() + ": unsupported teacher logit cache version");
  }
  TeacherLogitCache cache;
  cache.teacher_id = r.get_string();
  cache.tokenizer_id = r.get_string();
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    auto id = r.get_string();
    model::SpanLogits logits;
    logits.start = r.get_floats();
    logits.end = r.get_floats();
    if (logits.start.size() != logits.end.size()) throw FormatError(path.string() + ": ragged record for " + id);
    cache.entries.emplace(std::move(id), std::move(logits));
  }
  return cache;
}

}  // namespace dgkd::train
