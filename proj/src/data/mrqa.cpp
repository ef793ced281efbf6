// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/data/mrqa.hpp"

#include <zlib.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dgkd/core/error.hpp"
#include "dgkd/core/log.hpp"

namespace dgkd::data {
namespace {

using nlohmann::json;

bool has_gz_extension(const std::filesystem::path& path) { return path.extension() == ".gz"; }

}  // namespace

std::string read_maybe_gzip(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifact("no such file: " + path.string());
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw FormatError("cannot open " + path.string());
  std::string out;
  std::vector<char> buffer(1 << 16);
  for (;;) {
    const int n = gzread(file, buffer.data(), static_cast<unsigned>(buffer.size()));
    if (n < 0) {
      int code = 0;
      const std::string message = gzerror(file, &code);
      gzclose(file);
      throw FormatError(path.string() + ": corrupt compressed stream (" + message + ")");
    }
    if (n == 0) break;
    out.append(buffer.data(), static_cast<std::size_t>(n));
  }
  const int rc = gzclose(file);
  if (rc != Z_OK && rc != Z_BUF_ERROR) throw FormatError(path.string() + ": corrupt compressed stream");
  if (rc == Z_BUF_ERROR) throw FormatError(path.string() + ": truncated compressed stream");
  return out;
}

DomainDataset load_mrqa_jsonl(const std::filesystem::path& path, Split split, const LoadOptions& options,
                              LoadReport* report) {
  const std::string content = read_maybe_gzip(path);
  DomainDataset ds;
  ds.split = split;
  ds.name = options.name;

  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (record.contains("header")) {
      if (line_no == 1 && ds.name.empty() && record["header"].contains("dataset")) {
        ds.name = record["header"]["dataset"].get<std::string>();
      }
      continue;
    }
    if (ds.name.empty()) {
      ds.name = path.stem().string();
      if (has_gz_extension(path)) ds.name = std::filesystem::path(ds.name).stem().string();
    }
    try {
      const std::string context = record.at("context").get<std::string>();
      for (const auto& qa : record.at("qas")) {
        RCExample ex;
        ex.qid = qa.at("qid").get<std::string>();
        ex.question = qa.at("question").get<std::string>();
        ex.passage = context;
        ex.domain = ds.name;
        if (qa.contains("answers")) ex.answers = qa["answers"].get<std::vector<std::string>>();
        if (ex.answers.empty() && !options.allow_unanswered) {
          throw FormatError(path.string() + ":" + std::to_string(line_no) + ": qid " + ex.qid +
                            " has no answers on a labeled split");
        }
        if (qa.contains("detected_answers")) {
          for (const auto& det : qa["detected_answers"]) {
            const std::string text = det.value("text", std::string{});
            for (const auto& cs : det.at("char_spans")) {
              const auto s = cs.at(0).get<std::size_t>();
              const auto e = cs.at(1).get<std::size_t>();
              if (e < s || e >= context.size()) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) + ": qid " + ex.qid +
                                  " has a char span outside its context");
              }
              AnswerSpan span{s, e + 1, context.substr(s, e + 1 - s)};
              if (normalize_whitespace(span.text) != normalize_whitespace(text)) {
                const std::string msg = "qid " + ex.qid + ": detected answer '" + text +
                                        "' does not match context slice '" + span.text + "'; using offsets";
                log::warn("{}", msg);
                if (report != nullptr) report->warnings.push_back(msg);
              }
              ex.answer_spans.push_back(std::move(span));
            }
          }
        }
        ds.examples.push_back(std::move(ex));
      }
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad record (" + e.what() + ")");
    }
  }
  return ds;
}

void write_mrqa_jsonl(const std::filesystem::path& path, const DomainDataset& dataset) {
  std::ostringstream buf;
  buf << json{{"header", {{"dataset", dataset.name}, {"split", to_string(dataset.split)}}}}.dump() << '\n';
  for (const auto& ex : dataset.examples) {
    json det = json::array();
    for (const auto& span : ex.answer_spans) {
      det.push_back({{"text", span.text}, {"char_spans", json::array({json::array({span.start, span.end - 1})})}});
    }
    json qa = {{"qid", ex.qid}, {"question", ex.question}, {"answers", ex.answers}, {"detected_answers", det}};
    buf << json{{"context", ex.passage}, {"qas", json::array({qa})}}.dump() << '\n';
  }
  const std::string text = buf.str();
  if (has_gz_extension(path)) {
    gzFile file = gzopen(path.c_str(), "wb");
    if (file == nullptr) throw Error("cannot write " + path.string());
    // zlib writes a zero mtime in the header; output is byte-stable.
    if (gzwrite(file, text.data(), static_cast<unsigned>(text.size())) != static_cast<int>(text.size())) {
      gzclose(file);
      throw Error("short write to " + path.string());
    }
    gzclose(file);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace dgkd::data
