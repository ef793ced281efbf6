// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/toy/toy_data.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "dgkd/core/error.hpp"
#include "dgkd/core/rng.hpp"
#include "dgkd/data/mrqa.hpp"

namespace dgkd::toy {
namespace {

struct Attribute {
  const char* name;
  std::vector<std::string> values;
};

const std::vector<Attribute>& attributes() {
  static const std::vector<Attribute> a{
      {"color", {"red", "blue", "green", "yellow", "purple", "orange", "pink", "brown"}},
      {"city", {"paris", "tokyo", "lima", "cairo", "oslo", "rome", "delhi", "quito"}},
      {"animal", {"cat", "dog", "horse", "eagle", "shark", "tiger", "panda", "otter"}},
      {"food", {"rice", "bread", "cheese", "mango", "pasta", "soup", "salad", "honey"}},
      {"sport", {"tennis", "golf", "rugby", "chess", "hockey", "boxing", "polo", "judo"}},
      {"metal", {"iron", "gold", "silver", "copper", "zinc", "tin", "nickel", "lead"}},
  };
  return a;
}

const std::vector<std::string>& entities() {
  static const std::vector<std::string> e{"alice", "bob",   "carol", "dave",  "erin",  "frank", "grace", "heidi",
                                          "ivan",  "judy",  "ken",   "laura", "mike",  "nina",  "oscar", "peggy",
                                          "quinn", "rita",  "sam",   "tara",  "uma",   "victor", "wendy", "xena"};
  return e;
}

// {e} entity, {r} attribute, {v} value.
struct Style {
  std::vector<std::string> facts;
  std::vector<std::string> questions;
};

const std::map<std::string, Style>& styles() {
  static const std::map<std::string, Style> s{
      {"news", {{"{e} has {r} {v} .", "the {r} of {e} is {v} ."}, {"what {r} does {e} have ?", "what is the {r} of {e} ?"}}},
      {"wiki", {{"{e} 's {r} is {v} .", "{e} picked {v} as {r} ."}, {"which {r} is {e} 's ?", "tell me {e} 's {r} ."}}},
      {"forum", {{"{r} for {e} : {v} ;", "{e} , {r} , {v} ;"}, {"{r} for {e} ?", "name the {r} of {e} ."}}},
      {"legal", {{"{v} is the {r} of {e} .", "{v} , being {e} 's {r} ."}, {"what is {e} 's {r} ?", "state the {r} of {e} ."}}},
      {"chat", {{"known {r} of {e} was {v} !", "{e} chose the {r} {v} !"}, {"which {r} did {e} choose ?", "{e} 's {r} ?"}}},
      {"quiz", {{"{e} -> {r} -> {v} .", "{r} ( {e} ) = {v} ."}, {"guess the {r} of {e} .", "{e} {r} ?"}}},
  };
  return s;
}

struct Fact {
  std::string entity;
  std::size_t attribute;
  std::string value;
};

// Renders a template; returns the text and the char offset of {v} (npos if absent).
std::pair<std::string, std::size_t> render(const std::string& tmpl, const Fact& f) {
  std::string out;
  std::size_t value_at = std::string::npos;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 'e':
          out += f.entity;
          break;
        case 'r':
          out += attributes()[f.attribute].name;
          break;
        case 'v':
          value_at = out.size();
          out += f.value;
          break;
        default:
          throw Error("bad toy template " + tmpl);
      }
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return {out, value_at};
}

data::RCExample make_example(const std::string& domain, const Style& style, std::size_t facts, bool distinct,
                             Rng& rng, const std::string& qid) {
  std::vector<std::string> people = entities();
  rng.shuffle(people);
  std::vector<std::size_t> attrs(attributes().size());
  for (std::size_t i = 0; i < attrs.size(); ++i) attrs[i] = i;
  rng.shuffle(attrs);
  std::vector<Fact> fs;
  for (std::size_t i = 0; i < facts; ++i) {
    const std::size_t a = distinct ? attrs[i] : rng.index(attributes().size());
    const auto& vals = attributes()[a].values;
    fs.push_back({people[i], a, vals[rng.index(vals.size())]});
  }
  const std::size_t asked = rng.index(facts);
  data::RCExample ex;
  ex.qid = qid;
  ex.domain = domain;
  std::size_t answer_at = 0;
  for (std::size_t i = 0; i < facts; ++i) {
    if (!ex.passage.empty()) ex.passage += ' ';
    const auto [text, v] = render(style.facts[rng.index(style.facts.size())], fs[i]);
    if (i == asked) answer_at = ex.passage.size() + v;
    ex.passage += text;
  }
  ex.question = render(style.questions[rng.index(style.questions.size())], fs[asked]).first;
  ex.answers = {fs[asked].value};
  ex.answer_spans = {{answer_at, answer_at + fs[asked].value.size(), fs[asked].value}};
  return ex;
}

data::DomainDataset make_split(const std::string& domain, data::Split split, std::size_t n,
                               const ToyOptions& options, std::uint64_t seed) {
  const auto it = styles().find(domain);
  if (it == styles().end()) throw Error("no toy templates for domain '" + domain + "'");
  Rng rng(seed);
  data::DomainDataset ds;
  ds.name = domain;
  ds.split = split;
  for (std::size_t i = 0; i < n; ++i) {
    ds.examples.push_back(make_example(domain, it->second, options.facts_per_passage, options.distinct_attributes, rng,
                                       domain + "-" + std::string(data::to_string(split)) + "-" + std::to_string(i)));
  }
  return ds;
}

}  // namespace

std::vector<const ToyDomain*> ToyCorpus::sources() const {
  std::vector<const ToyDomain*> out;
  for (const auto& d : domains) {
    if (!d.is_target) out.push_back(&d);
  }
  return out;
}

std::vector<const ToyDomain*> ToyCorpus::targets() const {
  std::vector<const ToyDomain*> out;
  for (const auto& d : domains) {
    if (d.is_target) out.push_back(&d);
  }
  return out;
}

const std::vector<std::string>& toy_domain_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, style] : styles()) out.push_back(name);
    return out;
  }();
  return names;
}

ToyCorpus make_toy_corpus(const ToyOptions& options) {
  const std::size_t cap = options.distinct_attributes ? attributes().size() : entities().size();
  if (options.facts_per_passage < 1 || options.facts_per_passage > cap) {
    throw Error("facts_per_passage out of range");
  }
  ToyCorpus corpus;
  auto add = [&](const std::string& name, bool target, std::uint64_t tag) {
    ToyDomain d;
    d.name = name;
    d.is_target = target;
    const std::uint64_t base = derive_seed(options.seed, tag);
    d.train = make_split(name, data::Split::train, options.train_per_domain, options, derive_seed(base, 0));
    d.dev = make_split(name, data::Split::dev, options.dev_per_domain, options, derive_seed(base, 1));
    d.test = make_split(name, data::Split::test, options.test_per_domain, options, derive_seed(base, 2));
    corpus.domains.push_back(std::move(d));
  };
  std::uint64_t tag = 0;
  for (const auto& s : options.sources) add(s, false, tag++);
  for (const auto& t : options.targets) add(t, true, tag++);
  return corpus;
}

void write_toy_corpus(const std::filesystem::path& dir, const ToyCorpus& corpus) {
  for (const auto& d : corpus.domains) {
    const auto sub = dir / d.name;
    std::filesystem::create_directories(sub);
    data::write_mrqa_jsonl(sub / "train.jsonl.gz", d.train);
    data::write_mrqa_jsonl(sub / "dev.jsonl.gz", d.dev);
    data::write_mrqa_jsonl(sub / "test.jsonl.gz", d.test);
  }
}

}  // namespace dgkd::toy
