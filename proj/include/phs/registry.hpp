#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phs/normalizer.hpp"
#include "phs/util.hpp"

namespace phs {

enum class TaskFamily {
  suicide,
  stress,
  health_mention,
  vaccine_sentiment,
  covid,
  depression,
  other_health,
};

inline const char* to_string(TaskFamily f) {
  switch (f) {
    case TaskFamily::suicide: return "suicide";
    case TaskFamily::stress: return "stress";
    case TaskFamily::health_mention: return "health_mention";
    case TaskFamily::vaccine_sentiment: return "vaccine_sentiment";
    case TaskFamily::covid: return "covid";
    case TaskFamily::depression: return "depression";
    case TaskFamily::other_health: return "other_health";
  }
  return "other_health";
}

inline bool parse_task_family(std::string_view s, TaskFamily* out) {
  for (TaskFamily f :
       {TaskFamily::suicide, TaskFamily::stress, TaskFamily::health_mention,
        TaskFamily::vaccine_sentiment, TaskFamily::covid, TaskFamily::depression,
        TaskFamily::other_health}) {
    if (s == to_string(f)) {
      *out = f;
      return true;
    }
  }
  return false;
}

enum class SampleUnit { post, user, sms, claim, review };

inline const char* to_string(SampleUnit u) {
  switch (u) {
    case SampleUnit::post: return "post";
    case SampleUnit::user: return "user";
    case SampleUnit::sms: return "sms";
    case SampleUnit::claim: return "claim";
    case SampleUnit::review: return "review";
  }
  return "post";
}

inline bool parse_sample_unit(std::string_view s, SampleUnit* out) {
  for (SampleUnit u : {SampleUnit::post, SampleUnit::user, SampleUnit::sms,
                       SampleUnit::claim, SampleUnit::review}) {
    if (s == to_string(u)) {
      *out = u;
      return true;
    }
  }
  return false;
}

enum class SplitStrategy { official, stratified_5fold };

inline const char* to_string(SplitStrategy s) {
  return s == SplitStrategy::official ? "official" : "stratified_5fold";
}

inline bool parse_split_strategy(std::string_view s, SplitStrategy* out) {
  if (s == "official") {
    *out = SplitStrategy::official;
    return true;
  }
  if (s == "stratified_5fold") {
    *out = SplitStrategy::stratified_5fold;
    return true;
  }
  return false;
}

/// One benchmark dataset row: task family, platform, size, class count and
/// split strategy, plus the label vocabulary and where the user-supplied
/// data file lives.
struct DatasetDescriptor {
  std::string id;
  std::string source;  // distinct corpora may span several rows (PHM variants)
  TaskFamily task_family = TaskFamily::other_health;
  Platform platform = Platform::other;
  SampleUnit unit = SampleUnit::post;
  std::size_t num_samples = 0;
  int num_classes = 0;
  SplitStrategy split_strategy = SplitStrategy::stratified_5fold;
  std::vector<std::string> label_names;
  std::string data_path;
  std::vector<std::string> alt_label_names;  // documented label-merge variant
  std::string notes;

  int label_index(std::string_view name) const {
    for (std::size_t i = 0; i < label_names.size(); ++i) {
      if (label_names[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

class Registry {
public:
  const std::vector<DatasetDescriptor>& datasets() const { return rows_; }

  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  const DatasetDescriptor& lookup(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw DataError("registry: no dataset with id \"" + id + "\"");
    }
    return rows_[it->second];
  }

  std::size_t size() const { return rows_.size(); }

  std::size_t distinct_sources() const {
    std::set<std::string> s;
    for (const auto& d : rows_) s.insert(d.source);
    return s.size();
  }

  std::map<TaskFamily, std::size_t> family_counts() const {
    std::map<TaskFamily, std::size_t> out;
    for (const auto& d : rows_) ++out[d.task_family];
    return out;
  }

  void add(DatasetDescriptor d, const std::string& context) {
    if (index_.count(d.id)) {
      throw DataError(strcat_msg("registry ", context, ": duplicate dataset id \"",
                                 d.id, "\""));
    }
    if (d.num_classes < 2) {
      throw DataError(strcat_msg("registry ", context, " (", d.id,
                                 "): num_classes must be >= 2"));
    }
    if (static_cast<int>(d.label_names.size()) != d.num_classes) {
      throw DataError(strcat_msg(
          "registry ", context, " (", d.id, "): num_classes=", d.num_classes,
          " but ", d.label_names.size(), " label_names"));
    }
    std::set<std::string> uniq(d.label_names.begin(), d.label_names.end());
    if (uniq.size() != d.label_names.size()) {
      throw DataError(strcat_msg("registry ", context, " (", d.id,
                                 "): label_names are not distinct"));
    }
    if (d.num_samples == 0) {
      throw DataError(strcat_msg("registry ", context, " (", d.id,
                                 "): num_samples must be positive"));
    }
    index_[d.id] = rows_.size();
    rows_.push_back(std::move(d));
  }

private:
  std::vector<DatasetDescriptor> rows_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {

inline DatasetDescriptor descriptor_from_json(const nlohmann::json& j,
                                              const std::string& context) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) {
      throw DataError(strcat_msg("registry ", context, ": missing field \"", key,
                                 "\""));
    }
    return j.at(key);
  };
  DatasetDescriptor d;
  d.id = need("id").get<std::string>();
  d.source = j.value("source", d.id);
  if (!parse_task_family(need("task_family").get<std::string>(), &d.task_family)) {
    throw DataError(strcat_msg("registry ", context, " (", d.id,
                               "): unknown task_family \"",
                               j.at("task_family").get<std::string>(), "\""));
  }
  if (!parse_platform(need("platform").get<std::string>(), &d.platform)) {
    throw DataError(strcat_msg("registry ", context, " (", d.id,
                               "): unknown platform \"",
                               j.at("platform").get<std::string>(), "\""));
  }
  if (!parse_sample_unit(need("unit").get<std::string>(), &d.unit)) {
    throw DataError(strcat_msg("registry ", context, " (", d.id,
                               "): unknown unit \"",
                               j.at("unit").get<std::string>(), "\""));
  }
  d.num_samples = need("num_samples").get<std::size_t>();
  d.num_classes = need("num_classes").get<int>();
  if (!parse_split_strategy(need("split_strategy").get<std::string>(),
                            &d.split_strategy)) {
    throw DataError(strcat_msg("registry ", context, " (", d.id,
                               "): unknown split_strategy \"",
                               j.at("split_strategy").get<std::string>(), "\""));
  }
  d.label_names = need("label_names").get<std::vector<std::string>>();
  d.data_path = j.value("data_path", "");
  if (j.contains("alt_label_names")) {
    d.alt_label_names = j.at("alt_label_names").get<std::vector<std::string>>();
  }
  d.notes = j.value("notes", "");
  return d;
}

}  // namespace detail

inline Registry parse_registry(const std::string& text,
                               const std::string& origin) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw DataError("registry " + origin + ": not valid JSON");
  }
  if (!j.is_object() || !j.contains("datasets") || !j["datasets"].is_array()) {
    throw DataError("registry " + origin +
                    ": expected an object with a \"datasets\" array");
  }
  Registry reg;
  std::size_t row = 0;
  for (const auto& entry : j["datasets"]) {
    ++row;
    std::string context = strcat_msg(origin, " row ", row);
    reg.add(detail::descriptor_from_json(entry, context), context);
  }
  return reg;
}

inline Registry load_registry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open registry: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_registry(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Built-in benchmark registry: 26 rows covering 25 distinct datasets over 7
// task families (the PHM corpus appears with both its multi-class and binary
// label schemes).

inline const char* builtin_registry_json() {
  return R"JSON({
  "version": 1,
  "datasets": [
    {"id": "R-SSD", "task_family": "suicide", "platform": "reddit", "unit": "user",
     "num_samples": 500, "num_classes": 5, "split_strategy": "stratified_5fold",
     "label_names": ["none", "indicator", "ideation", "behavior", "attempt"],
     "data_path": "datasets/r-ssd.jsonl"},
    {"id": "Dreaddit", "task_family": "stress", "platform": "reddit", "unit": "post",
     "num_samples": 3553, "num_classes": 2, "split_strategy": "official",
     "label_names": ["not_stress", "stress"],
     "data_path": "datasets/dreaddit.jsonl"},
    {"id": "SAD", "task_family": "stress", "platform": "sms", "unit": "sms",
     "num_samples": 6850, "num_classes": 2, "split_strategy": "official",
     "label_names": ["not_stressor", "stressor"],
     "data_path": "datasets/sad.jsonl"},
    {"id": "PHM (Multi-class)", "source": "PHM", "task_family": "health_mention",
     "platform": "twitter", "unit": "post",
     "num_samples": 4635, "num_classes": 4, "split_strategy": "stratified_5fold",
     "label_names": ["self_mention", "other_mention", "awareness", "non_health"],
     "data_path": "datasets/phm.jsonl"},
    {"id": "PHM (Binary)", "source": "PHM", "task_family": "health_mention",
     "platform": "twitter", "unit": "post",
     "num_samples": 4635, "num_classes": 2, "split_strategy": "stratified_5fold",
     "label_names": ["non_health", "health_mention"],
     "data_path": "datasets/phm-binary.jsonl"},
    {"id": "HMC2019", "task_family": "health_mention", "platform": "twitter",
     "unit": "post",
     "num_samples": 15393, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["personal_mention", "non_personal_mention", "figurative_mention"],
     "data_path": "datasets/hmc2019.jsonl"},
    {"id": "RHMD", "task_family": "health_mention", "platform": "reddit",
     "unit": "post",
     "num_samples": 3553, "num_classes": 4, "split_strategy": "stratified_5fold",
     "label_names": ["personal_health_mention", "non_personal_health_mention",
                     "figurative_health_mention", "hyperbolic_health_mention"],
     "alt_label_names": ["personal_health_mention", "non_personal_health_mention",
                         "figurative_or_hyperbolic_health_mention"],
     "notes": "A merged 3-label variant also circulates (figurative and hyperbolic collapsed); the default follows the published 4-class statistics.",
     "data_path": "datasets/rhmd.jsonl"},
    {"id": "VS1", "task_family": "vaccine_sentiment", "platform": "twitter",
     "unit": "post",
     "num_samples": 9261, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["positive", "negative", "neutral"],
     "data_path": "datasets/vs1.jsonl"},
    {"id": "VS2", "task_family": "vaccine_sentiment", "platform": "twitter",
     "unit": "post",
     "num_samples": 18522, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["pro_vaccine", "anti_vaccine", "neutral"],
     "data_path": "datasets/vs2.jsonl"},
    {"id": "Covid Lies", "task_family": "covid", "platform": "twitter", "unit": "post",
     "num_samples": 3204, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["agree", "disagree", "no_stance"],
     "data_path": "datasets/covid-lies.jsonl"},
    {"id": "Covid Category", "task_family": "covid", "platform": "twitter",
     "unit": "post",
     "num_samples": 4328, "num_classes": 2, "split_strategy": "stratified_5fold",
     "label_names": ["personal_narrative", "news"],
     "data_path": "datasets/covid-category.jsonl"},
    {"id": "COVIDSentiA", "task_family": "covid", "platform": "twitter", "unit": "post",
     "num_samples": 30000, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["positive", "negative", "neutral"],
     "data_path": "datasets/covidsenti-a.jsonl"},
    {"id": "COVIDSentiB", "task_family": "covid", "platform": "twitter", "unit": "post",
     "num_samples": 30000, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["positive", "negative", "neutral"],
     "data_path": "datasets/covidsenti-b.jsonl"},
    {"id": "COVIDSentiC", "task_family": "covid", "platform": "twitter", "unit": "post",
     "num_samples": 30000, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["positive", "negative", "neutral"],
     "data_path": "datasets/covidsenti-c.jsonl"},
    {"id": "eRisk T3", "task_family": "depression", "platform": "reddit",
     "unit": "user",
     "num_samples": 190, "num_classes": 4, "split_strategy": "stratified_5fold",
     "label_names": ["minimal", "mild", "moderate", "severe"],
     "data_path": "datasets/erisk-t3.jsonl"},
    {"id": "Depression_Reddit_1", "task_family": "depression", "platform": "reddit",
     "unit": "post",
     "num_samples": 3553, "num_classes": 4, "split_strategy": "stratified_5fold",
     "label_names": ["minimal", "mild", "moderate", "severe"],
     "data_path": "datasets/depression-reddit-1.jsonl"},
    {"id": "eRisk T1", "task_family": "depression", "platform": "reddit",
     "unit": "user",
     "num_samples": 2810, "num_classes": 2, "split_strategy": "official",
     "label_names": ["control", "depression"],
     "data_path": "datasets/erisk-t1.jsonl"},
    {"id": "Depression_Reddit_2", "task_family": "depression", "platform": "reddit",
     "unit": "post",
     "num_samples": 1841, "num_classes": 2, "split_strategy": "stratified_5fold",
     "label_names": ["control", "depression"],
     "data_path": "datasets/depression-reddit-2.jsonl"},
    {"id": "Depression_Twitter_1", "task_family": "depression", "platform": "twitter",
     "unit": "post",
     "num_samples": 1793, "num_classes": 3, "split_strategy": "stratified_5fold",
     "label_names": ["positive", "negative", "neutral"],
     "data_path": "datasets/depression-twitter-1.jsonl"},
    {"id": "Depression_Twitter_2", "task_family": "depression", "platform": "twitter",
     "unit": "post",
     "num_samples": 10314, "num_classes": 2, "split_strategy": "stratified_5fold",
     "label_names": ["positive", "negative"],
     "data_path": "datasets/depression-twitter-2.jsonl"},
    {"id": "PubHealth", "task_family": "other_health", "platform": "news",
     "unit": "claim",
     "num_samples": 12251, "num_classes": 4, "split_strategy": "official",
     "label_names": ["true", "false", "unproven", "mixture"],
     "data_path": "datasets/pubhealth.jsonl"},
    {"id": "Abortion", "task_family": "other_health", "platform": "twitter",
     "unit": "post",
     "num_samples": 933, "num_classes": 3, "split_strategy": "official",
     "label_names": ["favor", "against", "none"],
     "data_path": "datasets/abortion.jsonl"},
    {"id": "Amazon Health", "task_family": "other_health", "platform": "amazon",
     "unit": "review",
     "num_samples": 2003, "num_classes": 4, "split_strategy": "official",
     "label_names": ["strongly_positive", "positive", "negative", "strongly_negative"],
     "data_path": "datasets/amazon-health.jsonl"},
    {"id": "SMM4H T1", "task_family": "other_health", "platform": "twitter",
     "unit": "post",
     "num_samples": 14954, "num_classes": 2, "split_strategy": "official",
     "label_names": ["no_adr", "adr"],
     "data_path": "datasets/smm4h-t1.jsonl"},
    {"id": "SMM4H T2", "task_family": "other_health", "platform": "twitter",
     "unit": "post",
     "num_samples": 13498, "num_classes": 3, "split_strategy": "official",
     "label_names": ["definite_intake", "possible_intake", "no_intake"],
     "data_path": "datasets/smm4h-t2.jsonl"},
    {"id": "HRT", "task_family": "other_health", "platform": "twitter", "unit": "post",
     "num_samples": 2754, "num_classes": 4, "split_strategy": "stratified_5fold",
     "label_names": ["sick", "health", "unrelated", "non_english"],
     "data_path": "datasets/hrt.jsonl"}
  ]
})JSON";
}

inline const Registry& builtin_registry() {
  static const Registry reg = parse_registry(builtin_registry_json(), "builtin");
  return reg;
}

// ---------------------------------------------------------------------------
// Bundled-registry fidelity check. The expected rows here are an independent
// restatement of the benchmark grid; `registry validate` compares the loaded
// registry against it.

struct RegistryCheck {
  bool ok = true;
  std::vector<std::string> problems;
  std::size_t rows = 0;
  std::size_t distinct_datasets = 0;
  std::size_t task_families = 0;

  void fail(std::string msg) {
    ok = false;
    problems.push_back(std::move(msg));
  }
};

struct ExpectedRegistryRow {
  const char* id;
  TaskFamily family;
  Platform platform;
  std::size_t samples;
  int classes;
  SplitStrategy strategy;
};

inline const std::vector<ExpectedRegistryRow>& expected_registry_rows() {
  using TF = TaskFamily;
  using PL = Platform;
  static const std::vector<ExpectedRegistryRow> rows = {
      {"R-SSD", TF::suicide, PL::reddit, 500, 5, SplitStrategy::stratified_5fold},
      {"Dreaddit", TF::stress, PL::reddit, 3553, 2, SplitStrategy::official},
      {"SAD", TF::stress, PL::sms, 6850, 2, SplitStrategy::official},
      {"PHM (Multi-class)", TF::health_mention, PL::twitter, 4635, 4,
       SplitStrategy::stratified_5fold},
      {"PHM (Binary)", TF::health_mention, PL::twitter, 4635, 2,
       SplitStrategy::stratified_5fold},
      {"HMC2019", TF::health_mention, PL::twitter, 15393, 3,
       SplitStrategy::stratified_5fold},
      {"RHMD", TF::health_mention, PL::reddit, 3553, 4,
       SplitStrategy::stratified_5fold},
      {"VS1", TF::vaccine_sentiment, PL::twitter, 9261, 3,
       SplitStrategy::stratified_5fold},
      {"VS2", TF::vaccine_sentiment, PL::twitter, 18522, 3,
       SplitStrategy::stratified_5fold},
      {"Covid Lies", TF::covid, PL::twitter, 3204, 3,
       SplitStrategy::stratified_5fold},
      {"Covid Category", TF::covid, PL::twitter, 4328, 2,
       SplitStrategy::stratified_5fold},
      {"COVIDSentiA", TF::covid, PL::twitter, 30000, 3,
       SplitStrategy::stratified_5fold},
      {"COVIDSentiB", TF::covid, PL::twitter, 30000, 3,
       SplitStrategy::stratified_5fold},
      {"COVIDSentiC", TF::covid, PL::twitter, 30000, 3,
       SplitStrategy::stratified_5fold},
      {"eRisk T3", TF::depression, PL::reddit, 190, 4,
       SplitStrategy::stratified_5fold},
      {"Depression_Reddit_1", TF::depression, PL::reddit, 3553, 4,
       SplitStrategy::stratified_5fold},
      {"eRisk T1", TF::depression, PL::reddit, 2810, 2, SplitStrategy::official},
      {"Depression_Reddit_2", TF::depression, PL::reddit, 1841, 2,
       SplitStrategy::stratified_5fold},
      {"Depression_Twitter_1", TF::depression, PL::twitter, 1793, 3,
       SplitStrategy::stratified_5fold},
      {"Depression_Twitter_2", TF::depression, PL::twitter, 10314, 2,
       SplitStrategy::stratified_5fold},
      {"PubHealth", TF::other_health, PL::news, 12251, 4, SplitStrategy::official},
      {"Abortion", TF::other_health, PL::twitter, 933, 3, SplitStrategy::official},
      {"Amazon Health", TF::other_health, PL::amazon, 2003, 4,
       SplitStrategy::official},
      {"SMM4H T1", TF::other_health, PL::twitter, 14954, 2,
       SplitStrategy::official},
      {"SMM4H T2", TF::other_health, PL::twitter, 13498, 3,
       SplitStrategy::official},
      {"HRT", TF::other_health, PL::twitter, 2754, 4,
       SplitStrategy::stratified_5fold},
  };
  return rows;
}

inline RegistryCheck check_registry_fidelity(const Registry& reg) {
  RegistryCheck out;
  const auto& expected = expected_registry_rows();
  out.rows = reg.size();
  out.distinct_datasets = reg.distinct_sources();
  out.task_families = reg.family_counts().size();

  if (reg.size() != expected.size()) {
    out.fail(strcat_msg("expected ", expected.size(), " rows, found ", reg.size()));
  }
  const auto& rows = reg.datasets();
  for (std::size_t i = 0; i < expected.size() && i < rows.size(); ++i) {
    const auto& e = expected[i];
    const auto& d = rows[i];
    if (d.id != e.id) {
      out.fail(strcat_msg("row ", i + 1, ": expected id \"", e.id, "\", found \"",
                          d.id, "\""));
      continue;
    }
    if (d.task_family != e.family)
      out.fail(strcat_msg(d.id, ": task_family mismatch"));
    if (d.platform != e.platform) out.fail(strcat_msg(d.id, ": platform mismatch"));
    if (d.num_samples != e.samples) {
      out.fail(strcat_msg(d.id, ": expected ", e.samples, " samples, found ",
                          d.num_samples));
    }
    if (d.num_classes != e.classes) {
      out.fail(strcat_msg(d.id, ": expected ", e.classes, " classes, found ",
                          d.num_classes));
    }
    if (d.split_strategy != e.strategy) {
      out.fail(strcat_msg(d.id, ": split strategy mismatch"));
    }
  }

  if (out.distinct_datasets != 25) {
    out.fail(strcat_msg("expected 25 distinct datasets, found ",
                        out.distinct_datasets));
  }
  const std::map<TaskFamily, std::size_t> want_family_counts = {
      {TaskFamily::suicide, 1},          {TaskFamily::stress, 2},
      {TaskFamily::health_mention, 4},   {TaskFamily::vaccine_sentiment, 2},
      {TaskFamily::covid, 5},            {TaskFamily::depression, 6},
      {TaskFamily::other_health, 6},
  };
  auto counts = reg.family_counts();
  for (const auto& [family, want] : want_family_counts) {
    auto it = counts.find(family);
    std::size_t got = it == counts.end() ? 0 : it->second;
    if (got != want) {
      out.fail(strcat_msg("family ", to_string(family), ": expected ", want,
                          " datasets, found ", got));
    }
  }
  return out;
}

}  // namespace phs
