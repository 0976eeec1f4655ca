#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctxgain/corpus.hpp"
#include "ctxgain/errors.hpp"
#include "ctxgain/reward.hpp"
#include "ctxgain/trainer.hpp"

namespace ctxgain {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Document JSONL: one object per line,
//   {"id","task","text","question","answer","gold_spans":[{start,end,label}]}
// Offsets are character offsets into "text" exactly as serialized.
// "distractor_spans" is an optional extra carrying planted non-gold spans.
// ---------------------------------------------------------------------------

inline json span_to_json(const EvidenceSpan& s) {
  return {{"start", s.start}, {"end", s.end}, {"label", s.label}};
}

inline EvidenceSpan span_from_json(const json& j, size_t text_size) {
  if (!j.contains("start") || !j.contains("end"))
    throw SchemaError("span needs start and end");
  EvidenceSpan s;
  s.start = j["start"].get<size_t>();
  s.end = j["end"].get<size_t>();
  s.label = j.value("label", std::string());
  if (s.start >= s.end || s.end > text_size)
    throw SchemaError("span [" + std::to_string(s.start) + ", " +
                      std::to_string(s.end) + ") out of bounds");
  return s;
}

inline json doc_to_json(const Document& d) {
  json spans = json::array();
  for (const auto& s : d.gold_spans) spans.push_back(span_to_json(s));
  json j = {{"id", d.id},          {"task", task_kind_name(d.task_kind)},
            {"text", d.text},      {"question", d.question},
            {"answer", d.gold_answer}, {"gold_spans", spans}};
  if (!d.distractor_spans.empty()) {
    json ds = json::array();
    for (const auto& s : d.distractor_spans) ds.push_back(span_to_json(s));
    j["distractor_spans"] = ds;
  }
  return j;
}

inline Document doc_from_json(const json& j) {
  for (const char* key : {"id", "task", "text", "question", "answer"})
    if (!j.contains(key))
      throw SchemaError(std::string("document lacks required key '") + key +
                        "'");
  Document d;
  d.id = j["id"].get<std::string>();
  d.task_kind = task_kind_from(j["task"].get<std::string>());
  d.text = j["text"].get<std::string>();
  d.question = j["question"].get<std::string>();
  d.gold_answer = j["answer"].get<std::string>();
  if (j.contains("gold_spans"))
    for (const auto& s : j["gold_spans"])
      d.gold_spans.push_back(span_from_json(s, d.text.size()));
  if (j.contains("distractor_spans"))
    for (const auto& s : j["distractor_spans"])
      d.distractor_spans.push_back(span_from_json(s, d.text.size()));
  d.length_units = length_units(d.text);
  return d;
}

inline void write_documents_jsonl(std::ostream& os,
                                  const std::vector<Document>& docs) {
  for (const auto& d : docs) os << doc_to_json(d).dump() << '\n';
}

inline std::vector<json> read_jsonl(std::istream& is, const char* what) {
  std::vector<json> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw SchemaError(std::string(what) + " line " + std::to_string(lineno) +
                        ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Document> read_documents_jsonl(std::istream& is) {
  std::vector<Document> docs;
  for (const auto& j : read_jsonl(is, "documents")) docs.push_back(doc_from_json(j));
  return docs;
}

inline std::vector<Document> read_documents_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open documents file: " + path);
  return read_documents_jsonl(is);
}

// ---------------------------------------------------------------------------
// Trajectory JSONL: {"doc_id","raw"}; scored lines add {"mode","reward"}.
// ---------------------------------------------------------------------------

struct TrajectoryLine {
  std::string doc_id;
  std::string raw;
};

inline std::vector<TrajectoryLine> read_trajectories_jsonl(std::istream& is) {
  std::vector<TrajectoryLine> out;
  for (const auto& j : read_jsonl(is, "trajectories")) {
    if (!j.contains("doc_id") || !j.contains("raw"))
      throw SchemaError("trajectory line needs doc_id and raw");
    out.push_back({j["doc_id"].get<std::string>(), j["raw"].get<std::string>()});
  }
  return out;
}

inline void write_trajectories_jsonl(std::ostream& os,
                                     const std::vector<TrajectoryLine>& lines) {
  for (const auto& t : lines)
    os << json{{"doc_id", t.doc_id}, {"raw", t.raw}}.dump() << '\n';
}

inline json reward_to_json(const RewardBreakdown& b) {
  json per_quote = json::array();
  for (const auto& q : b.per_quote) {
    json e = {{"i", q.quote_index},
              {"grounded", q.grounded},
              {"gain", q.gain}};
    e["prior"] = q.prior ? json(*q.prior) : json(nullptr);
    e["posterior"] = q.posterior ? json(*q.posterior) : json(nullptr);
    per_quote.push_back(std::move(e));
  }
  return {{"fmt", b.fmt},     {"acc", b.acc},          {"ctx", b.ctx},
          {"total", b.total}, {"per_quote", per_quote}};
}

inline json scored_to_json(const std::string& doc_id, const std::string& raw,
                           const RewardBreakdown& b) {
  return {{"doc_id", doc_id},
          {"raw", raw},
          {"mode", reward_mode_name(b.mode)},
          {"reward", reward_to_json(b)}};
}

// ---------------------------------------------------------------------------
// Train log: JSONL (one step per line) plus a CSV summary for plotting.
// ---------------------------------------------------------------------------

inline json step_to_json(const StepRecord& r) {
  json probs, counts, means;
  for (size_t a = 0; a < kNumArchetypes; ++a) {
    std::string name = archetype_name(kAllArchetypes[a]);
    probs[name] = r.arm_probs[a];
    counts[name] = r.arm_counts[a];
    means[name] = r.arm_mean_reward[a];
  }
  return {{"stage", r.stage},
          {"step", r.step},
          {"arm_probs", probs},
          {"mean_reward", r.mean_reward},
          {"kl", r.kl},
          {"arm_counts", counts},
          {"arm_mean_reward", means}};
}

inline void write_trainlog_jsonl(std::ostream& os, const TrainLog& log) {
  for (const auto& r : log.steps) os << step_to_json(r).dump() << '\n';
}

inline void write_trainlog_csv(std::ostream& os, const TrainLog& log) {
  os << "step,stage,mean_reward,kl";
  for (ArchetypeKind k : kAllArchetypes) os << ",p_" << archetype_name(k);
  os << '\n';
  std::ostringstream num;
  num << std::setprecision(17);
  for (const auto& r : log.steps) {
    num.str("");
    num << r.step << ',' << r.stage << ',' << r.mean_reward << ',' << r.kl;
    for (double p : r.arm_probs) num << ',' << p;
    os << num.str() << '\n';
  }
}

}  // namespace ctxgain
