#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctxgain/errors.hpp"
#include "ctxgain/filler_pool.hpp"
#include "ctxgain/rng.hpp"
#include "ctxgain/text.hpp"

namespace ctxgain {

enum class TaskKind { NIAH, VT, External };

inline std::string task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::NIAH: return "NIAH";
    case TaskKind::VT: return "VT";
    case TaskKind::External: return "External";
  }
  return "External";
}

inline TaskKind task_kind_from(std::string_view s) {
  if (s == "NIAH") return TaskKind::NIAH;
  if (s == "VT") return TaskKind::VT;
  if (s == "External") return TaskKind::External;
  throw SchemaError("unknown task kind: " + std::string(s));
}

// Character span [start, end) into Document::text.
struct EvidenceSpan {
  size_t start = 0;
  size_t end = 0;
  std::string label;
};

struct Document {
  std::string id;
  std::string text;
  std::string question;
  std::string gold_answer;
  TaskKind task_kind = TaskKind::External;
  std::vector<EvidenceSpan> gold_spans;
  // Planted non-gold needles / distractor chains, kept for audits.
  std::vector<EvidenceSpan> distractor_spans;
  uint64_t length_units = 0;

  std::string_view span_text(const EvidenceSpan& s) const {
    return std::string_view(text).substr(s.start, s.end - s.start);
  }
};

// ---------------------------------------------------------------------------
// Curriculum stages
// ---------------------------------------------------------------------------

// L_m = min(Lmax, L0 * 2^m), saturating instead of overflowing.
inline uint64_t stage_limit(uint32_t m, uint64_t l0, uint64_t lmax) {
  uint64_t limit = l0;
  for (uint32_t i = 0; i < m; ++i) {
    if (limit >= lmax || limit > std::numeric_limits<uint64_t>::max() / 2)
      return lmax;
    limit *= 2;
  }
  return std::min(limit, lmax);
}

struct CurriculumStage {
  uint32_t m = 0;
  uint64_t limit = 0;
  std::vector<std::string> doc_ids;
};

// Stage m holds the documents with length_units <= L_m. Cumulative by
// default (stage m is a superset of stage m-1); the disjoint variant keeps
// only documents in (L_{m-1}, L_m]. A stage that gains no new documents is
// reported through `warnings`, not an error.
inline std::vector<CurriculumStage> partition_stages(
    const std::vector<Document>& docs, uint64_t l0, uint64_t lmax, uint32_t m_count,
    bool cumulative = true, std::vector<std::string>* warnings = nullptr) {
  if (m_count < 1) throw ConfigError("stage count must be >= 1");
  if (l0 < 1 || lmax < l0) throw ConfigError("need 1 <= L0 <= Lmax");

  std::vector<CurriculumStage> stages;
  uint64_t prev_limit = 0;
  for (uint32_t m = 0; m < m_count; ++m) {
    CurriculumStage st;
    st.m = m;
    st.limit = stage_limit(m, l0, lmax);
    size_t fresh = 0;
    for (const auto& d : docs) {
      if (d.length_units > st.limit) continue;
      if (!cumulative && m > 0 && d.length_units <= prev_limit) continue;
      if (m == 0 || d.length_units > prev_limit) ++fresh;
      st.doc_ids.push_back(d.id);
    }
    if (fresh == 0 && warnings)
      warnings->push_back("stage " + std::to_string(m) +
                          " gains no new documents (limit " +
                          std::to_string(st.limit) + ")");
    prev_limit = st.limit;
    stages.push_back(std::move(st));
  }
  return stages;
}

// ---------------------------------------------------------------------------
// Synthetic task generation
// ---------------------------------------------------------------------------

namespace detail {

// Filler sentences cycled under a seeded shuffle until the unit budget is
// met. Every document gets at least one sentence.
inline std::vector<std::string> draw_fillers(uint64_t haystack_units, Rng& rng,
                                             const std::vector<std::string>* custom_pool) {
  const auto& pool = custom_pool ? *custom_pool : filler_pool();
  if (pool.empty()) throw ConfigError("filler pool is empty");
  std::vector<size_t> order(pool.size());
  std::vector<std::string> out;
  uint64_t units = 0;
  while (units < haystack_units || out.empty()) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (size_t idx : order) {
      out.push_back(pool[idx]);
      units += length_units(pool[idx]);
      if (units >= haystack_units && !out.empty()) return out;
    }
  }
  return out;
}

struct Planted {
  std::string text;
  bool gold = false;
  std::string label;
};

// Joins fillers and planted sentences with single spaces, recording the
// character span of every planted sentence. Plants at boundary b precede
// filler sentence b.
struct Assembled {
  std::string text;
  std::vector<EvidenceSpan> gold_spans;
  std::vector<EvidenceSpan> distractor_spans;
};

inline Assembled assemble(const std::vector<std::string>& fillers,
                          std::vector<std::pair<size_t, Planted>> plants) {
  std::stable_sort(plants.begin(), plants.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Assembled out;
  size_t next_plant = 0;
  auto append = [&out](std::string_view s) {
    if (!out.text.empty()) out.text.push_back(' ');
    out.text.append(s);
  };
  for (size_t b = 0; b <= fillers.size(); ++b) {
    while (next_plant < plants.size() && plants[next_plant].first == b) {
      const Planted& p = plants[next_plant].second;
      if (!out.text.empty()) out.text.push_back(' ');
      EvidenceSpan span{out.text.size(), out.text.size() + p.text.size(),
                        p.label};
      out.text.append(p.text);
      (p.gold ? out.gold_spans : out.distractor_spans).push_back(span);
      ++next_plant;
    }
    if (b < fillers.size()) append(fillers[b]);
  }
  return out;
}

inline std::string random_token(Rng& rng, std::string_view alphabet,
                                size_t len) {
  std::string s;
  s.reserve(len);
  for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
  return s;
}

inline std::string distinct_token(Rng& rng, std::string_view alphabet,
                                  size_t len, std::set<std::string>& used) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::string t = random_token(rng, alphabet, len);
    if (used.insert(t).second) return t;
  }
  throw CapacityError("alphabet too small to draw distinct tokens");
}

// Boundary index whose insertion point lands nearest to the depth target,
// measured in characters of the final text.
inline size_t depth_boundary(const std::string& assembled_text,
                             size_t insert_len, double depth_fraction) {
  const double total =
      static_cast<double>(assembled_text.size() + insert_len + 1);
  const double target = depth_fraction * total;
  size_t best_b = 0;
  double best_err = std::numeric_limits<double>::max();
  size_t b = 0;
  // Boundary positions: start of text, then after each sentence.
  auto consider = [&](size_t pos) {
    double err = std::abs(static_cast<double>(pos) - target);
    if (err < best_err) {
      best_err = err;
      best_b = b;
    }
    ++b;
  };
  consider(0);
  for (size_t i = 0; i + 1 < assembled_text.size(); ++i) {
    if (assembled_text[i] == '.' && assembled_text[i + 1] == ' ') consider(i + 2);
  }
  consider(assembled_text.size());
  return best_b;
}

}  // namespace detail

// One sentence per line; each must end with '.' to keep sentence-boundary
// detection sound.
inline std::vector<std::string> parse_filler_lines(std::istream& is) {
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(is, line)) {
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s.back() != '.')
      throw ConfigError("filler sentence must end with '.': " + s);
    pool.push_back(std::move(s));
  }
  if (pool.empty()) throw ConfigError("filler file has no sentences");
  return pool;
}

inline constexpr std::string_view kHexAlphabet = "0123456789abcdef";

inline std::string needle_sentence(std::string_view key, std::string_view value) {
  std::string s = "The special magic value for ";
  s.append(key).append(" is ").append(value).push_back('.');
  return s;
}

struct NiahConfig {
  uint64_t haystack_units = 4000;
  double depth_fraction = 0.5;
  uint32_t num_distractors = 0;
  std::string key_alphabet = "abcdefghijklmnopqrstuvwxyz";
  uint64_t seed = 0;
  std::string id;  // "niah-<seed>" when empty
  // Non-owning filler override; embedded pool when null. Sentences must
  // end with '.' so boundary detection holds.
  const std::vector<std::string>* filler = nullptr;
};

// One gold key/value needle at the requested depth plus lexically
// confusable distractor needles, all at sentence boundaries. Identical
// config yields a byte-identical document.
inline Document generate_niah(const NiahConfig& cfg) {
  if (cfg.depth_fraction < 0.0 || cfg.depth_fraction > 1.0)
    throw ConfigError("depth_fraction must lie in [0, 1]");
  if (cfg.key_alphabet.empty()) throw ConfigError("key_alphabet is empty");

  Rng rng(cfg.seed);
  auto fillers = detail::draw_fillers(cfg.haystack_units, rng, cfg.filler);

  const size_t needles = 1 + cfg.num_distractors;
  if (fillers.size() + 1 < needles)
    throw CapacityError("haystack too small for " + std::to_string(needles) +
                        " needles");

  std::set<std::string> used_keys, used_values;
  std::string gold_key = detail::distinct_token(rng, cfg.key_alphabet, 8, used_keys);
  std::string gold_value = detail::distinct_token(rng, kHexAlphabet, 32, used_values);

  // Distinct boundaries so no two needles collide.
  std::vector<size_t> boundaries(fillers.size() + 1);
  for (size_t i = 0; i < boundaries.size(); ++i) boundaries[i] = i;
  rng.shuffle(boundaries);

  std::vector<std::pair<size_t, detail::Planted>> plants;
  for (uint32_t d = 0; d < cfg.num_distractors; ++d) {
    std::string key = detail::distinct_token(rng, cfg.key_alphabet, 8, used_keys);
    std::string value = detail::distinct_token(rng, kHexAlphabet, 32, used_values);
    plants.push_back({boundaries[d],
                      {needle_sentence(key, value), false, key}});
  }

  auto partial = detail::assemble(fillers, plants);
  std::string gold = needle_sentence(gold_key, gold_value);

  // Boundary rank r means "before the r-th sentence" of the partially
  // assembled text, counting planted distractors as sentences. Rebuild the
  // flat sentence list with the gold needle at the depth-chosen rank.
  size_t gold_rank =
      detail::depth_boundary(partial.text, gold.size(), cfg.depth_fraction);
  std::vector<detail::Planted> flat;
  flat.reserve(fillers.size() + plants.size());
  {
    std::vector<std::pair<size_t, detail::Planted>> sorted = plants;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t next = 0;
    for (size_t b = 0; b <= fillers.size(); ++b) {
      while (next < sorted.size() && sorted[next].first == b)
        flat.push_back(sorted[next++].second);
      if (b < fillers.size()) flat.push_back({fillers[b], false, ""});
    }
  }
  flat.insert(flat.begin() + std::min(gold_rank, flat.size()),
              {gold, true, gold_key});

  Document doc;
  doc.task_kind = TaskKind::NIAH;
  doc.id = cfg.id.empty() ? "niah-" + std::to_string(cfg.seed) : cfg.id;
  for (const auto& p : flat) {
    if (!doc.text.empty()) doc.text.push_back(' ');
    if (!p.label.empty()) {
      EvidenceSpan span{doc.text.size(), doc.text.size() + p.text.size(),
                        p.label};
      (p.gold ? doc.gold_spans : doc.distractor_spans).push_back(span);
    }
    doc.text.append(p.text);
  }
  doc.question = "What is the special magic value for " + gold_key + "?";
  doc.gold_answer = gold_value;
  doc.length_units = length_units(doc.text);
  return doc;
}

struct VtConfig {
  uint32_t chain_length = 3;
  uint32_t num_chains = 1;
  uint64_t haystack_units = 4000;
  uint64_t seed = 0;
  std::string id;  // "vt-<seed>" when empty
  const std::vector<std::string>* filler = nullptr;
};

inline std::string vt_assignment(std::string_view var, std::string_view value) {
  std::string s = "VAR ";
  s.append(var).append(" = ").append(value).push_back('.');
  return s;
}

// Variable-tracking chains: chain 0 is queried and its assignments are the
// gold spans; the other chains are planted as distractors.
inline Document generate_vt(const VtConfig& cfg) {
  if (cfg.chain_length < 1) throw ConfigError("chain_length must be >= 1");
  if (cfg.num_chains < 1) throw ConfigError("num_chains must be >= 1");

  Rng rng(cfg.seed);
  auto fillers = detail::draw_fillers(cfg.haystack_units, rng, cfg.filler);

  const size_t assignments = size_t(cfg.chain_length) * cfg.num_chains;
  if (fillers.size() + 1 < assignments)
    throw CapacityError("haystack too small for " +
                        std::to_string(assignments) + " assignments");

  std::set<std::string> used_names, used_values;
  std::vector<size_t> boundaries(fillers.size() + 1);
  for (size_t i = 0; i < boundaries.size(); ++i) boundaries[i] = i;
  rng.shuffle(boundaries);

  std::vector<std::pair<size_t, detail::Planted>> plants;
  std::string queried_var, answer;
  size_t next_boundary = 0;
  for (uint32_t c = 0; c < cfg.num_chains; ++c) {
    std::string literal;
    for (int attempt = 0;; ++attempt) {
      literal = detail::random_token(rng, "123456789", 1) +
                detail::random_token(rng, "0123456789", 4);
      if (used_values.insert(literal).second) break;
      if (attempt > 1000)
        throw CapacityError("cannot draw distinct chain values");
    }
    std::string prev;
    for (uint32_t i = 0; i < cfg.chain_length; ++i) {
      std::string var =
          "X" + detail::distinct_token(rng, "ABCDEFGHIJKLMNOPQRSTUVWXYZ", 5,
                                       used_names);
      std::string rhs = (i == 0) ? literal : prev;
      plants.push_back({boundaries[next_boundary++],
                        {vt_assignment(var, rhs), c == 0, var}});
      prev = var;
    }
    if (c == 0) {
      queried_var = prev;
      answer = literal;
    }
  }

  auto assembled = detail::assemble(fillers, std::move(plants));
  Document doc;
  doc.task_kind = TaskKind::VT;
  doc.id = cfg.id.empty() ? "vt-" + std::to_string(cfg.seed) : cfg.id;
  doc.text = std::move(assembled.text);
  doc.gold_spans = std::move(assembled.gold_spans);
  doc.distractor_spans = std::move(assembled.distractor_spans);
  doc.question = "What is the final value of " + queried_var + "?";
  doc.gold_answer = answer;
  doc.length_units = length_units(doc.text);
  return doc;
}

}  // namespace ctxgain
