#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ctxgain/corpus.hpp"
#include "ctxgain/errors.hpp"
#include "ctxgain/grounding.hpp"
#include "ctxgain/rng.hpp"
#include "ctxgain/trajectory.hpp"

namespace ctxgain {

// Scripted behavior archetypes, the arms of the toy policy.
enum class ArchetypeKind : uint8_t {
  Surgical = 0,     // quotes exactly the gold evidence
  Spray = 1,        // gold plus a pile of grounded filler quotes
  NoQuote = 2,      // reasons without quoting
  Hallucinate = 3,  // quotes text that is not in the document
  Parrot = 4,       // quotes grounded but predictable filler
};

inline constexpr size_t kNumArchetypes = 5;

inline constexpr std::array<ArchetypeKind, kNumArchetypes> kAllArchetypes = {
    ArchetypeKind::Surgical, ArchetypeKind::Spray, ArchetypeKind::NoQuote,
    ArchetypeKind::Hallucinate, ArchetypeKind::Parrot};

inline std::string archetype_name(ArchetypeKind k) {
  switch (k) {
    case ArchetypeKind::Surgical: return "surgical";
    case ArchetypeKind::Spray: return "spray";
    case ArchetypeKind::NoQuote: return "noquote";
    case ArchetypeKind::Hallucinate: return "hallucinate";
    case ArchetypeKind::Parrot: return "parrot";
  }
  return "?";
}

inline ArchetypeKind archetype_from(std::string_view s) {
  for (ArchetypeKind k : kAllArchetypes)
    if (archetype_name(k) == s) return k;
  throw ConfigError("unknown archetype: " + std::string(s));
}

// Knobs are experiment defaults, chosen so outcome-only reward cannot
// separate Surgical from Spray while a dense reward can.
struct SimKnobs {
  std::array<double, kNumArchetypes> answer_accuracy = {0.95, 0.95, 0.60,
                                                        0.20, 0.60};
  uint32_t spray_filler_quotes = 9;
  uint32_t hallucinate_quotes = 2;
  uint32_t parrot_quotes = 1;
};

// Categorical policy over archetypes with a frozen reference copy.
struct MixturePolicy {
  std::array<double, kNumArchetypes> logits{};
  std::array<double, kNumArchetypes> ref_logits{};
  SimKnobs knobs;

  std::array<double, kNumArchetypes> probs() const { return softmax(logits); }
  std::array<double, kNumArchetypes> ref_probs() const {
    return softmax(ref_logits);
  }

  static std::array<double, kNumArchetypes> softmax(
      const std::array<double, kNumArchetypes>& l) {
    double mx = l[0];
    for (double v : l) mx = std::max(mx, v);
    std::array<double, kNumArchetypes> p{};
    double z = 0.0;
    for (size_t i = 0; i < l.size(); ++i) {
      p[i] = std::exp(l[i] - mx);
      z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
  }
};

namespace detail {

// Sentences of the document that overlap no planted span; the material an
// archetype may quote as filler.
inline std::vector<std::string> filler_sentences(const Document& doc) {
  std::vector<std::string> out;
  auto overlaps_any = [&](size_t s, size_t e) {
    for (const auto& g : doc.gold_spans)
      if (s < g.end && g.start < e) return true;
    for (const auto& d : doc.distractor_spans)
      if (s < d.end && d.start < e) return true;
    return false;
  };
  size_t start = 0;
  const std::string& t = doc.text;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '.') continue;
    if (i + 1 < t.size() && !is_space(t[i + 1])) continue;
    size_t end = i + 1;
    if (!overlaps_any(start, end)) {
      std::string s = trim(std::string_view(t).substr(start, end - start));
      if (!s.empty()) out.push_back(std::move(s));
    }
    start = end;
  }
  return out;
}

inline std::vector<std::string> pick_distinct_fillers(const Document& doc,
                                                      size_t n, Rng& rng) {
  auto pool = filler_sentences(doc);
  std::unordered_set<std::string> seen;
  std::vector<std::string> distinct;
  for (auto& s : pool) {
    std::string norm = normalize_text(s);
    if (!norm.empty() && seen.insert(norm).second)
      distinct.push_back(std::move(s));
  }
  if (distinct.size() < n)
    throw CapacityError("document has only " +
                        std::to_string(distinct.size()) +
                        " distinct filler sentences, need " +
                        std::to_string(n));
  rng.shuffle(distinct);
  distinct.resize(n);
  return distinct;
}

// Anything that cannot normalize-match a gold answer.
inline std::string wrong_answer(Rng& rng) {
  return "unresolved-" + std::to_string(rng.below(100000));
}

}  // namespace detail

// Scripted generation for one archetype. All outputs are well-formed; the
// answer is correct with the archetype's configured probability.
inline Trajectory generate(ArchetypeKind kind, const Document& doc, Rng& rng,
                           const SimKnobs& knobs = {}) {
  const bool needs_gold = kind == ArchetypeKind::Surgical ||
                          kind == ArchetypeKind::Spray ||
                          kind == ArchetypeKind::Parrot;
  if (needs_gold && doc.gold_spans.empty())
    throw MissingGold("archetype " + archetype_name(kind) +
                      " needs gold spans on document '" + doc.id + "'");

  std::vector<std::string> quotes;
  switch (kind) {
    case ArchetypeKind::Surgical:
      for (const auto& g : doc.gold_spans)
        quotes.push_back(std::string(doc.span_text(g)));
      break;
    case ArchetypeKind::Spray: {
      for (const auto& g : doc.gold_spans)
        quotes.push_back(std::string(doc.span_text(g)));
      for (auto& s :
           detail::pick_distinct_fillers(doc, knobs.spray_filler_quotes, rng))
        quotes.push_back(std::move(s));
      break;
    }
    case ArchetypeKind::NoQuote:
      break;
    case ArchetypeKind::Hallucinate: {
      DocumentIndex index(doc.text);
      for (uint32_t i = 0; i < knobs.hallucinate_quotes; ++i) {
        std::string q;
        for (int attempt = 0; attempt < 100; ++attempt) {
          q = "The hidden ledger entry " +
              detail::random_token(rng, kHexAlphabet, 16) +
              " was never written down.";
          if (!index.locate(q)) break;
          q.clear();
        }
        if (q.empty())
          throw CapacityError("could not fabricate an absent quote");
        quotes.push_back(std::move(q));
      }
      break;
    }
    case ArchetypeKind::Parrot:
      for (auto& s :
           detail::pick_distinct_fillers(doc, knobs.parrot_quotes, rng))
        quotes.push_back(std::move(s));
      break;
  }

  const double acc = knobs.answer_accuracy[size_t(kind)];
  std::string answer =
      rng.bernoulli(acc) ? doc.gold_answer : detail::wrong_answer(rng);

  std::string reasoning = "The question is: " + doc.question +
                          " Scanning the document for supporting text.";
  std::string closing = kind == ArchetypeKind::NoQuote
                            ? " Answering from memory of the passage."
                            : " The quoted material settles the answer.";
  std::string raw = render_trajectory(reasoning + closing, quotes, answer);
  return parse_trajectory(raw);
}

struct SampledTrajectory {
  ArchetypeKind arm;
  Trajectory traj;
};

// arm ~ softmax(logits), then scripted generation; deterministic in the
// rng state.
inline SampledTrajectory sample_and_generate(const MixturePolicy& policy,
                                             const Document& doc, Rng& rng) {
  auto p = policy.probs();
  double u = rng.uniform01();
  size_t arm = kNumArchetypes - 1;
  double cum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) {
      arm = i;
      break;
    }
  }
  ArchetypeKind kind = kAllArchetypes[arm];
  return {kind, generate(kind, doc, rng, policy.knobs)};
}

}  // namespace ctxgain
