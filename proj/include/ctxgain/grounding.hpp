#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxgain/corpus.hpp"
#include "ctxgain/errors.hpp"
#include "ctxgain/text.hpp"
#include "ctxgain/trajectory.hpp"

namespace ctxgain {

// Character span [start, end) into the source document's text.
struct DocSpan {
  size_t start = 0;
  size_t end = 0;

  bool overlaps(const EvidenceSpan& s) const {
    return start < s.end && s.start < end;
  }
};

enum class QuoteClass { Evidence, Distractor };

struct GroundingResult {
  size_t quote_index = 0;
  std::optional<DocSpan> located;
  bool is_evidence = false;  // meaningful only when located and gold exists
};

// Whitespace-normalized view of a document plus the map from normalized
// positions back to original character offsets. Built once per document;
// immutable afterwards, so concurrent lookups are safe.
class DocumentIndex {
 public:
  // `text` must outlive the index.
  explicit DocumentIndex(std::string_view text) : original_(text) {
    normalized_.reserve(text.size());
    to_original_.reserve(text.size());
    bool pending_space = false;
    size_t run_start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (is_space(c)) {
        if (!pending_space) run_start = i;
        pending_space = true;
      } else {
        if (pending_space && !normalized_.empty()) {
          normalized_.push_back(' ');
          to_original_.push_back(run_start);
        }
        pending_space = false;
        normalized_.push_back(c);
        to_original_.push_back(i);
      }
    }
  }

  const std::string& normalized() const { return normalized_; }

  // Leftmost occurrence of the normalized needle, mapped back to original
  // offsets. Empty needles never locate.
  std::optional<DocSpan> locate(std::string_view quote_text) const {
    std::string needle = normalize_text(quote_text);
    if (needle.empty()) return std::nullopt;
    size_t pos = normalized_.find(needle);
    if (pos == std::string::npos) return std::nullopt;
    DocSpan span{to_original_[pos],
                 to_original_[pos + needle.size() - 1] + 1};
    // The mapped-back substring must normalize to the needle itself.
    assert(normalize_text(original_.substr(span.start, span.end - span.start)) ==
           needle);
    return span;
  }

 private:
  std::string_view original_;
  std::string normalized_;
  std::vector<size_t> to_original_;
};

inline std::optional<DocSpan> locate_quote(const DocumentIndex& index,
                                           const QuoteSpan& q) {
  return index.locate(q.text);
}

inline std::optional<DocSpan> locate_quote(const Document& doc,
                                           const QuoteSpan& q) {
  return DocumentIndex(doc.text).locate(q.text);
}

// Any character of overlap with a gold span counts as evidence.
inline QuoteClass classify_quote(const Document& doc, const DocSpan& located) {
  if (doc.gold_spans.empty())
    throw UndefinedGold("document '" + doc.id + "' has no gold spans");
  for (const auto& g : doc.gold_spans)
    if (located.overlaps(g)) return QuoteClass::Evidence;
  return QuoteClass::Distractor;
}

struct GroundingSummary {
  size_t evidence = 0;
  size_t distractors = 0;
  size_t hallucinations = 0;  // quotes that never locate
};

inline GroundingSummary grounding_summary(const Document& doc,
                                          const DocumentIndex& index,
                                          const Trajectory& traj) {
  GroundingSummary s;
  for (const auto& q : traj.quotes) {
    auto span = index.locate(q.text);
    if (!span) {
      ++s.hallucinations;
    } else if (classify_quote(doc, *span) == QuoteClass::Evidence) {
      ++s.evidence;
    } else {
      ++s.distractors;
    }
  }
  return s;
}

// Located quotes that overlap no gold span. Ungrounded quotes are
// hallucinations, not distractors.
inline size_t distractor_count(const Document& doc, const DocumentIndex& index,
                               const Trajectory& traj) {
  return grounding_summary(doc, index, traj).distractors;
}

inline size_t distractor_count(const Document& doc, const Trajectory& traj) {
  DocumentIndex index(doc.text);
  return distractor_count(doc, index, traj);
}

}  // namespace ctxgain
