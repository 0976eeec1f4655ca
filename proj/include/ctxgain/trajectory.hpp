#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxgain/errors.hpp"
#include "ctxgain/text.hpp"

namespace ctxgain {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

// One bracketed verbatim quote inside the think block. Offsets index the
// think string and cover exactly the text field (delimiters excluded).
struct QuoteSpan {
  std::string text;
  size_t start = 0;
  size_t end = 0;
};

// Configurable quote delimiters; square brackets by default.
struct QuoteDelims {
  char open = '[';
  char close = ']';
};

// Top-level bracketed spans, in order. Nested brackets belong to the
// enclosing quote's text; an unmatched opener yields no span. Spans whose
// text normalizes to empty are dropped.
inline std::vector<QuoteSpan> extract_quotes(std::string_view think,
                                             QuoteDelims delims = {}) {
  std::vector<QuoteSpan> out;
  int depth = 0;
  size_t open_pos = 0;
  for (size_t i = 0; i < think.size(); ++i) {
    char c = think[i];
    if (c == delims.open) {
      if (depth == 0) open_pos = i + 1;
      ++depth;
    } else if (c == delims.close && depth > 0) {
      --depth;
      if (depth == 0) {
        QuoteSpan q;
        q.text = std::string(think.substr(open_pos, i - open_pos));
        q.start = open_pos;
        q.end = i;
        if (!normalize_text(q.text).empty()) out.push_back(std::move(q));
      }
    }
  }
  return out;
}

struct Trajectory {
  std::string raw;
  std::optional<std::string> think;
  std::optional<std::string> answer;
  std::vector<QuoteSpan> quotes;
  bool well_formed = false;
};

namespace detail {
inline bool ws_only(std::string_view s) {
  for (char c : s)
    if (!is_space(c)) return false;
  return true;
}
}  // namespace detail

// Total parse of a think/answer transcript. Tags are exact literals
// located case-sensitively; structural failures set well_formed=false and
// leave whatever fields could still be recovered.
inline Trajectory parse_trajectory(std::string_view raw,
                                   QuoteDelims delims = {}) {
  Trajectory t;
  t.raw = std::string(raw);

  bool ok = true;
  size_t think_open = raw.find(kThinkOpen);
  if (think_open == std::string_view::npos) return t;
  if (!detail::ws_only(raw.substr(0, think_open))) ok = false;

  size_t think_body = think_open + kThinkOpen.size();
  size_t think_close = raw.find(kThinkClose, think_body);
  if (think_close == std::string_view::npos) return t;
  t.think = std::string(raw.substr(think_body, think_close - think_body));
  t.quotes = extract_quotes(*t.think, delims);

  size_t after_think = think_close + kThinkClose.size();
  size_t answer_open = raw.find(kAnswerOpen, after_think);
  if (answer_open == std::string_view::npos) return t;
  // Only whitespace may sit between the two blocks.
  if (!detail::ws_only(raw.substr(after_think, answer_open - after_think)))
    ok = false;

  size_t answer_body = answer_open + kAnswerOpen.size();
  size_t answer_close = raw.find(kAnswerClose, answer_body);
  if (answer_close == std::string_view::npos) return t;
  t.answer = std::string(raw.substr(answer_body, answer_close - answer_body));

  if (!detail::ws_only(raw.substr(answer_close + kAnswerClose.size())))
    ok = false;

  t.well_formed = ok;
  return t;
}

// w_fmt for a well-formed transcript, 0 otherwise. Quoting is not a
// format requirement.
inline double format_reward(const Trajectory& t, double w_fmt = 1.0) {
  return t.well_formed ? w_fmt : 0.0;
}

namespace detail {
inline void reject_tag_literals(std::string_view s, const char* what) {
  for (std::string_view tag :
       {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
    if (s.find(tag) != std::string_view::npos)
      throw TagCollision(std::string(what) + " contains reserved tag '" +
                         std::string(tag) + "'");
  }
}
}  // namespace detail

// Inverse of parse_trajectory on the sanitized domain: components must not
// contain tag literals.
inline std::string render_trajectory(std::string_view think,
                                     std::string_view answer) {
  detail::reject_tag_literals(think, "think");
  detail::reject_tag_literals(answer, "answer");
  std::string out;
  out.reserve(think.size() + answer.size() + 32);
  out.append(kThinkOpen).append(think).append(kThinkClose);
  out.append(kAnswerOpen).append(answer).append(kAnswerClose);
  return out;
}

// Convenience form: builds the think block from free reasoning plus
// bracketed quotes. Reasoning and quotes must not contain the delimiters
// themselves, or the quote structure would not survive a reparse.
inline std::string render_trajectory(std::string_view reasoning,
                                     const std::vector<std::string>& quotes,
                                     std::string_view answer,
                                     QuoteDelims delims = {}) {
  auto reject_delims = [&](std::string_view s, const char* what) {
    if (s.find(delims.open) != std::string_view::npos ||
        s.find(delims.close) != std::string_view::npos)
      throw TagCollision(std::string(what) + " contains a quote delimiter");
  };
  reject_delims(reasoning, "reasoning");
  std::string think(reasoning);
  for (const auto& q : quotes) {
    reject_delims(q, "quote");
    if (!think.empty()) think.push_back(' ');
    think.push_back(delims.open);
    think.append(q);
    think.push_back(delims.close);
  }
  return render_trajectory(think, answer);
}

}  // namespace ctxgain
