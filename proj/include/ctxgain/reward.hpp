#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ctxgain/corpus.hpp"
#include "ctxgain/errors.hpp"
#include "ctxgain/grounding.hpp"
#include "ctxgain/text.hpp"
#include "ctxgain/trajectory.hpp"
#include "ctxgain/verifier.hpp"

namespace ctxgain {

enum class RewardModeKind {
  OutcomeOnly,       // r_fmt + r_acc only, no verifier work at all
  AbsoluteDensity,   // per-quote gain = prior - posterior
  ThresholdDensity,  // per-quote gain = 1 if relative gain exceeds tau
  RelativeDensity,   // per-quote gain = 1 - posterior/prior
};

struct RewardMode {
  RewardModeKind kind = RewardModeKind::RelativeDensity;
  double tau = 0.5;  // threshold mode only; must lie in (0, 1)
};

inline std::string reward_mode_name(const RewardMode& m) {
  switch (m.kind) {
    case RewardModeKind::OutcomeOnly: return "outcome";
    case RewardModeKind::AbsoluteDensity: return "absolute";
    case RewardModeKind::ThresholdDensity: return "threshold";
    case RewardModeKind::RelativeDensity: return "relative";
  }
  return "relative";
}

inline RewardMode reward_mode_from(std::string_view name, double tau = 0.5) {
  RewardMode m;
  m.tau = tau;
  if (name == "outcome") m.kind = RewardModeKind::OutcomeOnly;
  else if (name == "absolute") m.kind = RewardModeKind::AbsoluteDensity;
  else if (name == "threshold") m.kind = RewardModeKind::ThresholdDensity;
  else if (name == "relative") m.kind = RewardModeKind::RelativeDensity;
  else throw ConfigError("unknown reward mode: " + std::string(name));
  if (m.kind == RewardModeKind::ThresholdDensity && (tau <= 0.0 || tau >= 1.0))
    throw ConfigError("threshold tau must lie in (0, 1)");
  return m;
}

struct RewardWeights {
  double fmt = 1.0;
  double acc = 2.0;
  double ctx = 1.0;
  bool floor_gain_at_zero = false;
  // Optional gate: forfeit the context reward when the format is invalid.
  // Off by default; the total stays purely additive.
  bool gate_ctx_on_format = false;
};

// -- per-quote scores -------------------------------------------------------

struct QuoteScore {
  size_t quote_index = 0;
  bool grounded = false;
  std::optional<double> prior;
  std::optional<double> posterior;
  double gain = 0.0;
};

struct CtxResult {
  double ctx = 0.0;
  std::vector<QuoteScore> per_quote;
};

struct RewardBreakdown {
  double fmt = 0.0;
  double acc = 0.0;
  double ctx = 0.0;
  double total = 0.0;
  std::vector<QuoteScore> per_quote;
  RewardMode mode;
};

// -- scalar pieces ----------------------------------------------------------

// Normalized exact match: whitespace-trimmed, case-folded.
inline double accuracy_reward(const std::optional<std::string>& answer,
                              std::string_view gold,
                              const RewardWeights& w = {}) {
  if (!answer) return 0.0;
  return to_lower(trim(*answer)) == to_lower(trim(gold)) ? w.acc : 0.0;
}

inline double base_reward(const Trajectory& traj, std::string_view gold,
                          const RewardWeights& w = {}) {
  return format_reward(traj, w.fmt) + accuracy_reward(traj.answer, gold, w);
}

// Raw NLL reduction; unbounded and may be negative.
inline double gain_absolute(double prior, double posterior) {
  return prior - posterior;
}

// Fraction of prior uncertainty explained by the context; at most 1.
// A zero prior is degenerate (the segment was already perfectly
// predicted): the gain is defined as 0.
inline double gain_relative(double prior, double posterior,
                            bool floor_at_zero = false) {
  if (prior <= 0.0) return 0.0;
  double g = 1.0 - posterior / prior;
  return floor_at_zero && g < 0.0 ? 0.0 : g;
}

// Binary scheme: 1 only when the relative gain strictly exceeds tau.
inline double gain_threshold(double prior, double posterior, double tau) {
  return gain_relative(prior, posterior) > tau ? 1.0 : 0.0;
}

namespace detail {
inline double mode_gain(const RewardMode& mode, const RewardWeights& w,
                        double prior, double posterior) {
  switch (mode.kind) {
    case RewardModeKind::AbsoluteDensity:
      return gain_absolute(prior, posterior);
    case RewardModeKind::ThresholdDensity:
      return gain_threshold(prior, posterior, mode.tau);
    case RewardModeKind::RelativeDensity:
      return gain_relative(prior, posterior, w.floor_gain_at_zero);
    case RewardModeKind::OutcomeOnly:
      return 0.0;
  }
  return 0.0;
}
}  // namespace detail

// Mean per-quote gain over the unique quote set. Quotes are deduplicated
// by normalized text; ungrounded quotes contribute gain 0 but still
// enlarge K, so hallucination dilutes the average. No quotes, no reward.
// OutcomeOnly short-circuits before any grounding or verifier work.
inline CtxResult ctx_reward(const Document& doc, const DocumentIndex& index,
                            const Trajectory& traj,
                            const VerifierBackend& backend,
                            const RewardMode& mode,
                            const RewardWeights& w = {}) {
  CtxResult out;
  if (mode.kind == RewardModeKind::OutcomeOnly) return out;
  if (w.gate_ctx_on_format && !traj.well_formed) return out;

  std::unordered_set<std::string> seen;
  double sum = 0.0;
  for (size_t i = 0; i < traj.quotes.size(); ++i) {
    std::string norm = normalize_text(traj.quotes[i].text);
    if (norm.empty() || !seen.insert(norm).second) continue;

    QuoteScore qs;
    qs.quote_index = i;
    auto span = index.locate(norm);
    qs.grounded = span.has_value();
    if (qs.grounded) {
      NllPair pair = nll_pair(backend, norm, doc.text);
      qs.prior = pair.prior.nll;
      qs.posterior = pair.posterior.nll;
      qs.gain = detail::mode_gain(mode, w, pair.prior.nll, pair.posterior.nll);
    }
    sum += qs.gain;
    out.per_quote.push_back(std::move(qs));
  }
  if (!out.per_quote.empty())
    out.ctx = w.ctx * sum / double(out.per_quote.size());
  return out;
}

inline CtxResult ctx_reward(const Document& doc, const Trajectory& traj,
                            const VerifierBackend& backend,
                            const RewardMode& mode,
                            const RewardWeights& w = {}) {
  DocumentIndex index(doc.text);
  return ctx_reward(doc, index, traj, backend, mode, w);
}

// total = fmt + acc + ctx, purely additive.
inline RewardBreakdown total_reward(const Document& doc,
                                    const DocumentIndex& index,
                                    const Trajectory& traj,
                                    const VerifierBackend& backend,
                                    const RewardMode& mode,
                                    const RewardWeights& w = {}) {
  RewardBreakdown b;
  b.mode = mode;
  b.fmt = format_reward(traj, w.fmt);
  b.acc = accuracy_reward(traj.answer, doc.gold_answer, w);
  CtxResult ctx = ctx_reward(doc, index, traj, backend, mode, w);
  b.ctx = ctx.ctx;
  b.per_quote = std::move(ctx.per_quote);
  b.total = b.fmt + b.acc + b.ctx;
  return b;
}

inline RewardBreakdown total_reward(const Document& doc, const Trajectory& traj,
                                    const VerifierBackend& backend,
                                    const RewardMode& mode,
                                    const RewardWeights& w = {}) {
  DocumentIndex index(doc.text);
  return total_reward(doc, index, traj, backend, mode, w);
}

// -- group advantage --------------------------------------------------------

inline constexpr double kStdEpsilon = 1e-8;

// a_i = r_i - mean(r); optionally divided by the population std when it is
// comfortably nonzero. An all-equal group yields all zeros.
inline std::vector<double> group_advantage(const std::vector<double>& rewards,
                                           bool normalize_std = false) {
  if (rewards.size() < 2)
    throw GroupTooSmall("group advantage needs at least 2 rewards, got " +
                        std::to_string(rewards.size()));
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= double(rewards.size());

  std::vector<double> adv(rewards.size());
  double var = 0.0;
  for (size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = rewards[i] - mean;
    var += adv[i] * adv[i];
  }
  if (normalize_std) {
    double sd = std::sqrt(var / double(rewards.size()));
    if (sd > kStdEpsilon)
      for (double& a : adv) a /= sd;
  }
  return adv;
}

}  // namespace ctxgain
