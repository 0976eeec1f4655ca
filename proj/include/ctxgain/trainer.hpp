#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctxgain/corpus.hpp"
#include "ctxgain/errors.hpp"
#include "ctxgain/grounding.hpp"
#include "ctxgain/policysim.hpp"
#include "ctxgain/reward.hpp"
#include "ctxgain/rng.hpp"
#include "ctxgain/verifier.hpp"

namespace ctxgain {

struct TrainConfig {
  int group_size = 16;
  double learning_rate = 0.05;
  double beta = 0.01;  // KL penalty toward the reference policy
  int steps_per_stage = 100;
  RewardMode mode;
  RewardWeights weights;
  bool normalize_std = false;
  uint64_t seed = 42;
};

struct StepRecord {
  uint32_t stage = 0;
  int step = 0;  // global across stages
  std::array<double, kNumArchetypes> arm_probs{};
  double mean_reward = 0.0;
  double kl = 0.0;
  std::array<uint32_t, kNumArchetypes> arm_counts{};
  std::array<double, kNumArchetypes> arm_mean_reward{};
};

struct TrainLog {
  std::vector<StepRecord> steps;
};

// D_KL(softmax(logits) || softmax(ref_logits)) in nats.
inline double kl_divergence(const MixturePolicy& policy) {
  auto p = policy.probs();
  auto q = policy.ref_probs();
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return kl;
}

// Score-function update with a KL pull toward the reference:
//   dtheta_j = lr * [ sum_i a_i * (1{arm_i=j} - p_j) - beta * dKL/dtheta_j ]
// where dKL/dtheta_j = p_j * (log(p_j/q_j) - KL).
inline void apply_policy_gradient(MixturePolicy& policy,
                                  const std::vector<ArchetypeKind>& arms,
                                  const std::vector<double>& advantages,
                                  double learning_rate, double beta) {
  auto p = policy.probs();
  auto q = policy.ref_probs();
  double kl = 0.0;
  for (size_t j = 0; j < p.size(); ++j) kl += p[j] * std::log(p[j] / q[j]);

  std::array<double, kNumArchetypes> grad{};
  for (size_t i = 0; i < arms.size(); ++i) {
    size_t arm = size_t(arms[i]);
    for (size_t j = 0; j < grad.size(); ++j)
      grad[j] += advantages[i] * ((arm == j ? 1.0 : 0.0) - p[j]);
  }
  for (size_t j = 0; j < grad.size(); ++j) {
    double kl_grad = p[j] * (std::log(p[j] / q[j]) - kl);
    policy.logits[j] += learning_rate * (grad[j] - beta * kl_grad);
  }
}

// A stage's documents with their prebuilt grounding indexes.
struct StageDocs {
  std::vector<const Document*> docs;
  std::vector<const DocumentIndex*> indexes;
};

// One rollout group: sample G trajectories from documents of the current
// stage, score them, convert rewards to group advantages, update logits.
inline StepRecord train_step(MixturePolicy& policy, const StageDocs& stage,
                             const VerifierBackend& backend,
                             const TrainConfig& cfg, Rng& rng,
                             uint32_t stage_m = 0, int global_step = 0) {
  if (stage.docs.empty()) throw EmptyStage("stage has no documents");

  std::vector<ArchetypeKind> arms;
  std::vector<double> rewards;
  arms.reserve(cfg.group_size);
  rewards.reserve(cfg.group_size);
  for (int i = 0; i < cfg.group_size; ++i) {
    size_t pick = rng.below(stage.docs.size());
    auto sampled = sample_and_generate(policy, *stage.docs[pick], rng);
    RewardBreakdown b =
        total_reward(*stage.docs[pick], *stage.indexes[pick], sampled.traj,
                     backend, cfg.mode, cfg.weights);
    arms.push_back(sampled.arm);
    rewards.push_back(b.total);
  }

  std::vector<double> adv = group_advantage(rewards, cfg.normalize_std);
  apply_policy_gradient(policy, arms, adv, cfg.learning_rate, cfg.beta);

  StepRecord rec;
  rec.stage = stage_m;
  rec.step = global_step;
  rec.arm_probs = policy.probs();
  rec.kl = kl_divergence(policy);
  double sum = 0.0;
  for (size_t i = 0; i < rewards.size(); ++i) {
    sum += rewards[i];
    size_t a = size_t(arms[i]);
    rec.arm_counts[a] += 1;
    rec.arm_mean_reward[a] += rewards[i];
  }
  rec.mean_reward = sum / double(rewards.size());
  for (size_t a = 0; a < kNumArchetypes; ++a)
    if (rec.arm_counts[a] > 0) rec.arm_mean_reward[a] /= rec.arm_counts[a];
  return rec;
}

// Runs steps_per_stage groups per stage, in stage order, sampling only
// from the stage's own documents.
inline TrainLog run_curriculum(const std::vector<CurriculumStage>& stages,
                               const std::vector<Document>& corpus,
                               MixturePolicy& policy,
                               const VerifierBackend& backend,
                               const TrainConfig& cfg) {
  if (stages.empty()) throw EmptyStage("no curriculum stages");

  std::map<std::string, const Document*> by_id;
  for (const auto& d : corpus) by_id[d.id] = &d;
  std::map<const Document*, std::unique_ptr<DocumentIndex>> indexes;

  TrainLog log;
  Rng rng(cfg.seed);
  int global_step = 0;
  for (const auto& st : stages) {
    StageDocs sd;
    for (const auto& id : st.doc_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw ConfigError("stage references unknown document: " + id);
      auto& idx = indexes[it->second];
      if (!idx) idx = std::make_unique<DocumentIndex>(it->second->text);
      sd.docs.push_back(it->second);
      sd.indexes.push_back(idx.get());
    }
    if (sd.docs.empty())
      throw EmptyStage("stage " + std::to_string(st.m) + " has no documents");
    for (int s = 0; s < cfg.steps_per_stage; ++s)
      log.steps.push_back(
          train_step(policy, sd, backend, cfg, rng, st.m, global_step++));
  }
  return log;
}

}  // namespace ctxgain
