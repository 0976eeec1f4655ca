#include <catch2/catch.hpp>

#include <cmath>

#include "ctxgain/corpus.hpp"
#include "ctxgain/grounding.hpp"
#include "ctxgain/policysim.hpp"
#include "ctxgain/reward.hpp"
#include "ctxgain/verifier.hpp"

using namespace ctxgain;

static Document niah_doc(uint64_t seed, uint32_t distractors = 2) {
  NiahConfig cfg;
  cfg.haystack_units = 900;
  cfg.num_distractors = distractors;
  cfg.seed = seed;
  return generate_niah(cfg);
}

TEST_CASE("surgical quotes exactly the gold evidence") {
  Document doc = niah_doc(1);
  Rng rng(10);
  Trajectory t = generate(ArchetypeKind::Surgical, doc, rng);
  REQUIRE(t.well_formed);
  REQUIRE(t.quotes.size() == 1);
  CHECK(t.quotes[0].text == std::string(doc.span_text(doc.gold_spans[0])));

  DocumentIndex index(doc.text);
  auto span = locate_quote(index, t.quotes[0]);
  REQUIRE(span);
  CHECK(classify_quote(doc, *span) == QuoteClass::Evidence);
}

TEST_CASE("spray adds the configured number of grounded fillers") {
  Document doc = niah_doc(2);
  Rng rng(11);
  Trajectory t = generate(ArchetypeKind::Spray, doc, rng);
  REQUIRE(t.quotes.size() == 10);  // gold + 9 default fillers
  DocumentIndex index(doc.text);
  CHECK(distractor_count(doc, index, t) == 9);
  auto gs = grounding_summary(doc, index, t);
  CHECK(gs.evidence == 1);
  CHECK(gs.hallucinations == 0);
}

TEST_CASE("noquote yields zero context reward") {
  Document doc = niah_doc(3);
  Rng rng(12);
  Trajectory t = generate(ArchetypeKind::NoQuote, doc, rng);
  REQUIRE(t.well_formed);
  CHECK(t.quotes.empty());
  auto v = default_verifier();
  CHECK(ctx_reward(doc, t, v, RewardMode{}).ctx == 0.0);
}

TEST_CASE("hallucinated quotes never locate") {
  Document doc = niah_doc(4);
  Rng rng(13);
  Trajectory t = generate(ArchetypeKind::Hallucinate, doc, rng);
  REQUIRE_FALSE(t.quotes.empty());
  DocumentIndex index(doc.text);
  for (const auto& q : t.quotes) CHECK_FALSE(locate_quote(index, q));
}

TEST_CASE("parrot quotes are grounded but not evidence") {
  Document doc = niah_doc(5);
  Rng rng(14);
  Trajectory t = generate(ArchetypeKind::Parrot, doc, rng);
  REQUIRE(t.quotes.size() == 1);
  DocumentIndex index(doc.text);
  auto span = locate_quote(index, t.quotes[0]);
  REQUIRE(span);
  CHECK(classify_quote(doc, *span) == QuoteClass::Distractor);
}

TEST_CASE("gold-needing archetypes reject bare documents") {
  Document bare;
  bare.id = "bare";
  bare.text = "just some text. with sentences in it.";
  bare.question = "q?";
  bare.gold_answer = "a";
  Rng rng(15);
  CHECK_THROWS_AS(generate(ArchetypeKind::Surgical, bare, rng), MissingGold);
  CHECK_THROWS_AS(generate(ArchetypeKind::Spray, bare, rng), MissingGold);
  CHECK_THROWS_AS(generate(ArchetypeKind::Parrot, bare, rng), MissingGold);
  CHECK_NOTHROW(generate(ArchetypeKind::NoQuote, bare, rng));
}

TEST_CASE("answer accuracy knobs drive correctness rates") {
  Document doc = niah_doc(6);
  SimKnobs knobs;
  knobs.answer_accuracy = {1.0, 1.0, 1.0, 0.0, 1.0};
  Rng rng(16);
  CHECK(*generate(ArchetypeKind::Surgical, doc, rng, knobs).answer ==
        doc.gold_answer);
  CHECK(*generate(ArchetypeKind::Hallucinate, doc, rng, knobs).answer !=
        doc.gold_answer);
}

TEST_CASE("one-hot logits always pick that arm") {
  Document doc = niah_doc(7);
  MixturePolicy policy;
  policy.logits = {50.0, 0.0, 0.0, 0.0, 0.0};
  Rng rng(17);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_and_generate(policy, doc, rng).arm ==
          ArchetypeKind::Surgical);
}

TEST_CASE("uniform logits sample uniformly within 3 sigma") {
  Document doc = niah_doc(8);
  MixturePolicy policy;  // zero logits: uniform
  Rng rng(18);
  std::array<int, kNumArchetypes> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    counts[size_t(sample_and_generate(policy, doc, rng).arm)] += 1;
  const double expect = n / double(kNumArchetypes);
  const double sigma = std::sqrt(n * 0.2 * 0.8);
  for (int c : counts) CHECK(std::abs(c - expect) <= 3.0 * sigma);
}

TEST_CASE("identical seeds reproduce the sampled trajectory") {
  Document doc = niah_doc(9);
  MixturePolicy policy;
  Rng r1(21), r2(21);
  auto a = sample_and_generate(policy, doc, r1);
  auto b = sample_and_generate(policy, doc, r2);
  CHECK(a.arm == b.arm);
  CHECK(a.traj.raw == b.traj.raw);
}

TEST_CASE("expected ctx ordering: surgical > parrot > hallucinate = 0") {
  auto v = default_verifier();
  double surgical = 0, parrot = 0, halluc = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    Document doc = niah_doc(1000 + uint64_t(i), 2);
    DocumentIndex index(doc.text);
    Rng rng{uint64_t(i)};
    surgical += ctx_reward(doc, index,
                           generate(ArchetypeKind::Surgical, doc, rng), v,
                           RewardMode{})
                    .ctx;
    parrot += ctx_reward(doc, index, generate(ArchetypeKind::Parrot, doc, rng),
                         v, RewardMode{})
                  .ctx;
    double h = ctx_reward(doc, index,
                          generate(ArchetypeKind::Hallucinate, doc, rng), v,
                          RewardMode{})
                   .ctx;
    CHECK(h == 0.0);  // every quote ungrounded, gains all zero
    halluc += h;
  }
  CHECK(surgical / n > parrot / n);
  CHECK(parrot / n > halluc / n);
}

TEST_CASE("surgical beats spray instance-wise") {
  auto v = default_verifier();
  for (int i = 0; i < 25; ++i) {
    Document doc = niah_doc(2000 + uint64_t(i), 2);
    DocumentIndex index(doc.text);
    Rng rng{uint64_t(i)};
    double s = ctx_reward(doc, index,
                          generate(ArchetypeKind::Surgical, doc, rng), v,
                          RewardMode{})
                   .ctx;
    double sp = ctx_reward(doc, index, generate(ArchetypeKind::Spray, doc, rng),
                           v, RewardMode{})
                    .ctx;
    CHECK(s > sp);
  }
}
