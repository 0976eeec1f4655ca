#include <catch2/catch.hpp>

#include <cmath>

#include "ctxgain/corpus.hpp"
#include "ctxgain/reward.hpp"
#include "ctxgain/rng.hpp"
#include "util.hpp"

using namespace ctxgain;

TEST_CASE("accuracy_reward normalizes before comparing") {
  CHECK(accuracy_reward(std::string("B"), "B") == 2.0);
  CHECK(accuracy_reward(std::string("b "), "B") == 2.0);
  CHECK(accuracy_reward(std::string("C"), "B") == 0.0);
  CHECK(accuracy_reward(std::nullopt, "B") == 0.0);
  RewardWeights w;
  w.acc = 5.0;
  CHECK(accuracy_reward(std::string(" answer "), "ANSWER", w) == 5.0);
}

TEST_CASE("base_reward adds format and accuracy") {
  auto good = parse_trajectory("<think>t</think><answer>B</answer>");
  CHECK(base_reward(good, "B") == 3.0);
  CHECK(base_reward(good, "C") == 1.0);
  // Malformed: the answer text is never parsed out.
  auto bad = parse_trajectory("<think>t</think>B");
  CHECK(base_reward(bad, "B") == 0.0);
}

TEST_CASE("gain functions on the pinned examples") {
  CHECK(gain_absolute(5.0, 0.5) == 4.5);
  CHECK(gain_absolute(2.0, 2.0) == 0.0);
  CHECK(gain_absolute(1.0, 1.5) == -0.5);

  CHECK(gain_relative(5.0, 0.5) == Approx(0.9).epsilon(1e-12));
  CHECK(gain_relative(3.25, 3.25) == 0.0);
  CHECK(gain_relative(1.0, 1.5) == Approx(-0.5).epsilon(1e-12));
  CHECK(gain_relative(1.0, 1.5, true) == 0.0);  // optional floor
  CHECK(gain_relative(0.0, 1.0) == 0.0);        // degenerate zero prior

  CHECK(gain_threshold(1.0, 0.4, 0.5) == 1.0);  // relative gain 0.6
  CHECK(gain_threshold(1.0, 0.6, 0.5) == 0.0);  // relative gain 0.4
  CHECK(gain_threshold(1.0, 0.5, 0.5) == 0.0);  // exactly tau: strict
}

TEST_CASE("relative gain is bounded by one, attained only at zero posterior") {
  CHECK(gain_relative(3.0, 0.0) == 1.0);
  Rng rng(5150);
  for (int i = 0; i < 20000; ++i) {
    double prior = rng.uniform(1e-2, 30.0);
    double post = rng.uniform(0.0, 30.0);
    double g = gain_relative(prior, post);
    CHECK(g <= 1.0);
    if (post > 0.0) CHECK(g < 1.0);
    // Identity with the absolute form.
    CHECK(std::abs(g - gain_absolute(prior, post) / prior) <= 1e-12);
  }
}

static Document tiny_doc() {
  Document doc;
  doc.text = "alpha beta gamma. delta epsilon zeta. eta theta iota.";
  doc.question = "q?";
  doc.gold_answer = "B";
  doc.gold_spans.push_back({0, 17, "g"});
  doc.length_units = length_units(doc.text);
  return doc;
}

TEST_CASE("ctx_reward averages unique grounded quotes") {
  Document doc = tiny_doc();
  testutil::FakeBackend fake;
  fake.set("alpha beta gamma.", 1.0, 0.1);    // gain 0.9
  fake.set("delta epsilon zeta.", 1.0, 0.7);  // gain 0.3

  SECTION("mean of two gains") {
    auto t = parse_trajectory(render_trajectory(
        "r", {"alpha beta gamma.", "delta epsilon zeta."}, "B"));
    auto res = ctx_reward(doc, t, fake, RewardMode{});
    CHECK(res.ctx == Approx(0.6).epsilon(1e-12));
    REQUIRE(res.per_quote.size() == 2);
    CHECK(res.per_quote[0].grounded);
    CHECK(*res.per_quote[0].prior == 1.0);
    CHECK(*res.per_quote[0].posterior == 0.1);
  }
  SECTION("no quotes means exactly zero") {
    auto t = parse_trajectory(render_trajectory("reasoning only", "B"));
    CHECK(ctx_reward(doc, t, fake, RewardMode{}).ctx == 0.0);
  }
  SECTION("ungrounded quote dilutes") {
    fake.set("alpha beta gamma.", 1.0, 0.2);  // gain 0.8
    auto t = parse_trajectory(render_trajectory(
        "r", {"alpha beta gamma.", "missing entirely"}, "B"));
    auto res = ctx_reward(doc, t, fake, RewardMode{});
    CHECK(res.ctx == Approx(0.4).epsilon(1e-12));
    REQUIRE(res.per_quote.size() == 2);
    CHECK_FALSE(res.per_quote[1].grounded);
    CHECK_FALSE(res.per_quote[1].prior.has_value());
    CHECK(res.per_quote[1].gain == 0.0);
  }
  SECTION("duplicate quotes collapse into one") {
    auto t = parse_trajectory(render_trajectory(
        "r", {"alpha beta gamma.", "alpha  beta gamma."}, "B"));
    auto res = ctx_reward(doc, t, fake, RewardMode{});
    CHECK(res.per_quote.size() == 1);
    CHECK(res.ctx == Approx(0.9).epsilon(1e-12));
  }
  SECTION("adding a zero-gain quote strictly lowers a positive mean") {
    auto two = parse_trajectory(render_trajectory(
        "r", {"alpha beta gamma.", "delta epsilon zeta."}, "B"));
    auto three = parse_trajectory(render_trajectory(
        "r", {"alpha beta gamma.", "delta epsilon zeta.", "not present"},
        "B"));
    double c2 = ctx_reward(doc, two, fake, RewardMode{}).ctx;
    double c3 = ctx_reward(doc, three, fake, RewardMode{}).ctx;
    CHECK(c2 > 0.0);
    CHECK(c3 < c2);
  }
  SECTION("outcome-only mode makes zero verifier calls") {
    fake.reset_calls();
    auto t = parse_trajectory(render_trajectory(
        "r", {"alpha beta gamma.", "delta epsilon zeta."}, "B"));
    auto res =
        ctx_reward(doc, t, fake, RewardMode{RewardModeKind::OutcomeOnly});
    CHECK(res.ctx == 0.0);
    CHECK(res.per_quote.empty());
    CHECK(fake.calls() == 0);
  }
  SECTION("mode weight scales the mean") {
    RewardWeights w;
    w.ctx = 2.0;
    auto t = parse_trajectory(render_trajectory("r", {"alpha beta gamma."}, "B"));
    CHECK(ctx_reward(doc, t, fake, RewardMode{}, w).ctx ==
          Approx(1.8).epsilon(1e-12));
  }
}

TEST_CASE("ctx_reward mode variants") {
  Document doc = tiny_doc();
  testutil::FakeBackend fake;
  fake.set("alpha beta gamma.", 4.0, 1.0);

  auto t = parse_trajectory(render_trajectory("r", {"alpha beta gamma."}, "B"));
  CHECK(ctx_reward(doc, t, fake, reward_mode_from("absolute")).ctx == 3.0);
  CHECK(ctx_reward(doc, t, fake, reward_mode_from("relative")).ctx ==
        Approx(0.75).epsilon(1e-12));
  CHECK(ctx_reward(doc, t, fake, reward_mode_from("threshold", 0.5)).ctx == 1.0);
  CHECK(ctx_reward(doc, t, fake, reward_mode_from("threshold", 0.8)).ctx == 0.0);
}

TEST_CASE("total_reward is purely additive") {
  Document doc = tiny_doc();
  testutil::FakeBackend fake;
  fake.set("alpha beta gamma.", 1.0, 0.5);

  SECTION("well-formed, correct, no quotes") {
    auto t = parse_trajectory(render_trajectory("reasoning", "B"));
    auto b = total_reward(doc, t, fake, RewardMode{});
    CHECK(b.total == 3.0);
    CHECK(b.fmt == 1.0);
    CHECK(b.acc == 2.0);
    CHECK(b.ctx == 0.0);
  }
  SECTION("well-formed, correct, ctx half") {
    auto t =
        parse_trajectory(render_trajectory("r", {"alpha beta gamma."}, "B"));
    auto b = total_reward(doc, t, fake, RewardMode{});
    CHECK(b.total == Approx(3.5).epsilon(1e-12));
  }
  SECTION("malformed with quotes still earns ctx") {
    auto t = parse_trajectory("<think>r [alpha beta gamma.]</think>");
    REQUIRE_FALSE(t.well_formed);
    auto b = total_reward(doc, t, fake, RewardMode{});
    CHECK(b.fmt == 0.0);
    CHECK(b.acc == 0.0);
    CHECK(b.ctx == Approx(0.5).epsilon(1e-12));
    CHECK(b.total == b.ctx);
  }
  SECTION("optional gate forfeits ctx on bad format") {
    RewardWeights w;
    w.gate_ctx_on_format = true;
    auto t = parse_trajectory("<think>r [alpha beta gamma.]</think>");
    auto b = total_reward(doc, t, fake, RewardMode{}, w);
    CHECK(b.ctx == 0.0);
    CHECK(b.total == 0.0);
  }
}

TEST_CASE("group_advantage") {
  CHECK(group_advantage({1, 2, 3}) == std::vector<double>{-1, 0, 1});
  CHECK(group_advantage({5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(group_advantage({0, 2}, true) == std::vector<double>{-1, 1});
  CHECK_THROWS_AS(group_advantage({1.0}), GroupTooSmall);
  CHECK_THROWS_AS(group_advantage({}), GroupTooSmall);

  SECTION("sums to zero under fuzzing") {
    Rng rng(777);
    for (int i = 0; i < 500; ++i) {
      std::vector<double> r;
      size_t n = 2 + rng.below(30);
      for (size_t k = 0; k < n; ++k) r.push_back(rng.uniform(-5.0, 5.0));
      for (bool norm : {false, true}) {
        auto adv = group_advantage(r, norm);
        double sum = 0.0;
        for (double a : adv) sum += a;
        CHECK(std::abs(sum) <= 1e-12);
      }
    }
  }
  SECTION("near-equal group is not blown up by std normalization") {
    std::vector<double> r(4, 1.0);
    r[0] = 1.0 + 1e-12;
    auto adv = group_advantage(r, true);
    for (double a : adv) CHECK(std::abs(a) < 1e-9);
  }
}
