#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "bioloop/error.hpp"
#include "bioloop/intervention.hpp"
#include "support.hpp"

namespace bioloop {
namespace {

using testing::single_state;
using testing::uniform_state;

std::vector<InterventionDecision> run_engine(const std::vector<StateVector>& states, const SessionConfig& cfg = {}) {
  InterventionEngine engine(cfg);
  std::vector<InterventionDecision> out;
  for (const auto& s : states) {
    if (auto d = engine.step(s).decision) out.push_back(*d);
  }
  return out;
}

// Vectors every `hop` seconds over [0, end); `dim` sits at `score` inside
// [from, to) and at baseline elsewhere.
std::vector<StateVector> excursion(Dimension dim, double from, double to, double score, double conf, double hop,
                                   double end) {
  std::vector<StateVector> out;
  for (int k = 0; k * hop < end; ++k) {
    const double t = k * hop;
    out.push_back(t >= from && t < to ? single_state(t, dim, score, conf) : single_state(t, dim, 0.2, conf));
  }
  return out;
}

TEST(Trigger, SustainedDeviationFiresOnceElapsedReachesPersistence) {
  // Windows every 6 s: 1.6 at t = 0, 6, 12 covers 12 s over three windows.
  const auto states = excursion(Dimension::kCognitiveLoad, 0.0, 12.1, 1.6, 0.7, 6.0, 30.0);
  const auto d = run_engine(states);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].t.seconds, 12.0);
  EXPECT_EQ(d[0].dimension, Dimension::kCognitiveLoad);
}

TEST(Trigger, ShortDeviationNeverFires) {
  EXPECT_TRUE(run_engine(excursion(Dimension::kCognitiveLoad, 0.0, 4.0, 1.6, 0.7, 1.0, 30.0)).empty());
}

TEST(Trigger, LowConfidenceNeverFires) {
  EXPECT_TRUE(run_engine(excursion(Dimension::kCognitiveLoad, 0.0, 60.0, 1.6, 0.5, 1.0, 60.0)).empty());
}

TEST(Trigger, PersistenceBoundaryIsInclusive) {
  // Vectors every 0.01 s. A run spanning [0, 9.99] stays short of 10 s.
  auto make = [](double span) {
    std::vector<StateVector> out;
    for (int k = 0; k <= 2000; ++k) {
      const double t = k / 100.0;
      out.push_back(single_state(t, Dimension::kStress, t <= span + 1e-9 ? 1.8 : 0.0, 0.9));
    }
    return out;
  };
  EXPECT_TRUE(run_engine(make(9.99)).empty());
  const auto d = run_engine(make(10.0));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d[0].t.seconds, 10.0, 1e-9);
}

TEST(Trigger, ConsecutiveWindowRequirement) {
  SessionConfig cfg;
  cfg.persistence_s = 0.0;
  cfg.consecutive_windows = 4;
  const auto d = run_engine(excursion(Dimension::kFatigue, 30.0, 200.0, 2.0, 0.9, 10.0, 200.0), cfg);
  ASSERT_FALSE(d.empty());
  EXPECT_DOUBLE_EQ(d[0].t.seconds, 60.0);
}

TEST(Trigger, ThresholdIsStrict) {
  EXPECT_TRUE(run_engine(excursion(Dimension::kFatigue, 0.0, 100.0, 1.5, 0.9, 10.0, 100.0)).empty());
  EXPECT_TRUE(run_engine(excursion(Dimension::kFatigue, 0.0, 100.0, 1.6, 0.6, 10.0, 100.0)).empty());
}

TEST(Trigger, NonMonotoneTimeIsRejected) {
  TriggerTracker tracker;
  SessionConfig cfg;
  tracker = update(tracker, uniform_state(10.0, 0.0, 1.0), cfg).tracker;
  try {
    update(tracker, uniform_state(5.0, 0.0, 1.0), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotoneTime);
  }
}

TEST(Trigger, UnderChallengeDrivesEngagement) {
  auto s = uniform_state(0.0, 0.0, 1.0);
  s.at(Dimension::kEngagement).signed_score = 2.0;
  s.at(Dimension::kEngagement).score = 2.0;
  EXPECT_DOUBLE_EQ(trigger_input(s, Dimension::kEngagement).score, 0.0) << "load is not below baseline";
  s.at(Dimension::kCognitiveLoad).signed_score = -1.2;
  EXPECT_DOUBLE_EQ(trigger_input(s, Dimension::kEngagement).score, 2.0);
  s.at(Dimension::kEngagement).observed = false;
  EXPECT_DOUBLE_EQ(trigger_input(s, Dimension::kEngagement).score, 0.0);
}

Candidate candidate(Dimension d, double score) { return {d, score, 0.9, to_descriptor(score), 1}; }

TEST(Prioritize, HighestScoreWins) {
  const std::vector<Candidate> c = {candidate(Dimension::kCognitiveLoad, 1.6), candidate(Dimension::kStress, 1.8)};
  EXPECT_EQ(prioritize(c)->dimension, Dimension::kStress);
}

TEST(Prioritize, SingleCandidateIsItself) {
  const std::vector<Candidate> c = {candidate(Dimension::kAttention, 1.7)};
  EXPECT_EQ(prioritize(c)->dimension, Dimension::kAttention);
  EXPECT_FALSE(prioritize({}).has_value());
}

TEST(Prioritize, TiesFollowTheFixedOrder) {
  const std::vector<Candidate> c = {candidate(Dimension::kAttention, 1.7), candidate(Dimension::kFatigue, 1.7)};
  EXPECT_EQ(prioritize(c)->dimension, Dimension::kFatigue);
}

TEST(Prioritize, MatchesLinearScanOracle) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> score(15, 25);
  for (int round = 0; round < 5000; ++round) {
    std::vector<Candidate> c;
    auto dims = std::vector<Dimension>(kAllDimensions.begin(), kAllDimensions.end());
    std::shuffle(dims.begin(), dims.end(), rng);
    const std::size_t n = 1 + round % kDimensionCount;
    for (std::size_t i = 0; i < n; ++i) c.push_back(candidate(dims[i], score(rng) / 10.0));

    double best = 0;
    for (const auto& x : c) best = std::max(best, x.score);
    std::optional<Dimension> want;
    for (auto d : kPriorityOrder) {
      for (const auto& x : c) {
        if (!want && x.dimension == d && x.score == best) want = d;
      }
    }
    const auto got = prioritize(c);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(got->dimension, *want);
  }
}

TEST(Strategy, PublishedMappings) {
  const auto t = StrategyTable::defaults();
  const auto& stress = t.lookup(Dimension::kStress, Severity::kPronounced, Modality::kAudio);
  EXPECT_EQ(stress.category, Category::kPhysiological);
  EXPECT_EQ(stress.tier, Tier::kMeso);
  EXPECT_EQ(stress.template_id, "box_breathing");
  const auto& load = t.lookup(Dimension::kCognitiveLoad, Severity::kPronounced, Modality::kText);
  EXPECT_EQ(load.category, Category::kCognitiveAttentional);
  EXPECT_EQ(load.tier, Tier::kMicro);
  EXPECT_EQ(load.template_id, "chunk_and_distill");
  const auto& gap = t.lookup(Dimension::kUnderstanding, Severity::kPronounced, Modality::kText);
  EXPECT_EQ(gap.category, Category::kComprehensionOriented);
  EXPECT_EQ(gap.tier, Tier::kMacro);
  EXPECT_EQ(gap.template_id, "first_principles");
}

TEST(Strategy, TableIsTotalAndConsistentWithCategories) {
  const auto t = StrategyTable::defaults();
  for (auto d : kAllDimensions) {
    for (auto s : {Severity::kModerate, Severity::kPronounced}) {
      for (auto m : kAllModalities) {
        const auto& e = t.lookup(d, s, m);
        EXPECT_FALSE(e.template_id.empty());
        EXPECT_EQ(e.category, category_of(d));
      }
    }
  }
  EXPECT_THROW(t.lookup(Dimension::kStress, Severity::kNominal, Modality::kText), Error);
}

TEST(Strategy, OverridesReplaceTemplatesOnly) {
  const auto t = StrategyTable::defaults().with_overrides(
      {{{Dimension::kStress, Severity::kPronounced, Modality::kText}, "reassurance"}});
  const auto& e = t.lookup(Dimension::kStress, Severity::kPronounced, Modality::kText);
  EXPECT_EQ(e.template_id, "reassurance");
  EXPECT_EQ(e.category, Category::kPhysiological);
  EXPECT_EQ(t.lookup(Dimension::kStress, Severity::kPronounced, Modality::kAudio).template_id, "box_breathing");
}

TEST(Framing, ImplicitUnlessRepeatedOrConfirmed) {
  EXPECT_EQ(choose_framing(Dimension::kCognitiveLoad, 1, 1), Framing::kImplicit);
  EXPECT_EQ(choose_framing(Dimension::kCognitiveLoad, 2, 1), Framing::kExplicit);
  EXPECT_EQ(choose_framing(Dimension::kCognitiveLoad, 1, 2), Framing::kExplicit);
}

TEST(Framing, SecondConsecutiveTriggerOfADimensionIsExplicit) {
  SessionConfig cfg;
  cfg.cooldown_s.fill(20.0);
  const auto d = run_engine(excursion(Dimension::kAttention, 0.0, 200.0, 2.0, 0.9, 10.0, 200.0), cfg);
  ASSERT_GE(d.size(), 2u);
  EXPECT_EQ(d[0].framing, Framing::kImplicit);
  EXPECT_EQ(d[0].repeat_count, 1);
  EXPECT_EQ(d[1].framing, Framing::kExplicit);
  EXPECT_EQ(d[1].repeat_count, 2);
}

TEST(Cooldown, PhysiologicalBlocksUntilItsExpiry) {
  InterventionDecision dec;
  dec.t = Timestamp{100};
  dec.category = Category::kPhysiological;
  const auto tracker = apply_cooldown({}, dec, SessionConfig{});
  ASSERT_TRUE(tracker.cooldown_until[index_of(Category::kPhysiological)].has_value());
  EXPECT_DOUBLE_EQ(tracker.cooldown_until[index_of(Category::kPhysiological)]->seconds, 220.0);
  for (auto c : {Category::kCognitiveAttentional, Category::kComprehensionOriented, Category::kChallengeEnhancement}) {
    EXPECT_FALSE(tracker.cooldown_until[index_of(c)].has_value());
  }
}

TEST(Cooldown, ExpiryInstantIsAllowed) {
  SessionConfig cfg;
  TriggerTracker tracker;
  tracker.cooldown_until[index_of(Category::kPhysiological)] = Timestamp{220};
  std::vector<Candidate> seen_at_219, seen_at_220;
  for (int k = 0; k <= 22; ++k) {
    const double t = 200.0 + k;
    auto r = update(tracker, single_state(t, Dimension::kStress, 2.0, 0.9), cfg);
    tracker = r.tracker;
    if (t == 219.0) seen_at_219 = r.candidates;
    if (t == 220.0) seen_at_220 = r.candidates;
  }
  EXPECT_TRUE(seen_at_219.empty());
  ASSERT_EQ(seen_at_220.size(), 1u);
  EXPECT_EQ(seen_at_220[0].dimension, Dimension::kStress);
}

TEST(Cooldown, OtherCategoriesKeepFiring) {
  std::vector<StateVector> states;
  for (int k = 0; k < 30; ++k) {
    auto s = single_state(k * 10.0, Dimension::kStress, 2.0, 0.9);
    if (k >= 5) s.at(Dimension::kCognitiveLoad) = s.at(Dimension::kStress);
    states.push_back(s);
  }
  const auto d = run_engine(states);
  ASSERT_GE(d.size(), 2u);
  EXPECT_EQ(d[0].category, Category::kPhysiological);
  EXPECT_EQ(d[1].category, Category::kCognitiveAttentional);
  EXPECT_LT(d[1].t.seconds, d[0].t.seconds + 120.0);
}

TEST(EngineSafety, FuzzedStatesNeverBreakTheContract) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SessionConfig cfg;
  for (int round = 0; round < 50; ++round) {
    InterventionEngine engine(cfg);
    for (int k = 0; k < 400; ++k) {
      StateVector s = uniform_state(k * 5.0, 0.0, 1.0);
      for (auto& d : s.dims) {
        d.score = 3.0 * u(rng);
        d.signed_score = d.score * (u(rng) < 0.3 ? -1.0 : 1.0);
        d.confidence = u(rng) < 0.2 ? 0.5 : 0.61 + 0.39 * u(rng);
        d.descriptor = to_descriptor(d.score);
        d.observed = u(rng) > 0.05;
      }
      const auto r = engine.step(s);
      if (!r.decision) {
        EXPECT_TRUE(r.candidates.empty());
        continue;
      }
      const auto in = trigger_input(s, r.decision->dimension);
      EXPECT_GT(in.score, cfg.trigger_threshold);
      EXPECT_GT(in.confidence, cfg.confidence_min);
      EXPECT_EQ(r.decision->category, category_of(r.decision->dimension));
      for (const auto& c : r.candidates) EXPECT_LE(c.score, r.decision->triggering_score);
    }
  }
}

TEST(EngineSafety, ReplayIsDeterministic) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<StateVector> states;
  for (int k = 0; k < 500; ++k) {
    auto s = uniform_state(k * 10.0, 0.0, 0.9);
    for (auto& d : s.dims) d.score = d.signed_score = u(rng);
    states.push_back(s);
  }
  const auto a = run_engine(states);
  const auto b = run_engine(states);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].t, b[i].t);
    EXPECT_EQ(a[i].dimension, b[i].dimension);
    EXPECT_EQ(a[i].template_id, b[i].template_id);
  }
}

}  // namespace
}  // namespace bioloop
