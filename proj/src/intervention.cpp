#include "bioloop/intervention.hpp"

#include <algorithm>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

std::size_t priority_rank(Dimension d) {
  return static_cast<std::size_t>(std::find(kPriorityOrder.begin(), kPriorityOrder.end(), d) -
                                  kPriorityOrder.begin());
}

}  // namespace

Category category_of(Dimension d) {
  switch (d) {
    case Dimension::kCognitiveLoad:
    case Dimension::kAttention:
      return Category::kCognitiveAttentional;
    case Dimension::kStress:
    case Dimension::kFatigue:
      return Category::kPhysiological;
    case Dimension::kUnderstanding:
      return Category::kComprehensionOriented;
    case Dimension::kEngagement:
      return Category::kChallengeEnhancement;
  }
  return Category::kCognitiveAttentional;
}

TriggerInput trigger_input(const StateVector& state, Dimension d) {
  const auto& dim = state.at(d);
  if (d != Dimension::kEngagement) {
    if (!dim.observed) return {};
    return {dim.score, dim.confidence, dim.contributing_channels};
  }
  const auto& load = state.at(Dimension::kCognitiveLoad);
  if (!dim.observed || !load.observed || load.signed_score > kUnderChallengeLoadZ) return {};
  return {std::max(0.0, dim.signed_score), std::min(dim.confidence, load.confidence),
          dim.contributing_channels};
}

UpdateResult update(TriggerTracker tracker, const StateVector& state, const SessionConfig& cfg) {
  if (tracker.last_t && state.t < *tracker.last_t) {
    throw Error(ErrorCode::kNonMonotoneTime, "state vectors must arrive in timestamp order");
  }
  tracker.last_t = state.t;

  UpdateResult out;
  for (auto d : kAllDimensions) {
    auto& slot = tracker.at(d);
    const auto in = trigger_input(state, d);
    const bool above = in.score > cfg.trigger_threshold && in.confidence > cfg.confidence_min;
    if (!above) {
      slot.consecutive_windows_above = 0;
      slot.first_exceeded_at.reset();
      continue;
    }
    ++slot.consecutive_windows_above;
    if (!slot.first_exceeded_at) slot.first_exceeded_at = state.t;

    const bool persisted = slot.consecutive_windows_above >= cfg.consecutive_windows &&
                           state.t.seconds - slot.first_exceeded_at->seconds >= cfg.persistence_s;
    const auto& cooldown = tracker.cooldown_until[index_of(category_of(d))];
    const bool cooled = !cooldown || state.t >= *cooldown;
    if (persisted && cooled) {
      out.candidates.push_back({d, in.score, in.confidence, to_descriptor(in.score), in.contributing_channels});
    }
  }
  out.tracker = tracker;
  return out;
}

std::optional<Candidate> prioritize(std::span<const Candidate> candidates) {
  std::optional<Candidate> best;
  for (const auto& c : candidates) {
    if (!best || c.score > best->score ||
        (c.score == best->score && priority_rank(c.dimension) < priority_rank(best->dimension))) {
      best = c;
    }
  }
  return best;
}

std::size_t StrategyTable::slot(Dimension d, Severity s, Modality m) {
  if (s == Severity::kNominal) {
    throw Error(ErrorCode::kInvalidArgument, "no intervention strategy for a nominal state");
  }
  const std::size_t sev = s == Severity::kModerate ? 0 : 1;
  return (index_of(d) * 2 + sev) * kModalityCount + index_of(m);
}

StrategyTable StrategyTable::defaults() {
  struct Row {
    Dimension d;
    Tier moderate_tier;
    const char* moderate;
    Tier pronounced_tier;
    const char* pronounced;
  };
  static const Row rows[] = {
      {Dimension::kStress, Tier::kMeso, "reassurance", Tier::kMeso, "box_breathing"},
      {Dimension::kCognitiveLoad, Tier::kMicro, "restructure", Tier::kMicro, "chunk_and_distill"},
      {Dimension::kAttention, Tier::kMeso, "curiosity_prompt", Tier::kMeso, "physical_reset"},
      {Dimension::kUnderstanding, Tier::kMicro, "alternate_explanations", Tier::kMacro, "first_principles"},
      {Dimension::kFatigue, Tier::kMeso, "shorter_segments", Tier::kMeso, "strategic_break"},
      {Dimension::kEngagement, Tier::kMicro, "advanced_application", Tier::kMicro, "synthesis_prompt"},
  };
  StrategyTable table;
  for (const auto& r : rows) {
    for (auto m : kAllModalities) {
      table.entries_[slot(r.d, Severity::kModerate, m)] = {category_of(r.d), r.moderate_tier, r.moderate};
      table.entries_[slot(r.d, Severity::kPronounced, m)] = {category_of(r.d), r.pronounced_tier, r.pronounced};
    }
  }
  return table;
}

StrategyTable StrategyTable::with_overrides(const std::map<StrategyKey, std::string>& overrides) const {
  StrategyTable out = *this;
  for (const auto& [key, template_id] : overrides) {
    const auto& [d, s, m] = key;
    out.entries_[slot(d, s, m)].template_id = template_id;
  }
  return out;
}

const StrategyTable::Entry& StrategyTable::lookup(Dimension d, Severity s, Modality m) const {
  return entries_[slot(d, s, m)];
}

Framing choose_framing(Dimension, int repeat_count, int contributing_channels) {
  return (repeat_count >= 2 || contributing_channels >= 2) ? Framing::kExplicit : Framing::kImplicit;
}

TriggerTracker apply_cooldown(TriggerTracker tracker, const InterventionDecision& decision,
                              const SessionConfig& cfg) {
  tracker.cooldown_until[index_of(decision.category)] =
      Timestamp{decision.t.seconds + cfg.cooldown_for(decision.category)};
  return tracker;
}

InterventionEngine::InterventionEngine(SessionConfig cfg)
    : cfg_(std::move(cfg)), table_(StrategyTable::defaults().with_overrides(cfg_.strategy_overrides)) {}

StepResult InterventionEngine::step(const StateVector& state) {
  auto [tracker, candidates] = update(tracker_, state, cfg_);
  tracker_ = std::move(tracker);

  StepResult out;
  out.candidates = std::move(candidates);
  const auto best = prioritize(out.candidates);
  if (!best) return out;

  const int repeat = last_decided_ == best->dimension ? streak_ + 1 : 1;
  const auto& entry = table_.lookup(best->dimension, best->severity, cfg_.modality);

  InterventionDecision decision;
  decision.t = state.t;
  decision.dimension = best->dimension;
  decision.severity = best->severity;
  decision.category = entry.category;
  decision.tier = entry.tier;
  decision.framing = choose_framing(best->dimension, repeat, best->contributing_channels);
  decision.modality = cfg_.modality;
  decision.template_id = entry.template_id;
  decision.triggering_score = best->score;
  decision.confidence = best->confidence;
  decision.repeat_count = repeat;
  decision.contributing_channels = best->contributing_channels;

  tracker_ = apply_cooldown(tracker_, decision, cfg_);
  // A fresh persistence episode is required before this dimension fires again.
  tracker_.at(best->dimension) = {};
  last_decided_ = best->dimension;
  streak_ = repeat;
  out.decision = std::move(decision);
  return out;
}

}  // namespace bioloop
