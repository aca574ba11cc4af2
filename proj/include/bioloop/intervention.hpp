#pragma once

// Closed-loop trigger policy.
//
// A dimension becomes a candidate at the first state vector where all of
// these hold:
//   - trigger score > trigger_threshold and confidence > confidence_min
//   - the last `consecutive_windows` vectors satisfied the line above
//   - at least persistence_s has elapsed since the run started
//   - its category is out of cooldown (t >= cooldown_until)
// A threshold or confidence failure resets the run; cooldown only defers.
// At most one candidate becomes a decision per vector: the highest score,
// ties broken by kPriorityOrder.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bioloop/config.hpp"
#include "bioloop/core.hpp"
#include "bioloop/state.hpp"

namespace bioloop {

inline constexpr std::array<Dimension, kDimensionCount> kPriorityOrder = {
    Dimension::kStress,        Dimension::kCognitiveLoad, Dimension::kFatigue,
    Dimension::kUnderstanding, Dimension::kAttention,     Dimension::kEngagement,
};

// Signed cognitive-load score at or below this marks an under-challenged learner.
inline constexpr double kUnderChallengeLoadZ = -1.0;

Category category_of(Dimension d);

struct TriggerInput {
  double score = 0.0;
  double confidence = 0.0;
  int contributing_channels = 0;
};

// What the policy compares against the threshold. For Engagement this is
// the under-challenge composite: the signed engagement score, counted only
// while the signed cognitive-load score is <= kUnderChallengeLoadZ.
TriggerInput trigger_input(const StateVector& state, Dimension d);

struct TriggerTracker {
  struct PerDimension {
    int consecutive_windows_above = 0;
    std::optional<Timestamp> first_exceeded_at;
  };
  std::array<PerDimension, kDimensionCount> dims{};
  std::array<std::optional<Timestamp>, kCategoryCount> cooldown_until{};
  std::optional<Timestamp> last_t;

  const PerDimension& at(Dimension d) const { return dims[index_of(d)]; }
  PerDimension& at(Dimension d) { return dims[index_of(d)]; }
};

struct Candidate {
  Dimension dimension = Dimension::kCognitiveLoad;
  double score = 0.0;
  double confidence = 0.0;
  Severity severity = Severity::kNominal;
  int contributing_channels = 0;
};

struct UpdateResult {
  TriggerTracker tracker;
  std::vector<Candidate> candidates;
};

// Throws kNonMonotoneTime when state.t precedes the previous update.
UpdateResult update(TriggerTracker tracker, const StateVector& state, const SessionConfig& cfg);

std::optional<Candidate> prioritize(std::span<const Candidate> candidates);

class StrategyTable {
 public:
  struct Entry {
    Category category = Category::kCognitiveAttentional;
    Tier tier = Tier::kMicro;
    std::string template_id;
  };

  static StrategyTable defaults();

  // Overrides replace template ids only; category and tier follow the dimension.
  StrategyTable with_overrides(const std::map<StrategyKey, std::string>& overrides) const;

  // Throws kInvalidArgument for Severity::kNominal.
  const Entry& lookup(Dimension d, Severity s, Modality m) const;

 private:
  static std::size_t slot(Dimension d, Severity s, Modality m);
  std::array<Entry, kDimensionCount * 2 * kModalityCount> entries_{};
};

struct InterventionDecision {
  Timestamp t;
  Dimension dimension = Dimension::kCognitiveLoad;
  Severity severity = Severity::kModerate;
  Category category = Category::kCognitiveAttentional;
  Tier tier = Tier::kMicro;
  Framing framing = Framing::kImplicit;
  Modality modality = Modality::kText;
  std::string template_id;
  double triggering_score = 0.0;
  double confidence = 0.0;
  int repeat_count = 1;
  int contributing_channels = 0;
};

// Explicit iff the same dimension fired again back to back, or at least two
// channels confirm the deviation.
Framing choose_framing(Dimension d, int repeat_count, int contributing_channels);

// Blocks the decision's category until t + cooldown (inclusive expiry).
TriggerTracker apply_cooldown(TriggerTracker tracker, const InterventionDecision& decision,
                              const SessionConfig& cfg);

struct StepResult {
  std::vector<Candidate> candidates;
  std::optional<InterventionDecision> decision;
};

// Stateful driver: update, prioritize, select strategy and framing, then
// apply cooldown and restart the persistence run of the chosen dimension.
class InterventionEngine {
 public:
  explicit InterventionEngine(SessionConfig cfg);

  StepResult step(const StateVector& state);

  const TriggerTracker& tracker() const { return tracker_; }
  const StrategyTable& strategies() const { return table_; }

 private:
  SessionConfig cfg_;
  StrategyTable table_;
  TriggerTracker tracker_;
  std::optional<Dimension> last_decided_;
  int streak_ = 0;
};

}  // namespace bioloop
