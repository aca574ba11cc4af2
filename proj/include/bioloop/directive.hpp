#pragma once

// Turns decisions and semantic state descriptors into tone-adapted
// generation directives and deterministic prompt text.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "bioloop/core.hpp"
#include "bioloop/intervention.hpp"
#include "bioloop/state.hpp"

namespace bioloop {

enum class Level { kLow, kMedium, kHigh };
enum class Directness { kIndirect, kBalanced, kDirect };
enum class MetaphorUsage { kSparse, kModerate, kRich };

std::string_view to_string(Level v);
std::string_view to_string(Directness v);
std::string_view to_string(MetaphorUsage v);

struct ToneParameters {
  Level sentence_complexity = Level::kMedium;
  Level encouragement_frequency = Level::kMedium;
  Directness explanation_directness = Directness::kBalanced;
  MetaphorUsage metaphor_usage = MetaphorUsage::kModerate;

  friend bool operator==(const ToneParameters&, const ToneParameters&) = default;
};

struct DimensionDescriptor {
  Dimension dimension = Dimension::kCognitiveLoad;
  Severity level = Severity::kNominal;
  bool elevated = true;  // direction of the signed deviation
};

using Descriptors = std::array<DimensionDescriptor, kDimensionCount>;

Descriptors describe(const StateVector& state);
Descriptors nominal_descriptors();

// "Typical Stress", "Moderate Cognitive Load", "High Stress", ...
std::string descriptor_label(Dimension d, Severity level);

// Precedence: Stress Pronounced, then Fatigue Pronounced, then elevated
// engagement while load is Nominal (Socratic, indirect), else defaults.
ToneParameters build_tone(const Descriptors& descriptors);

struct LearningContext {
  std::string topic;
  std::string recent_excerpt;
};

struct DirectivePacket {
  InterventionDecision decision;
  Descriptors descriptors{};
  ToneParameters tone;
  std::string modality_directive;
  LearningContext context;
};

bool has_template(std::string_view template_id);

// Throws kUnknownTemplate.
DirectivePacket build_directives(const InterventionDecision& decision, const Descriptors& descriptors,
                                 const LearningContext& context);

struct Turn {
  std::string role;  // "learner" or "tutor"
  std::string text;
};

// Preamble, state block (labels only), tone block, directive, then the
// last `max_turns` history turns when there are any. Byte-stable.
std::string render_prompt(const DirectivePacket& packet, std::span<const Turn> history,
                          std::size_t max_turns = 6);

// FNV-1a 64-bit, lowercase hex.
std::string digest_hex(std::string_view bytes);

// Deterministic stand-in for a language model: echoes the prompt digest and
// the state labels it found.
std::string mock_generate(std::string_view prompt, std::uint64_t seed = 0);

}  // namespace bioloop
