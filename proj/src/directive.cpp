#include "bioloop/directive.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

constexpr std::array<std::string_view, kDimensionCount> kDisplayNames = {
    "Cognitive Load", "Attention Shift", "Engagement Shift", "Understanding Gap", "Stress", "Fatigue"};

constexpr std::array<std::string_view, 3> kLevelWords = {"Typical", "Moderate", "High"};

constexpr std::string_view kStateHeader = "## Learner state";

// Core instruction per template. {topic} and {state} are filled in.
const std::map<std::string_view, std::string_view>& template_catalog() {
  static const std::map<std::string_view, std::string_view> catalog = {
      {"reassurance",
       "Reassure the learner that {topic} feels challenging for many learners at first, then break the "
       "next step down one piece at a time."},
      {"box_breathing",
       "Pause the lesson for a brief breathing exercise: inhale 4, hold 4, exhale 6. Resume {topic} "
       "only after the exercise."},
      {"restructure",
       "Restructure the current explanation of {topic} with clearer structure and contextual cues that "
       "highlight the key relationships."},
      {"chunk_and_distill",
       "Pause new material on {topic}, distill it to its core ideas and present them in shorter segments "
       "with reduced information density and a learning aid."},
      {"curiosity_prompt",
       "Re-engage attention with a short curiosity question about {topic} before continuing."},
      {"physical_reset", "Suggest a quick physical reset, such as a short stretch, before continuing with {topic}."},
      {"alternate_explanations",
       "Explain {topic} again in an alternate style (formal, intuitive or comparative) and check which "
       "one lands."},
      {"first_principles",
       "Rebuild {topic} from first principles, starting with a tangible example before the formal "
       "definition."},
      {"shorter_segments", "Switch to shorter segments on {topic} with a quick recap after each one."},
      {"strategic_break", "Suggest a short break or a physical stretch before continuing with {topic}."},
      {"advanced_application",
       "Reduce scaffolding on {topic} and add an advanced application to keep the challenge up."},
      {"synthesis_prompt",
       "Extend {topic} with a theoretical or synthesis question that links it to a harder related idea."},
  };
  return catalog;
}

std::string_view modality_mechanism(Modality m) {
  switch (m) {
    case Modality::kText:
      return "Deliver it as text segmented into shorter paragraphs or bullet lists, adding a reflective "
             "prompt where useful.";
    case Modality::kImage:
      return "Disclose visuals progressively, adapt annotation density, and use gaze-contingent "
             "highlighting to draw attention to the critical regions.";
    case Modality::kAudio:
      return "Modulate speech pacing and intonation, insert strategic pauses and summaries, and add "
             "guided breathing cues while stress is elevated.";
    case Modality::kVideo:
      return "Control playback adaptively: pause at this point, embed a clarifying question, and add "
             "captions or overlays for emphasis.";
  }
  return "";
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string_view to_string(Level v) {
  static constexpr std::array<std::string_view, 3> names = {"low", "medium", "high"};
  return names[index_of(v)];
}
std::string_view to_string(Directness v) {
  static constexpr std::array<std::string_view, 3> names = {"indirect", "balanced", "direct"};
  return names[index_of(v)];
}
std::string_view to_string(MetaphorUsage v) {
  static constexpr std::array<std::string_view, 3> names = {"sparse", "moderate", "rich"};
  return names[index_of(v)];
}

Descriptors nominal_descriptors() {
  Descriptors out{};
  for (auto d : kAllDimensions) out[index_of(d)] = {d, Severity::kNominal, true};
  return out;
}

Descriptors describe(const StateVector& state) {
  Descriptors out{};
  for (auto d : kAllDimensions) {
    const auto& dim = state.at(d);
    out[index_of(d)] = {d, dim.observed ? dim.descriptor : Severity::kNominal, dim.signed_score >= 0.0};
  }
  return out;
}

std::string descriptor_label(Dimension d, Severity level) {
  std::string out(kLevelWords[index_of(level)]);
  out += ' ';
  out += kDisplayNames[index_of(d)];
  return out;
}

ToneParameters build_tone(const Descriptors& descriptors) {
  const auto& stress = descriptors[index_of(Dimension::kStress)];
  const auto& fatigue = descriptors[index_of(Dimension::kFatigue)];
  const auto& engagement = descriptors[index_of(Dimension::kEngagement)];
  const auto& load = descriptors[index_of(Dimension::kCognitiveLoad)];

  if (stress.level == Severity::kPronounced) {
    return {Level::kLow, Level::kHigh, Directness::kDirect, MetaphorUsage::kModerate};
  }
  if (fatigue.level == Severity::kPronounced) {
    return {Level::kLow, Level::kMedium, Directness::kDirect, MetaphorUsage::kSparse};
  }
  if (engagement.level != Severity::kNominal && engagement.elevated && load.level == Severity::kNominal) {
    return {Level::kMedium, Level::kMedium, Directness::kIndirect, MetaphorUsage::kModerate};
  }
  return {};
}

bool has_template(std::string_view template_id) { return template_catalog().contains(template_id); }

DirectivePacket build_directives(const InterventionDecision& decision, const Descriptors& descriptors,
                                 const LearningContext& context) {
  const auto& catalog = template_catalog();
  auto it = catalog.find(decision.template_id);
  if (it == catalog.end()) {
    throw Error(ErrorCode::kUnknownTemplate, "unknown directive template '" + decision.template_id + "'");
  }
  const auto state = descriptor_label(decision.dimension, decision.severity);

  std::string text = "Target state: {state}. ";
  text += it->second;
  text += ' ';
  text += modality_mechanism(decision.modality);
  if (decision.framing == Framing::kImplicit) {
    text += " Adapt implicitly and do not name the learner's state.";
  } else {
    text += " You may briefly and kindly acknowledge the learner's state ({state}).";
  }
  replace_all(text, "{topic}", context.topic.empty() ? std::string_view("the current topic") : context.topic);
  replace_all(text, "{state}", state);

  DirectivePacket packet;
  packet.decision = decision;
  packet.descriptors = descriptors;
  packet.tone = build_tone(descriptors);
  packet.modality_directive = std::move(text);
  packet.context = context;
  return packet;
}

std::string render_prompt(const DirectivePacket& packet, std::span<const Turn> history,
                          std::size_t max_turns) {
  std::ostringstream out;
  out << "You are an adaptive tutor. Respond to the learner using the state, tone and directive below. "
         "The state labels are qualitative summaries; never ask for or mention sensor readings.\n\n";

  out << kStateHeader << '\n';
  for (const auto& d : packet.descriptors) {
    out << "- " << descriptor_label(d.dimension, d.level) << '\n';
  }

  out << "\n## Tone\n"
      << "- sentence complexity: " << to_string(packet.tone.sentence_complexity) << '\n'
      << "- encouragement frequency: " << to_string(packet.tone.encouragement_frequency) << '\n'
      << "- explanation directness: " << to_string(packet.tone.explanation_directness) << '\n'
      << "- metaphor usage: " << to_string(packet.tone.metaphor_usage) << '\n';

  out << "\n## Directive (" << to_string(packet.decision.modality) << ", "
      << to_string(packet.decision.category) << ", " << to_string(packet.decision.tier) << ", "
      << to_string(packet.decision.framing) << ")\n"
      << packet.modality_directive << '\n';

  out << "\n## Topic\n" << (packet.context.topic.empty() ? "the current topic" : packet.context.topic) << '\n';
  if (!packet.context.recent_excerpt.empty()) {
    out << "\n## Recent excerpt\n" << packet.context.recent_excerpt << '\n';
  }

  const std::size_t keep = std::min(max_turns, history.size());
  if (keep > 0) {
    out << "\n## History\n";
    for (const auto& turn : history.subspan(history.size() - keep)) {
      out << turn.role << ": " << turn.text << '\n';
    }
  }
  return out.str();
}

std::string digest_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string mock_generate(std::string_view prompt, std::uint64_t seed) {
  std::string salted(prompt);
  if (seed != 0) salted += "\nseed:" + std::to_string(seed);

  std::string labels;
  const auto start = prompt.find(kStateHeader);
  if (start != std::string_view::npos) {
    auto pos = prompt.find('\n', start) + 1;
    while (pos < prompt.size() && prompt.substr(pos, 2) == "- ") {
      const auto eol = prompt.find('\n', pos);
      if (!labels.empty()) labels += ", ";
      labels += prompt.substr(pos + 2, eol - pos - 2);
      pos = eol + 1;
    }
  }
  return "[mock " + digest_hex(salted) + "] Acknowledged state: " + labels + ".";
}

}  // namespace bioloop
