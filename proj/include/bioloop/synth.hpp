#pragma once

// Seeded synthetic sessions. A profile is a list of segments; inside each
// segment every latent channel follows a generator g(t) in units of the
// channel's spread, and the emitted level is
//
//   level(t) = mean + sd * g(t) + noise_sd * e(floor(t))
//
// with e a standard normal drawn once per second and channel.
//
// Generators
//   baseline                      g = 0
//   ramp(target_z, tau_s)         exponential approach from the value g had
//                                 when the segment started
//   oscillation(amplitude_z, period_s)  g = amplitude * sin(2 pi t / period)

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bioloop/scenario.hpp"

namespace bioloop {

enum class SynthChannel : std::size_t {
  kPupilMm,
  kFixationDwellS,
  kBlinkRatePerMin,
  kRrMeanMs,
  kRrDiffSdMs,
  kSlouch,
  kNoteCorrectness,
};
inline constexpr std::size_t kSynthChannelCount = 7;

std::string_view to_string(SynthChannel c);
std::optional<SynthChannel> parse_synth_channel(std::string_view text);

struct ChannelSpec {
  double mean = 0.0;
  double sd = 1.0;
  double noise_sd = 0.0;
};

std::array<ChannelSpec, kSynthChannelCount> default_channel_specs();

struct Generator {
  enum class Kind { kBaseline, kRamp, kOscillation };
  Kind kind = Kind::kBaseline;
  double target_z = 0.0;   // ramp
  double tau_s = 1.0;      // ramp
  double amplitude_z = 0.0;  // oscillation
  double period_s = 1.0;     // oscillation
};

struct Segment {
  std::string label;
  double duration_s = 0.0;
  std::array<Generator, kSynthChannelCount> generators{};  // default baseline
};

struct SyntheticProfile {
  std::uint64_t seed = 0;
  std::array<ChannelSpec, kSynthChannelCount> channels = default_channel_specs();
  std::vector<Segment> segments;
  std::vector<std::pair<std::string, std::string>> config;  // copied into the scenario header
  double heart_clock_offset_s = 0.0;  // producer clock = session clock + offset
  double sample_noise_scale = 1.0;    // scales per-sample pupil and landmark noise

  double duration_s() const;
};

// Throws kInvalidArgument for non-positive durations, taus or periods.
void validate_profile(const SyntheticProfile& profile);

// JSON document:
//   {"seed": 7, "channels": {"pupil_mm": {"mean": 3.5, "sd": 0.25, "noise_sd": 0.08}},
//    "config": {"topic": "fractions"}, "heart_clock_offset_s": 12,
//    "segments": [{"label": "calm", "duration_s": 300},
//                 {"duration_s": 60, "generators": {"pupil_mm": {"type": "ramp", "target_z": 2, "tau_s": 3}}}]}
// Throws kParse / kInvalidArgument.
SyntheticProfile parse_profile(std::string_view json_text);
SyntheticProfile load_profile(const std::filesystem::path& path);

// mean + sd * g(t), without the noise term.
double latent_level(const SyntheticProfile& profile, SynthChannel c, double t);

// Full level including the per-second noise draws.
class LevelTrack {
 public:
  explicit LevelTrack(const SyntheticProfile& profile);
  double level(SynthChannel c, double t) const;

 private:
  const SyntheticProfile* profile_;
  std::array<std::vector<double>, kSynthChannelCount> noise_;
};

// Deterministic in (profile, profile.seed).
ScenarioFile synthesize(const SyntheticProfile& profile);

}  // namespace bioloop
