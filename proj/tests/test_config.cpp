#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "bioloop/config.hpp"
#include "bioloop/error.hpp"

namespace bioloop {
namespace {

bool has_failure(const ValidationReport& r, std::string_view needle) {
  return std::any_of(r.failures.begin(), r.failures.end(),
                     [&](const std::string& f) { return f.find(needle) != std::string::npos; });
}

TEST(ConfigValidation, DefaultsPass) {
  const auto report = validate_config(SessionConfig{});
  EXPECT_TRUE(report.ok()) << (report.failures.empty() ? "" : report.failures.front());
}

TEST(ConfigValidation, ThresholdBelowModerateFloorIsRejected) {
  SessionConfig cfg;
  cfg.trigger_threshold = 0.5;
  const auto report = validate_config(cfg);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(has_failure(report, "trigger_threshold below moderate-deviation floor 1.0"));
}

TEST(ConfigValidation, ThresholdAtModerateFloorIsAccepted) {
  SessionConfig cfg;
  cfg.trigger_threshold = 1.0;
  EXPECT_TRUE(validate_config(cfg).ok());
}

TEST(ConfigValidation, EvenMedianWidthMustBeOdd) {
  SessionConfig cfg;
  cfg.rolling_median_width = 4;
  EXPECT_TRUE(has_failure(validate_config(cfg), "must be odd"));
}

TEST(ConfigValidation, ReportsEveryFailure) {
  SessionConfig cfg;
  cfg.trigger_threshold = 0.2;
  cfg.rolling_median_width = 6;
  cfg.consecutive_windows = 0;
  cfg.persistence_s = -1.0;
  cfg.weights.set(Dimension::kStress, FeatureChannel::kRmssd, -0.5);
  const auto report = validate_config(cfg);
  EXPECT_TRUE(has_failure(report, "trigger_threshold"));
  EXPECT_TRUE(has_failure(report, "must be odd"));
  EXPECT_TRUE(has_failure(report, "consecutive_windows"));
  EXPECT_TRUE(has_failure(report, "persistence_s"));
  EXPECT_TRUE(has_failure(report, "negative entry"));
}

TEST(ConfigValidation, EmptyWeightRowIsRejected) {
  SessionConfig cfg;
  for (std::size_t i = 0; i < kFeatureChannelCount; ++i) {
    cfg.weights.set(Dimension::kFatigue, static_cast<FeatureChannel>(i), 0.0);
  }
  EXPECT_TRUE(has_failure(validate_config(cfg), "weight row Fatigue has no positive entry"));
}

TEST(ConfigValidation, IsIdempotentAndLeavesConfigUntouched) {
  SessionConfig cfg;
  cfg.trigger_threshold = 0.7;
  cfg.rolling_median_width = 2;
  const SessionConfig before = cfg;
  const auto first = validate_config(cfg);
  const auto second = validate_config(cfg);
  EXPECT_EQ(first.failures, second.failures);
  EXPECT_EQ(cfg.trigger_threshold, before.trigger_threshold);
  EXPECT_EQ(cfg.rolling_median_width, before.rolling_median_width);
  EXPECT_EQ(cfg.weights, before.weights);
}

TEST(ConfigValidation, DefaultWeightRowsMatchTheChannelMapping) {
  const auto w = WeightMatrix::defaults();
  EXPECT_DOUBLE_EQ(w.at(Dimension::kCognitiveLoad, FeatureChannel::kPupilDiameter), 0.5);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kCognitiveLoad, FeatureChannel::kFixationDuration), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kCognitiveLoad, FeatureChannel::kHeartRate), 0.2);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kStress, FeatureChannel::kPnn50), 0.4);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kStress, FeatureChannel::kRmssd), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kStress, FeatureChannel::kHeartRate), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kAttention, FeatureChannel::kGazeVelocity), 0.4);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kAttention, FeatureChannel::kFixationCount), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kAttention, FeatureChannel::kBlinkRate), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kEngagement, FeatureChannel::kPosture), 0.4);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kEngagement, FeatureChannel::kPupilDiameter), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kEngagement, FeatureChannel::kFixationDuration), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kUnderstanding, FeatureChannel::kNoteError), 0.7);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kUnderstanding, FeatureChannel::kFixationDuration), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kFatigue, FeatureChannel::kBlinkRate), 0.4);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kFatigue, FeatureChannel::kGazeVelocity), 0.3);
  EXPECT_DOUBLE_EQ(w.at(Dimension::kFatigue, FeatureChannel::kPosture), 0.3);
}

TEST(ConfigParse, AppliesAssignmentsAndComments) {
  const auto cfg = parse_config(
      "# session tuning\n"
      "trigger_threshold = 2.0\n"
      "window.cardio_s = 30   # longer HRV window\n"
      "cooldown.physiological = 90\n"
      "weight.stress.rmssd = 0.5\n"
      "sigma_floor.note_error = 0.2\n"
      "strategy.stress.pronounced.text = reassurance\n"
      "modality = audio\n");
  EXPECT_DOUBLE_EQ(cfg.trigger_threshold, 2.0);
  EXPECT_DOUBLE_EQ(cfg.window_length.cardio_s, 30.0);
  EXPECT_DOUBLE_EQ(cfg.cooldown_for(Category::kPhysiological), 90.0);
  EXPECT_DOUBLE_EQ(cfg.weights.at(Dimension::kStress, FeatureChannel::kRmssd), 0.5);
  EXPECT_DOUBLE_EQ(cfg.sigma_floors()[index_of(FeatureChannel::kNoteError)], 0.2);
  EXPECT_EQ(cfg.modality, Modality::kAudio);
  const auto it = cfg.strategy_overrides.find({Dimension::kStress, Severity::kPronounced, Modality::kText});
  ASSERT_NE(it, cfg.strategy_overrides.end());
  EXPECT_EQ(it->second, "reassurance");
}

TEST(ConfigParse, SigmaFloorsTakeTheLargerOfGlobalAndChannel) {
  SessionConfig cfg;
  cfg.sigma_floor = 0.05;
  const auto floors = cfg.sigma_floors();
  EXPECT_DOUBLE_EQ(floors[index_of(FeatureChannel::kPupilDiameter)], 0.05);
  EXPECT_DOUBLE_EQ(floors[index_of(FeatureChannel::kNoteError)], 0.1);
}

TEST(ConfigParse, ErrorsCarryTheLineNumber) {
  try {
    parse_config("trigger_threshold = 1.5\n\nno_such_key = 3\n");
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("trigger_threshold 1.5\n"), Error);
  EXPECT_THROW(parse_config("trigger_threshold = fast\n"), Error);
  EXPECT_THROW(parse_config("client = cloud\n"), Error);
  EXPECT_THROW(parse_config("strategy.stress.nominal.text = x\n"), Error);
}

TEST(ConfigParse, LayersOverABaseConfig) {
  SessionConfig base;
  base.topic = "vectors";
  const auto cfg = parse_config("persistence_s = 20\n", base);
  EXPECT_EQ(cfg.topic, "vectors");
  EXPECT_DOUBLE_EQ(cfg.persistence_s, 20.0);
}

TEST(ConfigParse, LoadsFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "bioloop_config_test.conf";
  {
    std::ofstream out(path);
    out << "confidence_min = 0.7\n";
  }
  EXPECT_DOUBLE_EQ(load_config(path).confidence_min, 0.7);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), Error);
}

}  // namespace
}  // namespace bioloop
