#include "bioloop/behavior.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

bool visible(const PostureSample& p, Landmark l) { return p.visibility_of(l) >= kLandmarkVisibleAt; }

Point2 midpoint(Point2 a, Point2 b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

// Midpoint of whichever of the pair is visible.
std::optional<Point2> pair_center(const PostureSample& p, Landmark left, Landmark right) {
  const bool l = visible(p, left);
  const bool r = visible(p, right);
  if (l && r) return midpoint(p.at(left), p.at(right));
  if (l) return p.at(left);
  if (r) return p.at(right);
  return std::nullopt;
}

double shoulder_tilt_deg(const PostureSample& p) {
  const auto l = p.at(Landmark::kShoulderLeft);
  const auto r = p.at(Landmark::kShoulderRight);
  return std::atan2(r.y - l.y, r.x - l.x) * kDegPerRad;
}

Point2 shoulder_mid(const PostureSample& p) {
  return midpoint(p.at(Landmark::kShoulderLeft), p.at(Landmark::kShoulderRight));
}

double angle_diff_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

double sub_score(double deviation, double tolerance) {
  return 100.0 * std::max(0.0, 1.0 - deviation / tolerance);
}

void require_shoulders(const PostureSample& p, const char* which) {
  if (!visible(p, Landmark::kShoulderLeft) || !visible(p, Landmark::kShoulderRight)) {
    throw Error(ErrorCode::kMissingLandmarks, std::string(which) + " pose has no visible shoulders");
  }
  for (const auto& pt : p.points) {
    if (!(pt.x >= 0.0 && pt.x <= 1.0 && pt.y >= 0.0 && pt.y <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, std::string(which) + " pose has coordinates outside [0,1]");
    }
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view to_string(PostureCategory c) {
  switch (c) {
    case PostureCategory::kIdeal: return "Ideal";
    case PostureCategory::kAverage: return "Average";
    case PostureCategory::kBelowAverage: return "BelowAverage";
    case PostureCategory::kPoor: return "Poor";
  }
  return "Poor";
}

PostureCategory categorize_posture(double percent) {
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw Error(ErrorCode::kOutOfRange, "posture percent must lie in [0,100]");
  }
  if (percent >= 90.0) return PostureCategory::kIdeal;
  if (percent >= 75.0) return PostureCategory::kAverage;
  if (percent >= 60.0) return PostureCategory::kBelowAverage;
  return PostureCategory::kPoor;
}

PostureScore score_posture(const PostureSample& sample, const PostureSample& baseline,
                           const PostureTolerances& tol) {
  require_shoulders(sample, "sample");
  require_shoulders(baseline, "baseline");

  PostureScore s;
  s.shoulder_level = sub_score(angle_diff_deg(shoulder_tilt_deg(sample), shoulder_tilt_deg(baseline)),
                               tol.shoulder_tilt_deg);

  const auto ears = pair_center(sample, Landmark::kEarLeft, Landmark::kEarRight);
  const auto base_ears = pair_center(baseline, Landmark::kEarLeft, Landmark::kEarRight);
  if (ears && base_ears) {
    const double offset = ears->x - shoulder_mid(sample).x;
    const double base_offset = base_ears->x - shoulder_mid(baseline).x;
    s.neck_alignment = sub_score(std::abs(offset - base_offset), tol.neck_offset);
  }

  const auto hips = pair_center(sample, Landmark::kHipLeft, Landmark::kHipRight);
  const auto base_hips = pair_center(baseline, Landmark::kHipLeft, Landmark::kHipRight);
  if (hips && base_hips) {
    auto trunk = [](Point2 shoulders, Point2 hip) {
      return std::atan2(shoulders.x - hip.x, hip.y - shoulders.y) * kDegPerRad;
    };
    const double dev = angle_diff_deg(trunk(shoulder_mid(sample), *hips),
                                      trunk(shoulder_mid(baseline), *base_hips));
    s.back_straightness = sub_score(dev, tol.trunk_angle_deg);
  }

  double sum = s.shoulder_level;
  int n = 1;
  if (s.neck_alignment) { sum += *s.neck_alignment; ++n; }
  if (s.back_straightness) { sum += *s.back_straightness; ++n; }
  s.percent = std::clamp(sum / n, 0.0, 100.0);
  s.category = categorize_posture(s.percent);
  return s;
}

PostureSample mean_pose(std::span<const PostureSample> poses) {
  PostureSample out;
  if (poses.empty()) return out;
  for (const auto& p : poses) {
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      out.points[i].x += p.points[i].x;
      out.points[i].y += p.points[i].y;
      out.visibility[i] += p.visibility[i];
    }
  }
  const auto n = static_cast<double>(poses.size());
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    out.points[i].x /= n;
    out.points[i].y /= n;
    out.visibility[i] /= n;
  }
  return out;
}

NoteAssessment ingest_note_assessment(double score, std::string feedback, std::string analyzer_id) {
  if (!std::isfinite(score)) throw Error(ErrorCode::kMalformedReply, "note score is not a finite number");
  NoteAssessment out;
  out.sample.feedback_text = std::move(feedback);
  out.sample.analyzer_id = std::move(analyzer_id);
  out.sample.correctness = std::clamp(score, 0.0, 1.0);
  if (out.sample.correctness != score) {
    out.warning = "note score " + std::to_string(score) + " clamped to [0,1]";
  }
  return out;
}

NoteAssessment ingest_note_assessment(std::string_view raw, std::string analyzer_id) {
  std::optional<double> score;
  std::string feedback;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    auto semi = raw.find(';', pos);
    // Feedback is free text and may itself contain semicolons.
    auto field = trim(raw.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos));
    if (field.starts_with("feedback=")) {
      feedback = std::string(trim(trim(raw.substr(pos)).substr(9)));
      break;
    }
    if (field.starts_with("score=")) {
      auto num = trim(field.substr(6));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (num.empty() || ec != std::errc{} || ptr != num.data() + num.size()) {
        throw Error(ErrorCode::kMalformedReply, "note score is not numeric: '" + std::string(num) + "'");
      }
      score = v;
    } else if (!field.empty()) {
      throw Error(ErrorCode::kMalformedReply, "unexpected field in analyzer reply: '" + std::string(field) + "'");
    }
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  if (!score) throw Error(ErrorCode::kMalformedReply, "analyzer reply has no score field");
  return ingest_note_assessment(*score, std::move(feedback), std::move(analyzer_id));
}

PostureFeatures window_posture(const Window& window, const PostureSample& baseline,
                               const PostureTolerances& tol, double nominal_rate_hz) {
  PostureFeatures f;
  f.start = window.start;
  f.end = window.end;
  double percent = 0.0, conf = 0.0;
  for (const auto& env : window.samples) {
    const auto* p = std::get_if<PostureSample>(&env.payload);
    if (p == nullptr) continue;
    try {
      const auto s = score_posture(*p, baseline, tol);
      percent += s.percent;
      conf += env.source_confidence * 0.5 *
              (p->visibility_of(Landmark::kShoulderLeft) + p->visibility_of(Landmark::kShoulderRight));
      ++f.scored;
    } catch (const Error&) {
      // unscorable frame: lowers coverage only
    }
  }
  if (f.scored == 0) return f;
  const auto n = static_cast<double>(f.scored);
  f.mean_percent = percent / n;
  const double coverage = std::min(1.0, n / (window.length_s() * nominal_rate_hz));
  f.quality = std::clamp(coverage * conf / n, 0.0, 1.0);
  return f;
}

NoteFeatures window_notes(const Window& window) {
  NoteFeatures f;
  f.start = window.start;
  f.end = window.end;
  double sum = 0.0, conf = 0.0;
  for (const auto& env : window.samples) {
    const auto* n = std::get_if<NoteScoreSample>(&env.payload);
    if (n == nullptr) continue;
    sum += n->correctness;
    conf += env.source_confidence;
    ++f.count;
  }
  if (f.count == 0) return f;
  f.mean_correctness = sum / static_cast<double>(f.count);
  f.quality = std::clamp(conf / static_cast<double>(f.count), 0.0, 1.0);
  return f;
}

}  // namespace bioloop
