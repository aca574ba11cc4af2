#pragma once

// Builders shared by the unit tests and the acceptance runner.

#include <cmath>
#include <string>
#include <optional>
#include <utility>
#include <vector>

#include "bioloop/core.hpp"
#include "bioloop/state.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop::testing {

inline SampleEnvelope gaze_at(double t, double x, double y, std::optional<double> pupil = 3.0,
                              std::string stream = "gaze", double confidence = 1.0) {
  return {std::move(stream), Timestamp{t}, GazeSample{x, y, pupil, confidence}};
}

inline SampleEnvelope rr_at(double t, double rr_ms, std::string stream = "heart") {
  return {std::move(stream), Timestamp{t}, RRSample{rr_ms}};
}

inline Window window_of(StreamKind kind, double start, double end, std::vector<SampleEnvelope> samples) {
  Window w;
  w.channel = kind;
  w.start = Timestamp{start};
  w.end = Timestamp{end};
  w.samples = std::move(samples);
  return w;
}

// Upright pose: shoulders level at y 0.4, ears above them, hips below.
inline PostureSample upright_pose() {
  PostureSample p;
  p.at(Landmark::kShoulderLeft) = {0.40, 0.40};
  p.at(Landmark::kShoulderRight) = {0.60, 0.40};
  p.at(Landmark::kEarLeft) = {0.45, 0.25};
  p.at(Landmark::kEarRight) = {0.55, 0.25};
  p.at(Landmark::kHipLeft) = {0.42, 0.75};
  p.at(Landmark::kHipRight) = {0.58, 0.75};
  p.visibility.fill(1.0);
  return p;
}

// Every dimension observed at the given score and confidence.
inline StateVector uniform_state(double t, double score, double confidence) {
  StateVector s;
  s.t = Timestamp{t};
  for (auto& d : s.dims) {
    d.score = score;
    d.signed_score = score;
    d.confidence = confidence;
    d.descriptor = to_descriptor(score);
    d.observed = true;
    d.contributing_channels = 1;
  }
  return s;
}

// Only `dim` deviates; every other dimension sits at baseline.
inline StateVector single_state(double t, Dimension dim, double score, double confidence) {
  auto s = uniform_state(t, 0.0, 1.0);
  auto& d = s.at(dim);
  d.score = score;
  d.signed_score = score;
  d.confidence = confidence;
  d.descriptor = to_descriptor(score);
  return s;
}

}  // namespace bioloop::testing
