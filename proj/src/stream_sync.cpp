#include "bioloop/stream_sync.hpp"

#include <algorithm>
#include <cmath>

#include "bioloop/error.hpp"

namespace bioloop {

std::string_view to_string(IngestOutcome o) {
  switch (o) {
    case IngestOutcome::kAccepted: return "Accepted";
    case IngestOutcome::kReordered: return "Reordered";
    case IngestOutcome::kDroppedLate: return "DroppedLate";
  }
  return "Accepted";
}

double median_clock_offset(std::span<const SyncMark> marks) {
  if (marks.size() < 2) {
    throw Error(ErrorCode::kInsufficientMarks, "clock offset estimation needs at least 2 sync marks");
  }
  std::vector<double> diffs;
  diffs.reserve(marks.size());
  for (const auto& m : marks) diffs.push_back(m.session_t - m.producer_t);
  std::sort(diffs.begin(), diffs.end());
  const auto n = diffs.size();
  if (n % 2 == 1) return diffs[n / 2];
  return 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);
}

StreamSync::StreamSync(double jitter_tolerance_s) : jitter_tolerance_s_(jitter_tolerance_s) {
  if (!(jitter_tolerance_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "jitter tolerance must be >= 0");
  }
}

StreamRegistration StreamSync::register_stream(const StreamDescriptor& desc) {
  desc.validate();
  std::lock_guard lock(mutex_);
  if (streams_.contains(desc.stream_id)) {
    throw Error(ErrorCode::kDuplicateStream, "stream '" + desc.stream_id + "' already registered");
  }
  StreamRegistration reg{desc, 0.0};
  streams_.emplace(desc.stream_id, reg);
  return reg;
}

double StreamSync::estimate_offset(const std::string& stream_id, std::span<const SyncMark> marks) {
  std::lock_guard lock(mutex_);
  auto it = streams_.find(stream_id);
  if (it == streams_.end()) {
    throw Error(ErrorCode::kUnknownStream, "stream '" + stream_id + "' is not registered");
  }
  const double offset = median_clock_offset(marks);
  it->second.clock_offset_s = offset;
  return offset;
}

IngestOutcome StreamSync::ingest(SampleEnvelope env) {
  std::lock_guard lock(mutex_);
  auto it = streams_.find(env.stream_id);
  if (it == streams_.end()) {
    throw Error(ErrorCode::kUnknownStream, "stream '" + env.stream_id + "' is not registered");
  }
  const auto& reg = it->second;
  if (payload_kind(env.payload) != reg.descriptor.kind) {
    throw Error(ErrorCode::kInvalidArgument,
                "payload kind does not match stream '" + env.stream_id + "'");
  }
  if (!(env.source_confidence >= 0.0 && env.source_confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "source_confidence outside [0,1]");
  }
  env.timestamp = Timestamp{env.timestamp.seconds + reg.clock_offset_s};
  if (!std::isfinite(env.timestamp.seconds)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite timestamp");
  }
  env.sequence = next_sequence_++;

  if (any_emitted_ && compare_envelopes(env, last_emitted_) < 0) {
    ++dropped_;
    return IngestOutcome::kDroppedLate;
  }

  const bool behind = any_seen_ && env.timestamp.seconds < max_seen_;
  if (!any_seen_ || env.timestamp.seconds > max_seen_) max_seen_ = env.timestamp.seconds;
  any_seen_ = true;

  buffer_.insert(std::move(env));
  release_ready_locked(max_seen_ - jitter_tolerance_s_);
  return behind ? IngestOutcome::kReordered : IngestOutcome::kAccepted;
}

void StreamSync::release_ready_locked(double up_to) {
  while (!buffer_.empty() && buffer_.begin()->timestamp.seconds <= up_to) {
    auto node = buffer_.extract(buffer_.begin());
    emit_locked(std::move(node.value()));
  }
}

void StreamSync::emit_locked(SampleEnvelope env) {
  elapsed_ = std::max(elapsed_, env.timestamp.seconds);
  last_emitted_ = env;
  any_emitted_ = true;
  timeline_[index_of(payload_kind(env.payload))].push_back(env);
  pending_drain_.push_back(std::move(env));
}

void StreamSync::finish(Timestamp horizon) {
  std::lock_guard lock(mutex_);
  while (!buffer_.empty()) {
    auto node = buffer_.extract(buffer_.begin());
    emit_locked(std::move(node.value()));
  }
  elapsed_ = std::max(elapsed_, horizon.seconds);
}

std::vector<SampleEnvelope> StreamSync::drain_emitted() {
  std::lock_guard lock(mutex_);
  std::vector<SampleEnvelope> out;
  out.swap(pending_drain_);
  return out;
}

std::vector<Window> StreamSync::pop_windows(StreamKind channel, double length_s, double hop_s,
                                            double origin_s) {
  if (!(length_s > 0.0) || !(hop_s > 0.0) || hop_s > length_s) {
    throw Error(ErrorCode::kInvalidArgument, "window requires length > 0 and 0 < hop <= length");
  }
  std::lock_guard lock(mutex_);
  auto& next_k = cursors_[CursorKey{channel, length_s, hop_s, origin_s}];
  const auto& timeline = timeline_[index_of(channel)];

  std::vector<Window> out;
  if (!any_emitted_ && elapsed_ <= 0.0) return out;
  while (true) {
    const double start = origin_s + static_cast<double>(next_k) * hop_s;
    const double end = start + length_s;
    if (end > elapsed_) break;

    Window w;
    w.channel = channel;
    w.start = Timestamp{start};
    w.end = Timestamp{end};
    auto first = std::lower_bound(timeline.begin(), timeline.end(), start,
                                  [](const SampleEnvelope& e, double t) { return e.timestamp.seconds < t; });
    auto last = std::lower_bound(first, timeline.end(), end,
                                 [](const SampleEnvelope& e, double t) { return e.timestamp.seconds < t; });
    w.samples.assign(first, last);
    out.push_back(std::move(w));
    ++next_k;
  }
  return out;
}

void StreamSync::discard_before(Timestamp t) {
  std::lock_guard lock(mutex_);
  for (auto& timeline : timeline_) {
    auto cut = std::lower_bound(timeline.begin(), timeline.end(), t.seconds,
                                [](const SampleEnvelope& e, double x) { return e.timestamp.seconds < x; });
    timeline.erase(timeline.begin(), cut);
  }
}

Timestamp StreamSync::elapsed() const {
  std::lock_guard lock(mutex_);
  return Timestamp{elapsed_};
}

std::size_t StreamSync::dropped_count() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

const StreamRegistration* StreamSync::registration(const std::string& stream_id) const {
  std::lock_guard lock(mutex_);
  auto it = streams_.find(stream_id);
  return it == streams_.end() ? nullptr : &it->second;
}

}  // namespace bioloop
