#pragma once

// Merges independently clocked sample streams into one time-ordered
// timeline and cuts it into fixed sliding windows.
//
// Envelopes pass through a reorder buffer of depth `jitter_tolerance_s`:
// an envelope is released once the newest timestamp seen is at least
// `jitter_tolerance_s` past it. Anything that sorts before the last released
// envelope is dropped, so windows never change after they are handed out.

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "bioloop/core.hpp"

namespace bioloop {

struct StreamRegistration {
  StreamDescriptor descriptor;
  double clock_offset_s = 0.0;  // added to producer time to get session time
};

struct SyncMark {
  double producer_t = 0.0;
  double session_t = 0.0;
};

enum class IngestOutcome { kAccepted, kReordered, kDroppedLate };
std::string_view to_string(IngestOutcome o);

struct Window {
  StreamKind channel = StreamKind::kPupilGaze;
  Timestamp start;
  Timestamp end;
  std::vector<SampleEnvelope> samples;  // every timestamp in [start, end)

  double length_s() const { return end.seconds - start.seconds; }
};

// Median of (session_t - producer_t). Throws kInsufficientMarks below two marks.
double median_clock_offset(std::span<const SyncMark> marks);

class StreamSync {
 public:
  explicit StreamSync(double jitter_tolerance_s = 0.25);

  StreamSync(const StreamSync&) = delete;
  StreamSync& operator=(const StreamSync&) = delete;

  // Throws kDuplicateStream, or kInvalidArgument for a bad descriptor.
  StreamRegistration register_stream(const StreamDescriptor& desc);

  // Applies the offset to every later envelope of the stream.
  double estimate_offset(const std::string& stream_id, std::span<const SyncMark> marks);

  // Thread-safe. The envelope timestamp is in producer time; the sequence
  // number is assigned here. Throws kUnknownStream / kInvalidArgument.
  IngestOutcome ingest(SampleEnvelope env);

  // Releases everything still buffered and declares the timeline complete
  // up to `horizon` (windows ending at or before it become poppable).
  void finish(Timestamp horizon);

  // Envelopes released since the previous call, in total order.
  std::vector<SampleEnvelope> drain_emitted();

  // Windows [origin + k*hop, origin + k*hop + length) of one channel that
  // have fully elapsed and were not returned before for this
  // (channel, length, hop, origin) combination.
  std::vector<Window> pop_windows(StreamKind channel, double length_s, double hop_s,
                                  double origin_s = 0.0);

  // Forget stored timeline samples older than `t`.
  void discard_before(Timestamp t);

  Timestamp elapsed() const;
  std::size_t dropped_count() const;
  const StreamRegistration* registration(const std::string& stream_id) const;

 private:
  void release_ready_locked(double up_to);
  void emit_locked(SampleEnvelope env);

  double jitter_tolerance_s_;
  mutable std::mutex mutex_;

  std::unordered_map<std::string, StreamRegistration> streams_;
  std::multiset<SampleEnvelope, EnvelopeLess> buffer_;
  std::vector<SampleEnvelope> pending_drain_;
  std::array<std::vector<SampleEnvelope>, kStreamKindCount> timeline_;

  using CursorKey = std::tuple<StreamKind, double, double, double>;
  std::map<CursorKey, long long> cursors_;

  std::uint64_t next_sequence_ = 0;
  bool any_seen_ = false;
  double max_seen_ = 0.0;
  bool any_emitted_ = false;
  SampleEnvelope last_emitted_;
  double elapsed_ = 0.0;
  std::size_t dropped_ = 0;
};

}  // namespace bioloop
