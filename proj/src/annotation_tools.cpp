#include "stgvt/annotation_tools.hpp"

#include <algorithm>
#include <cmath>

#include "stgvt/rng.hpp"

namespace stgvt {

void require_valid(const Track& track) {
  if (track.boxes.empty()) throw InvalidInput("track " + track.video_id + ": no boxes");
  const int first = track.boxes.begin()->first;
  const int last = track.boxes.rbegin()->first;
  if (last - first + 1 != static_cast<int>(track.boxes.size())) {
    throw InvalidInput("track " + track.video_id + ": frames are not contiguous");
  }
  for (const auto& [f, b] : track.boxes) require_valid(b, "track frame " + std::to_string(f));
}

AveragedTrack average_tracks(const Track& forward, const Track& backward,
                             double flag_threshold) {
  require_valid(forward);
  require_valid(backward);
  if (forward.video_id != backward.video_id) {
    throw InvalidInput("average_tracks: tracks come from different videos");
  }
  if (forward.boxes.size() != backward.boxes.size() ||
      forward.boxes.begin()->first != backward.boxes.begin()->first) {
    throw InvalidInput("average_tracks: forward and backward tracks cover different frames");
  }

  AveragedTrack out;
  out.track.video_id = forward.video_id;
  double dist = 0.0;
  auto it = backward.boxes.begin();
  for (const auto& [frame, a] : forward.boxes) {
    const BBox& b = (it++)->second;
    out.track.boxes.emplace(frame, BBox{0.5 * (a.x1 + b.x1), 0.5 * (a.y1 + b.y1),
                                        0.5 * (a.x2 + b.x2), 0.5 * (a.y2 + b.y2)});
    dist += std::abs(a.x1 - b.x1) + std::abs(a.y1 - b.y1) + std::abs(a.x2 - b.x2) +
            std::abs(a.y2 - b.y2);
  }
  out.mean_corner_distance = dist / static_cast<double>(forward.boxes.size());
  out.disagreement_flagged = out.mean_corner_distance > flag_threshold;
  return out;
}

ClipSpec extend_span(const TemporalSpan& source, int target_frames, int video_frames,
                     std::uint64_t rng_seed) {
  require_valid(source);
  if (source.l < 0 || source.r >= video_frames) {
    throw InvalidInput("extend_span: source span lies outside the video");
  }
  if (source.length() > target_frames) {
    throw InvalidInput("extend_span: source span (" + std::to_string(source.length()) +
                       " frames) is longer than the target clip (" +
                       std::to_string(target_frames) + ")");
  }
  if (target_frames > video_frames) {
    throw InvalidInput("extend_span: target clip longer than the video");
  }
  const int slack = target_frames - source.length();
  const int right_room = video_frames - 1 - source.r;
  const int pad_lo = std::max(0, slack - right_room);
  const int pad_hi = std::min(slack, source.l);
  Rng rng(rng_seed);
  const int pad = static_cast<int>(rng.uniform_int(pad_lo, pad_hi));
  ClipSpec c;
  c.source_span = source;
  c.clip_span = {source.l - pad, source.l - pad + target_frames - 1};
  c.target_frames = target_frames;
  return c;
}

}  // namespace stgvt
