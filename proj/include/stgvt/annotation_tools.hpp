#pragma once

// Dataset construction helpers: merging forward/backward tracker runs into
// one annotation track, and padding an annotated span out to a fixed clip
// length at a random position.

#include <cstdint>
#include <map>
#include <string>

#include "stgvt/geometry.hpp"

namespace stgvt {

struct Track {
  std::string video_id;
  std::map<int, BBox> boxes;  // contiguous frames
};

void require_valid(const Track& track);

struct AveragedTrack {
  Track track;
  bool disagreement_flagged = false;
  // Mean over frames of the L1 distance between the two boxes' corners.
  double mean_corner_distance = 0.0;
};

inline constexpr double kDefaultFlagThreshold = 20.0;

AveragedTrack average_tracks(const Track& forward, const Track& backward,
                             double flag_threshold = kDefaultFlagThreshold);

struct ClipSpec {
  TemporalSpan source_span;
  TemporalSpan clip_span;
  int target_frames = 0;
};

// Extends `source` to exactly target_frames frames inside [0, video_frames).
// The left padding is uniform over every feasible value.
ClipSpec extend_span(const TemporalSpan& source, int target_frames, int video_frames,
                     std::uint64_t rng_seed);

}  // namespace stgvt
