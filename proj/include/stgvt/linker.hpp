#pragma once

// Tube proposal generation: per-frame person detections are linked across
// consecutive frames into spatio-temporal tubes.
//
// The link score between a box in frame t and a box in frame t+1 is
//
//   S(a, b) = lambda_iou * IoU(a, b) + lambda_cos * cos(f(a), f(b))
//             + conf(a) + conf(b)
//
// link_greedy builds many tubes per video with one-to-one greedy matching at
// each frame transition. link_optimal is the exact single best full-length
// path (dynamic programming) and serves as the quality oracle for the greedy
// linker.

#include <limits>
#include <string>
#include <vector>

#include "stgvt/geometry.hpp"

namespace stgvt {

struct LinkerConfig {
  double lambda_iou = 0.7;
  double lambda_cos = 0.3;
  // A tube is extended only by a box whose link score is >= this value.
  double min_link_score = 1.0;
  // Frames a tube may stay unmatched before it terminates. Bridged frames are
  // filled by linear box interpolation with zero confidence.
  int max_gap = 0;
  int max_boxes_per_frame = 101;
  int max_proposals = 32;
};

void require_valid(const LinkerConfig& cfg);

struct TubeProposal {
  std::string video_id;
  int start_frame = 0;
  std::vector<BBox> boxes;
  std::vector<double> confidences;
  std::vector<FeatureVec> features;
  double link_score_sum = 0.0;

  int size() const { return static_cast<int>(boxes.size()); }
  int end_frame() const { return start_frame + size() - 1; }
  TemporalSpan span() const { return {start_frame, end_frame()}; }
  double mean_confidence() const;
};

void require_valid(const TubeProposal& tube);

// All detections of one frame. Every element shares the same frame_idx.
using FrameDetections = std::vector<Detection>;

double link_score(const Detection& a, const Detection& b, const LinkerConfig& cfg);

// Keeps the `max_boxes` highest-confidence detections (stable on ties), in
// their original relative order.
FrameDetections cap_frame(const FrameDetections& frame, int max_boxes);

// Greedy multi-tube linking over one video. `frames` must be sorted by
// frame index; missing frame indices count as frames without detections.
std::vector<TubeProposal> link_greedy(const std::string& video_id,
                                      const std::vector<FrameDetections>& frames,
                                      const LinkerConfig& cfg);

// Box indices (into each frame) of the chosen path plus its total score.
struct OptimalPath {
  std::vector<int> box_indices;
  double score = 0.0;
};

// Exact best full-length path by dynamic programming. Every frame must have at
// least one detection and frame indices must be consecutive. Ties go to the
// lexicographically smallest box-index sequence; a single-frame input is
// ranked by confidence.
OptimalPath link_optimal_path(const std::vector<FrameDetections>& frames,
                              const LinkerConfig& cfg);

TubeProposal link_optimal(const std::string& video_id,
                          const std::vector<FrameDetections>& frames,
                          const LinkerConfig& cfg);

struct SampledFrame {
  int local_index = 0;
  int frame_idx = 0;
  BBox bbox;
  FeatureVec feature;
};

// Tube-local indices 0, stride, 2*stride, ...
std::vector<int> sampled_indices(int tube_length, int stride);
std::vector<SampledFrame> subsample_tube(const TubeProposal& tube, int stride);

}  // namespace stgvt
