#pragma once

// Inference decoding: pick the best-matching tube, then trim it in time.
//
// Trimming starts from the sampled frame with the highest relevance and its
// predicted range R = (t - delta_l * N, t + delta_r * N). The remaining
// sampled frames whose relevance exceeds epsilon are visited in descending
// relevance order; a frame whose range overlaps the current merged range is
// folded into it (interval hull), a disjoint one is skipped.

#include <map>
#include <string>
#include <vector>

#include "stgvt/linker.hpp"
#include "stgvt/scorer.hpp"

namespace stgvt {

struct DecoderConfig {
  double epsilon = 0.5;
  int stride = kDefaultStride;
};

void require_valid(const DecoderConfig& cfg);

struct Prediction {
  std::string sample_id;
  std::string video_id;
  TemporalSpan span;          // absolute frame indices
  std::map<int, BBox> boxes;  // defined exactly on span
  double match_score = 0.0;
};

// Index of the highest match; ties prefer the longer tube, then the smaller
// index.
std::size_t select_tube(const std::vector<TubeProposal>& tubes,
                        const std::vector<ScoreBundle>& bundles);

// (t - delta_l * N, t + delta_r * N) clipped to [0, N - 1].
ContinuousRange offsets_to_range(int t_local, const Offsets& offsets, int n_frames);

// Trimmed span in tube-local integer frames. The continuous range is rounded
// outward; a 1e-9 tolerance absorbs floating-point noise so exact integer
// endpoints stay exact.
TemporalSpan trim_local_span(int n_frames, const ScoreBundle& bundle,
                             const DecoderConfig& cfg);

Prediction trim_tube(const TubeProposal& tube, const ScoreBundle& bundle,
                     const DecoderConfig& cfg);

// Piecewise-constant expansion: each frame takes the value of the nearest
// sampled index, ties toward the earlier sample.
std::vector<double> expand_sampled_relevance(const std::vector<double>& relevance,
                                             const std::vector<int>& sampled_local_indices,
                                             int n_frames);

}  // namespace stgvt
