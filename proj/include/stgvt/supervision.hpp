#pragma once

// Training supervision for tube-sentence pairs: positive/negative banding of
// proposals, per-frame relevance and boundary-regression targets, and the
// composite matching/classification/regression loss. Everything here is a
// pure function; derivatives are provided for the two leaf losses so they can
// be checked against finite differences.

#include <map>
#include <string>
#include <vector>

#include "stgvt/geometry.hpp"
#include "stgvt/linker.hpp"

namespace stgvt {

struct GroundTruthAnnotation {
  std::string sample_id;
  std::string video_id;
  std::string sentence;
  TemporalSpan span;
  std::map<int, BBox> boxes;  // defined exactly on span
};

void require_valid(const GroundTruthAnnotation& gt);

enum class SampleLabel { kPositive, kNegative, kIgnored };

const char* to_string(SampleLabel label);

struct LossConfig {
  double lambda1 = 1.0;  // matching
  double lambda2 = 1.0;  // frame relevance
  double lambda3 = 2.0;  // boundary regression
};

// Offsets to the left/right boundary, normalized by the tube length.
struct Offsets {
  double delta_l = 0.0;
  double delta_r = 0.0;

  bool operator==(const Offsets&) const = default;
};

inline constexpr double kLogClamp = 1e-7;
inline constexpr double kPositiveOverlap = 0.9;
inline constexpr double kPositiveIoU = 0.5;
inline constexpr double kNegativeIoU = 0.2;

// Fraction of GT frames the tube covers.
double overlap_score(const TubeProposal& tube, const GroundTruthAnnotation& gt);
// Mean box IoU over frames shared by tube and GT; 0 if none are shared.
double tube_iou_score(const TubeProposal& tube, const GroundTruthAnnotation& gt);

SampleLabel label_from_scores(double s_overlap, double s_iou);
SampleLabel label_tube(const TubeProposal& tube, const GroundTruthAnnotation& gt);

// delta_l = (t - l) / N, delta_r = (r - t) / N for t inside the span.
Offsets regression_target(int t_local, const TemporalSpan& span_local, int n_frames);
int frame_relevance_target(int t_local, const TemporalSpan& span_local);

// GT span expressed in tube-local frame indices (may extend past the tube).
TemporalSpan local_span(const TubeProposal& tube, const GroundTruthAnnotation& gt);

// -ln(max(q, kLogClamp)) with q = p for y = 1 and 1 - p for y = 0.
double binary_cross_entropy(double p, int y);
// d/dp of binary_cross_entropy; 0 where the clamp is active.
double binary_cross_entropy_grad(double p, int y);

// Range [t - delta_l * N, t + delta_r * N] reconstructed from offsets.
ContinuousRange offsets_range(int t_local, const Offsets& offsets, int n_frames);

// -ln(IoU) of the reconstructed predicted and target ranges, IoU clamped at
// kLogClamp.
double regression_loss(const Offsets& pred, const Offsets& target, int t_local,
                       int n_frames);
// Gradient of regression_loss with respect to pred (delta_l, delta_r).
Offsets regression_loss_grad(const Offsets& pred, const Offsets& target,
                             int t_local, int n_frames);

struct ScoreBundle;

// Supervision for one non-ignored tube. Targets are aligned with the bundle's
// sampled frames; n_frames is the raw tube length used by the offsets.
struct TubeSupervision {
  const ScoreBundle* prediction = nullptr;
  SampleLabel label = SampleLabel::kNegative;
  std::vector<int> relevance_targets;
  std::vector<Offsets> offset_targets;
  int n_frames = 0;
};

struct LossBreakdown {
  double match_loss = 0.0;
  double cls_loss = 0.0;
  double reg_loss = 0.0;
  double total = 0.0;
  int n_frames = 0;
  int n_pos_frames = 0;
};

LossBreakdown total_loss(const std::vector<TubeSupervision>& tubes,
                         const LossConfig& cfg);

}  // namespace stgvt
