#include "stgvt/supervision.hpp"

#include <algorithm>
#include <cmath>

#include "stgvt/scorer.hpp"

namespace stgvt {

void require_valid(const GroundTruthAnnotation& gt) {
  require_valid(gt.span);
  if (static_cast<int>(gt.boxes.size()) != gt.span.length() ||
      gt.boxes.begin()->first != gt.span.l || gt.boxes.rbegin()->first != gt.span.r) {
    throw InvalidInput("annotation " + gt.sample_id +
                       ": boxes must cover exactly the span frames");
  }
  for (const auto& [frame, box] : gt.boxes) {
    require_valid(box, "annotation " + gt.sample_id + " frame " + std::to_string(frame));
  }
}

const char* to_string(SampleLabel label) {
  switch (label) {
    case SampleLabel::kPositive:
      return "positive";
    case SampleLabel::kNegative:
      return "negative";
    case SampleLabel::kIgnored:
      return "ignored";
  }
  return "unknown";
}

namespace {

void require_same_video(const TubeProposal& tube, const GroundTruthAnnotation& gt) {
  if (tube.video_id != gt.video_id) {
    throw InvalidInput("video mismatch: tube from '" + tube.video_id +
                       "' vs annotation from '" + gt.video_id + "'");
  }
}

int shared_frames(const TubeProposal& tube, const GroundTruthAnnotation& gt) {
  const int lo = std::max(tube.start_frame, gt.span.l);
  const int hi = std::min(tube.end_frame(), gt.span.r);
  return std::max(0, hi - lo + 1);
}

}  // namespace

double overlap_score(const TubeProposal& tube, const GroundTruthAnnotation& gt) {
  require_same_video(tube, gt);
  return static_cast<double>(shared_frames(tube, gt)) /
         static_cast<double>(gt.span.length());
}

double tube_iou_score(const TubeProposal& tube, const GroundTruthAnnotation& gt) {
  require_same_video(tube, gt);
  const int lo = std::max(tube.start_frame, gt.span.l);
  const int hi = std::min(tube.end_frame(), gt.span.r);
  if (hi < lo) return 0.0;
  // Running mean: identical per-frame values give exactly that value back,
  // so scores sitting on a band threshold are not pushed across it.
  double mean = 0.0;
  for (int f = lo; f <= hi; ++f) {
    const double iou = box_iou(tube.boxes[static_cast<std::size_t>(f - tube.start_frame)],
                               gt.boxes.at(f));
    mean += (iou - mean) / static_cast<double>(f - lo + 1);
  }
  return mean;
}

SampleLabel label_from_scores(double s_overlap, double s_iou) {
  if (s_overlap >= kPositiveOverlap && s_iou > kPositiveIoU) return SampleLabel::kPositive;
  if (s_iou < kNegativeIoU) return SampleLabel::kNegative;
  return SampleLabel::kIgnored;
}

SampleLabel label_tube(const TubeProposal& tube, const GroundTruthAnnotation& gt) {
  return label_from_scores(overlap_score(tube, gt), tube_iou_score(tube, gt));
}

Offsets regression_target(int t_local, const TemporalSpan& span_local, int n_frames) {
  if (n_frames < 1) throw InvalidInput("regression_target: n_frames must be >= 1");
  if (!span_local.contains(t_local)) {
    throw InvalidInput("regression_target: frame " + std::to_string(t_local) +
                       " lies outside the span [" + std::to_string(span_local.l) +
                       ", " + std::to_string(span_local.r) + "]");
  }
  const double n = static_cast<double>(n_frames);
  return {static_cast<double>(t_local - span_local.l) / n,
          static_cast<double>(span_local.r - t_local) / n};
}

int frame_relevance_target(int t_local, const TemporalSpan& span_local) {
  return span_local.contains(t_local) ? 1 : 0;
}

TemporalSpan local_span(const TubeProposal& tube, const GroundTruthAnnotation& gt) {
  return {gt.span.l - tube.start_frame, gt.span.r - tube.start_frame};
}

double binary_cross_entropy(double p, int y) {
  const double q = y == 1 ? p : 1.0 - p;
  return -std::log(std::max(q, kLogClamp));
}

double binary_cross_entropy_grad(double p, int y) {
  const double q = y == 1 ? p : 1.0 - p;
  if (q < kLogClamp) return 0.0;
  return y == 1 ? -1.0 / p : 1.0 / (1.0 - p);
}

ContinuousRange offsets_range(int t_local, const Offsets& offsets, int n_frames) {
  const double t = static_cast<double>(t_local);
  const double n = static_cast<double>(n_frames);
  return {t - offsets.delta_l * n, t + offsets.delta_r * n};
}

double regression_loss(const Offsets& pred, const Offsets& target, int t_local,
                       int n_frames) {
  const double iou = interval_iou(offsets_range(t_local, pred, n_frames),
                                  offsets_range(t_local, target, n_frames));
  return -std::log(std::max(iou, kLogClamp));
}

Offsets regression_loss_grad(const Offsets& pred, const Offsets& target,
                             int t_local, int n_frames) {
  const ContinuousRange p = offsets_range(t_local, pred, n_frames);
  const ContinuousRange g = offsets_range(t_local, target, n_frames);
  const double inter = std::min(p.hi, g.hi) - std::max(p.lo, g.lo);
  const double uni = std::max(p.hi, g.hi) - std::min(p.lo, g.lo);
  if (inter <= 0.0 || uni <= 0.0 || inter / uni < kLogClamp) return {};
  // loss = -ln(inter) + ln(union); only the endpoints of p move.
  const double d_inter_dlo = p.lo > g.lo ? -1.0 : 0.0;
  const double d_union_dlo = p.lo < g.lo ? -1.0 : 0.0;
  const double d_inter_dhi = p.hi < g.hi ? 1.0 : 0.0;
  const double d_union_dhi = p.hi > g.hi ? 1.0 : 0.0;
  const double dloss_dlo = -d_inter_dlo / inter + d_union_dlo / uni;
  const double dloss_dhi = -d_inter_dhi / inter + d_union_dhi / uni;
  const double n = static_cast<double>(n_frames);
  // lo = t - delta_l * N, hi = t + delta_r * N
  return {-n * dloss_dlo, n * dloss_dhi};
}

LossBreakdown total_loss(const std::vector<TubeSupervision>& tubes,
                         const LossConfig& cfg) {
  LossBreakdown out;
  for (const TubeSupervision& s : tubes) {
    if (s.prediction == nullptr) throw InvalidInput("total_loss: missing prediction");
    if (s.label == SampleLabel::kIgnored) {
      throw InvalidInput("total_loss: ignored tubes must be excluded by the caller");
    }
    const ScoreBundle& b = *s.prediction;
    const std::size_t n = b.relevance.size();
    if (s.relevance_targets.size() != n || s.offset_targets.size() != n ||
        b.offsets.size() != n || b.sampled_local_indices.size() != n) {
      throw InvalidInput("total_loss: targets not aligned with sampled frames");
    }
    const int match_target = s.label == SampleLabel::kPositive ? 1 : 0;
    const double l_match = binary_cross_entropy(b.match, match_target);
    out.match_loss += l_match;
    out.n_frames += static_cast<int>(n);
    double l_cls = 0.0, l_reg = 0.0;
    if (match_target == 1) {
      int n_pos = 0;
      double cls_sum = 0.0, reg_sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        cls_sum += binary_cross_entropy(b.relevance[k], s.relevance_targets[k]);
        if (s.relevance_targets[k] == 1) {
          ++n_pos;
          reg_sum += regression_loss(b.offsets[k], s.offset_targets[k],
                                     b.sampled_local_indices[k], s.n_frames);
        }
      }
      if (n_pos == 0) {
        throw InvalidInput("total_loss: positive tube without positive frames");
      }
      l_cls = cls_sum / static_cast<double>(n);
      l_reg = reg_sum / static_cast<double>(n_pos);
      out.n_pos_frames += n_pos;
    }
    out.cls_loss += l_cls;
    out.reg_loss += l_reg;
    out.total += cfg.lambda1 * l_match + cfg.lambda2 * l_cls + cfg.lambda3 * l_reg;
  }
  return out;
}

}  // namespace stgvt
