#pragma once

// Spatio-temporal grounding metrics.
//
//   vIoU = (1 / |T_union|) * sum over t in T_inter of IoU(pred_t, gt_t)
//
// with T_inter / T_union the intersection / union of the predicted and
// ground-truth frame sets. tIoU is the same ratio on frame counts alone.

#include <map>
#include <string>
#include <vector>

#include "stgvt/decoder.hpp"
#include "stgvt/supervision.hpp"

namespace stgvt {

struct EvalRow {
  std::string sample_id;
  double viou = 0.0;
  double tiou = 0.0;
  bool predicted = false;
};

struct EvalReport {
  double m_viou = 0.0;
  std::map<double, double> viou_at;  // threshold -> fraction with vIoU > threshold
  double m_tiou = 0.0;
  std::vector<EvalRow> rows;  // ordered by sample_id
};

double viou(const Prediction& pred, const GroundTruthAnnotation& gt);
double tiou(const TemporalSpan& a, const TemporalSpan& b);

// One row per ground truth; a ground truth without a prediction scores 0.
// Throws on duplicate predictions or predictions without a ground truth.
EvalReport evaluate(const std::vector<Prediction>& preds,
                    const std::map<std::string, GroundTruthAnnotation>& gts,
                    const std::vector<double>& thresholds = {0.3, 0.5});

// Fixed-width text table of the aggregates.
std::string format_report(const EvalReport& report);

}  // namespace stgvt
