#include "stgvt/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace stgvt {

double viou(const Prediction& pred, const GroundTruthAnnotation& gt) {
  if (pred.video_id != gt.video_id) {
    throw InvalidInput("viou: prediction for video '" + pred.video_id +
                       "' scored against annotation of '" + gt.video_id + "'");
  }
  const int lo = std::max(pred.span.l, gt.span.l);
  const int hi = std::min(pred.span.r, gt.span.r);
  if (hi < lo) return 0.0;
  double sum = 0.0;
  for (int t = lo; t <= hi; ++t) sum += box_iou(pred.boxes.at(t), gt.boxes.at(t));
  const int inter = hi - lo + 1;
  const int uni = pred.span.length() + gt.span.length() - inter;
  return sum / static_cast<double>(uni);
}

double tiou(const TemporalSpan& a, const TemporalSpan& b) {
  const int inter = std::max(0, std::min(a.r, b.r) - std::max(a.l, b.l) + 1);
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport evaluate(const std::vector<Prediction>& preds,
                    const std::map<std::string, GroundTruthAnnotation>& gts,
                    const std::vector<double>& thresholds) {
  std::map<std::string, const Prediction*> by_sample;
  for (const Prediction& p : preds) {
    if (!gts.contains(p.sample_id)) {
      throw InvalidInput("evaluate: prediction for unknown sample '" + p.sample_id + "'");
    }
    if (!by_sample.emplace(p.sample_id, &p).second) {
      throw InvalidInput("evaluate: duplicate prediction for sample '" + p.sample_id + "'");
    }
  }

  EvalReport report;
  for (const auto& [id, gt] : gts) {
    EvalRow row;
    row.sample_id = id;
    if (auto it = by_sample.find(id); it != by_sample.end()) {
      row.viou = viou(*it->second, gt);
      row.tiou = tiou(it->second->span, gt.span);
      row.predicted = true;
    }
    report.rows.push_back(row);
  }

  const double n = static_cast<double>(report.rows.size());
  for (double th : thresholds) report.viou_at[th] = 0.0;
  if (report.rows.empty()) return report;
  for (const EvalRow& r : report.rows) {
    report.m_viou += r.viou;
    report.m_tiou += r.tiou;
    for (double th : thresholds) {
      if (r.viou > th) report.viou_at[th] += 1.0;
    }
  }
  report.m_viou /= n;
  report.m_tiou /= n;
  for (auto& [th, v] : report.viou_at) v /= n;
  return report;
}

std::string format_report(const EvalReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-16s %10s\n", "metric", "value");
  out += line;
  std::snprintf(line, sizeof(line), "%-16s %9.2f%%\n", "m_vIoU", 100.0 * report.m_viou);
  out += line;
  for (const auto& [th, v] : report.viou_at) {
    char name[32];
    std::snprintf(name, sizeof(name), "vIoU@%g", th);
    std::snprintf(line, sizeof(line), "%-16s %9.2f%%\n", name, 100.0 * v);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-16s %9.2f%%\n", "m_tIoU", 100.0 * report.m_tiou);
  out += line;
  std::snprintf(line, sizeof(line), "%-16s %10zu\n", "samples", report.rows.size());
  out += line;
  return out;
}

}  // namespace stgvt
