#include "stgvt/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace stgvt {

bool is_valid(const BBox& box) {
  return std::isfinite(box.x1) && std::isfinite(box.y1) &&
         std::isfinite(box.x2) && std::isfinite(box.y2) && box.x1 < box.x2 &&
         box.y1 < box.y2;
}

void require_valid(const BBox& box, const std::string& what) {
  if (!is_valid(box)) {
    throw InvalidInput(what + ": expected finite coordinates with x1 < x2 and y1 < y2");
  }
}

void require_valid(const Detection& det) {
  if (det.frame_idx < 0) throw InvalidInput("detection: negative frame index");
  require_valid(det.bbox, "detection bbox");
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    throw InvalidInput("detection: confidence outside [0, 1]");
  }
  for (double v : det.feature) {
    if (!std::isfinite(v)) throw InvalidInput("detection: non-finite feature entry");
  }
}

void require_valid(const TemporalSpan& span) {
  if (span.l > span.r) throw InvalidInput("temporal span: l > r");
}

double box_iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidInput("cosine_similarity: feature length mismatch (" +
                       std::to_string(u.size()) + " vs " +
                       std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double interval_iou(const ContinuousRange& a, const ContinuousRange& b) {
  const double la = a.length();
  const double lb = b.length();
  if (la == 0.0 || lb == 0.0) {
    return (la == 0.0 && lb == 0.0 && a.lo == b.lo) ? 1.0 : 0.0;
  }
  const double inter = std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
  if (inter <= 0.0) return 0.0;
  return inter / (la + lb - inter);
}

}  // namespace stgvt
