#pragma once

// Shared value types and geometric/vector primitives. Every other stgvt
// module builds on these.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stgvt {

// Raised when an input breaks a documented invariant (bad box, mismatched
// feature lengths, inconsistent annotation, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Axis-aligned box in corner format. Area is (x2 - x1) * (y2 - y1) with no
// +1 pixel correction.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const BBox&) const = default;
};

bool is_valid(const BBox& box);
// Throws InvalidInput naming `what` if the box is degenerate or non-finite.
void require_valid(const BBox& box, const std::string& what = "bbox");

using FeatureVec = std::vector<double>;

struct Detection {
  int frame_idx = 0;
  BBox bbox;
  double confidence = 0.0;
  FeatureVec feature;
};

void require_valid(const Detection& det);

// Inclusive integer frame span [l, r].
struct TemporalSpan {
  int l = 0;
  int r = 0;

  int length() const { return r - l + 1; }
  bool contains(int t) const { return t >= l && t <= r; }

  bool operator==(const TemporalSpan&) const = default;
};

void require_valid(const TemporalSpan& span);

// Real-valued frame range [lo, hi].
struct ContinuousRange {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }

  bool operator==(const ContinuousRange&) const = default;
};

double box_iou(const BBox& a, const BBox& b);

// Cosine of the angle between u and v. A zero vector yields 0.
// Throws InvalidInput on length mismatch.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Length-measure IoU of two ranges. Two identical zero-length ranges give 1;
// a zero-length range against anything else gives 0.
double interval_iou(const ContinuousRange& a, const ContinuousRange& b);

}  // namespace stgvt
