#include "stgvt/linker.hpp"

#include <algorithm>
#include <numeric>

namespace stgvt {

void require_valid(const LinkerConfig& cfg) {
  if (cfg.lambda_iou < 0.0 || cfg.lambda_cos < 0.0) {
    throw InvalidInput("linker config: lambda weights must be nonnegative");
  }
  if (cfg.max_boxes_per_frame < 1) {
    throw InvalidInput("linker config: max_boxes_per_frame must be >= 1");
  }
  if (cfg.max_gap < 0) throw InvalidInput("linker config: max_gap must be >= 0");
  if (cfg.max_proposals < 0) {
    throw InvalidInput("linker config: max_proposals must be >= 0");
  }
}

double TubeProposal::mean_confidence() const {
  if (confidences.empty()) return 0.0;
  return std::accumulate(confidences.begin(), confidences.end(), 0.0) /
         static_cast<double>(confidences.size());
}

void require_valid(const TubeProposal& tube) {
  if (tube.boxes.empty()) throw InvalidInput("tube proposal: no boxes");
  if (tube.confidences.size() != tube.boxes.size() ||
      tube.features.size() != tube.boxes.size()) {
    throw InvalidInput("tube proposal: boxes/confidences/features length mismatch");
  }
  for (const BBox& b : tube.boxes) require_valid(b, "tube box");
}

double link_score(const Detection& a, const Detection& b, const LinkerConfig& cfg) {
  if (b.frame_idx != a.frame_idx + 1) {
    throw InvalidInput("link_score: detections are not in consecutive frames (" +
                       std::to_string(a.frame_idx) + " -> " +
                       std::to_string(b.frame_idx) + ")");
  }
  return cfg.lambda_iou * box_iou(a.bbox, b.bbox) +
         cfg.lambda_cos * cosine_similarity(a.feature, b.feature) + a.confidence +
         b.confidence;
}

FrameDetections cap_frame(const FrameDetections& frame, int max_boxes) {
  if (static_cast<int>(frame.size()) <= max_boxes) return frame;
  std::vector<std::size_t> order(frame.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return frame[i].confidence > frame[j].confidence;
  });
  order.resize(static_cast<std::size_t>(max_boxes));
  std::sort(order.begin(), order.end());
  FrameDetections kept;
  kept.reserve(order.size());
  for (std::size_t i : order) kept.push_back(frame[i]);
  return kept;
}

namespace {

struct ActiveTube {
  TubeProposal tube;
  Detection last;       // last real (non-interpolated) detection
  int start_box = 0;    // box index in the start frame, for tie-breaks
  int creation = 0;
};

BBox lerp(const BBox& a, const BBox& b, double w) {
  return {a.x1 + w * (b.x1 - a.x1), a.y1 + w * (b.y1 - a.y1),
          a.x2 + w * (b.x2 - a.x2), a.y2 + w * (b.y2 - a.y2)};
}

// Link score evaluated across a bridged gap: the consecutive-frame requirement is
// waived only inside the linker when max_gap > 0.
double bridged_score(const Detection& a, const Detection& b, const LinkerConfig& cfg) {
  Detection shifted = a;
  shifted.frame_idx = b.frame_idx - 1;
  return link_score(shifted, b, cfg);
}

void append(ActiveTube& active, const Detection& det, double score) {
  TubeProposal& t = active.tube;
  const int gap = det.frame_idx - active.last.frame_idx - 1;
  for (int k = 1; k <= gap; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(gap + 1);
    t.boxes.push_back(lerp(active.last.bbox, det.bbox, w));
    t.confidences.push_back(0.0);
    t.features.push_back(active.last.feature);
  }
  t.boxes.push_back(det.bbox);
  t.confidences.push_back(det.confidence);
  t.features.push_back(det.feature);
  t.link_score_sum += score;
  active.last = det;
}

ActiveTube start_tube(const std::string& video_id, const Detection& det, int box,
                      int creation) {
  ActiveTube a;
  a.tube.video_id = video_id;
  a.tube.start_frame = det.frame_idx;
  a.tube.boxes = {det.bbox};
  a.tube.confidences = {det.confidence};
  a.tube.features = {det.feature};
  a.last = det;
  a.start_box = box;
  a.creation = creation;
  return a;
}

}  // namespace

std::vector<TubeProposal> link_greedy(const std::string& video_id,
                                      const std::vector<FrameDetections>& frames,
                                      const LinkerConfig& cfg) {
  require_valid(cfg);
  std::vector<ActiveTube> active;
  std::vector<ActiveTube> finished;
  int creation = 0;
  int prev_frame = std::numeric_limits<int>::min();

  for (const FrameDetections& raw : frames) {
    if (raw.empty()) continue;
    const int frame = raw.front().frame_idx;
    for (const Detection& d : raw) {
      if (d.frame_idx != frame) {
        throw InvalidInput("link_greedy: mixed frame indices within one frame group");
      }
    }
    if (frame <= prev_frame) {
      throw InvalidInput("link_greedy: frame groups are not strictly increasing");
    }
    prev_frame = frame;
    const FrameDetections dets = cap_frame(raw, cfg.max_boxes_per_frame);

    // Retire tubes that can no longer reach this frame.
    std::vector<ActiveTube> alive;
    for (ActiveTube& a : active) {
      if (frame - a.last.frame_idx - 1 <= cfg.max_gap) {
        alive.push_back(std::move(a));
      } else {
        finished.push_back(std::move(a));
      }
    }
    active = std::move(alive);

    struct Candidate {
      double score;
      int tube;
      int box;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(active.size() * dets.size());
    for (int ti = 0; ti < static_cast<int>(active.size()); ++ti) {
      for (int bi = 0; bi < static_cast<int>(dets.size()); ++bi) {
        const double s = bridged_score(active[static_cast<std::size_t>(ti)].last,
                                       dets[static_cast<std::size_t>(bi)], cfg);
        if (s >= cfg.min_link_score) candidates.push_back({s, ti, bi});
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const Candidate& x, const Candidate& y) {
                if (x.score != y.score) return x.score > y.score;
                if (x.box != y.box) return x.box < y.box;
                const ActiveTube& tx = active[static_cast<std::size_t>(x.tube)];
                const ActiveTube& ty = active[static_cast<std::size_t>(y.tube)];
                if (tx.tube.start_frame != ty.tube.start_frame) {
                  return tx.tube.start_frame < ty.tube.start_frame;
                }
                return tx.creation < ty.creation;
              });

    std::vector<bool> tube_used(active.size(), false);
    std::vector<bool> box_used(dets.size(), false);
    for (const Candidate& c : candidates) {
      const auto ti = static_cast<std::size_t>(c.tube);
      const auto bi = static_cast<std::size_t>(c.box);
      if (tube_used[ti] || box_used[bi]) continue;
      tube_used[ti] = true;
      box_used[bi] = true;
      append(active[ti], dets[bi], c.score);
    }

    // Unmatched tubes stay active; the retirement check above ends them once
    // they fall more than max_gap frames behind.
    for (std::size_t bi = 0; bi < dets.size(); ++bi) {
      if (!box_used[bi]) {
        active.push_back(start_tube(video_id, dets[bi], static_cast<int>(bi), creation++));
      }
    }
  }
  for (ActiveTube& a : active) finished.push_back(std::move(a));

  std::sort(finished.begin(), finished.end(),
            [](const ActiveTube& x, const ActiveTube& y) {
              const double mx = x.tube.mean_confidence();
              const double my = y.tube.mean_confidence();
              if (mx != my) return mx > my;
              if (x.start_box != y.start_box) return x.start_box < y.start_box;
              if (x.tube.start_frame != y.tube.start_frame) {
                return x.tube.start_frame < y.tube.start_frame;
              }
              return x.creation < y.creation;
            });
  std::vector<TubeProposal> out;
  const std::size_t keep =
      std::min(finished.size(), static_cast<std::size_t>(cfg.max_proposals));
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(std::move(finished[i].tube));
  return out;
}

OptimalPath link_optimal_path(const std::vector<FrameDetections>& frames,
                              const LinkerConfig& cfg) {
  require_valid(cfg);
  if (frames.empty()) throw InvalidInput("link_optimal: no frames");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].empty()) {
      throw InvalidInput("link_optimal: frame " + std::to_string(t) +
                         " has no detections");
    }
  }
  const std::size_t n = frames.size();

  if (n == 1) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(frames[0].size()); ++i) {
      if (frames[0][static_cast<std::size_t>(i)].confidence >
          frames[0][static_cast<std::size_t>(best)].confidence) {
        best = i;
      }
    }
    return {{best}, 0.0};
  }

  // best[t][i]: max score of a path from box i in frame t to the last frame.
  std::vector<std::vector<double>> best(n);
  std::vector<std::vector<int>> next(n);
  best[n - 1].assign(frames[n - 1].size(), 0.0);
  next[n - 1].assign(frames[n - 1].size(), -1);
  for (std::size_t t = n - 1; t-- > 0;) {
    best[t].assign(frames[t].size(), -std::numeric_limits<double>::infinity());
    next[t].assign(frames[t].size(), -1);
    for (std::size_t i = 0; i < frames[t].size(); ++i) {
      for (std::size_t j = 0; j < frames[t + 1].size(); ++j) {
        const double s = link_score(frames[t][i], frames[t + 1][j], cfg) + best[t + 1][j];
        if (s > best[t][i]) {
          best[t][i] = s;
          next[t][i] = static_cast<int>(j);
        }
      }
    }
  }

  OptimalPath path;
  int cur = 0;
  for (std::size_t i = 1; i < best[0].size(); ++i) {
    if (best[0][i] > best[0][static_cast<std::size_t>(cur)]) cur = static_cast<int>(i);
  }
  path.score = best[0][static_cast<std::size_t>(cur)];
  for (std::size_t t = 0; t < n; ++t) {
    path.box_indices.push_back(cur);
    cur = next[t][static_cast<std::size_t>(cur)];
  }
  return path;
}

TubeProposal link_optimal(const std::string& video_id,
                          const std::vector<FrameDetections>& frames,
                          const LinkerConfig& cfg) {
  const OptimalPath path = link_optimal_path(frames, cfg);
  TubeProposal tube;
  tube.video_id = video_id;
  tube.start_frame = frames.front().front().frame_idx;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Detection& d = frames[t][static_cast<std::size_t>(path.box_indices[t])];
    if (d.frame_idx != tube.start_frame + static_cast<int>(t)) {
      throw InvalidInput("link_optimal: frame indices are not consecutive");
    }
    tube.boxes.push_back(d.bbox);
    tube.confidences.push_back(d.confidence);
    tube.features.push_back(d.feature);
  }
  tube.link_score_sum = path.score;
  return tube;
}

std::vector<int> sampled_indices(int tube_length, int stride) {
  if (stride < 1) throw InvalidInput("subsample: stride must be >= 1");
  std::vector<int> idx;
  for (int k = 0; k < tube_length; k += stride) idx.push_back(k);
  return idx;
}

std::vector<SampledFrame> subsample_tube(const TubeProposal& tube, int stride) {
  std::vector<SampledFrame> out;
  for (int k : sampled_indices(tube.size(), stride)) {
    const auto i = static_cast<std::size_t>(k);
    out.push_back({k, tube.start_frame + k, tube.boxes[i], tube.features[i]});
  }
  return out;
}

}  // namespace stgvt
