#include "stgvt/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "stgvt/rng.hpp"

namespace stgvt {

namespace {

constexpr double kBaseConfidence = 0.9;

BBox jitter(const BBox& b, double noise, Rng& rng) {
  if (noise <= 0.0) return b;
  BBox j{b.x1 + rng.uniform(-noise, noise), b.y1 + rng.uniform(-noise, noise),
         b.x2 + rng.uniform(-noise, noise), b.y2 + rng.uniform(-noise, noise)};
  j.x2 = std::max(j.x2, j.x1 + 1.0);
  j.y2 = std::max(j.y2, j.y1 + 1.0);
  return j;
}

}  // namespace

SyntheticScene generate_scene(const SceneSpec& spec) {
  if (spec.n_persons < 2) throw InvalidInput("synthetic scene: need at least 2 persons");
  if (spec.n_frames < 1) throw InvalidInput("synthetic scene: need at least 1 frame");
  if (!(spec.frame_width > 0.0 && spec.frame_height > 0.0)) {
    throw InvalidInput("synthetic scene: frame size must be positive");
  }
  const int dim = spec.feature_dim == 0 ? spec.n_persons : spec.feature_dim;
  if (dim < spec.n_persons) {
    throw InvalidInput("synthetic scene: feature_dim smaller than the number of persons");
  }
  if (spec.noise_level < 0.0) throw InvalidInput("synthetic scene: negative noise level");

  Rng rng(spec.seed);
  SyntheticScene scene;
  scene.video_id = spec.video_id;
  scene.target_person = static_cast<int>(rng.uniform_int(0, spec.n_persons - 1));

  TemporalSpan span = spec.gt_span;
  if (span.l < 0) {
    const int min_len = std::min(std::max(spec.min_span_frames, 1), spec.n_frames);
    const int len = static_cast<int>(rng.uniform_int(min_len, spec.n_frames));
    const int l = static_cast<int>(rng.uniform_int(0, spec.n_frames - len));
    span = {l, l + len - 1};
  }
  if (span.l > span.r || span.l < 0 || span.r >= spec.n_frames) {
    throw InvalidInput("synthetic scene: GT span outside the clip");
  }

  // Lane geometry and straight-line paths.
  const double lane_h = spec.frame_height / spec.n_persons;
  const double box_h = 0.8 * lane_h;
  const double box_w = 0.15 * spec.frame_width;
  struct Path {
    double x_start, x_end, y;
  };
  std::vector<Path> paths;
  for (int p = 0; p < spec.n_persons; ++p) {
    const double max_x = spec.frame_width - box_w;
    const double a = rng.uniform(0.0, max_x);
    const double b = rng.uniform(0.0, max_x);
    paths.push_back({a, b, p * lane_h + 0.1 * lane_h});
  }

  const double feat_noise = 0.01 * spec.noise_level;
  const double conf_noise = std::min(0.01 * spec.noise_level, kBaseConfidence);
  for (int t = 0; t < spec.n_frames; ++t) {
    const double s = spec.n_frames == 1 ? 0.0 : static_cast<double>(t) / (spec.n_frames - 1);
    FrameDetections frame;
    for (int p = 0; p < spec.n_persons; ++p) {
      const Path& path = paths[static_cast<std::size_t>(p)];
      const double x = path.x_start + s * (path.x_end - path.x_start);
      const BBox truth{x, path.y, x + box_w, path.y + box_h};
      if (p == scene.target_person && span.contains(t)) {
        scene.annotation.boxes.emplace(t, truth);
      }
      Detection d;
      d.frame_idx = t;
      d.bbox = jitter(truth, spec.noise_level, rng);
      d.confidence = kBaseConfidence - (conf_noise > 0.0 ? rng.uniform(0.0, conf_noise) : 0.0);
      d.feature.assign(static_cast<std::size_t>(dim), 0.0);
      d.feature[static_cast<std::size_t>(p)] = 1.0;
      if (feat_noise > 0.0) {
        for (double& v : d.feature) v += rng.uniform(-feat_noise, feat_noise);
      }
      frame.push_back(std::move(d));
    }
    scene.frames.push_back(std::move(frame));
  }

  GroundTruthAnnotation& gt = scene.annotation;
  gt.sample_id = spec.sample_id;
  gt.video_id = spec.video_id;
  gt.span = span;
  gt.sentence = "the person in lane " + std::to_string(scene.target_person) +
                " walks steadily across the room";
  return scene;
}

SyntheticFiles generate_synthetic(const SceneSpec& spec) {
  SyntheticScene scene = generate_scene(spec);
  SyntheticDataset data;
  data.detections.videos.emplace(scene.video_id, std::move(scene.frames));
  data.annotations.push_back(std::move(scene.annotation));
  return to_files(data);
}

SyntheticDataset generate_dataset(const DatasetSpec& spec) {
  if (spec.n_scenes < 0) throw InvalidInput("synthetic dataset: negative scene count");
  if (spec.min_persons > spec.max_persons || spec.min_frames > spec.max_frames) {
    throw InvalidInput("synthetic dataset: empty persons or frames range");
  }
  Rng rng(spec.seed);
  SyntheticDataset data;
  for (int i = 0; i < spec.n_scenes; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%04d", i);
    SceneSpec s;
    s.video_id = id;
    s.sample_id = std::string(id) + "_q0";
    s.n_persons = static_cast<int>(rng.uniform_int(spec.min_persons, spec.max_persons));
    s.n_frames = static_cast<int>(rng.uniform_int(spec.min_frames, spec.max_frames));
    s.frame_width = spec.frame_width;
    s.frame_height = spec.frame_height;
    s.noise_level = spec.noise_level;
    s.feature_dim = spec.feature_dim == 0 ? spec.max_persons : spec.feature_dim;
    s.min_span_frames = spec.min_span_frames;
    s.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    SyntheticScene scene = generate_scene(s);
    data.detections.feature_dim = s.feature_dim;
    data.detections.videos.emplace(scene.video_id, std::move(scene.frames));
    data.annotations.push_back(std::move(scene.annotation));
  }
  return data;
}

SyntheticFiles to_files(const SyntheticDataset& data) {
  std::ostringstream det, ann;
  write_detections(det, data.detections);
  write_annotations(ann, data.annotations);
  return {det.str(), ann.str()};
}

}  // namespace stgvt
