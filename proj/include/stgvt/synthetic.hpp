#pragma once

// Desk-scale synthetic scenes: several people walking along straight lines,
// one of them the described target. Each person keeps to a horizontal lane so
// boxes of different people never overlap, and carries a one-hot appearance
// feature so cosine similarity separates identities.

#include <cstdint>
#include <string>
#include <vector>

#include "stgvt/dataio.hpp"

namespace stgvt {

struct SceneSpec {
  std::string video_id = "synth_0000";
  std::string sample_id = "synth_0000_q0";
  int n_persons = 3;
  int n_frames = 90;
  double frame_width = 640.0;
  double frame_height = 480.0;
  // Inclusive GT span; l < 0 draws a random span of at least min_span_frames.
  TemporalSpan gt_span{-1, -1};
  int min_span_frames = 12;
  // Box coordinates get uniform jitter in [-noise, noise]; features get
  // 0.01 * noise and confidences lose up to 0.01 * noise.
  double noise_level = 0.0;
  int feature_dim = 0;  // 0 means n_persons
  std::uint64_t seed = 0;
};

struct SyntheticScene {
  std::string video_id;
  std::vector<FrameDetections> frames;
  GroundTruthAnnotation annotation;
  int target_person = 0;
};

SyntheticScene generate_scene(const SceneSpec& spec);

struct SyntheticFiles {
  std::string detections_jsonl;
  std::string annotations_jsonl;
};

SyntheticFiles generate_synthetic(const SceneSpec& spec);

struct DatasetSpec {
  int n_scenes = 50;
  int min_persons = 3;
  int max_persons = 5;
  int min_frames = 60;
  int max_frames = 120;
  double frame_width = 640.0;
  double frame_height = 480.0;
  double noise_level = 0.0;
  int feature_dim = 0;  // 0 means max_persons
  int min_span_frames = 12;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  DetectionSet detections;
  std::vector<GroundTruthAnnotation> annotations;
};

SyntheticDataset generate_dataset(const DatasetSpec& spec);
SyntheticFiles to_files(const SyntheticDataset& data);

}  // namespace stgvt
