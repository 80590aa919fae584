#pragma once

// Line-delimited JSON readers and writers for every file the toolkit
// exchanges. One self-contained object per line, UTF-8.
//
//   detections   {video_id, frame_idx, bbox:[x1,y1,x2,y2], confidence, feature:[...]}
//   annotations  {sample_id, video_id, sentence, span:[l,r], boxes:{"frame":[x1,y1,x2,y2]}}
//   proposals    {video_id, proposal_id, start_frame, boxes:[[...]], confidences:[...],
//                 features:[[...]], link_score_sum}
//   scores       {sample_id, video_id, proposal_id, match, relevance:[...],
//                 offsets:[[dl,dr]], sampled_local_indices:[...]}
//   predictions  {sample_id, video_id, span:[l,r], boxes:{"frame":[...]}, match_score}
//   tracks       {video_id, boxes:{"frame":[...]}}
//
// Parse failures raise InvalidInput naming the 1-based line number.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "stgvt/annotation_tools.hpp"
#include "stgvt/decoder.hpp"
#include "stgvt/linker.hpp"
#include "stgvt/metrics.hpp"
#include "stgvt/scorer.hpp"
#include "stgvt/supervision.hpp"

namespace stgvt {

using Json = nlohmann::ordered_json;

struct DetectionSet {
  // video_id -> frame groups sorted by frame index
  std::map<std::string, std::vector<FrameDetections>> videos;
  int feature_dim = 0;
  std::vector<std::string> warnings;
};

using ProposalSet = std::map<std::string, std::vector<TubeProposal>>;

struct ScoreRecord {
  std::string sample_id;
  std::string video_id;
  int proposal_id = 0;
  ScoreBundle bundle;

  bool operator==(const ScoreRecord&) const = default;
};

// Records out of (video_id, frame_idx) order are stably re-sorted and a
// warning is recorded. Each frame is capped to max_boxes_per_frame by
// confidence.
DetectionSet parse_detections(std::istream& in, int max_boxes_per_frame = 101);
DetectionSet read_detections(const std::string& path, int max_boxes_per_frame = 101);
void write_detections(std::ostream& out, const DetectionSet& set);

std::vector<GroundTruthAnnotation> parse_annotations(std::istream& in);
std::vector<GroundTruthAnnotation> read_annotations(const std::string& path);
void write_annotations(std::ostream& out, const std::vector<GroundTruthAnnotation>& gts);
std::map<std::string, GroundTruthAnnotation> key_by_sample(
    const std::vector<GroundTruthAnnotation>& gts);

ProposalSet parse_proposals(std::istream& in);
ProposalSet read_proposals(const std::string& path);
void write_proposals(std::ostream& out, const ProposalSet& proposals);

std::vector<ScoreRecord> parse_scores(std::istream& in);
std::vector<ScoreRecord> read_scores(const std::string& path);
void write_scores(std::ostream& out, const std::vector<ScoreRecord>& scores);

std::vector<Prediction> parse_predictions(std::istream& in);
std::vector<Prediction> read_predictions(const std::string& path);
void write_predictions(std::ostream& out, const std::vector<Prediction>& preds);

std::vector<Track> parse_tracks(std::istream& in);
std::vector<Track> read_tracks(const std::string& path);

Json to_json(const BBox& b);
Json boxes_to_json(const std::map<int, BBox>& boxes);
Json report_to_json(const EvalReport& report);

// Writes `content` via `write` to `path`, or to stdout when path is "-".
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace stgvt
