#include "stgvt/dataio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace stgvt {

namespace {

// Runs `fn(json, line_no)` for every non-blank line; wraps JSON and schema
// errors with the line number.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(Json::parse(line), line_no);
    } catch (const Json::exception& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidInput& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw InvalidInput("line " + std::to_string(line_no) + ": " + msg);
    }
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

BBox bbox_from(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw InvalidInput("bbox must be [x1, y1, x2, y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

TemporalSpan span_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("span must be [l, r]");
  TemporalSpan s{j[0].get<int>(), j[1].get<int>()};
  require_valid(s);
  return s;
}

std::map<int, BBox> boxes_from(const Json& j) {
  if (!j.is_object()) throw InvalidInput("boxes must be an object keyed by frame");
  std::map<int, BBox> out;
  for (const auto& [key, value] : j.items()) {
    std::size_t pos = 0;
    int frame = 0;
    try {
      frame = std::stoi(key, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != key.size() || key.empty()) throw InvalidInput("bad frame key '" + key + "'");
    out.emplace(frame, bbox_from(value));
  }
  return out;
}

void require_boxes_cover(const std::map<int, BBox>& boxes, const TemporalSpan& span,
                         const std::string& what) {
  if (static_cast<int>(boxes.size()) != span.length() || boxes.empty() ||
      boxes.begin()->first != span.l || boxes.rbegin()->first != span.r) {
    throw InvalidInput(what + ": box keys must cover exactly the span");
  }
  for (const auto& [f, b] : boxes) require_valid(b, what + " frame " + std::to_string(f));
}

}  // namespace

Json to_json(const BBox& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

Json boxes_to_json(const std::map<int, BBox>& boxes) {
  Json j = Json::object();
  for (const auto& [f, b] : boxes) j[std::to_string(f)] = to_json(b);
  return j;
}

// ---- detections ----------------------------------------------------------

DetectionSet parse_detections(std::istream& in, int max_boxes_per_frame) {
  if (max_boxes_per_frame < 1) throw InvalidInput("max_boxes_per_frame must be >= 1");
  struct Rec {
    std::string video;
    Detection det;
  };
  std::vector<Rec> recs;
  DetectionSet set;
  for_each_record(in, [&](const Json& j, int line_no) {
    Rec r;
    r.video = j.at("video_id").get<std::string>();
    r.det.frame_idx = j.at("frame_idx").get<int>();
    r.det.bbox = bbox_from(j.at("bbox"));
    r.det.confidence = j.at("confidence").get<double>();
    r.det.feature = j.at("feature").get<std::vector<double>>();
    try {
      require_valid(r.det);
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(line_no) + " (video " + r.video +
                         ", frame " + std::to_string(r.det.frame_idx) + "): " + e.what());
    }
    const int dim = static_cast<int>(r.det.feature.size());
    if (recs.empty()) {
      set.feature_dim = dim;
    } else if (dim != set.feature_dim) {
      throw InvalidInput("line " + std::to_string(line_no) + ": feature length " +
                         std::to_string(dim) + " differs from " +
                         std::to_string(set.feature_dim));
    }
    recs.push_back(std::move(r));
  });

  const auto key_less = [](const Rec& a, const Rec& b) {
    if (a.video != b.video) return a.video < b.video;
    return a.det.frame_idx < b.det.frame_idx;
  };
  if (!std::is_sorted(recs.begin(), recs.end(), key_less)) {
    set.warnings.push_back("detections not sorted by (video_id, frame_idx); re-sorted");
    std::stable_sort(recs.begin(), recs.end(), key_less);
  }
  for (Rec& r : recs) {
    auto& frames = set.videos[r.video];
    if (frames.empty() || frames.back().front().frame_idx != r.det.frame_idx) {
      frames.emplace_back();
    }
    frames.back().push_back(std::move(r.det));
  }
  for (auto& [video, frames] : set.videos) {
    for (FrameDetections& f : frames) {
      if (static_cast<int>(f.size()) > max_boxes_per_frame) {
        set.warnings.push_back("video " + video + " frame " +
                               std::to_string(f.front().frame_idx) + ": kept " +
                               std::to_string(max_boxes_per_frame) + " of " +
                               std::to_string(f.size()) + " detections");
        f = cap_frame(f, max_boxes_per_frame);
      }
    }
  }
  return set;
}

DetectionSet read_detections(const std::string& path, int max_boxes_per_frame) {
  auto in = open_in(path);
  return parse_detections(in, max_boxes_per_frame);
}

void write_detections(std::ostream& out, const DetectionSet& set) {
  for (const auto& [video, frames] : set.videos) {
    for (const FrameDetections& f : frames) {
      for (const Detection& d : f) {
        Json j;
        j["video_id"] = video;
        j["frame_idx"] = d.frame_idx;
        j["bbox"] = to_json(d.bbox);
        j["confidence"] = d.confidence;
        j["feature"] = d.feature;
        out << j.dump() << '\n';
      }
    }
  }
}

// ---- annotations ---------------------------------------------------------

std::vector<GroundTruthAnnotation> parse_annotations(std::istream& in) {
  std::vector<GroundTruthAnnotation> out;
  for_each_record(in, [&](const Json& j, int) {
    GroundTruthAnnotation gt;
    gt.sample_id = j.at("sample_id").get<std::string>();
    gt.video_id = j.at("video_id").get<std::string>();
    gt.sentence = j.at("sentence").get<std::string>();
    gt.span = span_from(j.at("span"));
    gt.boxes = boxes_from(j.at("boxes"));
    require_boxes_cover(gt.boxes, gt.span, "annotation " + gt.sample_id);
    out.push_back(std::move(gt));
  });
  key_by_sample(out);  // rejects duplicate sample ids
  return out;
}

std::vector<GroundTruthAnnotation> read_annotations(const std::string& path) {
  auto in = open_in(path);
  return parse_annotations(in);
}

void write_annotations(std::ostream& out, const std::vector<GroundTruthAnnotation>& gts) {
  for (const GroundTruthAnnotation& gt : gts) {
    Json j;
    j["sample_id"] = gt.sample_id;
    j["video_id"] = gt.video_id;
    j["sentence"] = gt.sentence;
    j["span"] = Json::array({gt.span.l, gt.span.r});
    j["boxes"] = boxes_to_json(gt.boxes);
    out << j.dump() << '\n';
  }
}

std::map<std::string, GroundTruthAnnotation> key_by_sample(
    const std::vector<GroundTruthAnnotation>& gts) {
  std::map<std::string, GroundTruthAnnotation> out;
  for (const GroundTruthAnnotation& gt : gts) {
    if (!out.emplace(gt.sample_id, gt).second) {
      throw InvalidInput("duplicate annotation for sample '" + gt.sample_id + "'");
    }
  }
  return out;
}

// ---- proposals -----------------------------------------------------------

ProposalSet parse_proposals(std::istream& in) {
  ProposalSet out;
  for_each_record(in, [&](const Json& j, int) {
    TubeProposal t;
    t.video_id = j.at("video_id").get<std::string>();
    const int id = j.at("proposal_id").get<int>();
    t.start_frame = j.at("start_frame").get<int>();
    for (const Json& b : j.at("boxes")) t.boxes.push_back(bbox_from(b));
    t.confidences = j.at("confidences").get<std::vector<double>>();
    t.features = j.at("features").get<std::vector<FeatureVec>>();
    t.link_score_sum = j.at("link_score_sum").get<double>();
    require_valid(t);
    auto& list = out[t.video_id];
    if (id != static_cast<int>(list.size())) {
      throw InvalidInput("proposal ids for video " + t.video_id +
                         " must be consecutive from 0");
    }
    list.push_back(std::move(t));
  });
  return out;
}

ProposalSet read_proposals(const std::string& path) {
  auto in = open_in(path);
  return parse_proposals(in);
}

void write_proposals(std::ostream& out, const ProposalSet& proposals) {
  for (const auto& [video, tubes] : proposals) {
    for (std::size_t i = 0; i < tubes.size(); ++i) {
      const TubeProposal& t = tubes[i];
      Json j;
      j["video_id"] = video;
      j["proposal_id"] = i;
      j["start_frame"] = t.start_frame;
      Json boxes = Json::array();
      for (const BBox& b : t.boxes) boxes.push_back(to_json(b));
      j["boxes"] = std::move(boxes);
      j["confidences"] = t.confidences;
      j["features"] = t.features;
      j["link_score_sum"] = t.link_score_sum;
      out << j.dump() << '\n';
    }
  }
}

// ---- scores --------------------------------------------------------------

std::vector<ScoreRecord> parse_scores(std::istream& in) {
  std::vector<ScoreRecord> out;
  for_each_record(in, [&](const Json& j, int) {
    ScoreRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.video_id = j.at("video_id").get<std::string>();
    r.proposal_id = j.at("proposal_id").get<int>();
    r.bundle.match = j.at("match").get<double>();
    r.bundle.relevance = j.at("relevance").get<std::vector<double>>();
    for (const Json& o : j.at("offsets")) {
      if (!o.is_array() || o.size() != 2) throw InvalidInput("offsets must be [dl, dr] pairs");
      r.bundle.offsets.push_back({o[0].get<double>(), o[1].get<double>()});
    }
    r.bundle.sampled_local_indices = j.at("sampled_local_indices").get<std::vector<int>>();
    require_valid(r.bundle);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ScoreRecord> read_scores(const std::string& path) {
  auto in = open_in(path);
  return parse_scores(in);
}

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& scores) {
  for (const ScoreRecord& r : scores) {
    Json j;
    j["sample_id"] = r.sample_id;
    j["video_id"] = r.video_id;
    j["proposal_id"] = r.proposal_id;
    j["match"] = r.bundle.match;
    j["relevance"] = r.bundle.relevance;
    Json offs = Json::array();
    for (const Offsets& o : r.bundle.offsets) offs.push_back(Json::array({o.delta_l, o.delta_r}));
    j["offsets"] = std::move(offs);
    j["sampled_local_indices"] = r.bundle.sampled_local_indices;
    out << j.dump() << '\n';
  }
}

// ---- predictions ---------------------------------------------------------

std::vector<Prediction> parse_predictions(std::istream& in) {
  std::vector<Prediction> out;
  for_each_record(in, [&](const Json& j, int) {
    Prediction p;
    p.sample_id = j.at("sample_id").get<std::string>();
    p.video_id = j.at("video_id").get<std::string>();
    p.span = span_from(j.at("span"));
    p.boxes = boxes_from(j.at("boxes"));
    p.match_score = j.at("match_score").get<double>();
    require_boxes_cover(p.boxes, p.span, "prediction " + p.sample_id);
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<Prediction> read_predictions(const std::string& path) {
  auto in = open_in(path);
  return parse_predictions(in);
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds) {
  for (const Prediction& p : preds) {
    Json j;
    j["sample_id"] = p.sample_id;
    j["video_id"] = p.video_id;
    j["span"] = Json::array({p.span.l, p.span.r});
    j["boxes"] = boxes_to_json(p.boxes);
    j["match_score"] = p.match_score;
    out << j.dump() << '\n';
  }
}

// ---- tracks --------------------------------------------------------------

std::vector<Track> parse_tracks(std::istream& in) {
  std::vector<Track> out;
  for_each_record(in, [&](const Json& j, int) {
    Track t;
    t.video_id = j.at("video_id").get<std::string>();
    t.boxes = boxes_from(j.at("boxes"));
    require_valid(t);
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<Track> read_tracks(const std::string& path) {
  auto in = open_in(path);
  return parse_tracks(in);
}

// ---- reports and files ---------------------------------------------------

Json report_to_json(const EvalReport& report) {
  Json j;
  j["m_viou"] = report.m_viou;
  Json at = Json::object();
  for (const auto& [th, v] : report.viou_at) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", th);
    at[key] = v;
  }
  j["viou_at"] = std::move(at);
  j["m_tiou"] = report.m_tiou;
  Json rows = Json::array();
  for (const EvalRow& r : report.rows) {
    rows.push_back({{"sample_id", r.sample_id},
                    {"viou", r.viou},
                    {"tiou", r.tiou},
                    {"predicted", r.predicted}});
  }
  j["rows"] = std::move(rows);
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stgvt
