#include "stgvt/pipeline.hpp"

#include <map>
#include <sstream>

namespace stgvt {

ScorerKind parse_scorer_kind(const std::string& name) {
  if (name == "toy") return ScorerKind::kToy;
  if (name == "oracle") return ScorerKind::kOracle;
  if (name == "random") return ScorerKind::kRandom;
  throw InvalidInput("unknown scorer '" + name + "' (expected toy, oracle or random)");
}

ProposalSet link_stage(const DetectionSet& detections, const LinkerConfig& cfg) {
  ProposalSet out;
  for (const auto& [video, frames] : detections.videos) {
    out.emplace(video, link_greedy(video, frames, cfg));
  }
  return out;
}

namespace {

int proposal_feature_dim(const ProposalSet& proposals) {
  for (const auto& [video, tubes] : proposals) {
    for (const TubeProposal& t : tubes) {
      if (!t.features.empty()) return static_cast<int>(t.features.front().size());
    }
  }
  return 0;
}

std::vector<GroundTruthAnnotation> sorted_by_sample(
    const std::vector<GroundTruthAnnotation>& gts) {
  std::vector<GroundTruthAnnotation> out;
  for (auto& [id, gt] : key_by_sample(gts)) out.push_back(gt);
  return out;
}

}  // namespace

std::vector<ScoreRecord> score_stage(const ProposalSet& proposals,
                                     const std::vector<GroundTruthAnnotation>& gts,
                                     const ScoreOptions& opts) {
  std::unique_ptr<Scorer> shared;
  if (opts.kind == ScorerKind::kToy) {
    if (!opts.weights_path.empty()) {
      shared = std::make_unique<ToyScorer>(ToyScorer::load(opts.weights_path));
    } else {
      ScorerConfig cfg = opts.toy;
      cfg.seed = opts.seed;
      cfg.stride = opts.stride;
      cfg.max_tokens = opts.max_words;
      if (const int dim = proposal_feature_dim(proposals); dim > 0) cfg.feature_dim = dim;
      shared = std::make_unique<ToyScorer>(cfg);
    }
  } else if (opts.kind == ScorerKind::kRandom) {
    shared = std::make_unique<RandomScorer>(opts.seed, opts.stride);
  }
  const int max_tokens = opts.kind == ScorerKind::kToy
                             ? static_cast<const ToyScorer&>(*shared).config().max_tokens
                             : opts.max_words;
  const int vocab = opts.kind == ScorerKind::kToy
                        ? static_cast<const ToyScorer&>(*shared).config().vocab_size
                        : kDefaultVocabSize;

  std::vector<ScoreRecord> out;
  for (const GroundTruthAnnotation& gt : sorted_by_sample(gts)) {
    const auto it = proposals.find(gt.video_id);
    if (it == proposals.end()) continue;
    const Query query = tokenize(gt.sentence, max_tokens, vocab);
    std::unique_ptr<Scorer> oracle;
    if (opts.kind == ScorerKind::kOracle) oracle = std::make_unique<OracleScorer>(gt, opts.stride);
    const Scorer& scorer = oracle ? *oracle : *shared;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      out.push_back({gt.sample_id, gt.video_id, static_cast<int>(i),
                     score_pair(scorer, it->second[i], query)});
    }
  }
  return out;
}

std::vector<Json> label_stage(const ProposalSet& proposals,
                              const std::vector<GroundTruthAnnotation>& gts, int stride) {
  std::vector<Json> out;
  for (const GroundTruthAnnotation& gt : sorted_by_sample(gts)) {
    const auto it = proposals.find(gt.video_id);
    if (it == proposals.end()) continue;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const TubeProposal& tube = it->second[i];
      const double s_overlap = overlap_score(tube, gt);
      const double s_iou = tube_iou_score(tube, gt);
      const TemporalSpan span = local_span(tube, gt);
      Json frames = Json::array();
      for (int t : sampled_indices(tube.size(), stride)) {
        const int rel = frame_relevance_target(t, span);
        Json f;
        f["local_index"] = t;
        f["frame_idx"] = tube.start_frame + t;
        f["relevance"] = rel;
        if (rel == 1) {
          const Offsets o = regression_target(t, span, tube.size());
          f["offsets"] = Json::array({o.delta_l, o.delta_r});
        } else {
          f["offsets"] = nullptr;
        }
        frames.push_back(std::move(f));
      }
      Json j;
      j["sample_id"] = gt.sample_id;
      j["video_id"] = gt.video_id;
      j["proposal_id"] = i;
      j["label"] = to_string(label_from_scores(s_overlap, s_iou));
      j["s_overlap"] = s_overlap;
      j["s_iou"] = s_iou;
      j["n_frames"] = tube.size();
      j["frames"] = std::move(frames);
      out.push_back(std::move(j));
    }
  }
  return out;
}

std::vector<Prediction> trim_stage(const ProposalSet& proposals,
                                   const std::vector<ScoreRecord>& scores,
                                   const DecoderConfig& cfg) {
  require_valid(cfg);
  std::map<std::string, std::vector<const ScoreRecord*>> by_sample;
  for (const ScoreRecord& r : scores) by_sample[r.sample_id].push_back(&r);

  std::vector<Prediction> out;
  for (const auto& [sample, records] : by_sample) {
    std::vector<TubeProposal> tubes;
    std::vector<ScoreBundle> bundles;
    for (const ScoreRecord* r : records) {
      const auto it = proposals.find(r->video_id);
      if (it == proposals.end() || r->proposal_id < 0 ||
          r->proposal_id >= static_cast<int>(it->second.size())) {
        throw InvalidInput("scores for sample " + sample + " reference unknown proposal " +
                           r->video_id + "#" + std::to_string(r->proposal_id));
      }
      tubes.push_back(it->second[static_cast<std::size_t>(r->proposal_id)]);
      bundles.push_back(r->bundle);
    }
    const std::size_t best = select_tube(tubes, bundles);
    Prediction p = trim_tube(tubes[best], bundles[best], cfg);
    p.sample_id = sample;
    out.push_back(std::move(p));
  }
  return out;
}

PipelineResult run_pipeline(const DetectionSet& detections,
                            const std::vector<GroundTruthAnnotation>& gts,
                            const PipelineConfig& cfg) {
  PipelineResult res;
  const auto stage = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };
  stage("link", [&] { res.proposals = link_stage(detections, cfg.linker); });
  stage("score", [&] { res.scores = score_stage(res.proposals, gts, cfg.scoring); });
  stage("trim", [&] { res.predictions = trim_stage(res.proposals, res.scores, cfg.decoder); });
  stage("eval", [&] { res.report = evaluate(res.predictions, key_by_sample(gts), cfg.thresholds); });
  return res;
}

std::string predictions_to_string(const std::vector<Prediction>& preds) {
  std::ostringstream os;
  write_predictions(os, preds);
  return os.str();
}

}  // namespace stgvt
