// stgvt: command-line front end for the grounding toolkit.
//
//   stgvt synth    --detections d.jsonl --annotations a.jsonl [--scenes 50]
//   stgvt link     --detections d.jsonl --out proposals.jsonl
//   stgvt score    --proposals p.jsonl --annotations a.jsonl --scorer oracle --out s.jsonl
//   stgvt label    --proposals p.jsonl --annotations a.jsonl --out labels.jsonl
//   stgvt trim     --proposals p.jsonl --scores s.jsonl --out predictions.jsonl
//   stgvt eval     --predictions predictions.jsonl --annotations a.jsonl --report r.json
//   stgvt pipeline --detections d.jsonl --annotations a.jsonl --scorer toy --out predictions.jsonl
//   stgvt annotate average|extend ...
//
// Exit code 0 on success; on failure a "<stage>: <message>" line on stderr
// and exit code 1.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "stgvt/annotation_tools.hpp"
#include "stgvt/dataio.hpp"
#include "stgvt/pipeline.hpp"
#include "stgvt/rng.hpp"
#include "stgvt/synthetic.hpp"

namespace {

using namespace stgvt;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int stride = kDefaultStride;
  int max_words = kMaxQueryTokens;
};

struct LinkOptions {
  LinkerConfig cfg;
  void add(CLI::App* app) {
    app->add_option("--lambda-iou", cfg.lambda_iou, "IoU weight in the link score")
        ->capture_default_str();
    app->add_option("--lambda-cos", cfg.lambda_cos, "cosine weight in the link score")
        ->capture_default_str();
    app->add_option("--min-link-score", cfg.min_link_score, "minimum score to extend a tube")
        ->capture_default_str();
    app->add_option("--max-gap", cfg.max_gap, "frames a tube may skip")->capture_default_str();
    app->add_option("--max-boxes", cfg.max_boxes_per_frame, "per-frame detection cap")
        ->capture_default_str();
    app->add_option("--max-proposals", cfg.max_proposals, "proposals kept per video")
        ->capture_default_str();
  }
};

struct ScorerFlags {
  std::string scorer = "toy";
  std::string weights;
  std::string save_weights;
  ScorerConfig toy;
  void add(CLI::App* app) {
    app->add_option("--scorer", scorer, "toy | oracle | random")
        ->check(CLI::IsMember({"toy", "oracle", "random"}))
        ->capture_default_str();
    app->add_option("--weights", weights, "load toy scorer weights from this file");
    app->add_option("--save-weights", save_weights, "write the toy scorer weights here");
    app->add_option("--embed-dim", toy.embed_dim)->capture_default_str();
    app->add_option("--heads", toy.num_heads)->capture_default_str();
    app->add_option("--layers", toy.num_layers)->capture_default_str();
    app->add_option("--vocab-size", toy.vocab_size)->capture_default_str();
    app->add_option("--frame-width", toy.frame_width)->capture_default_str();
    app->add_option("--frame-height", toy.frame_height)->capture_default_str();
  }
  ScoreOptions options(const GlobalOptions& g) const {
    ScoreOptions o;
    o.kind = parse_scorer_kind(scorer);
    o.seed = g.seed;
    o.stride = g.stride;
    o.max_words = g.max_words;
    o.toy = toy;
    o.weights_path = weights;
    return o;
  }
};

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw InvalidInput("bad threshold '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void print_warnings(const DetectionSet& set) {
  for (const std::string& w : set.warnings) std::cerr << "warning: " << w << '\n';
}

std::string to_jsonl(const std::vector<Json>& records) {
  std::string s;
  for (const Json& j : records) s += j.dump() + '\n';
  return s;
}

void save_toy_weights(const ScorerFlags& flags, const ScoreOptions& opts,
                      const ProposalSet& proposals) {
  if (flags.save_weights.empty() || opts.kind != ScorerKind::kToy) return;
  if (!opts.weights_path.empty()) {
    ToyScorer::load(opts.weights_path).save(flags.save_weights);
    return;
  }
  ScorerConfig cfg = opts.toy;
  cfg.seed = opts.seed;
  cfg.stride = opts.stride;
  cfg.max_tokens = opts.max_words;
  for (const auto& [video, tubes] : proposals) {
    if (!tubes.empty()) {
      cfg.feature_dim = static_cast<int>(tubes.front().features.front().size());
      break;
    }
  }
  ToyScorer(cfg).save(flags.save_weights);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal video grounding toolkit"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "seed for every random draw")->capture_default_str();
  app.add_option("--stride", g.stride, "frame sampling stride")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--max-words", g.max_words, "query length including [CLS]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.fallthrough();

  std::string stage = "stgvt";
  std::function<void()> action;

  // link
  auto* link = app.add_subcommand("link", "link detections into tube proposals");
  std::string link_det, link_out;
  LinkOptions link_opts;
  link->add_option("--detections", link_det)->required();
  link->add_option("--out", link_out)->required();
  link_opts.add(link);
  link->callback([&] {
    stage = "link";
    action = [&] {
      const DetectionSet dets = read_detections(link_det, link_opts.cfg.max_boxes_per_frame);
      print_warnings(dets);
      std::ostringstream os;
      write_proposals(os, link_stage(dets, link_opts.cfg));
      write_file(link_out, os.str());
    };
  });

  // score
  auto* score = app.add_subcommand("score", "score tube proposals against queries");
  std::string score_props, score_ann, score_out;
  ScorerFlags score_flags;
  score->add_option("--proposals", score_props)->required();
  score->add_option("--annotations", score_ann)->required();
  score->add_option("--out", score_out)->required();
  score_flags.add(score);
  score->callback([&] {
    stage = "score";
    action = [&] {
      const ProposalSet props = read_proposals(score_props);
      const ScoreOptions opts = score_flags.options(g);
      std::ostringstream os;
      write_scores(os, score_stage(props, read_annotations(score_ann), opts));
      write_file(score_out, os.str());
      save_toy_weights(score_flags, opts, props);
    };
  });

  // label
  auto* label = app.add_subcommand("label", "emit tube labels and frame targets");
  std::string label_props, label_ann, label_out;
  label->add_option("--proposals", label_props)->required();
  label->add_option("--annotations", label_ann)->required();
  label->add_option("--out", label_out)->required();
  label->callback([&] {
    stage = "label";
    action = [&] {
      write_file(label_out, to_jsonl(label_stage(read_proposals(label_props),
                                                 read_annotations(label_ann), g.stride)));
    };
  });

  // trim
  auto* trim = app.add_subcommand("trim", "select and trim the best tube per query");
  std::string trim_props, trim_scores, trim_out;
  DecoderConfig dec;
  trim->add_option("--proposals", trim_props)->required();
  trim->add_option("--scores", trim_scores)->required();
  trim->add_option("--out", trim_out)->required();
  trim->add_option("--epsilon", dec.epsilon, "relevance threshold")->capture_default_str();
  trim->callback([&] {
    stage = "trim";
    action = [&] {
      dec.stride = g.stride;
      write_file(trim_out, predictions_to_string(trim_stage(
                               read_proposals(trim_props), read_scores(trim_scores), dec)));
    };
  });

  // eval
  auto* eval = app.add_subcommand("eval", "compute vIoU / tIoU metrics");
  std::string eval_preds, eval_ann, eval_report, eval_thresholds = "0.3,0.5";
  eval->add_option("--predictions", eval_preds)->required();
  eval->add_option("--annotations", eval_ann)->required();
  eval->add_option("--report", eval_report)->required();
  eval->add_option("--thresholds", eval_thresholds)->capture_default_str();
  eval->callback([&] {
    stage = "eval";
    action = [&] {
      const EvalReport r = evaluate(read_predictions(eval_preds),
                                    key_by_sample(read_annotations(eval_ann)),
                                    parse_thresholds(eval_thresholds));
      std::cout << format_report(r);
      write_file(eval_report, report_to_json(r).dump(2) + "\n");
    };
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "link, score, trim and evaluate in one go");
  std::string pipe_det, pipe_ann, pipe_out, pipe_report, pipe_thresholds = "0.3,0.5";
  LinkOptions pipe_link;
  ScorerFlags pipe_scorer;
  DecoderConfig pipe_dec;
  pipe->add_option("--detections", pipe_det)->required();
  pipe->add_option("--annotations", pipe_ann)->required();
  pipe->add_option("--out", pipe_out)->required();
  pipe->add_option("--report", pipe_report);
  pipe->add_option("--thresholds", pipe_thresholds)->capture_default_str();
  pipe->add_option("--epsilon", pipe_dec.epsilon)->capture_default_str();
  pipe_link.add(pipe);
  pipe_scorer.add(pipe);
  pipe->callback([&] {
    stage = "pipeline";
    action = [&] {
      PipelineConfig cfg;
      cfg.linker = pipe_link.cfg;
      cfg.scoring = pipe_scorer.options(g);
      cfg.decoder = pipe_dec;
      cfg.decoder.stride = g.stride;
      cfg.thresholds = parse_thresholds(pipe_thresholds);
      const DetectionSet dets = read_detections(pipe_det, cfg.linker.max_boxes_per_frame);
      print_warnings(dets);
      const PipelineResult res = run_pipeline(dets, read_annotations(pipe_ann), cfg);
      write_file(pipe_out, predictions_to_string(res.predictions));
      std::cout << format_report(res.report);
      if (!pipe_report.empty()) write_file(pipe_report, report_to_json(res.report).dump(2) + "\n");
      save_toy_weights(pipe_scorer, cfg.scoring, res.proposals);
    };
  });

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic multi-person scenes");
  DatasetSpec ds;
  std::string synth_det, synth_ann;
  synth->add_option("--detections", synth_det)->required();
  synth->add_option("--annotations", synth_ann)->required();
  synth->add_option("--scenes", ds.n_scenes)->capture_default_str();
  synth->add_option("--min-persons", ds.min_persons)->capture_default_str();
  synth->add_option("--max-persons", ds.max_persons)->capture_default_str();
  synth->add_option("--min-frames", ds.min_frames)->capture_default_str();
  synth->add_option("--max-frames", ds.max_frames)->capture_default_str();
  synth->add_option("--width", ds.frame_width)->capture_default_str();
  synth->add_option("--height", ds.frame_height)->capture_default_str();
  synth->add_option("--noise", ds.noise_level)->capture_default_str();
  synth->add_option("--feature-dim", ds.feature_dim, "0 = max persons")->capture_default_str();
  synth->callback([&] {
    stage = "synth";
    action = [&] {
      ds.seed = g.seed;
      const SyntheticFiles files = to_files(generate_dataset(ds));
      write_file(synth_det, files.detections_jsonl);
      write_file(synth_ann, files.annotations_jsonl);
    };
  });

  // annotate
  auto* annotate = app.add_subcommand("annotate", "annotation construction helpers");
  annotate->require_subcommand(1);
  auto* avg = annotate->add_subcommand("average", "average forward/backward tracks");
  std::string fwd_path, bwd_path, avg_out;
  double flag_threshold = kDefaultFlagThreshold;
  avg->add_option("--forward", fwd_path)->required();
  avg->add_option("--backward", bwd_path)->required();
  avg->add_option("--flag-threshold", flag_threshold)->capture_default_str();
  avg->add_option("--out", avg_out)->required();
  avg->callback([&] {
    stage = "annotate average";
    action = [&] {
      const std::vector<Track> fwd = read_tracks(fwd_path);
      const std::vector<Track> bwd = read_tracks(bwd_path);
      if (fwd.size() != bwd.size()) {
        throw InvalidInput("forward and backward files hold different track counts");
      }
      std::string out;
      for (std::size_t i = 0; i < fwd.size(); ++i) {
        const AveragedTrack a = average_tracks(fwd[i], bwd[i], flag_threshold);
        Json j;
        j["video_id"] = a.track.video_id;
        j["boxes"] = boxes_to_json(a.track.boxes);
        j["flagged"] = a.disagreement_flagged;
        j["mean_corner_distance"] = a.mean_corner_distance;
        out += j.dump() + '\n';
      }
      write_file(avg_out, out);
    };
  });
  auto* ext = annotate->add_subcommand("extend", "extend GT spans to fixed-length clips");
  std::string ext_ann, ext_out;
  int target_frames = 0;
  int video_frames = 1 << 30;
  ext->add_option("--annotations", ext_ann)->required();
  ext->add_option("--target-frames", target_frames)->required();
  ext->add_option("--video-frames", video_frames, "length of every source video")
      ->capture_default_str();
  ext->add_option("--out", ext_out)->required();
  ext->callback([&] {
    stage = "annotate extend";
    action = [&] {
      std::string out;
      for (const GroundTruthAnnotation& gt : read_annotations(ext_ann)) {
        const ClipSpec c = extend_span(gt.span, target_frames, video_frames,
                                       mix_seed(g.seed, fnv1a(gt.sample_id)));
        Json j;
        j["sample_id"] = gt.sample_id;
        j["video_id"] = gt.video_id;
        j["source_span"] = Json::array({c.source_span.l, c.source_span.r});
        j["clip_span"] = Json::array({c.clip_span.l, c.clip_span.r});
        j["target_frames"] = c.target_frames;
        out += j.dump() + '\n';
      }
      write_file(ext_out, out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (action) action();
  } catch (const StageError& e) {
    std::cerr << stage << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << stage << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
