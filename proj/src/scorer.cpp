#include "stgvt/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "stgvt/rng.hpp"

namespace stgvt {

void require_valid(const ScoreBundle& b) {
  const std::size_t n = b.sampled_local_indices.size();
  if (n == 0) throw InvalidInput("score bundle: no sampled frames");
  if (b.relevance.size() != n || b.offsets.size() != n) {
    throw InvalidInput("score bundle: relevance/offsets/indices length mismatch");
  }
  if (!(b.match >= 0.0 && b.match <= 1.0)) {
    throw InvalidInput("score bundle: match outside [0, 1]");
  }
  for (double r : b.relevance) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput("score bundle: relevance outside [0, 1]");
  }
  for (const Offsets& o : b.offsets) {
    if (!(o.delta_l >= 0.0 && o.delta_r >= 0.0) || !std::isfinite(o.delta_l) ||
        !std::isfinite(o.delta_r)) {
      throw InvalidInput("score bundle: negative or non-finite offset");
    }
  }
}

ScoreBundle score_pair(const Scorer& scorer, const TubeProposal& tube,
                       const Query& query) {
  if (tube.boxes.empty()) throw InvalidInput("score_pair: empty tube");
  ScoreBundle b = scorer.score(tube, query);
  require_valid(b);
  if (b.sampled_local_indices != sampled_indices(tube.size(), scorer.stride())) {
    throw InvalidInput("score_pair: scorer '" + scorer.name() +
                       "' returned frames that do not match the sampling stride");
  }
  return b;
}

ScoreBundle oracle_score(const GroundTruthAnnotation& gt, const TubeProposal& tube,
                         const Query& /*query*/, int stride) {
  if (tube.boxes.empty()) throw InvalidInput("oracle_score: empty tube");
  ScoreBundle b;
  const SampleLabel label = label_tube(tube, gt);
  b.match = label == SampleLabel::kPositive
                ? 1.0
                : std::clamp(tube_iou_score(tube, gt), 0.0, 1.0);
  const TemporalSpan span = local_span(tube, gt);
  b.sampled_local_indices = sampled_indices(tube.size(), stride);
  for (int t : b.sampled_local_indices) {
    const int rel = frame_relevance_target(t, span);
    b.relevance.push_back(static_cast<double>(rel));
    b.offsets.push_back(rel == 1 ? regression_target(t, span, tube.size()) : Offsets{});
  }
  return b;
}

OracleScorer::OracleScorer(GroundTruthAnnotation gt, int stride)
    : gt_(std::move(gt)), stride_(stride) {
  if (stride_ < 1) throw InvalidInput("oracle scorer: stride must be >= 1");
}

ScoreBundle OracleScorer::score(const TubeProposal& tube, const Query& query) const {
  return oracle_score(gt_, tube, query, stride_);
}

RandomScorer::RandomScorer(std::uint64_t seed, int stride) : seed_(seed), stride_(stride) {
  if (stride_ < 1) throw InvalidInput("random scorer: stride must be >= 1");
}

ScoreBundle RandomScorer::score(const TubeProposal& tube, const Query& query) const {
  if (tube.boxes.empty()) throw InvalidInput("random scorer: empty tube");
  std::uint64_t key = fnv1a(tube.video_id);
  key = mix_seed(key, static_cast<std::uint64_t>(tube.start_frame));
  key = mix_seed(key, static_cast<std::uint64_t>(tube.size()));
  key = mix_seed(key, fnv1a(query.raw_text));
  Rng rng(mix_seed(seed_, key));

  ScoreBundle b;
  b.match = rng.uniform();
  b.sampled_local_indices = sampled_indices(tube.size(), stride_);
  for (std::size_t k = 0; k < b.sampled_local_indices.size(); ++k) {
    b.relevance.push_back(rng.uniform());
    const double dl = rng.uniform(0.0, 0.5);
    const double dr = rng.uniform(0.0, 0.5);
    b.offsets.push_back({dl, dr});
  }
  return b;
}

}  // namespace stgvt
