#include "stgvt/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stgvt {

void require_valid(const DecoderConfig& cfg) {
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) {
    throw InvalidInput("decoder config: epsilon outside [0, 1]");
  }
  if (cfg.stride < 1) throw InvalidInput("decoder config: stride must be >= 1");
}

std::size_t select_tube(const std::vector<TubeProposal>& tubes,
                        const std::vector<ScoreBundle>& bundles) {
  if (tubes.empty()) throw InvalidInput("select_tube: no candidate tubes");
  if (tubes.size() != bundles.size()) {
    throw InvalidInput("select_tube: tubes and score bundles differ in count");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < tubes.size(); ++i) {
    const double m = bundles[i].match;
    const double mb = bundles[best].match;
    if (m > mb || (m == mb && tubes[i].size() > tubes[best].size())) best = i;
  }
  return best;
}

ContinuousRange offsets_to_range(int t_local, const Offsets& offsets, int n_frames) {
  const ContinuousRange raw = offsets_range(t_local, offsets, n_frames);
  const double hi_limit = static_cast<double>(n_frames - 1);
  return {std::clamp(raw.lo, 0.0, hi_limit), std::clamp(raw.hi, 0.0, hi_limit)};
}

TemporalSpan trim_local_span(int n_frames, const ScoreBundle& bundle,
                             const DecoderConfig& cfg) {
  require_valid(cfg);
  require_valid(bundle);
  const std::size_t n = bundle.relevance.size();
  for (int t : bundle.sampled_local_indices) {
    if (t < 0 || t >= n_frames) throw InvalidInput("trim: sampled index outside the tube");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bundle.relevance[a] > bundle.relevance[b];
  });

  const auto range_of = [&](std::size_t k) {
    return offsets_to_range(bundle.sampled_local_indices[k], bundle.offsets[k], n_frames);
  };
  // The seed is taken unconditionally, even below epsilon.
  ContinuousRange merged = range_of(order[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t k = order[i];
    if (!(bundle.relevance[k] > cfg.epsilon)) break;
    const ContinuousRange r = range_of(k);
    if (r.lo <= merged.hi && r.hi >= merged.lo) {
      merged = {std::min(merged.lo, r.lo), std::max(merged.hi, r.hi)};
    }
  }

  constexpr double kSnap = 1e-9;
  const int lo = static_cast<int>(std::floor(merged.lo + kSnap));
  const int hi = static_cast<int>(std::ceil(merged.hi - kSnap));
  return {std::clamp(lo, 0, n_frames - 1), std::clamp(std::max(lo, hi), 0, n_frames - 1)};
}

Prediction trim_tube(const TubeProposal& tube, const ScoreBundle& bundle,
                     const DecoderConfig& cfg) {
  require_valid(tube);
  const TemporalSpan local = trim_local_span(tube.size(), bundle, cfg);
  Prediction p;
  p.video_id = tube.video_id;
  p.span = {tube.start_frame + local.l, tube.start_frame + local.r};
  p.match_score = bundle.match;
  for (int t = local.l; t <= local.r; ++t) {
    p.boxes.emplace(tube.start_frame + t, tube.boxes[static_cast<std::size_t>(t)]);
  }
  return p;
}

std::vector<double> expand_sampled_relevance(const std::vector<double>& relevance,
                                             const std::vector<int>& sampled_local_indices,
                                             int n_frames) {
  if (relevance.size() != sampled_local_indices.size() || relevance.empty()) {
    throw InvalidInput("expand_sampled_relevance: misaligned or empty inputs");
  }
  std::vector<double> out(static_cast<std::size_t>(std::max(n_frames, 0)));
  std::size_t k = 0;
  for (int t = 0; t < n_frames; ++t) {
    // advance while the next sample is strictly closer
    while (k + 1 < sampled_local_indices.size() &&
           std::abs(sampled_local_indices[k + 1] - t) < std::abs(sampled_local_indices[k] - t)) {
      ++k;
    }
    out[static_cast<std::size_t>(t)] = relevance[k];
  }
  return out;
}

}  // namespace stgvt
