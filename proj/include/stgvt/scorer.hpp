#pragma once

// Tube-sentence scoring. A Scorer maps one (tube proposal, query) pair to a
// ScoreBundle: the tube-level match probability, a relevance probability per
// sampled frame, and normalized boundary offsets per sampled frame.
//
// Three implementations ship with the library:
//   ToyScorer    small deterministic co-attention transformer (toy_scorer.hpp)
//   OracleScorer derives every output from a ground-truth annotation
//   RandomScorer seeded uniform noise, a lower-bound baseline
//
// Implementations are immutable after construction and safe to call from
// several threads at once.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stgvt/linker.hpp"
#include "stgvt/supervision.hpp"
#include "stgvt/tokenizer.hpp"

namespace stgvt {

inline constexpr int kDefaultStride = 6;

struct ScoreBundle {
  double match = 0.0;
  std::vector<double> relevance;
  std::vector<Offsets> offsets;
  std::vector<int> sampled_local_indices;

  bool operator==(const ScoreBundle&) const = default;
};

// Throws InvalidInput if lengths disagree or values leave their ranges.
void require_valid(const ScoreBundle& bundle);

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::string name() const = 0;
  virtual int stride() const = 0;
  virtual ScoreBundle score(const TubeProposal& tube, const Query& query) const = 0;
};

// Scores one pair through `scorer` and checks the result against the bundle
// contract (sampled indices must be subsample_tube(tube, stride)).
ScoreBundle score_pair(const Scorer& scorer, const TubeProposal& tube,
                       const Query& query);

ScoreBundle oracle_score(const GroundTruthAnnotation& gt, const TubeProposal& tube,
                         const Query& query, int stride = kDefaultStride);

class OracleScorer final : public Scorer {
 public:
  explicit OracleScorer(GroundTruthAnnotation gt, int stride = kDefaultStride);

  std::string name() const override { return "oracle"; }
  int stride() const override { return stride_; }
  ScoreBundle score(const TubeProposal& tube, const Query& query) const override;

 private:
  GroundTruthAnnotation gt_;
  int stride_;
};

class RandomScorer final : public Scorer {
 public:
  explicit RandomScorer(std::uint64_t seed, int stride = kDefaultStride);

  std::string name() const override { return "random"; }
  int stride() const override { return stride_; }
  // Draws depend only on the seed and the (tube, query) contents.
  ScoreBundle score(const TubeProposal& tube, const Query& query) const override;

 private:
  std::uint64_t seed_;
  int stride_;
};

}  // namespace stgvt
