#pragma once

// End-to-end grounding: link -> score -> select + trim -> evaluate.
//
// Each stage is a standalone function over the same in-memory records the
// file formats carry, so running the CLI stages one by one over intermediate
// files produces exactly what run_pipeline produces in one go.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "stgvt/dataio.hpp"
#include "stgvt/decoder.hpp"
#include "stgvt/linker.hpp"
#include "stgvt/metrics.hpp"
#include "stgvt/toy_scorer.hpp"

namespace stgvt {

// Error raised by a pipeline stage; what() is prefixed with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class ScorerKind { kToy, kOracle, kRandom };

ScorerKind parse_scorer_kind(const std::string& name);

struct ScoreOptions {
  ScorerKind kind = ScorerKind::kToy;
  std::uint64_t seed = 0;
  int stride = kDefaultStride;
  int max_words = kMaxQueryTokens;
  // Toy scorer settings; feature_dim is taken from the proposals. When
  // weights_path is set the weights are loaded from it instead.
  ScorerConfig toy;
  std::string weights_path;
};

struct PipelineConfig {
  LinkerConfig linker;
  ScoreOptions scoring;
  DecoderConfig decoder;
  std::vector<double> thresholds{0.3, 0.5};
};

ProposalSet link_stage(const DetectionSet& detections, const LinkerConfig& cfg);

// One record per (annotation, proposal of its video), annotations in
// sample_id order and proposals in id order.
std::vector<ScoreRecord> score_stage(const ProposalSet& proposals,
                                     const std::vector<GroundTruthAnnotation>& gts,
                                     const ScoreOptions& opts);

// Per-proposal labels and per-sampled-frame targets, one JSON object per
// (annotation, proposal) pair.
std::vector<Json> label_stage(const ProposalSet& proposals,
                              const std::vector<GroundTruthAnnotation>& gts, int stride);

// Best tube per sample, trimmed. Output ordered by sample_id.
std::vector<Prediction> trim_stage(const ProposalSet& proposals,
                                   const std::vector<ScoreRecord>& scores,
                                   const DecoderConfig& cfg);

struct PipelineResult {
  ProposalSet proposals;
  std::vector<ScoreRecord> scores;
  std::vector<Prediction> predictions;
  EvalReport report;
};

PipelineResult run_pipeline(const DetectionSet& detections,
                            const std::vector<GroundTruthAnnotation>& gts,
                            const PipelineConfig& cfg);

std::string predictions_to_string(const std::vector<Prediction>& preds);

}  // namespace stgvt
