#pragma once

// A small two-stream co-attention transformer used as the reference learned
// scorer. Weights are drawn deterministically from a seed; there is no
// training loop here.
//
// Text stream: token embedding + position embedding + segment embedding,
// [CLS] at position 0, padding masked out of every attention.
// Visual stream, one row per sampled frame: feature projection + projection
// of the normalized box (x1, y1, x2, y2, area) + sinusoidal encoding of the
// tube-local frame index.
//
// Each layer runs both directions from the same layer input:
//   text'   = text   + Attn(text -> visual) Wo
//   visual' = visual + Attn(visual -> text) Wo
// f_global is the element-wise product of the two position-0 outputs and
// drives the match head; each visual row is f_frame for its sampled frame and
// drives the relevance and offset heads.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stgvt/attention.hpp"
#include "stgvt/scorer.hpp"

namespace stgvt {

struct ScorerConfig {
  int embed_dim = 32;
  int num_heads = 2;
  int num_layers = 1;
  std::uint64_t seed = 0;
  int vocab_size = kDefaultVocabSize;
  int max_tokens = kMaxQueryTokens;
  int feature_dim = 16;
  double frame_width = 1280.0;
  double frame_height = 720.0;
  int stride = kDefaultStride;

  bool operator==(const ScorerConfig&) const = default;
};

void require_valid(const ScorerConfig& cfg);

class ToyScorer final : public Scorer {
 public:
  struct Layer {
    // text queries visual
    Matrix wq_text, wk_vis, wv_vis, wo_text;
    // visual queries text
    Matrix wq_vis, wk_text, wv_text, wo_vis;
  };

  struct LayerTrace {
    Matrix text_in, vis_in;
    Matrix q_text, k_vis, v_vis;
    AttentionResult text_attn;
    Matrix q_vis, k_text, v_text;
    AttentionResult vis_attn;
  };

  struct Trace {
    std::vector<int> sampled_local_indices;
    std::vector<bool> text_mask;
    Matrix text0, vis0;
    std::vector<LayerTrace> layers;
    Matrix text_out, vis_out;
    Vector global;
    double match_logit = 0.0;
    ScoreBundle bundle;
  };

  explicit ToyScorer(const ScorerConfig& cfg);

  std::string name() const override { return "toy"; }
  int stride() const override { return cfg_.stride; }
  ScoreBundle score(const TubeProposal& tube, const Query& query) const override;

  // Full forward pass with every intermediate kept (attention weights,
  // per-layer activations).
  Trace forward(const TubeProposal& tube, const Query& query) const;

  // d(match)/d(token embedding row), for every token id present in the query.
  std::map<int, Vector> match_grad_token_embedding(const TubeProposal& tube,
                                                   const Query& query) const;

  const ScorerConfig& config() const { return cfg_; }
  Matrix& token_embedding() { return tok_emb_; }
  const Matrix& token_embedding() const { return tok_emb_; }

  // Flat little-endian file: "STGV" magic, uint32 dimension header, then
  // float64 frame size followed by every parameter in a fixed order.
  void save(const std::string& path) const;
  static ToyScorer load(const std::string& path);

  bool operator==(const ToyScorer&) const;

 private:
  // Calls visit(double&) / visit(const double&) on every parameter in the
  // serialization order.
  template <typename Self, typename Visitor>
  static void visit_parameters(Self& self, Visitor&& visit);

  ScorerConfig cfg_;
  Matrix tok_emb_;   // vocab x d
  Matrix pos_emb_;   // max_tokens x d
  Vector seg_emb_;   // d
  Matrix feat_proj_; // feature_dim x d
  Matrix loc_proj_;  // 5 x d
  Vector vis_bias_;  // d
  std::vector<Layer> layers_;
  Vector w_match_;
  double b_match_ = 0.0;
  Vector w_rel_;
  double b_rel_ = 0.0;
  Matrix w_off_;     // d x 2
  Vector b_off_;     // 2
};

}  // namespace stgvt
