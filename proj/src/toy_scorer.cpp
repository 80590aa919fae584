#include "stgvt/toy_scorer.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "stgvt/rng.hpp"

namespace stgvt {

void require_valid(const ScorerConfig& cfg) {
  if (cfg.embed_dim < 1 || cfg.num_heads < 1 || cfg.embed_dim % cfg.num_heads != 0) {
    throw InvalidInput("scorer config: embed_dim must be a positive multiple of num_heads");
  }
  if (cfg.num_layers < 0) throw InvalidInput("scorer config: num_layers must be >= 0");
  if (cfg.vocab_size < 3) throw InvalidInput("scorer config: vocab_size must be >= 3");
  if (cfg.max_tokens < 1) throw InvalidInput("scorer config: max_tokens must be >= 1");
  if (cfg.feature_dim < 1) throw InvalidInput("scorer config: feature_dim must be >= 1");
  if (!(cfg.frame_width > 0.0) || !(cfg.frame_height > 0.0)) {
    throw InvalidInput("scorer config: frame size must be positive");
  }
  if (cfg.stride < 1) throw InvalidInput("scorer config: stride must be >= 1");
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void fill_uniform(Matrix& m, Rng& rng, double a) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
}
void fill_uniform(Vector& v, Rng& rng, double a) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-a, a);
}

double temporal_encoding(int position, Eigen::Index dim, Eigen::Index d) {
  const double i2 = static_cast<double>(dim - dim % 2);
  const double angle =
      static_cast<double>(position) / std::pow(10000.0, i2 / static_cast<double>(d));
  return dim % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

struct AttnGrads {
  Matrix d_q, d_k, d_v;
};

// Reverse pass of co_attention for fixed inputs.
AttnGrads attention_backward(const Matrix& d_out, const Matrix& q, const Matrix& k,
                             const Matrix& v, const AttentionResult& fwd, int heads) {
  const Eigen::Index dk = q.cols() / heads;
  const Eigen::Index dv = v.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  AttnGrads g{Matrix::Zero(q.rows(), q.cols()), Matrix::Zero(k.rows(), k.cols()),
              Matrix::Zero(v.rows(), v.cols())};
  for (int h = 0; h < heads; ++h) {
    const Matrix& a = fwd.weights[static_cast<std::size_t>(h)];
    const Matrix d_oh = d_out.middleCols(h * dv, dv);
    const Matrix d_a = d_oh * v.middleCols(h * dv, dv).transpose();
    g.d_v.middleCols(h * dv, dv) = a.transpose() * d_oh;
    const Vector row_dot = a.cwiseProduct(d_a).rowwise().sum();
    const Matrix d_s = a.cwiseProduct(d_a.colwise() - row_dot) * scale;
    g.d_q.middleCols(h * dk, dk) = d_s * k.middleCols(h * dk, dk);
    g.d_k.middleCols(h * dk, dk) = d_s.transpose() * q.middleCols(h * dk, dk);
  }
  return g;
}

}  // namespace

ToyScorer::ToyScorer(const ScorerConfig& cfg) : cfg_(cfg) {
  require_valid(cfg_);
  const Eigen::Index d = cfg_.embed_dim;
  tok_emb_.resize(cfg_.vocab_size, d);
  pos_emb_.resize(cfg_.max_tokens, d);
  seg_emb_.resize(d);
  feat_proj_.resize(cfg_.feature_dim, d);
  loc_proj_.resize(5, d);
  vis_bias_.resize(d);
  layers_.resize(static_cast<std::size_t>(cfg_.num_layers));
  for (Layer& l : layers_) {
    for (Matrix* m : {&l.wq_text, &l.wk_vis, &l.wv_vis, &l.wo_text, &l.wq_vis,
                      &l.wk_text, &l.wv_text, &l.wo_vis}) {
      m->resize(d, d);
    }
  }
  w_match_.resize(d);
  w_rel_.resize(d);
  w_off_.resize(d, 2);
  b_off_.resize(2);

  // Variance-1/fan_in uniform init; embeddings use unit-ish scale.
  Rng rng(mix_seed(cfg_.seed, 0x746f79ULL));
  const double proj = std::sqrt(3.0 / static_cast<double>(d));
  fill_uniform(tok_emb_, rng, 0.5);
  fill_uniform(pos_emb_, rng, 0.1);
  fill_uniform(seg_emb_, rng, 0.1);
  fill_uniform(feat_proj_, rng, std::sqrt(3.0 / cfg_.feature_dim));
  fill_uniform(loc_proj_, rng, std::sqrt(3.0 / 5.0));
  fill_uniform(vis_bias_, rng, 0.1);
  for (Layer& l : layers_) {
    for (Matrix* m : {&l.wq_text, &l.wk_vis, &l.wv_vis, &l.wo_text, &l.wq_vis,
                      &l.wk_text, &l.wv_text, &l.wo_vis}) {
      fill_uniform(*m, rng, proj);
    }
  }
  fill_uniform(w_match_, rng, proj);
  b_match_ = 0.0;
  fill_uniform(w_rel_, rng, proj);
  b_rel_ = 0.0;
  fill_uniform(w_off_, rng, proj);
  b_off_.setConstant(-1.0);
}

ToyScorer::Trace ToyScorer::forward(const TubeProposal& tube, const Query& query) const {
  if (tube.boxes.empty()) throw InvalidInput("toy scorer: empty tube");
  if (static_cast<int>(query.tokens.size()) != cfg_.max_tokens) {
    throw InvalidInput("toy scorer: query must be padded to " +
                       std::to_string(cfg_.max_tokens) + " tokens");
  }
  if (query.valid_length < 1 || query.valid_length > cfg_.max_tokens) {
    throw InvalidInput("toy scorer: query valid_length out of range");
  }
  const Eigen::Index d = cfg_.embed_dim;
  Trace tr;

  tr.text0.resize(cfg_.max_tokens, d);
  tr.text_mask.resize(static_cast<std::size_t>(cfg_.max_tokens));
  for (int p = 0; p < cfg_.max_tokens; ++p) {
    const int id = query.tokens[static_cast<std::size_t>(p)];
    if (id < 0 || id >= cfg_.vocab_size) throw InvalidInput("toy scorer: token id out of vocabulary");
    tr.text0.row(p) = tok_emb_.row(id) + pos_emb_.row(p) + seg_emb_.transpose();
    tr.text_mask[static_cast<std::size_t>(p)] = p < query.valid_length;
  }

  const std::vector<SampledFrame> frames = subsample_tube(tube, cfg_.stride);
  const auto nv = static_cast<Eigen::Index>(frames.size());
  tr.vis0.resize(nv, d);
  const double area = cfg_.frame_width * cfg_.frame_height;
  for (Eigen::Index k = 0; k < nv; ++k) {
    const SampledFrame& f = frames[static_cast<std::size_t>(k)];
    if (static_cast<int>(f.feature.size()) != cfg_.feature_dim) {
      throw InvalidInput("toy scorer: feature length " + std::to_string(f.feature.size()) +
                         " does not match configured " + std::to_string(cfg_.feature_dim));
    }
    const Eigen::Map<const Eigen::RowVectorXd> feat(f.feature.data(), cfg_.feature_dim);
    Eigen::RowVectorXd loc(5);
    loc << f.bbox.x1 / cfg_.frame_width, f.bbox.y1 / cfg_.frame_height,
        f.bbox.x2 / cfg_.frame_width, f.bbox.y2 / cfg_.frame_height, f.bbox.area() / area;
    tr.vis0.row(k) = feat * feat_proj_ + loc * loc_proj_ + vis_bias_.transpose();
    for (Eigen::Index j = 0; j < d; ++j) tr.vis0(k, j) += temporal_encoding(f.local_index, j, d);
    tr.sampled_local_indices.push_back(f.local_index);
  }

  Matrix text = tr.text0;
  Matrix vis = tr.vis0;
  for (const Layer& l : layers_) {
    LayerTrace lt;
    lt.text_in = text;
    lt.vis_in = vis;
    lt.q_text = text * l.wq_text;
    lt.k_vis = vis * l.wk_vis;
    lt.v_vis = vis * l.wv_vis;
    lt.text_attn = co_attention(lt.q_text, lt.k_vis, lt.v_vis, cfg_.num_heads);
    lt.q_vis = vis * l.wq_vis;
    lt.k_text = text * l.wk_text;
    lt.v_text = text * l.wv_text;
    lt.vis_attn = co_attention(lt.q_vis, lt.k_text, lt.v_text, cfg_.num_heads, tr.text_mask);
    text = lt.text_in + lt.text_attn.output * l.wo_text;
    vis = lt.vis_in + lt.vis_attn.output * l.wo_vis;
    tr.layers.push_back(std::move(lt));
  }
  tr.text_out = text;
  tr.vis_out = vis;

  tr.global = text.row(0).transpose().cwiseProduct(vis.row(0).transpose());
  tr.match_logit = w_match_.dot(tr.global) + b_match_;
  ScoreBundle& b = tr.bundle;
  b.match = sigmoid(tr.match_logit);
  b.sampled_local_indices = tr.sampled_local_indices;
  for (Eigen::Index k = 0; k < nv; ++k) {
    const Vector frame = vis.row(k).transpose();
    b.relevance.push_back(sigmoid(w_rel_.dot(frame) + b_rel_));
    const Vector off = w_off_.transpose() * frame + b_off_;
    b.offsets.push_back({softplus(off[0]), softplus(off[1])});
  }
  return tr;
}

ScoreBundle ToyScorer::score(const TubeProposal& tube, const Query& query) const {
  return forward(tube, query).bundle;
}

std::map<int, Vector> ToyScorer::match_grad_token_embedding(const TubeProposal& tube,
                                                            const Query& query) const {
  const Trace tr = forward(tube, query);
  const double m = tr.bundle.match;
  const double d_logit = m * (1.0 - m);

  Matrix d_text = Matrix::Zero(tr.text_out.rows(), tr.text_out.cols());
  Matrix d_vis = Matrix::Zero(tr.vis_out.rows(), tr.vis_out.cols());
  d_text.row(0) = (d_logit * w_match_.cwiseProduct(tr.vis_out.row(0).transpose())).transpose();
  d_vis.row(0) = (d_logit * w_match_.cwiseProduct(tr.text_out.row(0).transpose())).transpose();

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const LayerTrace& lt = tr.layers[li];
    Matrix d_text_in = d_text;
    Matrix d_vis_in = d_vis;

    const AttnGrads gt = attention_backward(d_text * l.wo_text.transpose(), lt.q_text,
                                            lt.k_vis, lt.v_vis, lt.text_attn, cfg_.num_heads);
    d_text_in += gt.d_q * l.wq_text.transpose();
    d_vis_in += gt.d_k * l.wk_vis.transpose() + gt.d_v * l.wv_vis.transpose();

    const AttnGrads gv = attention_backward(d_vis * l.wo_vis.transpose(), lt.q_vis,
                                            lt.k_text, lt.v_text, lt.vis_attn, cfg_.num_heads);
    d_vis_in += gv.d_q * l.wq_vis.transpose();
    d_text_in += gv.d_k * l.wk_text.transpose() + gv.d_v * l.wv_text.transpose();

    d_text = std::move(d_text_in);
    d_vis = std::move(d_vis_in);
  }

  std::map<int, Vector> grads;
  for (int p = 0; p < cfg_.max_tokens; ++p) {
    const int id = query.tokens[static_cast<std::size_t>(p)];
    auto [it, inserted] = grads.try_emplace(id, Vector::Zero(cfg_.embed_dim));
    it->second += d_text.row(p).transpose();
  }
  return grads;
}

template <typename Self, typename Visitor>
void ToyScorer::visit_parameters(Self& self, Visitor&& visit) {
  auto all = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) visit(m.data()[i]);
  };
  all(self.tok_emb_);
  all(self.pos_emb_);
  all(self.seg_emb_);
  all(self.feat_proj_);
  all(self.loc_proj_);
  all(self.vis_bias_);
  for (auto& l : self.layers_) {
    all(l.wq_text);
    all(l.wk_vis);
    all(l.wv_vis);
    all(l.wo_text);
    all(l.wq_vis);
    all(l.wk_text);
    all(l.wv_text);
    all(l.wo_vis);
  }
  all(self.w_match_);
  visit(self.b_match_);
  all(self.w_rel_);
  visit(self.b_rel_);
  all(self.w_off_);
  all(self.b_off_);
}

namespace {

constexpr char kMagic[4] = {'S', 'T', 'G', 'V'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw InvalidInput("weights file: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("weights file: truncated data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void ToyScorer::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put_u32(os, kFormatVersion);
  for (int v : {cfg_.vocab_size, cfg_.max_tokens, cfg_.feature_dim, cfg_.embed_dim,
                cfg_.num_heads, cfg_.num_layers, cfg_.stride}) {
    put_u32(os, static_cast<std::uint32_t>(v));
  }
  put_f64(os, cfg_.frame_width);
  put_f64(os, cfg_.frame_height);
  visit_parameters(*this, [&](const double& x) { put_f64(os, x); });
  if (!os) throw std::runtime_error("failed writing " + path);
}

ToyScorer ToyScorer::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw InvalidInput("weights file " + path + ": bad magic");
  }
  if (get_u32(is) != kFormatVersion) throw InvalidInput("weights file " + path + ": unknown version");
  ScorerConfig cfg;
  cfg.vocab_size = static_cast<int>(get_u32(is));
  cfg.max_tokens = static_cast<int>(get_u32(is));
  cfg.feature_dim = static_cast<int>(get_u32(is));
  cfg.embed_dim = static_cast<int>(get_u32(is));
  cfg.num_heads = static_cast<int>(get_u32(is));
  cfg.num_layers = static_cast<int>(get_u32(is));
  cfg.stride = static_cast<int>(get_u32(is));
  cfg.frame_width = get_f64(is);
  cfg.frame_height = get_f64(is);
  ToyScorer s(cfg);
  visit_parameters(s, [&](double& x) { x = get_f64(is); });
  if (is.peek() != std::char_traits<char>::eof()) {
    throw InvalidInput("weights file " + path + ": trailing bytes");
  }
  return s;
}

bool ToyScorer::operator==(const ToyScorer& other) const {
  ScorerConfig lhs = cfg_, rhs = other.cfg_;
  lhs.seed = rhs.seed = 0;  // the seed is not part of the serialized state
  if (!(lhs == rhs)) return false;
  std::vector<double> a, b;
  visit_parameters(*this, [&](const double& x) { a.push_back(x); });
  visit_parameters(other, [&](const double& x) { b.push_back(x); });
  return a == b;
}

}  // namespace stgvt
