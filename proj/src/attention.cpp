#include "stgvt/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stgvt/geometry.hpp"

namespace stgvt {

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("softmax: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) throw InvalidInput("softmax: no finite entry");
  std::vector<double> out(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    z += out[i];
  }
  for (double& x : out) x /= z;
  return out;
}

AttentionResult co_attention(const Matrix& queries, const Matrix& keys,
                             const Matrix& values, int num_heads,
                             const std::vector<bool>& key_mask) {
  if (num_heads < 1) throw InvalidInput("co_attention: num_heads must be >= 1");
  if (queries.cols() != keys.cols()) {
    throw InvalidInput("co_attention: query/key width mismatch");
  }
  if (keys.rows() != values.rows()) {
    throw InvalidInput("co_attention: key/value row count mismatch");
  }
  if (keys.rows() == 0) throw InvalidInput("co_attention: no keys");
  if (queries.cols() % num_heads != 0 || values.cols() % num_heads != 0) {
    throw InvalidInput("co_attention: widths not divisible by num_heads");
  }
  if (!key_mask.empty() && static_cast<Eigen::Index>(key_mask.size()) != keys.rows()) {
    throw InvalidInput("co_attention: key mask length mismatch");
  }

  const Eigen::Index dk = queries.cols() / num_heads;
  const Eigen::Index dv = values.cols() / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  AttentionResult res;
  res.output.resize(queries.rows(), values.cols());
  std::vector<double> logits(static_cast<std::size_t>(keys.rows()));
  for (int h = 0; h < num_heads; ++h) {
    const auto qh = queries.middleCols(h * dk, dk);
    const auto kh = keys.middleCols(h * dk, dk);
    const auto vh = values.middleCols(h * dv, dv);
    const Matrix scores = (qh * kh.transpose()) * scale;
    Matrix w(queries.rows(), keys.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        const bool on = key_mask.empty() || key_mask[static_cast<std::size_t>(j)];
        logits[static_cast<std::size_t>(j)] =
            on ? scores(i, j) : -std::numeric_limits<double>::infinity();
      }
      const std::vector<double> p = softmax(logits);
      for (Eigen::Index j = 0; j < scores.cols(); ++j) w(i, j) = p[static_cast<std::size_t>(j)];
    }
    res.output.middleCols(h * dv, dv) = w * vh;
    res.weights.push_back(std::move(w));
  }
  return res;
}

Matrix co_attention_forward(const Matrix& queries, const Matrix& keys,
                            const Matrix& values, int num_heads) {
  return co_attention(queries, keys, values, num_heads).output;
}

}  // namespace stgvt
