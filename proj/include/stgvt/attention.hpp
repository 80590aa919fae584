#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stgvt {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Numerically stable softmax (max subtraction). Entries equal to -inf get
// weight 0; at least one entry must be finite.
std::vector<double> softmax(std::span<const double> v);

struct AttentionResult {
  Matrix output;                 // n_queries x d_value
  std::vector<Matrix> weights;   // per head, n_queries x n_keys
};

// Scaled dot-product attention split into `num_heads` column blocks:
// head h computes softmax(Q_h K_h^T / sqrt(d_h)) V_h and the head outputs are
// concatenated. Keys with key_mask[j] == false receive zero weight.
AttentionResult co_attention(const Matrix& queries, const Matrix& keys,
                             const Matrix& values, int num_heads = 1,
                             const std::vector<bool>& key_mask = {});

Matrix co_attention_forward(const Matrix& queries, const Matrix& keys,
                            const Matrix& values, int num_heads = 1);

}  // namespace stgvt
