#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "deckgen/errors.hpp"

namespace deckgen {

using Vec = std::vector<double>;

/// Dense row-major tensor. Values live in double precision in memory; the
/// on-disk weight and embedding formats are float32 (see io.hpp).
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> d, std::vector<double> v);

  static Tensor zeros(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims.size(); }
  std::size_t numel() const;

  // rank-2 accessors
  std::size_t rows() const { return dims.at(0); }
  std::size_t cols() const { return dims.at(1); }
  double& at(std::size_t r, std::size_t c) { return data[r * dims[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * dims[1] + c]; }

  bool all_finite() const;
};

/// Parameters of one GRU cell. Row counts equal the hidden size; `w*` map
/// the input, `u*` map the previous state.
struct GruParams {
  Tensor wz, wr, wh;  // (hidden, input)
  Tensor uz, ur, uh;  // (hidden, hidden)
  Vec bz, br, bh;     // (hidden)

  std::size_t input_dim() const { return wz.cols(); }
  std::size_t hidden_dim() const { return wz.rows(); }

  static GruParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  void check() const;
};

/// Two-layer perceptron: w2 * relu(w1 * x + b1) + b2. Output activation
/// (sigmoid / softmax) is applied by the call site.
struct Mlp2Params {
  Tensor w1;  // (hidden, input)
  Vec b1;    // (hidden)
  Tensor w2;  // (out, hidden)
  Vec b2;    // (out)

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t output_dim() const { return w2.rows(); }

  static Mlp2Params zeros(std::size_t input, std::size_t hidden, std::size_t out);
};

// ---------------------------------------------------------------------------
// Kernels. All loops run in a fixed order with double accumulation, so
// results are bit-reproducible across runs.
// ---------------------------------------------------------------------------

/// Row-major matrix-vector product.
Vec matvec(const Tensor& m, const Vec& v);

/// Numerically stable softmax (max subtraction).
Vec softmax(const Vec& v);

double sigmoid(double x);

/// One GRU step:
///   z = sigmoid(Wz x + Uz h + bz)
///   r = sigmoid(Wr x + Ur h + br)
///   c = tanh(Wh x + Uh (r .* h) + bh)
///   h' = (1 - z) .* h + z .* c
Vec gru_cell(const Vec& x, const Vec& h, const GruParams& p);

/// Bidirectional GRU over a sequence; output k is the concatenation of the
/// forward state after k+1 steps and the backward state after n-k steps.
/// Both directions start from zero states.
std::vector<Vec> bi_gru(const std::vector<Vec>& seq, const GruParams& fwd, const GruParams& bwd);

/// w2 * relu(w1 * x + b1) + b2.
Vec mlp2(const Vec& x, const Mlp2Params& p);

/// Distribution over candidates: softmax over logits l_r = h^T W e_r.
Vec bilinear_attention(const Vec& h, const std::vector<Vec>& candidates, const Tensor& w);

// small helpers shared across the model
Vec concat(const Vec& a, const Vec& b);
Vec weighted_sum(const Vec& weights, const std::vector<Vec>& vectors);

}  // namespace deckgen
