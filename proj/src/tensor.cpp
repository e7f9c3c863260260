#include "deckgen/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace deckgen {

Tensor::Tensor(std::vector<std::size_t> d, std::vector<double> v)
    : dims(std::move(d)), data(std::move(v)) {
  if (numel() != data.size())
    throw ShapeMismatch("tensor: dims imply " + std::to_string(numel()) + " values, got " +
                        std::to_string(data.size()));
}

Tensor Tensor::zeros(std::vector<std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  Tensor t;
  t.dims = std::move(dims);
  t.data.assign(n, 0.0);
  return t;
}

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

GruParams GruParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  GruParams p;
  p.wz = Tensor::zeros({hidden_dim, input_dim});
  p.wr = Tensor::zeros({hidden_dim, input_dim});
  p.wh = Tensor::zeros({hidden_dim, input_dim});
  p.uz = Tensor::zeros({hidden_dim, hidden_dim});
  p.ur = Tensor::zeros({hidden_dim, hidden_dim});
  p.uh = Tensor::zeros({hidden_dim, hidden_dim});
  p.bz.assign(hidden_dim, 0.0);
  p.br.assign(hidden_dim, 0.0);
  p.bh.assign(hidden_dim, 0.0);
  return p;
}

void GruParams::check() const {
  const std::size_t h = hidden_dim();
  const std::size_t in = input_dim();
  auto want = [&](const Tensor& t, std::size_t r, std::size_t c, const char* name) {
    if (t.rank() != 2 || t.rows() != r || t.cols() != c)
      throw ShapeMismatch(std::string("gru param ") + name + ": unexpected shape");
  };
  want(wz, h, in, "wz");
  want(wr, h, in, "wr");
  want(wh, h, in, "wh");
  want(uz, h, h, "uz");
  want(ur, h, h, "ur");
  want(uh, h, h, "uh");
  if (bz.size() != h || br.size() != h || bh.size() != h)
    throw ShapeMismatch("gru biases: unexpected size");
}

Mlp2Params Mlp2Params::zeros(std::size_t input, std::size_t hidden, std::size_t out) {
  Mlp2Params p;
  p.w1 = Tensor::zeros({hidden, input});
  p.b1.assign(hidden, 0.0);
  p.w2 = Tensor::zeros({out, hidden});
  p.b2.assign(out, 0.0);
  return p;
}

Vec matvec(const Tensor& m, const Vec& v) {
  if (m.rank() != 2)
    throw ShapeMismatch("matvec: matrix must be rank 2, got rank " + std::to_string(m.rank()));
  if (m.cols() != v.size())
    throw ShapeMismatch("matvec: matrix cols " + std::to_string(m.cols()) + " != vector size " +
                        std::to_string(v.size()));
  Vec out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    const double* row = m.data.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

Vec softmax(const Vec& v) {
  if (v.empty()) throw EmptyInput("softmax: empty input");
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  Vec out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec gru_cell(const Vec& x, const Vec& h, const GruParams& p) {
  if (x.size() != p.input_dim())
    throw ShapeMismatch("gru_cell: input size " + std::to_string(x.size()) + " != expected " +
                        std::to_string(p.input_dim()));
  if (h.size() != p.hidden_dim())
    throw ShapeMismatch("gru_cell: state size " + std::to_string(h.size()) + " != expected " +
                        std::to_string(p.hidden_dim()));
  const std::size_t n = p.hidden_dim();
  const Vec wzx = matvec(p.wz, x), uzh = matvec(p.uz, h);
  const Vec wrx = matvec(p.wr, x), urh = matvec(p.ur, h);
  Vec z(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = sigmoid(wzx[i] + uzh[i] + p.bz[i]);
    r[i] = sigmoid(wrx[i] + urh[i] + p.br[i]);
  }
  Vec rh(n);
  for (std::size_t i = 0; i < n; ++i) rh[i] = r[i] * h[i];
  const Vec whx = matvec(p.wh, x), uhrh = matvec(p.uh, rh);
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cand = std::tanh(whx[i] + uhrh[i] + p.bh[i]);
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand;
  }
  return out;
}

std::vector<Vec> bi_gru(const std::vector<Vec>& seq, const GruParams& fwd, const GruParams& bwd) {
  if (seq.empty()) throw EmptyInput("bi_gru: empty sequence");
  const std::size_t n = seq.size();
  std::vector<Vec> f(n), b(n);
  Vec state(fwd.hidden_dim(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    state = gru_cell(seq[k], state, fwd);
    f[k] = state;
  }
  state.assign(bwd.hidden_dim(), 0.0);
  for (std::size_t k = n; k-- > 0;) {
    state = gru_cell(seq[k], state, bwd);
    b[k] = state;
  }
  std::vector<Vec> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = concat(f[k], b[k]);
  return out;
}

Vec mlp2(const Vec& x, const Mlp2Params& p) {
  Vec hidden = matvec(p.w1, x);
  if (hidden.size() != p.b1.size()) throw ShapeMismatch("mlp2: b1 size mismatch");
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::max(0.0, hidden[i] + p.b1[i]);
  Vec out = matvec(p.w2, hidden);
  if (out.size() != p.b2.size()) throw ShapeMismatch("mlp2: b2 size mismatch");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.b2[i];
  return out;
}

Vec bilinear_attention(const Vec& h, const std::vector<Vec>& candidates, const Tensor& w) {
  if (candidates.empty()) throw EmptyInput("bilinear_attention: no candidates");
  const Vec hw = [&] {
    // h^T W, computed as W^T h without materializing the transpose
    if (w.rank() != 2) throw ShapeMismatch("bilinear_attention: W must be rank 2");
    if (w.rows() != h.size())
      throw ShapeMismatch("bilinear_attention: W rows " + std::to_string(w.rows()) +
                          " != state size " + std::to_string(h.size()));
    Vec out(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double hr = h[r];
      const double* row = w.data.data() + r * w.cols();
      for (std::size_t c = 0; c < w.cols(); ++c) out[c] += hr * row[c];
    }
    return out;
  }();
  Vec logits(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].size() != hw.size())
      throw ShapeMismatch("bilinear_attention: candidate " + std::to_string(i) + " has size " +
                          std::to_string(candidates[i].size()) + ", expected " +
                          std::to_string(hw.size()));
    double acc = 0.0;
    for (std::size_t c = 0; c < hw.size(); ++c) acc += hw[c] * candidates[i][c];
    logits[i] = acc;
  }
  return softmax(logits);
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vec weighted_sum(const Vec& weights, const std::vector<Vec>& vectors) {
  if (weights.size() != vectors.size())
    throw ShapeMismatch("weighted_sum: weight/vector count mismatch");
  if (vectors.empty()) throw EmptyInput("weighted_sum: empty input");
  Vec out(vectors[0].size(), 0.0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != out.size()) throw ShapeMismatch("weighted_sum: ragged vectors");
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += weights[i] * vectors[i][c];
  }
  return out;
}

}  // namespace deckgen
