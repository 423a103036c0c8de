#pragma once

#include <random>
#include <string>
#include <vector>

#include "advtag/graph.hpp"
#include "advtag/tensor.hpp"

namespace advtag {

/// Glorot-uniform init: U(-sqrt(6/(fan_in+fan_out)), +...).
inline TensorPtr glorot(int rows, int cols, std::mt19937& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  TensorPtr t = make_zeros({rows, cols});
  for (auto& v : t->values) v = dist(rng);
  return t;
}

inline TensorPtr zeros_vec(int n) { return make_zeros({n}); }

// ---- embeddings ----------------------------------------------------------

/// Lookup tables for word / POS / Brown-cluster / previous-label ids.
/// Row 0 of each table is the reserved UNK (or start-symbol) row.
struct EmbeddingBank {
  TensorPtr word_table;     // [V_word, d_word]
  TensorPtr pos_table;      // [V_pos, d_pos]
  TensorPtr cluster_table;  // [V_cluster, d_cluster]
  TensorPtr label_table;    // [V_label+1, d_label]; row 0 = start symbol

  static EmbeddingBank init(int v_word, int d_word, int v_pos, int d_pos, int v_cluster,
                            int d_cluster, int v_label, int d_label, std::mt19937& rng) {
    EmbeddingBank b;
    b.word_table = glorot(v_word, d_word, rng);
    b.pos_table = glorot(v_pos, d_pos, rng);
    b.cluster_table = glorot(v_cluster, d_cluster, rng);
    b.label_table = glorot(v_label + 1, d_label, rng);
    return b;
  }

  int token_dim() const {
    return word_table->shape[1] + pos_table->shape[1] + cluster_table->shape[1];
  }
  int label_dim() const { return label_table->shape[1]; }

  std::vector<TensorPtr> tensors() const {
    return {word_table, pos_table, cluster_table, label_table};
  }
};

/// Concatenated word/POS/cluster embedding of one token.
template <class TokenT>
TensorPtr embed_token(Graph& g, const EmbeddingBank& bank, const TokenT& tok) {
  return g.concat({g.row_lookup(bank.word_table, tok.word_id),
                   g.row_lookup(bank.pos_table, tok.pos_id),
                   g.row_lookup(bank.cluster_table, tok.cluster_id)});
}

// ---- LSTM ----------------------------------------------------------------

/// One LSTM direction: four gates, each with input and recurrent weights
/// plus a bias. Forget-gate bias starts at 1.0.
struct LstmCellParams {
  TensorPtr wi_x, wi_h, bi;  // input gate
  TensorPtr wf_x, wf_h, bf;  // forget gate
  TensorPtr wo_x, wo_h, bo;  // output gate
  TensorPtr wc_x, wc_h, bc;  // candidate
  int hidden = 0;

  static LstmCellParams init(int input_dim, int hidden, std::mt19937& rng) {
    LstmCellParams c;
    c.hidden = hidden;
    auto gate = [&](TensorPtr& wx, TensorPtr& wh, TensorPtr& b, double bias_init) {
      wx = glorot(hidden, input_dim, rng);
      wh = glorot(hidden, hidden, rng);
      b = zeros_vec(hidden);
      std::fill(b->values.begin(), b->values.end(), bias_init);
    };
    gate(c.wi_x, c.wi_h, c.bi, 0.0);
    gate(c.wf_x, c.wf_h, c.bf, 1.0);
    gate(c.wo_x, c.wo_h, c.bo, 0.0);
    gate(c.wc_x, c.wc_h, c.bc, 0.0);
    return c;
  }

  std::vector<TensorPtr> tensors() const {
    return {wi_x, wi_h, bi, wf_x, wf_h, bf, wo_x, wo_h, bo, wc_x, wc_h, bc};
  }
};

struct LstmState {
  TensorPtr h, c;
};

inline LstmState lstm_step(Graph& g, const LstmCellParams& p, const TensorPtr& x,
                           const LstmState& prev) {
  auto gate = [&](const TensorPtr& wx, const TensorPtr& wh, const TensorPtr& b) {
    return g.add(g.add(g.matmul(wx, x), g.matmul(wh, prev.h)), b);
  };
  TensorPtr i = g.sigmoid(gate(p.wi_x, p.wi_h, p.bi));
  TensorPtr f = g.sigmoid(gate(p.wf_x, p.wf_h, p.bf));
  TensorPtr o = g.sigmoid(gate(p.wo_x, p.wo_h, p.bo));
  TensorPtr cand = g.tanh(gate(p.wc_x, p.wc_h, p.bc));
  TensorPtr c = g.add(g.mul(f, prev.c), g.mul(i, cand));
  TensorPtr h = g.mul(o, g.tanh(c));
  return {h, c};
}

/// Single-layer bi-directional LSTM; output dim per position is 2*hidden.
struct BiLstmParams {
  LstmCellParams fwd, bwd;

  static BiLstmParams init(int input_dim, int hidden, std::mt19937& rng) {
    BiLstmParams p;
    p.fwd = LstmCellParams::init(input_dim, hidden, rng);
    p.bwd = LstmCellParams::init(input_dim, hidden, rng);
    return p;
  }

  int output_dim() const { return 2 * fwd.hidden; }

  std::vector<TensorPtr> tensors() const {
    auto t = fwd.tensors();
    auto u = bwd.tensors();
    t.insert(t.end(), u.begin(), u.end());
    return t;
  }
};

/// Position i of the result is concat(forward state after tokens 0..i,
/// backward state after tokens n-1..i).
inline std::vector<TensorPtr> bilstm_encode(Graph& g, const BiLstmParams& p,
                                            const std::vector<TensorPtr>& inputs) {
  if (inputs.empty()) throw ValueError("bilstm_encode: empty input sequence");
  const size_t n = inputs.size();
  const int h = p.fwd.hidden;
  std::vector<TensorPtr> fwd(n), bwd(n);
  LstmState s{zeros_vec(h), zeros_vec(h)};
  for (size_t i = 0; i < n; ++i) {
    s = lstm_step(g, p.fwd, inputs[i], s);
    fwd[i] = s.h;
  }
  s = {zeros_vec(h), zeros_vec(h)};
  for (size_t i = n; i-- > 0;) {
    s = lstm_step(g, p.bwd, inputs[i], s);
    bwd[i] = s.h;
  }
  std::vector<TensorPtr> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = g.concat({fwd[i], bwd[i]});
  return out;
}

// ---- feed-forward --------------------------------------------------------

enum class Activation { linear, relu, tanh, sigmoid };

/// Stack of affine layers; the last layer is linear logits.
struct FfnParams {
  struct Layer {
    TensorPtr w, b;
    Activation act;
  };
  std::vector<Layer> layers;

  /// dims = {in, hidden..., out}; hidden layers use `act`.
  static FfnParams init(const std::vector<int>& dims, Activation act, std::mt19937& rng) {
    if (dims.size() < 2) throw ValueError("ffn: need at least input and output dims");
    FfnParams p;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
      const bool last = i + 2 == dims.size();
      p.layers.push_back({glorot(dims[i + 1], dims[i], rng), zeros_vec(dims[i + 1]),
                          last ? Activation::linear : act});
    }
    return p;
  }

  int input_dim() const { return layers.front().w->shape[1]; }
  int output_dim() const { return layers.back().w->shape[0]; }

  std::vector<TensorPtr> tensors() const {
    std::vector<TensorPtr> t;
    for (const auto& l : layers) {
      t.push_back(l.w);
      t.push_back(l.b);
    }
    return t;
  }
};

inline TensorPtr ffn_logits(Graph& g, const FfnParams& p, const TensorPtr& x) {
  if (x->shape.size() != 1 || x->shape[0] != p.input_dim())
    throw ShapeError("ffn_logits: input " + shape_str(x->shape) + " does not match layer dim " +
                     std::to_string(p.input_dim()));
  TensorPtr h = x;
  for (const auto& l : p.layers) {
    h = g.add(g.matmul(l.w, h), l.b);
    switch (l.act) {
      case Activation::linear: break;
      case Activation::relu: h = g.relu(h); break;
      case Activation::tanh: h = g.tanh(h); break;
      case Activation::sigmoid: h = g.sigmoid(h); break;
    }
  }
  return h;
}

}  // namespace advtag
