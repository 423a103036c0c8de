#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "advtag/corpus.hpp"
#include "advtag/graph.hpp"
#include "advtag/layers.hpp"
#include "advtag/parsing.hpp"

namespace advtag {

struct NanAbort : std::runtime_error {
  explicit NanAbort(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Objective { none, gr, gan, wgan };
enum class TaskKind { tagging, parsing };
enum class LambdaSchedule { constant, ramp };

inline const char* objective_name(Objective o) {
  switch (o) {
    case Objective::none: return "none";
    case Objective::gr: return "gr";
    case Objective::gan: return "gan";
    case Objective::wgan: return "wgan";
  }
  return "?";
}

inline Objective objective_from_name(const std::string& s) {
  if (s == "none") return Objective::none;
  if (s == "gr") return Objective::gr;
  if (s == "gan") return Objective::gan;
  if (s == "wgan") return Objective::wgan;
  throw ValueError("unknown objective: " + s);
}

struct AdversarialConfig {
  Objective objective = Objective::none;
  double lambda = 0.1;
  double clip_c = 0.01;
  int critic_steps = 1;  // 5 is the usual WGAN choice
  double lr_tagger = 0.05;
  double lr_generator = 0.05;
  double lr_discriminator = 0.01;
  LambdaSchedule lambda_schedule = LambdaSchedule::constant;
  double ramp_gamma = 10.0;
  unsigned seed = 1;
  bool sentence_pool = false;  // pool G outputs per sentence before D
  bool use_prev_label = true;
  int n_languages = 2;
  double grad_clip = 5.0;

  void validate() const {
    if (lambda < 0) throw ValueError("config: lambda must be >= 0");
    if (clip_c <= 0) throw ValueError("config: clip-c must be > 0");
    if (critic_steps < 1) throw ValueError("config: critic-steps must be >= 1");
    if (lr_tagger <= 0 || lr_generator <= 0 || lr_discriminator <= 0)
      throw ValueError("config: learning rates must be > 0");
  }

  /// Effective lambda at training progress p in [0,1].
  double lambda_at(double p) const {
    if (lambda_schedule == LambdaSchedule::constant) return lambda;
    return lambda * (2.0 / (1.0 + std::exp(-ramp_gamma * p)) - 1.0);
  }
};

struct TrainingStepReport {
  double o_t = 0;  // task objective value (negated NLL)
  double o_d = 0;  // discriminator objective value (or GR lid cross-entropy)
  double o_g = 0;  // generator objective value, GAN/WGAN only
  double grad_norm_g = 0;
  double grad_norm_d = 0;
  double disc_accuracy = 0;  // token-level lid accuracy on this batch
};

struct ModelDims {
  int v_word = 1, d_word = 64;
  int v_pos = 1, d_pos = 16;
  int v_cluster = 1, d_cluster = 8;
  int d_label = 8;
  int hidden = 64;        // per LSTM direction
  int head_hidden = 128;  // tagger / parser scorer hidden layer
  int disc_hidden = 128;
  int n_tags = 2;     // tagging classes
  int n_deprels = 2;  // parse label inventory (incl. root)
  int root_label = 1;
};

/// The three parameter groups of the architecture: generator (embeddings +
/// bi-LSTM), task head, and the optional language discriminator.
struct ModelParams {
  EmbeddingBank bank;
  BiLstmParams bilstm;
  FfnParams head;
  std::optional<FfnParams> discriminator;
  TaskKind task = TaskKind::tagging;
  ModelDims dims;

  static ModelParams init(TaskKind task, const ModelDims& dims, const AdversarialConfig& cfg,
                          TensorPtr pretrained_words = nullptr, bool finetune_words = false) {
    ModelParams m;
    m.task = task;
    m.dims = dims;
    std::mt19937 rng(cfg.seed);
    int n_labels = task == TaskKind::tagging ? dims.n_tags : dims.n_deprels;
    m.bank = EmbeddingBank::init(dims.v_word, dims.d_word, dims.v_pos, dims.d_pos, dims.v_cluster,
                                 dims.d_cluster, n_labels, dims.d_label, rng);
    if (pretrained_words) {
      if (pretrained_words->shape != m.bank.word_table->shape)
        throw ShapeError("pretrained embeddings " + shape_str(pretrained_words->shape) +
                         " do not match word table " + shape_str(m.bank.word_table->shape));
      m.bank.word_table = make_tensor(pretrained_words->shape, pretrained_words->values);
      m.bank.word_table->frozen = !finetune_words;
    }
    m.bilstm = BiLstmParams::init(m.bank.token_dim(), dims.hidden, rng);
    const int feat = m.bilstm.output_dim();
    if (task == TaskKind::tagging) {
      int in = feat + (cfg.use_prev_label ? dims.d_label : 0);
      m.head = FfnParams::init({in, dims.head_hidden, dims.n_tags}, Activation::relu, rng);
    } else {
      m.head = FfnParams::init({3 * feat, dims.head_hidden, transition_count(dims.n_deprels)},
                               Activation::relu, rng);
    }
    if (cfg.objective != Objective::none) {
      std::mt19937 drng(cfg.seed + 0x9e3779b9u);
      int out = cfg.objective == Objective::gr ? cfg.n_languages : 1;
      m.discriminator =
          FfnParams::init({feat, dims.disc_hidden, out}, Activation::relu, drng);
    }
    return m;
  }

  std::vector<TensorPtr> generator_group() const {
    auto t = bank.tensors();
    auto u = bilstm.tensors();
    t.insert(t.end(), u.begin(), u.end());
    return t;
  }
  std::vector<TensorPtr> task_group() const { return head.tensors(); }
  std::vector<TensorPtr> discriminator_group() const {
    return discriminator ? discriminator->tensors() : std::vector<TensorPtr>{};
  }

  ModelParams clone() const {
    ModelParams c = *this;
    auto copy = [](TensorPtr& t) {
      if (t) {
        auto n = make_tensor(t->shape, t->values);
        n->frozen = t->frozen;
        t = n;
      }
    };
    auto copy_ffn = [&](FfnParams& f) {
      for (auto& l : f.layers) {
        copy(l.w);
        copy(l.b);
      }
    };
    copy(c.bank.word_table);
    copy(c.bank.pos_table);
    copy(c.bank.cluster_table);
    copy(c.bank.label_table);
    auto copy_cell = [&](LstmCellParams& p) {
      for (TensorPtr* t : {&p.wi_x, &p.wi_h, &p.bi, &p.wf_x, &p.wf_h, &p.bf, &p.wo_x, &p.wo_h,
                           &p.bo, &p.wc_x, &p.wc_h, &p.bc})
        copy(*t);
    };
    copy_cell(c.bilstm.fwd);
    copy_cell(c.bilstm.bwd);
    copy_ffn(c.head);
    if (c.discriminator) copy_ffn(*c.discriminator);
    return c;
  }
};

// ---- parameter-group utilities --------------------------------------------

inline void zero_grads(const std::vector<TensorPtr>& group) {
  for (const auto& t : group) t->zero_grad();
}

inline double grad_norm(const std::vector<TensorPtr>& group) {
  double s = 0;
  for (const auto& t : group)
    for (double g : t->grad) s += g * g;
  return std::sqrt(s);
}

/// SGD step with gradient-norm clipping; frozen tensors are skipped.
inline void sgd_update(const std::vector<TensorPtr>& group, double lr, double grad_clip) {
  double scale = 1.0;
  if (grad_clip > 0) {
    double n = grad_norm(group);
    if (n > grad_clip) scale = grad_clip / n;
  }
  for (const auto& t : group) {
    if (t->frozen || t->grad.empty()) continue;
    for (size_t i = 0; i < t->size(); ++i) t->values[i] -= lr * scale * t->grad[i];
  }
}

/// Clamp every discriminator weight and bias into [-c, c].
inline void clip_weights(FfnParams& d, double c) {
  if (c <= 0) throw ValueError("clip_weights: c must be > 0");
  for (auto& l : d.layers)
    for (TensorPtr t : {l.w, l.b})
      for (double& v : t->values) v = std::min(std::max(v, -c), c);
}

/// RAII freeze of a parameter group: frozen tensors receive no gradients
/// and no updates for the guard's lifetime.
class FreezeGuard {
 public:
  explicit FreezeGuard(const std::vector<TensorPtr>& group) {
    for (const auto& t : group) {
      saved_.emplace_back(t, t->frozen);
      t->frozen = true;
    }
  }
  ~FreezeGuard() {
    for (auto& [t, was] : saved_) t->frozen = was;
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<std::pair<TensorPtr, bool>> saved_;
};

// ---- forward passes --------------------------------------------------------

inline std::vector<TensorPtr> encode_sentence(Graph& g, const ModelParams& m, const Sentence& s) {
  std::vector<TensorPtr> inputs;
  inputs.reserve(s.size());
  for (const auto& tok : s.tokens) inputs.push_back(embed_token(g, m.bank, tok));
  return bilstm_encode(g, m.bilstm, inputs);
}

inline TensorPtr mean_vectors(Graph& g, const std::vector<TensorPtr>& vs) {
  TensorPtr acc = vs[0];
  for (size_t i = 1; i < vs.size(); ++i) acc = g.add(acc, vs[i]);
  return g.scale(acc, 1.0 / static_cast<double>(vs.size()));
}

// ---- task losses -----------------------------------------------------------

/// Mean token NLL of the gold tag sequence. The previous gold label enters
/// through its embedding (teacher forcing); row 0 of the label table is the
/// start symbol. With use_prev_label=false each token is scored independently.
inline TensorPtr tagger_loss(Graph& g, const ModelParams& m, const Sentence& s,
                             bool use_prev_label) {
  if (!s.has_tags()) throw ValueError("tagger_loss: sentence has no gold tags");
  auto feats = encode_sentence(g, m, s);
  std::vector<TensorPtr> ces;
  for (size_t i = 0; i < s.size(); ++i) {
    TensorPtr in = feats[i];
    if (use_prev_label) {
      int prev_row = i == 0 ? 0 : s.tags[i - 1] + 1;
      in = g.concat({in, g.row_lookup(m.bank.label_table, prev_row)});
    }
    ces.push_back(g.softmax_cross_entropy(ffn_logits(g, m.head, in), s.tags[i]));
  }
  return g.average(ces);
}

/// Greedy tag decoding; the previous-label feature uses the model's own
/// predictions at inference.
inline std::vector<int> tag_predict(const ModelParams& m, const Sentence& s, bool use_prev_label) {
  Graph g;
  auto feats = encode_sentence(g, m, s);
  std::vector<int> pred(s.size());
  int prev_row = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    TensorPtr in = feats[i];
    if (use_prev_label) in = g.concat({in, g.row_lookup(m.bank.label_table, prev_row)});
    TensorPtr logits = ffn_logits(g, m.head, in);
    int best = 0;
    for (size_t k = 1; k < logits->size(); ++k)
      if (logits->values[k] > logits->values[best]) best = static_cast<int>(k);
    pred[i] = best;
    prev_row = best + 1;
  }
  return pred;
}

namespace detail {
/// Features for one parser decision: generator features of stack top,
/// stack second and buffer front, zero vectors for root/absent positions.
inline TensorPtr parser_state_features(Graph& g, const ParserState& st,
                                       const std::vector<TensorPtr>& feats, int feat_dim) {
  auto pos_feat = [&](int idx) -> TensorPtr {
    if (idx <= 0) {
      auto z = make_zeros({feat_dim});
      z->frozen = true;
      return z;
    }
    return feats[idx - 1];
  };
  int top = st.stack.size() >= 1 ? st.stack.back() : -1;
  int second = st.stack.size() >= 2 ? st.second() : -1;
  int front = st.buffer.empty() ? -1 : st.buffer.front();
  return g.concat({pos_feat(top), pos_feat(second), pos_feat(front)});
}

inline std::vector<char> legal_mask(const ParserState& st, int n_labels, int root_label) {
  std::vector<char> mask(transition_count(n_labels));
  for (int id = 0; id < transition_count(n_labels); ++id)
    mask[id] = legal(st, transition_from_id(id, n_labels), root_label);
  return mask;
}
}  // namespace detail

/// Mean cross-entropy of the gold static-oracle transition sequence, with
/// illegal transitions masked out of the softmax.
inline TensorPtr parser_loss(Graph& g, const ModelParams& m, const Sentence& s) {
  if (!s.has_tree()) throw ValueError("parser_loss: sentence has no gold tree");
  auto seq = oracle(*s.tree, m.dims.root_label);  // throws NonProjectiveError
  auto feats = encode_sentence(g, m, s);
  const int feat_dim = m.bilstm.output_dim();
  ParserState st = ParserState::initial(static_cast<int>(s.size()));
  std::vector<TensorPtr> ces;
  for (const auto& t : seq) {
    TensorPtr in = detail::parser_state_features(g, st, feats, feat_dim);
    auto mask = detail::legal_mask(st, m.dims.n_deprels, m.dims.root_label);
    int gold = transition_id(t, m.dims.n_deprels);
    ces.push_back(g.softmax_cross_entropy(ffn_logits(g, m.head, in), gold, mask));
    st = apply(std::move(st), t, m.dims.root_label);
  }
  return g.average(ces);
}

/// Greedy decoding: argmax legal transition until terminal (exactly 2n
/// steps); argmax ties break toward the lowest transition id.
inline DependencyTree greedy_parse(const ModelParams& m, const Sentence& s) {
  if (s.size() == 0) throw ValueError("greedy_parse: empty sentence");
  Graph g;
  auto feats = encode_sentence(g, m, s);
  const int feat_dim = m.bilstm.output_dim();
  ParserState st = ParserState::initial(static_cast<int>(s.size()));
  while (!st.terminal()) {
    TensorPtr in = detail::parser_state_features(g, st, feats, feat_dim);
    auto mask = detail::legal_mask(st, m.dims.n_deprels, m.dims.root_label);
    TensorPtr logits = ffn_logits(g, m.head, in);
    int best = -1;
    for (size_t k = 0; k < logits->size(); ++k) {
      if (!mask[k]) continue;
      if (best < 0 || logits->values[k] > logits->values[best]) best = static_cast<int>(k);
    }
    st = apply(std::move(st), transition_from_id(best, m.dims.n_deprels), m.dims.root_label);
  }
  return tree_from_arcs(st.arcs, static_cast<int>(s.size()));
}

inline TensorPtr task_loss(Graph& g, const ModelParams& m, const Sentence& s,
                           const AdversarialConfig& cfg) {
  return m.task == TaskKind::tagging ? tagger_loss(g, m, s, cfg.use_prev_label)
                                     : parser_loss(g, m, s);
}

inline TensorPtr batch_task_loss(Graph& g, const ModelParams& m,
                                 const std::vector<const Sentence*>& batch,
                                 const AdversarialConfig& cfg) {
  if (batch.empty()) throw ValueError("batch_task_loss: empty batch");
  std::vector<TensorPtr> losses;
  for (const Sentence* s : batch) losses.push_back(task_loss(g, m, *s, cfg));
  return g.average(losses);
}

// ---- adversarial losses ----------------------------------------------------

struct DiscriminatorStats {
  long correct = 0;
  long total = 0;
  double accuracy() const { return total ? 100.0 * correct / total : 0.0; }
};

namespace detail {
/// Per-sentence discriminator inputs: token features, or one mean-pooled
/// feature when sentence_pool is set.
inline std::vector<TensorPtr> disc_inputs(Graph& g, const ModelParams& m, const Sentence& s,
                                          bool sentence_pool) {
  auto feats = encode_sentence(g, m, s);
  if (sentence_pool) return {mean_vectors(g, feats)};
  return feats;
}
}  // namespace detail

/// Token-level language-id cross-entropy of D(grad_reverse(G(x), lambda));
/// one backward pass through this loss realizes the reversal update rule.
inline TensorPtr discriminator_loss_gr(Graph& g, const ModelParams& m,
                                       const std::vector<const Sentence*>& batch, double lambda,
                                       const AdversarialConfig& cfg,
                                       DiscriminatorStats* stats = nullptr) {
  if (!m.discriminator) throw ValueError("discriminator_loss_gr: no discriminator");
  std::vector<TensorPtr> ces;
  for (const Sentence* s : batch) {
    for (const auto& f : detail::disc_inputs(g, m, *s, cfg.sentence_pool)) {
      TensorPtr logits = ffn_logits(g, *m.discriminator, g.grad_reverse(f, lambda));
      ces.push_back(g.softmax_cross_entropy(logits, s->language_id));
      if (stats) {
        int best = 0;
        for (size_t k = 1; k < logits->size(); ++k)
          if (logits->values[k] > logits->values[best]) best = static_cast<int>(k);
        stats->total++;
        if (best == s->language_id) stats->correct++;
      }
    }
  }
  if (ces.empty()) throw ValueError("discriminator_loss_gr: empty batch");
  return g.average(ces);
}

namespace detail {
/// Single discriminator logit per token (or per pooled sentence).
inline std::vector<TensorPtr> disc_logits(Graph& g, const ModelParams& m,
                                          const std::vector<const Sentence*>& batch,
                                          const AdversarialConfig& cfg,
                                          DiscriminatorStats* stats, bool is_target) {
  std::vector<TensorPtr> zs;
  for (const Sentence* s : batch)
    for (const auto& f : disc_inputs(g, m, *s, cfg.sentence_pool)) {
      TensorPtr z = ffn_logits(g, *m.discriminator, f);
      if (stats) {
        stats->total++;
        if ((z->values[0] > 0) == is_target) stats->correct++;
      }
      zs.push_back(z);
    }
  return zs;
}
}  // namespace detail

/// Negated GAN objective: -( E_t[log D] + E_s[log(1-D)] ) with D = sigmoid
/// of the critic logit; expectations are token-level means. Target tokens
/// carry class 1.
inline TensorPtr gan_discriminator_loss(Graph& g, const ModelParams& m,
                                        const std::vector<const Sentence*>& source_batch,
                                        const std::vector<const Sentence*>& target_batch,
                                        const AdversarialConfig& cfg,
                                        DiscriminatorStats* stats = nullptr) {
  if (!m.discriminator) throw ValueError("gan_discriminator_loss: no discriminator");
  if (source_batch.empty() || target_batch.empty())
    throw ValueError("gan_discriminator_loss: empty batch");
  auto zt = detail::disc_logits(g, m, target_batch, cfg, stats, true);
  auto zs = detail::disc_logits(g, m, source_batch, cfg, stats, false);
  // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
  std::vector<TensorPtr> t_terms, s_terms;
  for (auto& z : zt) t_terms.push_back(g.softplus(g.scale(z, -1.0)));
  for (auto& z : zs) s_terms.push_back(g.softplus(z));
  return g.add(g.average(t_terms), g.average(s_terms));
}

/// Negated WGAN objective: -( E_t[D] - E_s[D] ) with an unbounded critic;
/// the caller clips the critic weights after each update.
inline TensorPtr wgan_discriminator_loss(Graph& g, const ModelParams& m,
                                         const std::vector<const Sentence*>& source_batch,
                                         const std::vector<const Sentence*>& target_batch,
                                         const AdversarialConfig& cfg,
                                         DiscriminatorStats* stats = nullptr) {
  if (!m.discriminator) throw ValueError("wgan_discriminator_loss: no discriminator");
  if (source_batch.empty() || target_batch.empty())
    throw ValueError("wgan_discriminator_loss: empty batch");
  auto zt = detail::disc_logits(g, m, target_batch, cfg, stats, true);
  auto zs = detail::disc_logits(g, m, source_batch, cfg, stats, false);
  return g.sub(g.average(zs), g.average(zt));
}

/// Generator loss: (task loss on the labeled batch) - (discriminator loss
/// recomputed on the adversarial batches). The caller freezes the
/// discriminator group; minimizing this maximizes O_t - O_d.
inline TensorPtr generator_loss(Graph& g, const ModelParams& m,
                                const std::vector<const Sentence*>& labeled_batch,
                                const std::vector<const Sentence*>& source_batch,
                                const std::vector<const Sentence*>& target_batch,
                                const AdversarialConfig& cfg) {
  if (cfg.objective != Objective::gan && cfg.objective != Objective::wgan)
    throw ValueError("generator_loss: only defined for gan/wgan objectives");
  TensorPtr task = batch_task_loss(g, m, labeled_batch, cfg);
  TensorPtr disc = cfg.objective == Objective::gan
                       ? gan_discriminator_loss(g, m, source_batch, target_batch, cfg)
                       : wgan_discriminator_loss(g, m, source_batch, target_batch, cfg);
  return g.sub(task, disc);
}

// ---- training steps --------------------------------------------------------

struct StepBatch {
  std::vector<const Sentence*> labeled;         // task batch
  std::vector<const Sentence*> source_text;     // adversarial source side
  std::vector<const Sentence*> target_text;     // adversarial target side
};

namespace detail {
inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NanAbort(std::string("non-finite ") + what);
}
}  // namespace detail

inline TrainingStepReport train_step_none(ModelParams& m, const StepBatch& b,
                                          const AdversarialConfig& cfg) {
  Graph g;
  TensorPtr loss = batch_task_loss(g, m, b.labeled, cfg);
  detail::check_finite(loss->values[0], "task loss");
  g.backward(loss);
  TrainingStepReport r;
  r.o_t = -loss->values[0];
  auto gen = m.generator_group();
  auto task = m.task_group();
  r.grad_norm_g = grad_norm(gen);
  sgd_update(gen, cfg.lr_generator, cfg.grad_clip);
  sgd_update(task, cfg.lr_tagger, cfg.grad_clip);
  zero_grads(gen);
  zero_grads(task);
  return r;
}

/// One combined pass: task loss plus lid cross-entropy routed through
/// grad_reverse, so a single backward realizes
/// theta_g += grad O_t - lambda grad O_d while the discriminator ascends.
inline TrainingStepReport train_step_gr(ModelParams& m, const StepBatch& b,
                                        const AdversarialConfig& cfg, double progress) {
  Graph g;
  TensorPtr task = batch_task_loss(g, m, b.labeled, cfg);
  std::vector<const Sentence*> disc_batch = b.labeled;
  disc_batch.insert(disc_batch.end(), b.target_text.begin(), b.target_text.end());
  DiscriminatorStats stats;
  TensorPtr disc = discriminator_loss_gr(g, m, disc_batch, cfg.lambda_at(progress), cfg, &stats);
  TensorPtr total = g.add(task, disc);
  detail::check_finite(total->values[0], "combined loss");
  g.backward(total);
  TrainingStepReport r;
  r.o_t = -task->values[0];
  r.o_d = disc->values[0];
  r.disc_accuracy = stats.accuracy();
  auto gen = m.generator_group();
  auto taskg = m.task_group();
  auto dg = m.discriminator_group();
  r.grad_norm_g = grad_norm(gen);
  r.grad_norm_d = grad_norm(dg);
  sgd_update(gen, cfg.lr_generator, cfg.grad_clip);
  sgd_update(taskg, cfg.lr_tagger, cfg.grad_clip);
  sgd_update(dg, cfg.lr_discriminator, cfg.grad_clip);
  zero_grads(gen);
  zero_grads(taskg);
  zero_grads(dg);
  return r;
}

/// critic_steps discriminator updates with the generator frozen, then one
/// generator+tagger update with the discriminator frozen.
inline TrainingStepReport train_step_adversarial(ModelParams& m, const StepBatch& b,
                                                 const AdversarialConfig& cfg) {
  const bool wgan = cfg.objective == Objective::wgan;
  TrainingStepReport r;
  auto gen = m.generator_group();
  auto taskg = m.task_group();
  auto dg = m.discriminator_group();
  DiscriminatorStats stats;
  for (int k = 0; k < cfg.critic_steps; ++k) {
    FreezeGuard freeze_gen(gen);
    Graph g;
    DiscriminatorStats* sp = k + 1 == cfg.critic_steps ? &stats : nullptr;
    TensorPtr dl = wgan ? wgan_discriminator_loss(g, m, b.source_text, b.target_text, cfg, sp)
                        : gan_discriminator_loss(g, m, b.source_text, b.target_text, cfg, sp);
    detail::check_finite(dl->values[0], "discriminator loss");
    g.backward(dl);
    r.o_d = -dl->values[0];
    r.grad_norm_d = grad_norm(dg);
    sgd_update(dg, cfg.lr_discriminator, cfg.grad_clip);
    zero_grads(dg);
    if (wgan) clip_weights(*m.discriminator, cfg.clip_c);
  }
  r.disc_accuracy = stats.accuracy();
  {
    FreezeGuard freeze_disc(dg);
    Graph g;
    TensorPtr task = batch_task_loss(g, m, b.labeled, cfg);
    TensorPtr disc = wgan ? wgan_discriminator_loss(g, m, b.source_text, b.target_text, cfg)
                          : gan_discriminator_loss(g, m, b.source_text, b.target_text, cfg);
    TensorPtr gl = g.sub(task, disc);
    detail::check_finite(gl->values[0], "generator loss");
    g.backward(gl);
    r.o_t = -task->values[0];
    r.o_g = -gl->values[0];
    r.grad_norm_g = grad_norm(gen);
    sgd_update(gen, cfg.lr_generator, cfg.grad_clip);
    sgd_update(taskg, cfg.lr_tagger, cfg.grad_clip);
    zero_grads(gen);
    zero_grads(taskg);
  }
  return r;
}

inline TrainingStepReport train_step(ModelParams& m, const StepBatch& b,
                                     const AdversarialConfig& cfg, double progress = 0.0) {
  if (cfg.objective != Objective::none && b.target_text.empty())
    throw ValueError("train_step: adversarial objective requires target-language text");
  switch (cfg.objective) {
    case Objective::none: return train_step_none(m, b, cfg);
    case Objective::gr: return train_step_gr(m, b, cfg, progress);
    case Objective::gan:
    case Objective::wgan: return train_step_adversarial(m, b, cfg);
  }
  throw ValueError("train_step: bad objective");
}

}  // namespace advtag
