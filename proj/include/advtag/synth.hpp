#pragma once

#include <random>
#include <string>
#include <vector>

#include "advtag/corpus.hpp"
#include "advtag/parsing.hpp"

namespace advtag {

/// Synthetic bilingual bundle: a shared latent HMM over tags emits lexeme
/// ids; each language renders lexeme k as a disjoint surface form ("s_k"
/// vs "t_k"). Bilingual embeddings are shared latent vectors plus an
/// epsilon-scaled language offset and per-word noise, so epsilon=0 makes
/// translation pairs identical. delta shifts the target HMM towards an
/// alternative transition structure to create genuine domain shift.
struct SynthConfig {
  unsigned seed = 42;
  int n_sentences = 2000;       // source labeled
  int vocab_size = 500;         // lexemes per language
  int n_tags = 6;
  int n_target_labeled = 2000;  // budget pool
  int n_target_unlabeled = 2000;
  int n_dev = 200;
  int n_test = 400;
  int min_len = 5;
  int max_len = 12;
  int emb_dim = 16;
  double epsilon = 1.0;         // language-specific embedding perturbation
  double delta = 0.5;           // target-language HMM shift
  double emission_noise = 0.1;  // prob of emitting a lexeme off the tag's own slice
};

namespace detail {

inline std::vector<double> random_dist(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  std::vector<double> p(n);
  double s = 0;
  for (auto& v : p) s += (v = -std::log(u(rng)));
  for (auto& v : p) v /= s;
  return p;
}

inline int sample_from(const std::vector<double>& p, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng), acc = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (r <= acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

/// Deterministic head rule over tags: token 1 attaches to the root; token
/// i attaches to the nearest preceding token with a strictly smaller tag,
/// falling back to token 1. Always single-rooted, acyclic, projective.
inline DependencyTree tree_from_tags(const std::vector<int>& tags, int root_label) {
  const int n = static_cast<int>(tags.size());
  DependencyTree t;
  t.heads.assign(n, 0);
  t.labels.assign(n, root_label);
  for (int i = 1; i < n; ++i) {
    int head = 1;
    for (int j = i - 1; j >= 0; --j)
      if (tags[j] < tags[i]) {
        head = j + 1;
        break;
      }
    t.heads[i] = head;
    t.labels[i] = tags[i] + 1;  // deprel inventory: 0 = root, 1+tag otherwise
  }
  return t;
}

}  // namespace detail

inline DataBundle synth_bilingual(const SynthConfig& cfg) {
  if (cfg.vocab_size < cfg.n_tags)
    throw ValueError("synth_bilingual: vocab_size must be >= n_tags");
  if (cfg.n_sentences <= 0 || cfg.vocab_size <= 0 || cfg.n_tags <= 0)
    throw ValueError("synth_bilingual: sizes must be positive");
  std::mt19937 rng(cfg.seed);

  // latent HMM
  std::vector<double> init_src = detail::random_dist(cfg.n_tags, rng);
  std::vector<std::vector<double>> trans_src(cfg.n_tags), trans_alt(cfg.n_tags);
  for (auto& row : trans_src) row = detail::random_dist(cfg.n_tags, rng);
  for (auto& row : trans_alt) row = detail::random_dist(cfg.n_tags, rng);
  std::vector<double> init_alt = detail::random_dist(cfg.n_tags, rng);
  auto mix = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = (1 - cfg.delta) * a[i] + cfg.delta * b[i];
    return r;
  };
  std::vector<double> init_tgt = mix(init_src, init_alt);
  std::vector<std::vector<double>> trans_tgt(cfg.n_tags);
  for (int t = 0; t < cfg.n_tags; ++t) trans_tgt[t] = mix(trans_src[t], trans_alt[t]);

  DataBundle b;
  // two-tag bundles use the compression label names so emitted TSV files
  // stay readable by read_compression_tsv
  for (int t = 0; t < cfg.n_tags; ++t)
    b.tags.add(cfg.n_tags == 2 ? (t == 0 ? "DROPPED" : "KEPT") : "T" + std::to_string(t));
  b.root_label = b.deprels.add("root");
  for (int t = 0; t < cfg.n_tags; ++t) b.deprels.add("dep_T" + std::to_string(t));
  for (int k = 0; k < cfg.vocab_size; ++k) b.words.add("s_" + std::to_string(k));
  for (int k = 0; k < cfg.vocab_size; ++k) b.words.add("t_" + std::to_string(k));

  // embeddings: shared latent + epsilon * (language offset + word noise)
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  b.embeddings = make_zeros({b.words.size(), cfg.emb_dim});
  std::vector<std::vector<double>> latent(cfg.vocab_size, std::vector<double>(cfg.emb_dim));
  for (auto& z : latent)
    for (auto& v : z) v = 2.0 * u(rng);
  // class-structured latent space: lexeme k leans toward the centroid of its
  // owner tag (k % n_tags), so the tag signal lives in the shared latent
  // geometry while the language offset below distorts it per language
  std::vector<std::vector<double>> centroid(cfg.n_tags, std::vector<double>(cfg.emb_dim));
  for (auto& cv : centroid)
    for (auto& v : cv) v = 2.0 * u(rng);
  for (int k = 0; k < cfg.vocab_size; ++k)
    for (int j = 0; j < cfg.emb_dim; ++j) latent[k][j] += centroid[k % cfg.n_tags][j];
  std::vector<double> lang_off[2];
  for (int l = 0; l < 2; ++l) {
    lang_off[l].resize(cfg.emb_dim);
    for (auto& v : lang_off[l]) v = 2.0 * u(rng);
  }
  for (int lang = 0; lang < 2; ++lang)
    for (int k = 0; k < cfg.vocab_size; ++k) {
      int wid = b.words.get((lang == 0 ? "s_" : "t_") + std::to_string(k));
      for (int j = 0; j < cfg.emb_dim; ++j)
        b.embeddings->values[static_cast<size_t>(wid) * cfg.emb_dim + j] =
            latent[k][j] + cfg.epsilon * (lang_off[lang][j] + 0.3 * u(rng));
    }

  std::uniform_int_distribution<int> len_dist(cfg.min_len, cfg.max_len);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any_lex(0, cfg.vocab_size - 1);

  auto emit_lexeme = [&](int tag) {
    if (coin(rng) < cfg.emission_noise) return any_lex(rng);
    int slice = (cfg.vocab_size - 1 - tag) / cfg.n_tags + 1;  // lexemes with k % n_tags == tag
    std::uniform_int_distribution<int> pick(0, slice - 1);
    return tag + pick(rng) * cfg.n_tags;
  };

  auto gen_sentence = [&](int lang, bool labeled) {
    const auto& init = lang == 0 ? init_src : init_tgt;
    const auto& trans = lang == 0 ? trans_src : trans_tgt;
    Sentence s;
    s.language_id = lang;
    int n = len_dist(rng);
    std::vector<int> tags(n);
    for (int i = 0; i < n; ++i) {
      tags[i] = i == 0 ? detail::sample_from(init, rng) : detail::sample_from(trans[tags[i - 1]], rng);
      int lex = emit_lexeme(tags[i]);
      Token tok;
      tok.form = (lang == 0 ? "s_" : "t_") + std::to_string(lex);
      tok.word_id = b.words.get(tok.form);
      tok.language_id = lang;
      s.tokens.push_back(tok);
    }
    if (labeled) {
      s.tags = tags;
      for (int t : tags) s.tag_strings.push_back(b.tags.name(t));
      s.tree = detail::tree_from_tags(tags, b.root_label);
      for (size_t i = 0; i < s.tree->labels.size(); ++i)
        s.deprel_strings.push_back(b.deprels.name(s.tree->labels[i]));
    }
    return s;
  };

  for (int i = 0; i < cfg.n_sentences; ++i) b.source_labeled.push_back(gen_sentence(0, true));
  for (int i = 0; i < cfg.n_target_labeled; ++i) b.target_labeled.push_back(gen_sentence(1, true));
  for (int i = 0; i < cfg.n_target_unlabeled; ++i)
    b.target_unlabeled.push_back(gen_sentence(1, false));
  for (int i = 0; i < cfg.n_dev; ++i) b.dev.push_back(gen_sentence(1, true));
  for (int i = 0; i < cfg.n_test; ++i) b.test.push_back(gen_sentence(1, true));
  b.dev_language = 1;
  b.test_language = 1;
  return b;
}

}  // namespace advtag
