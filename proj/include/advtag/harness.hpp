#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtag/corpus.hpp"
#include "advtag/metrics.hpp"
#include "advtag/model.hpp"
#include "advtag/synth.hpp"

namespace advtag {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RunConfig {
  TaskKind task = TaskKind::tagging;

  // data: synthetic bundle or files
  bool use_synth = true;
  SynthConfig synth;
  std::string train_path;             // source labeled (CoNLL-U or compression TSV)
  std::string target_labeled_path;    // labeled target pool (budget draws from it)
  std::string target_unlabeled_path;  // target text for the adversarial terms
  std::string dev_path, test_path;
  std::string embeddings_path, clusters_path;
  int cluster_prefix_len = 8;
  bool finetune_embeddings = false;

  AdversarialConfig adv;
  ModelDims dims;
  int epochs = 30;
  int batch_size = 16;
  int eval_every = 1;
  int target_budget = 0;        // labeled target sentences mixed into task batches
  int early_stop_patience = 0;  // 0 = off; requires target_budget > 0
  std::string out_dir;

  void validate() const {
    adv.validate();
    if (epochs <= 0 || batch_size <= 0 || eval_every <= 0)
      throw ConfigError("config: epochs, batch size and eval cadence must be positive");
    if (target_budget < 0) throw ConfigError("config: target budget must be >= 0");
    if (target_budget == 0 && early_stop_patience > 0)
      throw ConfigError(
          "config: early stopping uses target dev data, which is refused at target budget 0");
    if (!use_synth && train_path.empty())
      throw ConfigError("config: either synthetic data or a training path is required");
  }
};

struct EpochRow {
  int epoch = 0;
  double o_t = 0, o_d = 0, o_g = 0;
  double disc_accuracy = 0;
  double dev_metric = -1;  // -1 when dev evaluation is disabled/refused
  double test_metric = -1;
  double max_abs_disc_weight = 0;
};

struct RunResult {
  std::vector<EpochRow> rows;
  double final_test_metric = 0;
  double final_train_metric = 0;
  double final_sentence_accuracy = -1;  // tagging only
  double wall_clock_sec = 0;
  bool nan_aborted = false;
};

// ---- config (de)serialization ---------------------------------------------

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["task"] = c.task == TaskKind::tagging ? "tagging" : "parsing";
  j["use_synth"] = c.use_synth;
  j["synth"] = {{"seed", c.synth.seed},
                {"n_sentences", c.synth.n_sentences},
                {"vocab_size", c.synth.vocab_size},
                {"n_tags", c.synth.n_tags},
                {"n_target_labeled", c.synth.n_target_labeled},
                {"n_target_unlabeled", c.synth.n_target_unlabeled},
                {"n_dev", c.synth.n_dev},
                {"n_test", c.synth.n_test},
                {"min_len", c.synth.min_len},
                {"max_len", c.synth.max_len},
                {"emb_dim", c.synth.emb_dim},
                {"epsilon", c.synth.epsilon},
                {"delta", c.synth.delta},
                {"emission_noise", c.synth.emission_noise}};
  j["paths"] = {{"train", c.train_path},
                {"target_labeled", c.target_labeled_path},
                {"target_unlabeled", c.target_unlabeled_path},
                {"dev", c.dev_path},
                {"test", c.test_path},
                {"embeddings", c.embeddings_path},
                {"clusters", c.clusters_path}};
  j["cluster_prefix_len"] = c.cluster_prefix_len;
  j["finetune_embeddings"] = c.finetune_embeddings;
  j["objective"] = objective_name(c.adv.objective);
  j["lambda"] = c.adv.lambda;
  j["clip_c"] = c.adv.clip_c;
  j["critic_steps"] = c.adv.critic_steps;
  j["lr_tagger"] = c.adv.lr_tagger;
  j["lr_generator"] = c.adv.lr_generator;
  j["lr_discriminator"] = c.adv.lr_discriminator;
  j["lambda_schedule"] = c.adv.lambda_schedule == LambdaSchedule::constant ? "constant" : "ramp";
  j["ramp_gamma"] = c.adv.ramp_gamma;
  j["seed"] = c.adv.seed;
  j["sentence_pool"] = c.adv.sentence_pool;
  j["use_prev_label"] = c.adv.use_prev_label;
  j["grad_clip"] = c.adv.grad_clip;
  j["dims"] = {{"d_word", c.dims.d_word},   {"d_pos", c.dims.d_pos},
               {"d_cluster", c.dims.d_cluster}, {"d_label", c.dims.d_label},
               {"hidden", c.dims.hidden},   {"head_hidden", c.dims.head_hidden},
               {"disc_hidden", c.dims.disc_hidden}};
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["eval_every"] = c.eval_every;
  j["target_budget"] = c.target_budget;
  j["early_stop_patience"] = c.early_stop_patience;
  return j;
}

// ---- data loading ----------------------------------------------------------

namespace detail {

inline void index_sentence(Sentence& s, DataBundle& b,
                           const std::unordered_map<std::string, int>& clusters, bool grow) {
  for (auto& t : s.tokens) {
    t.word_id = grow ? b.words.add(t.form) : b.words.get(t.form);
    t.pos_id = t.upos.empty() ? 0 : (grow ? b.pos.add(t.upos) : b.pos.get(t.upos));
    auto it = clusters.find(t.form);
    t.cluster_id = it == clusters.end() ? 0 : it->second;
    t.language_id = s.language_id;
  }
  if (!s.tag_strings.empty()) {
    s.tags.clear();
    for (const auto& ts : s.tag_strings) s.tags.push_back(b.tags.add(ts));
  }
  if (s.tree && !s.deprel_strings.empty())
    for (size_t i = 0; i < s.deprel_strings.size(); ++i)
      s.tree->labels[i] = b.deprels.add(s.deprel_strings[i]);
}

inline std::vector<Sentence> read_task_file(const std::string& path, TaskKind task, int lang) {
  auto sents = task == TaskKind::parsing ? read_conllu(path) : read_compression_tsv(path);
  for (auto& s : sents) {
    s.language_id = lang;
    for (auto& t : s.tokens) t.language_id = lang;
  }
  return sents;
}

}  // namespace detail

/// Builds a DataBundle from the files named in the config. The vocabulary
/// is built jointly over source and target training text (shared BWE index
/// space); dev/test are encoded against the frozen vocabulary.
inline DataBundle load_bundle(const RunConfig& cfg) {
  if (cfg.use_synth) return synth_bilingual(cfg.synth);
  DataBundle b;
  std::unordered_map<std::string, int> clusters;
  if (!cfg.clusters_path.empty())
    clusters = load_brown_clusters(cfg.clusters_path, cfg.cluster_prefix_len);
  b.root_label = b.deprels.add("root");
  b.source_labeled = detail::read_task_file(cfg.train_path, cfg.task, 0);
  if (!cfg.target_labeled_path.empty())
    b.target_labeled = detail::read_task_file(cfg.target_labeled_path, cfg.task, 1);
  if (!cfg.target_unlabeled_path.empty())
    b.target_unlabeled = detail::read_task_file(cfg.target_unlabeled_path, cfg.task, 1);
  for (auto* part : {&b.source_labeled, &b.target_labeled, &b.target_unlabeled})
    for (auto& s : *part) detail::index_sentence(s, b, clusters, true);
  if (!cfg.dev_path.empty()) b.dev = detail::read_task_file(cfg.dev_path, cfg.task, 1);
  if (!cfg.test_path.empty()) b.test = detail::read_task_file(cfg.test_path, cfg.task, 1);
  for (auto* part : {&b.dev, &b.test})
    for (auto& s : *part) detail::index_sentence(s, b, clusters, false);
  if (!cfg.embeddings_path.empty())
    b.embeddings = load_embeddings(cfg.embeddings_path, b.words, cfg.adv.seed);
  b.cluster_map = std::move(clusters);
  return b;
}

// ---- evaluation ------------------------------------------------------------

inline double evaluate_corpus(const ModelParams& m, const std::vector<Sentence>& corpus,
                              const AdversarialConfig& cfg, double* sent_acc = nullptr) {
  if (corpus.empty()) return -1;
  if (m.task == TaskKind::tagging) {
    TagCorpus gold, pred;
    for (const auto& s : corpus) {
      gold.push_back(s.tags);
      pred.push_back(tag_predict(m, s, cfg.use_prev_label));
    }
    if (sent_acc) *sent_acc = sentence_accuracy(gold, pred);
    return token_accuracy(gold, pred);
  }
  std::vector<DependencyTree> gold, pred;
  for (const auto& s : corpus) {
    gold.push_back(*s.tree);
    pred.push_back(greedy_parse(m, s));
  }
  return las(gold, pred);
}

// ---- training loop ---------------------------------------------------------

namespace detail {

inline double max_abs_weight(const std::vector<TensorPtr>& group) {
  double m = 0;
  for (const auto& t : group)
    for (double v : t->values) m = std::max(m, std::abs(v));
  return m;
}

/// Endless shuffled cursor over a sentence pool.
class Sampler {
 public:
  Sampler(const std::vector<Sentence>& pool, unsigned seed) : pool_(&pool), rng_(seed) {
    reshuffle();
  }
  const Sentence* next() {
    if (pool_->empty()) return nullptr;
    if (pos_ >= order_.size()) reshuffle();
    return &(*pool_)[order_[pos_++]];
  }
  std::vector<const Sentence*> batch(int n) {
    std::vector<const Sentence*> out;
    for (int i = 0; i < n; ++i)
      if (const Sentence* s = next()) out.push_back(s);
    return out;
  }

 private:
  void reshuffle() {
    order_.resize(pool_->size());
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  const std::vector<Sentence>* pool_;
  std::mt19937 rng_;
  std::vector<size_t> order_;
  size_t pos_ = 0;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace detail

inline RunResult run_experiment(const RunConfig& cfg, const DataBundle& bundle,
                                ModelParams* trained = nullptr) {
  cfg.validate();
  if (cfg.adv.objective != Objective::none && bundle.target_unlabeled.empty() &&
      cfg.target_budget == 0)
    throw ConfigError("config: adversarial objectives require target-language text");
  if (static_cast<size_t>(cfg.target_budget) > bundle.target_labeled.size())
    throw ConfigError("config: target budget exceeds available labeled target data");

  namespace fs = std::filesystem;
  std::ofstream metrics_out;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    std::ofstream cfg_out(cfg.out_dir + "/config.json");
    cfg_out << to_json(cfg).dump(2) << "\n";
    metrics_out.open(cfg.out_dir + "/metrics.jsonl");
  }

  ModelDims dims = cfg.dims;
  dims.v_word = bundle.words.size();
  dims.v_pos = bundle.pos.size();
  dims.v_cluster =
      cfg.clusters_path.empty() ? std::max(bundle.clusters.size(), 1)
                                : (1 << cfg.cluster_prefix_len) + 1;
  dims.n_tags = std::max(bundle.tags.size(), 1);
  dims.n_deprels = std::max(bundle.deprels.size(), 2);
  dims.root_label = bundle.root_label >= 0 ? bundle.root_label : 0;
  if (bundle.embeddings) dims.d_word = bundle.embeddings->shape[1];

  ModelParams model = ModelParams::init(cfg.task, dims, cfg.adv, bundle.embeddings,
                                        cfg.finetune_embeddings);

  // task pool: source labeled plus the first target_budget labeled target sentences
  std::vector<Sentence> task_pool = bundle.source_labeled;
  task_pool.insert(task_pool.end(), bundle.target_labeled.begin(),
                   bundle.target_labeled.begin() + cfg.target_budget);
  if (cfg.task == TaskKind::parsing) {
    // arc-standard training skips non-projective gold trees
    std::vector<Sentence> kept;
    long skipped = 0;
    for (auto& s : task_pool)
      (s.tree && oracle_compatible(*s.tree)) ? kept.push_back(s) : (void)++skipped;
    task_pool = std::move(kept);
    if (!cfg.out_dir.empty() && skipped > 0) {
      std::ofstream warn(cfg.out_dir + "/warnings.txt");
      warn << "skipped_non_projective\t" << skipped << "\n";
    }
  }
  if (task_pool.empty()) throw ConfigError("config: no usable training sentences");

  detail::Sampler task_sampler(task_pool, cfg.adv.seed + 1);
  detail::Sampler source_sampler(bundle.source_labeled, cfg.adv.seed + 2);
  const std::vector<Sentence>& target_pool =
      bundle.target_unlabeled.empty() ? bundle.target_labeled : bundle.target_unlabeled;
  detail::Sampler target_sampler(target_pool, cfg.adv.seed + 3);

  const long steps_per_epoch =
      std::max<long>(1, (static_cast<long>(task_pool.size()) + cfg.batch_size - 1) / cfg.batch_size);
  const long total_steps = steps_per_epoch * cfg.epochs;
  const bool dev_allowed = cfg.target_budget > 0 && !bundle.dev.empty();

  RunResult result;
  auto t0 = std::chrono::steady_clock::now();
  long step = 0;
  double best_dev = -1;
  int since_best = 0;
  try {
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      double sum_ot = 0, sum_od = 0, sum_og = 0, sum_dacc = 0;
      double max_dw = 0;
      for (long s = 0; s < steps_per_epoch; ++s, ++step) {
        StepBatch batch;
        batch.labeled = task_sampler.batch(cfg.batch_size);
        if (cfg.adv.objective != Objective::none) {
          batch.source_text = source_sampler.batch(cfg.batch_size);
          batch.target_text = target_sampler.batch(cfg.batch_size);
        }
        double progress = total_steps > 1 ? static_cast<double>(step) / (total_steps - 1) : 1.0;
        TrainingStepReport rep = train_step(model, batch, cfg.adv, progress);
        sum_ot += rep.o_t;
        sum_od += rep.o_d;
        sum_og += rep.o_g;
        sum_dacc += rep.disc_accuracy;
        if (cfg.adv.objective == Objective::wgan)
          max_dw = std::max(max_dw, detail::max_abs_weight(model.discriminator_group()));
      }
      EpochRow row;
      row.epoch = epoch;
      row.o_t = sum_ot / steps_per_epoch;
      row.o_d = sum_od / steps_per_epoch;
      row.o_g = sum_og / steps_per_epoch;
      row.disc_accuracy = sum_dacc / steps_per_epoch;
      row.max_abs_disc_weight = max_dw;
      if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
        if (dev_allowed) row.dev_metric = evaluate_corpus(model, bundle.dev, cfg.adv);
        row.test_metric = evaluate_corpus(model, bundle.test, cfg.adv);
      }
      result.rows.push_back(row);
      if (metrics_out.is_open()) {
        nlohmann::json j = {{"epoch", row.epoch},
                            {"o_t", row.o_t},
                            {"o_d", row.o_d},
                            {"o_g", row.o_g},
                            {"disc_accuracy", row.disc_accuracy},
                            {"dev_metric", row.dev_metric},
                            {"test_metric", row.test_metric},
                            {"max_abs_disc_weight", row.max_abs_disc_weight}};
        metrics_out << j.dump() << "\n";
      }
      if (dev_allowed && cfg.early_stop_patience > 0) {
        if (row.dev_metric > best_dev) {
          best_dev = row.dev_metric;
          since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
          break;
        }
      }
    }
  } catch (const NanAbort&) {
    result.nan_aborted = true;
    if (metrics_out.is_open()) metrics_out << R"({"event":"nan_abort"})" << "\n";
    throw;
  }

  result.final_test_metric = evaluate_corpus(model, bundle.test, cfg.adv,
                                             cfg.task == TaskKind::tagging
                                                 ? &result.final_sentence_accuracy
                                                 : nullptr);
  result.final_train_metric = evaluate_corpus(model, task_pool, cfg.adv);
  result.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.out_dir.empty()) {
    std::ofstream sum(cfg.out_dir + "/summary.tsv");
    sum << "objective\ttarget_budget\tfinal_test_metric\tfinal_train_metric\tsentence_accuracy\n";
    sum << objective_name(cfg.adv.objective) << '\t' << cfg.target_budget << '\t'
        << detail::fmt(result.final_test_metric) << '\t' << detail::fmt(result.final_train_metric)
        << '\t' << detail::fmt(result.final_sentence_accuracy) << '\n';
  }
  if (trained) *trained = std::move(model);
  return result;
}

inline RunResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  DataBundle bundle = load_bundle(cfg);
  return run_experiment(cfg, bundle);
}

// ---- experiment matrix -----------------------------------------------------

struct MatrixResult {
  std::vector<int> budgets;
  std::vector<Objective> objectives;
  std::vector<std::vector<double>> cells;  // [budget][objective] final test metric

  std::string to_tsv() const {
    std::ostringstream os;
    os << "target_budget";
    for (auto o : objectives) os << '\t' << objective_name(o);
    os << '\n';
    for (size_t r = 0; r < budgets.size(); ++r) {
      os << budgets[r];
      for (size_t c = 0; c < objectives.size(); ++c)
        os << '\t' << std::fixed << std::setprecision(2) << cells[r][c];
      os << '\n';
    }
    return os.str();
  }
};

/// One row per target budget, one column per objective; per-cell seeds are
/// base seed + cell index so cells are independent reproducible runs.
inline MatrixResult run_matrix(const RunConfig& base, const std::vector<int>& budgets,
                               const std::vector<Objective>& objectives) {
  base.validate();
  DataBundle bundle = load_bundle(base);
  MatrixResult mr;
  mr.budgets = budgets;
  mr.objectives = objectives;
  int cell = 0;
  for (int b : budgets) {
    std::vector<double> row;
    for (Objective o : objectives) {
      RunConfig cfg = base;
      cfg.target_budget = b;
      cfg.adv.objective = o;
      cfg.adv.seed = base.adv.seed + cell;
      if (!base.out_dir.empty())
        cfg.out_dir = base.out_dir + "/cell_b" + std::to_string(b) + "_" + objective_name(o);
      row.push_back(run_experiment(cfg, bundle).final_test_metric);
      ++cell;
    }
    mr.cells.push_back(std::move(row));
  }
  if (!base.out_dir.empty()) {
    std::ofstream out(base.out_dir + "/matrix.tsv");
    out << mr.to_tsv();
  }
  return mr;
}

}  // namespace advtag
