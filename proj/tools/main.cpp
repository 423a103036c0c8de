// Command-line front end: train single runs, run the budget x objective
// experiment matrix, emit synthetic bilingual data, score prediction files,
// and run tag/parse inference with a saved model.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advtag/harness.hpp"
#include "advtag/serialize.hpp"

namespace {

using namespace advtag;

constexpr int kExitConfigError = 2;
constexpr int kExitNanAbort = 3;

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& objective,
                      std::string& schedule) {
  cmd->add_option("--seed", cfg.adv.seed, "random seed");
  cmd->add_option("--objective", objective, "training objective: none|gr|gan|wgan");
  cmd->add_option("--lambda", cfg.adv.lambda, "gradient reversal scale");
  cmd->add_option("--clip-c", cfg.adv.clip_c, "WGAN weight clipping bound");
  cmd->add_option("--critic-steps", cfg.adv.critic_steps,
                  "discriminator updates per generator update");
  cmd->add_option("--target-budget", cfg.target_budget, "labeled target sentences to mix in");
  cmd->add_option("--task", [&cfg](const std::vector<std::string>& v) {
    if (v[0] == "tagging") cfg.task = TaskKind::tagging;
    else if (v[0] == "parsing") cfg.task = TaskKind::parsing;
    else return false;
    return true;
  }, "task: tagging|parsing");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "sentences per batch");
  cmd->add_option("--eval-every", cfg.eval_every, "evaluation cadence (epochs)");
  cmd->add_option("--early-stop-patience", cfg.early_stop_patience,
                  "stop after this many epochs without dev improvement (needs target budget)");
  cmd->add_option("--lr-tagger", cfg.adv.lr_tagger);
  cmd->add_option("--lr-generator", cfg.adv.lr_generator);
  cmd->add_option("--lr-discriminator", cfg.adv.lr_discriminator);
  cmd->add_option("--lambda-schedule", schedule, "constant|ramp");
  cmd->add_option("--ramp-gamma", cfg.adv.ramp_gamma);
  cmd->add_flag("--sentence-pool", cfg.adv.sentence_pool,
                "pool generator outputs per sentence before the discriminator");
  cmd->add_flag("!--no-prev-label", cfg.adv.use_prev_label,
                "disable the previous-label tagger feature");
  cmd->add_option("--grad-clip", cfg.adv.grad_clip);
  cmd->add_option("--out", cfg.out_dir, "output directory");

  cmd->add_option("--train", cfg.train_path, "source labeled data (CoNLL-U or TSV)");
  cmd->add_option("--target-labeled", cfg.target_labeled_path);
  cmd->add_option("--target-unlabeled", cfg.target_unlabeled_path);
  cmd->add_option("--dev", cfg.dev_path);
  cmd->add_option("--test", cfg.test_path);
  cmd->add_option("--embeddings", cfg.embeddings_path, "pretrained bilingual embeddings");
  cmd->add_option("--clusters", cfg.clusters_path, "Brown cluster paths file");
  cmd->add_option("--cluster-prefix", cfg.cluster_prefix_len);
  cmd->add_flag("--finetune-embeddings", cfg.finetune_embeddings);

  cmd->add_flag("--synth", cfg.use_synth, "use the synthetic bilingual bundle");
  cmd->add_option("--synth-seed", cfg.synth.seed);
  cmd->add_option("--synth-sentences", cfg.synth.n_sentences);
  cmd->add_option("--synth-vocab", cfg.synth.vocab_size);
  cmd->add_option("--synth-tags", cfg.synth.n_tags);
  cmd->add_option("--synth-target-labeled", cfg.synth.n_target_labeled);
  cmd->add_option("--synth-target-unlabeled", cfg.synth.n_target_unlabeled);
  cmd->add_option("--synth-dev", cfg.synth.n_dev);
  cmd->add_option("--synth-test", cfg.synth.n_test);
  cmd->add_option("--synth-epsilon", cfg.synth.epsilon);
  cmd->add_option("--synth-delta", cfg.synth.delta);
  cmd->add_option("--synth-emb-dim", cfg.synth.emb_dim);

  cmd->add_option("--d-word", cfg.dims.d_word);
  cmd->add_option("--d-pos", cfg.dims.d_pos);
  cmd->add_option("--d-cluster", cfg.dims.d_cluster);
  cmd->add_option("--d-label", cfg.dims.d_label);
  cmd->add_option("--hidden", cfg.dims.hidden);
  cmd->add_option("--head-hidden", cfg.dims.head_hidden);
  cmd->add_option("--disc-hidden", cfg.dims.disc_hidden);
}

int cmd_train(RunConfig& cfg, const std::string& model_out) {
  DataBundle bundle = load_bundle(cfg);
  ModelParams trained;
  RunResult res = run_experiment(cfg, bundle, &trained);
  std::cout << "final_test_metric\t" << res.final_test_metric << "\n";
  std::cout << "final_train_metric\t" << res.final_train_metric << "\n";
  if (res.final_sentence_accuracy >= 0)
    std::cout << "final_sentence_accuracy\t" << res.final_sentence_accuracy << "\n";
  if (!model_out.empty()) {
    SavedModel sm;
    sm.params = std::move(trained);
    sm.words = bundle.words;
    sm.pos = bundle.pos;
    sm.tags = bundle.tags;
    sm.deprels = bundle.deprels;
    sm.cluster_map = bundle.cluster_map;
    sm.use_prev_label = cfg.adv.use_prev_label;
    save_model(model_out, sm, cfg.adv);
    std::cout << "model saved to " << model_out << "\n";
  }
  return 0;
}

int cmd_matrix(RunConfig& cfg, const std::string& budgets_s, const std::string& objectives_s) {
  std::vector<int> budgets;
  std::vector<Objective> objectives;
  std::stringstream bs(budgets_s), os(objectives_s);
  std::string item;
  while (std::getline(bs, item, ',')) budgets.push_back(std::stoi(item));
  while (std::getline(os, item, ',')) objectives.push_back(objective_from_name(item));
  if (budgets.empty() || objectives.empty())
    throw ConfigError("matrix: --budgets and --objectives must be non-empty");
  MatrixResult mr = run_matrix(cfg, budgets, objectives);
  std::cout << mr.to_tsv();
  return 0;
}

int cmd_synth(const SynthConfig& sc, const std::string& out_dir) {
  if (out_dir.empty()) throw ConfigError("synth: --out is required");
  DataBundle b = synth_bilingual(sc);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::vector<Sentence>& sents) {
    write_conllu(out_dir + "/" + name + ".conllu", sents);
    bool tsv_ok = true;
    for (const auto& s : sents)
      for (const auto& t : s.tag_strings)
        if (t != "KEPT" && t != "DROPPED") tsv_ok = false;
    if (tsv_ok) write_compression_tsv(out_dir + "/" + name + ".tsv", sents);
  };
  emit("source_labeled", b.source_labeled);
  emit("target_labeled", b.target_labeled);
  emit("target_unlabeled", b.target_unlabeled);
  emit("dev", b.dev);
  emit("test", b.test);
  std::ofstream emb(out_dir + "/embeddings.txt");
  const int dim = b.embeddings->shape[1];
  emb << (b.words.size() - 1) << " " << dim << "\n";
  for (int i = 1; i < b.words.size(); ++i) {
    emb << b.words.form(i);
    for (int jj = 0; jj < dim; ++jj)
      emb << " " << b.embeddings->values[static_cast<size_t>(i) * dim + jj];
    emb << "\n";
  }
  std::cout << "synthetic bundle written to " << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& task, const std::string& gold_path, const std::string& pred_path) {
  if (task == "parsing") {
    auto gold_s = read_conllu(gold_path);
    auto pred_s = read_conllu(pred_path);
    LabelSet labels;
    std::vector<DependencyTree> gold, pred;
    for (auto* src : {&gold_s, &pred_s}) {
      for (auto& s : *src) {
        for (size_t i = 0; i < s.deprel_strings.size(); ++i)
          s.tree->labels[i] = labels.add(s.deprel_strings[i]);
      }
    }
    for (auto& s : gold_s) gold.push_back(*s.tree);
    for (auto& s : pred_s) pred.push_back(*s.tree);
    std::cout << "las\t" << las(gold, pred) << "\n";
  } else {
    // lenient labels so any tagset can be scored, not just KEPT/DROPPED
    auto gold_s = read_compression_tsv(gold_path, false);
    auto pred_s = read_compression_tsv(pred_path, false);
    LabelSet labels;
    TagCorpus gold, pred;
    bool compression_labels = true;
    for (auto* src : {&gold_s, &pred_s}) {
      for (auto& s : *src) {
        std::vector<int> ids;
        for (const auto& t : s.tag_strings) {
          ids.push_back(labels.add(t));
          if (t != "KEPT" && t != "DROPPED") compression_labels = false;
        }
        (src == &gold_s ? gold : pred).push_back(std::move(ids));
      }
    }
    std::cout << "token_accuracy\t" << token_accuracy(gold, pred) << "\n";
    std::cout << "sentence_accuracy\t" << sentence_accuracy(gold, pred) << "\n";
    if (compression_labels) {
      std::cout << "compression_rate_gold\t" << compression_rate(gold_s) << "\n";
      std::cout << "compression_rate_pred\t" << compression_rate(pred_s) << "\n";
    }
  }
  return 0;
}

void encode_with_model(std::vector<Sentence>& sents, const SavedModel& sm) {
  for (auto& s : sents)
    for (auto& t : s.tokens) {
      t.word_id = sm.words.get(t.form);
      t.pos_id = t.upos.empty() ? 0 : sm.pos.get(t.upos);
      auto it = sm.cluster_map.find(t.form);
      t.cluster_id = it == sm.cluster_map.end() ? 0 : it->second;
    }
}

int cmd_tag(const std::string& model_path, const std::string& input, const std::string& output) {
  SavedModel sm = load_model(model_path);
  if (sm.params.task != TaskKind::tagging) throw ConfigError("tag: model is not a tagging model");
  auto sents = read_compression_tsv(input, /*require_compression_labels=*/false);
  encode_with_model(sents, sm);
  for (auto& s : sents) {
    auto pred = tag_predict(sm.params, s, sm.use_prev_label);
    s.tags = pred;
    s.tag_strings.clear();
    for (int p : pred) s.tag_strings.push_back(sm.tags.name(p));
  }
  if (output.empty()) {
    for (const auto& s : sents) {
      for (size_t i = 0; i < s.size(); ++i)
        std::cout << s.tokens[i].form << '\t' << s.tag_strings[i] << '\n';
      std::cout << '\n';
    }
  } else {
    write_compression_tsv(output, sents);
  }
  return 0;
}

int cmd_parse(const std::string& model_path, const std::string& input, const std::string& output) {
  SavedModel sm = load_model(model_path);
  if (sm.params.task != TaskKind::parsing) throw ConfigError("parse: model is not a parsing model");
  auto sents = read_conllu(input);
  encode_with_model(sents, sm);
  for (auto& s : sents) {
    DependencyTree t = greedy_parse(sm.params, s);
    s.tree = t;
    s.deprel_strings.clear();
    for (int l : t.labels) s.deprel_strings.push_back(sm.deprels.name(l));
  }
  if (output.empty()) {
    for (const auto& s : sents) {
      for (size_t i = 0; i < s.size(); ++i)
        std::cout << (i + 1) << '\t' << s.tokens[i].form << "\t_\t"
                  << (s.tokens[i].upos.empty() ? "_" : s.tokens[i].upos) << "\t_\t_\t"
                  << s.tree->heads[i] << '\t' << s.deprel_strings[i] << "\t_\t_\n";
      std::cout << '\n';
    }
  } else {
    write_conllu(output, sents);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial cross-lingual sequence tagging / parsing"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string objective = "none", schedule = "constant", model_out;
  std::string budgets_s = "0", objectives_s = "none,gr,gan,wgan";
  SynthConfig synth_cfg;
  std::string synth_out, eval_task = "tagging", gold_path, pred_path;
  std::string model_path, input_path, output_path;

  auto* train = app.add_subcommand("train", "run one training experiment");
  add_common_flags(train, cfg, objective, schedule);
  train->add_option("--save-model", model_out, "write the trained model to this file");

  auto* matrix = app.add_subcommand("matrix", "run the budget x objective grid");
  add_common_flags(matrix, cfg, objective, schedule);
  matrix->add_option("--budgets", budgets_s, "comma-separated target budgets");
  matrix->add_option("--objectives", objectives_s, "comma-separated objectives");

  auto* synth = app.add_subcommand("synth", "emit a synthetic bilingual bundle to disk");
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--n-sentences", synth_cfg.n_sentences);
  synth->add_option("--vocab-size", synth_cfg.vocab_size);
  synth->add_option("--n-tags", synth_cfg.n_tags);
  synth->add_option("--target-labeled", synth_cfg.n_target_labeled);
  synth->add_option("--target-unlabeled", synth_cfg.n_target_unlabeled);
  synth->add_option("--dev", synth_cfg.n_dev);
  synth->add_option("--test", synth_cfg.n_test);
  synth->add_option("--epsilon", synth_cfg.epsilon);
  synth->add_option("--delta", synth_cfg.delta);
  synth->add_option("--emb-dim", synth_cfg.emb_dim);
  synth->add_option("--out", synth_out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "score prediction files against gold");
  eval->add_option("--task", eval_task, "tagging|parsing");
  eval->add_option("--gold", gold_path)->required();
  eval->add_option("--pred", pred_path)->required();

  auto* tag = app.add_subcommand("tag", "tag raw TSV with a saved model");
  tag->add_option("--model", model_path)->required();
  tag->add_option("--input", input_path)->required();
  tag->add_option("--output", output_path);

  auto* parse = app.add_subcommand("parse", "parse raw CoNLL-U with a saved model");
  parse->add_option("--model", model_path)->required();
  parse->add_option("--input", input_path)->required();
  parse->add_option("--output", output_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }

  try {
    if (train->parsed() || matrix->parsed()) {
      cfg.adv.objective = objective_from_name(objective);
      if (schedule == "ramp") cfg.adv.lambda_schedule = LambdaSchedule::ramp;
      else if (schedule != "constant") throw ConfigError("unknown lambda schedule: " + schedule);
      if (!cfg.train_path.empty()) cfg.use_synth = false;
      // WGAN convention: 5 critic steps unless overridden
      CLI::App* sub = train->parsed() ? train : matrix;
      if (cfg.adv.objective == Objective::wgan &&
          sub->get_option("--critic-steps")->count() == 0)
        cfg.adv.critic_steps = 5;
    }
    if (train->parsed()) return cmd_train(cfg, model_out);
    if (matrix->parsed()) return cmd_matrix(cfg, budgets_s, objectives_s);
    if (synth->parsed()) return cmd_synth(synth_cfg, synth_out);
    if (eval->parsed()) return cmd_eval(eval_task, gold_path, pred_path);
    if (tag->parsed()) return cmd_tag(model_path, input_path, output_path);
    if (parse->parsed()) return cmd_parse(model_path, input_path, output_path);
  } catch (const NanAbort& e) {
    std::cerr << "NaN abort: " << e.what() << "\n";
    return kExitNanAbort;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return 0;
}
