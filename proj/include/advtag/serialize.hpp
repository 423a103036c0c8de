#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtag/corpus.hpp"
#include "advtag/model.hpp"

namespace advtag {

/// A trained model together with the frozen vocabularies needed to encode
/// raw input at inference time.
struct SavedModel {
  ModelParams params;
  Vocab words, pos;
  LabelSet tags, deprels;
  std::unordered_map<std::string, int> cluster_map;
  bool use_prev_label = true;
};

namespace detail {

inline void collect_named_tensors(ModelParams& m,
                                  std::vector<std::pair<std::string, TensorPtr>>& out) {
  out.emplace_back("bank.word", m.bank.word_table);
  out.emplace_back("bank.pos", m.bank.pos_table);
  out.emplace_back("bank.cluster", m.bank.cluster_table);
  out.emplace_back("bank.label", m.bank.label_table);
  auto cell = [&](const std::string& prefix, LstmCellParams& c) {
    const char* names[] = {"wi_x", "wi_h", "bi", "wf_x", "wf_h", "bf",
                           "wo_x", "wo_h", "bo", "wc_x", "wc_h", "bc"};
    TensorPtr* ts[] = {&c.wi_x, &c.wi_h, &c.bi, &c.wf_x, &c.wf_h, &c.bf,
                       &c.wo_x, &c.wo_h, &c.bo, &c.wc_x, &c.wc_h, &c.bc};
    for (int i = 0; i < 12; ++i) out.emplace_back(prefix + names[i], *ts[i]);
  };
  cell("lstm.fwd.", m.bilstm.fwd);
  cell("lstm.bwd.", m.bilstm.bwd);
  auto ffn = [&](const std::string& prefix, FfnParams& f) {
    for (size_t i = 0; i < f.layers.size(); ++i) {
      out.emplace_back(prefix + std::to_string(i) + ".w", f.layers[i].w);
      out.emplace_back(prefix + std::to_string(i) + ".b", f.layers[i].b);
    }
  };
  ffn("head.", m.head);
  if (m.discriminator) ffn("disc.", *m.discriminator);
}

}  // namespace detail

inline void save_model(const std::string& path, SavedModel& sm, const AdversarialConfig& cfg) {
  nlohmann::json j;
  j["task"] = sm.params.task == TaskKind::tagging ? "tagging" : "parsing";
  j["objective"] = objective_name(cfg.objective);
  j["use_prev_label"] = sm.use_prev_label;
  const ModelDims& d = sm.params.dims;
  j["dims"] = {{"v_word", d.v_word},       {"d_word", d.d_word},
               {"v_pos", d.v_pos},         {"d_pos", d.d_pos},
               {"v_cluster", d.v_cluster}, {"d_cluster", d.d_cluster},
               {"d_label", d.d_label},     {"hidden", d.hidden},
               {"head_hidden", d.head_hidden}, {"disc_hidden", d.disc_hidden},
               {"n_tags", d.n_tags},       {"n_deprels", d.n_deprels},
               {"root_label", d.root_label}};
  std::vector<std::string> words, pos, tags, deprels;
  for (int i = 0; i < sm.words.size(); ++i) words.push_back(sm.words.form(i));
  for (int i = 0; i < sm.pos.size(); ++i) pos.push_back(sm.pos.form(i));
  for (int i = 0; i < sm.tags.size(); ++i) tags.push_back(sm.tags.name(i));
  for (int i = 0; i < sm.deprels.size(); ++i) deprels.push_back(sm.deprels.name(i));
  j["words"] = words;
  j["pos"] = pos;
  j["tags"] = tags;
  j["deprels"] = deprels;
  j["clusters"] = sm.cluster_map;
  std::vector<std::pair<std::string, TensorPtr>> named;
  detail::collect_named_tensors(sm.params, named);
  for (auto& [name, t] : named)
    j["tensors"][name] = {{"shape", t->shape}, {"values", t->values}, {"frozen", t->frozen}};
  std::ofstream out(path);
  if (!out) throw ParseError("save_model: cannot open " + path);
  out << j.dump() << "\n";
}

inline SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_model: cannot open " + path);
  nlohmann::json j;
  in >> j;
  SavedModel sm;
  sm.use_prev_label = j.at("use_prev_label").get<bool>();
  AdversarialConfig cfg;
  cfg.objective = objective_from_name(j.at("objective").get<std::string>());
  cfg.use_prev_label = sm.use_prev_label;
  ModelDims d;
  const auto& jd = j.at("dims");
  d.v_word = jd.at("v_word");
  d.d_word = jd.at("d_word");
  d.v_pos = jd.at("v_pos");
  d.d_pos = jd.at("d_pos");
  d.v_cluster = jd.at("v_cluster");
  d.d_cluster = jd.at("d_cluster");
  d.d_label = jd.at("d_label");
  d.hidden = jd.at("hidden");
  d.head_hidden = jd.at("head_hidden");
  d.disc_hidden = jd.at("disc_hidden");
  d.n_tags = jd.at("n_tags");
  d.n_deprels = jd.at("n_deprels");
  d.root_label = jd.at("root_label");
  TaskKind task = j.at("task").get<std::string>() == "parsing" ? TaskKind::parsing : TaskKind::tagging;
  sm.params = ModelParams::init(task, d, cfg);
  std::vector<std::pair<std::string, TensorPtr>> named;
  detail::collect_named_tensors(sm.params, named);
  for (auto& [name, t] : named) {
    const auto& jt = j.at("tensors").at(name);
    auto shape = jt.at("shape").get<std::vector<int>>();
    if (shape != t->shape)
      throw ParseError("load_model: tensor " + name + " shape mismatch");
    t->values = jt.at("values").get<std::vector<double>>();
    t->frozen = jt.at("frozen").get<bool>();
  }
  auto restore_vocab = [](Vocab& v, const nlohmann::json& arr) {
    for (size_t i = 1; i < arr.size(); ++i) v.add(arr[i].get<std::string>());
  };
  restore_vocab(sm.words, j.at("words"));
  restore_vocab(sm.pos, j.at("pos"));
  for (const auto& s : j.at("tags")) sm.tags.add(s.get<std::string>());
  for (const auto& s : j.at("deprels")) sm.deprels.add(s.get<std::string>());
  sm.cluster_map = j.at("clusters").get<std::unordered_map<std::string, int>>();
  return sm;
}

}  // namespace advtag
