#pragma once

#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "advtag/tensor.hpp"

namespace advtag {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- core types ----------------------------------------------------------

struct Token {
  std::string form;
  std::string upos;  // surface UPOS string; pos_id resolves against the vocab
  int word_id = 0;
  int pos_id = 0;
  int cluster_id = 0;
  int language_id = 0;  // 0 = source, 1 = target
};

/// heads[i] in {0..n} with 0 = artificial root; 1-based token indexing
/// in head values, 0-based arrays.
struct DependencyTree {
  std::vector<int> heads;
  std::vector<int> labels;

  size_t size() const { return heads.size(); }
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<int> tags;  // tag-annotated sentences; empty otherwise
  std::vector<std::string> tag_strings;
  std::optional<DependencyTree> tree;
  std::vector<std::string> deprel_strings;
  int language_id = 0;

  size_t size() const { return tokens.size(); }
  bool has_tags() const { return !tag_strings.empty(); }
  bool has_tree() const { return tree.has_value(); }
};

/// String-to-id table with id 0 reserved for UNK.
class Vocab {
 public:
  Vocab() { add("<UNK>"); }

  int add(const std::string& s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(forms_.size());
    index_.emplace(s, id);
    forms_.push_back(s);
    return id;
  }
  int get(const std::string& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? 0 : it->second;
  }
  bool contains(const std::string& s) const { return index_.count(s) > 0; }
  const std::string& form(int id) const { return forms_.at(id); }
  int size() const { return static_cast<int>(forms_.size()); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> forms_;
};

/// Contiguous class-id inventory (tags, dependency labels); unlike Vocab
/// there is no reserved UNK slot, index == class id.
class LabelSet {
 public:
  int add(const std::string& s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    index_.emplace(s, id);
    names_.push_back(s);
    return id;
  }
  int get(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw ValueError("unknown label: " + s);
    return it->second;
  }
  bool contains(const std::string& s) const { return index_.count(s) > 0; }
  const std::string& name(int id) const { return names_.at(id); }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

struct DataBundle {
  std::vector<Sentence> source_labeled;
  std::vector<Sentence> target_labeled;
  std::vector<Sentence> target_unlabeled;
  std::vector<Sentence> dev;
  std::vector<Sentence> test;
  Vocab words, pos, clusters;
  LabelSet tags;     // tagging classes
  LabelSet deprels;  // dependency labels; "root" at a fixed index
  int root_label = -1;
  TensorPtr embeddings;  // [V_word, d_word], aligned to `words`; may be null
  std::unordered_map<std::string, int> cluster_map;  // form -> cluster id
  int dev_language = 1;
  int test_language = 1;
};

// ---- CoNLL-U -------------------------------------------------------------

namespace detail {
inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}
}  // namespace detail

/// Reads ID, FORM, UPOS, HEAD, DEPREL. Multiword ranges ("1-2") and empty
/// nodes ("1.1") are skipped; comment lines ignored; blank line ends a
/// sentence. Heads/deprels are kept as a DependencyTree with string labels
/// stored alongside (ids resolve later against a vocab).
inline std::vector<Sentence> read_conllu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_conllu: cannot open " + path);
  std::vector<Sentence> out;
  Sentence cur;
  DependencyTree tree;
  std::string line;
  long lineno = 0;
  auto flush = [&] {
    if (!cur.tokens.empty()) {
      cur.tree = tree;
      out.push_back(std::move(cur));
    }
    cur = Sentence{};
    tree = DependencyTree{};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    auto cols = detail::split_tabs(line);
    if (cols.size() != 10)
      throw ParseError("read_conllu: " + path + ":" + std::to_string(lineno) + ": expected 10 columns, got " +
                       std::to_string(cols.size()));
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    Token tok;
    tok.form = cols[1];
    tok.upos = cols[3];
    cur.tokens.push_back(tok);
    int head;
    try {
      head = std::stoi(cols[6]);
    } catch (const std::exception&) {
      throw ParseError("read_conllu: " + path + ":" + std::to_string(lineno) + ": HEAD not an integer: " + cols[6]);
    }
    tree.heads.push_back(head);
    tree.labels.push_back(-1);
    cur.deprel_strings.push_back(cols[7]);
  }
  flush();
  return out;
}

/// Debug writer; inverse of read_conllu on the columns it reads.
inline void write_conllu(const std::string& path, const std::vector<Sentence>& sents) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_conllu: cannot open " + path);
  for (const auto& s : sents) {
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      out << (i + 1) << '\t' << s.tokens[i].form << "\t_\t"
          << (s.tokens[i].upos.empty() ? "_" : s.tokens[i].upos) << "\t_\t_\t"
          << (s.tree ? s.tree->heads[i] : 0) << '\t'
          << (i < s.deprel_strings.size() ? s.deprel_strings[i] : "_") << "\t_\t_\n";
    }
    out << '\n';
  }
}

// ---- compression TSV -----------------------------------------------------

/// Lines "FORM<TAB>KEPT|DROPPED"; blank line separates sentences; an
/// optional "# lang = xx" header sets the sentence language (xx != source
/// language of the run maps to id 1; "# lang = 0"/"# lang = 1" also work).
/// With require_compression_labels=false any non-empty label is accepted
/// (scoring output of models with other tagsets).
inline std::vector<Sentence> read_compression_tsv(const std::string& path,
                                                  bool require_compression_labels = true) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_compression_tsv: cannot open " + path);
  std::vector<Sentence> out;
  Sentence cur;
  std::string line;
  long lineno = 0;
  int lang = 0;
  auto flush = [&] {
    if (!cur.tokens.empty()) {
      cur.language_id = lang;
      for (auto& t : cur.tokens) t.language_id = lang;
      out.push_back(std::move(cur));
    }
    cur = Sentence{};
    lang = 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (line.find("lang") != std::string::npos && eq != std::string::npos) {
        std::string v = line.substr(eq + 1);
        v.erase(0, v.find_first_not_of(' '));
        lang = (v == "0" || v == "src" || v == "es") ? 0 : 1;
      }
      continue;
    }
    auto tab = line.find('\t');
    Token tok;
    if (tab == std::string::npos) {
      // form-only line: unlabeled text (adversarial target data)
      tok.form = line;
      if (!cur.tag_strings.empty())
        throw ParseError("read_compression_tsv: " + path + ":" + std::to_string(lineno) +
                         ": untagged line inside a tagged sentence");
      cur.tokens.push_back(tok);
      continue;
    }
    std::string form = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    if (require_compression_labels && label != "KEPT" && label != "DROPPED")
      throw ParseError("read_compression_tsv: " + path + ":" + std::to_string(lineno) + ": unknown label '" +
                       label + "'");
    if (label.empty())
      throw ParseError("read_compression_tsv: " + path + ":" + std::to_string(lineno) + ": empty label");
    if (cur.tag_strings.size() != cur.tokens.size())
      throw ParseError("read_compression_tsv: " + path + ":" + std::to_string(lineno) +
                       ": tagged line inside an untagged sentence");
    tok.form = form;
    cur.tokens.push_back(tok);
    cur.tag_strings.push_back(label);
  }
  flush();
  return out;
}

inline void write_compression_tsv(const std::string& path, const std::vector<Sentence>& sents) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_compression_tsv: cannot open " + path);
  for (const auto& s : sents) {
    out << "# lang = " << s.language_id << '\n';
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i].form;
      if (s.has_tags()) out << '\t' << s.tag_strings[i];
      out << '\n';
    }
    out << '\n';
  }
}

/// 100 * (#KEPT tokens) / (#tokens).
inline double compression_rate(const std::vector<Sentence>& corpus) {
  long kept = 0, total = 0;
  for (const auto& s : corpus) {
    if (!s.has_tags()) throw ValueError("compression_rate: untagged corpus");
    for (const auto& t : s.tag_strings) {
      ++total;
      if (t == "KEPT") ++kept;
    }
  }
  if (total == 0) throw ValueError("compression_rate: empty corpus");
  return 100.0 * static_cast<double>(kept) / static_cast<double>(total);
}

// ---- embeddings ----------------------------------------------------------

struct EmbeddingLoadReport {
  double coverage_pct = 0.0;
  long duplicates = 0;
  int dim = 0;
};

/// Text format: optional "count dim" header, then "word v1 ... vd" rows.
/// Vocab words missing from the file get seeded random rows; the first
/// occurrence of a repeated word wins.
inline TensorPtr load_embeddings(const std::string& path, const Vocab& vocab, unsigned seed,
                                 EmbeddingLoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_embeddings: cannot open " + path);
  std::string line;
  std::unordered_map<std::string, std::vector<double>> rows;
  int dim = -1;
  long duplicates = 0;
  long lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> vec;
    double v;
    while (ls >> v) vec.push_back(v);
    if (first) {
      first = false;
      // "count dim" header: two integer fields, first field numeric
      if (vec.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) continue;
    }
    if (dim < 0) dim = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != dim)
      throw ParseError("load_embeddings: " + path + ":" + std::to_string(lineno) +
                       ": dimension " + std::to_string(vec.size()) + " != " + std::to_string(dim));
    if (!rows.emplace(word, std::move(vec)).second) ++duplicates;
  }
  if (dim < 0) throw ParseError("load_embeddings: no vectors in " + path);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  TensorPtr table = make_zeros({vocab.size(), dim});
  long covered = 0;
  for (int i = 0; i < vocab.size(); ++i) {
    auto it = rows.find(vocab.form(i));
    if (it != rows.end()) {
      std::copy(it->second.begin(), it->second.end(), table->values.begin() + static_cast<size_t>(i) * dim);
      ++covered;
    } else {
      for (int j = 0; j < dim; ++j) table->values[static_cast<size_t>(i) * dim + j] = dist(rng);
    }
  }
  if (report) {
    report->coverage_pct = 100.0 * static_cast<double>(covered) / vocab.size();
    report->duplicates = duplicates;
    report->dim = dim;
  }
  return table;
}

// ---- Brown clusters ------------------------------------------------------

/// Lines "bitstring<TAB>word<TAB>freq". The cluster id is the bit-string
/// prefix truncated (or zero-padded) to `prefix_len` bits, interpreted as
/// a binary number offset by 1 (0 stays the reserved UNK cluster).
inline std::unordered_map<std::string, int> load_brown_clusters(const std::string& path,
                                                               int prefix_len = 8) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_brown_clusters: cannot open " + path);
  std::unordered_map<std::string, int> map;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = detail::split_tabs(line);
    if (cols.size() < 2)
      throw ParseError("load_brown_clusters: " + path + ":" + std::to_string(lineno) + ": malformed line");
    std::string bits = cols[0].substr(0, static_cast<size_t>(prefix_len));
    while (static_cast<int>(bits.size()) < prefix_len) bits.push_back('0');
    int id = 0;
    for (char c : bits) {
      if (c != '0' && c != '1')
        throw ParseError("load_brown_clusters: " + path + ":" + std::to_string(lineno) + ": non-binary bit string");
      id = id * 2 + (c - '0');
    }
    map.emplace(cols[1], id + 1);  // shift past reserved cluster 0
  }
  return map;
}

}  // namespace advtag
