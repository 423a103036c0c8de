#pragma once

#include <vector>

#include "advtag/tensor.hpp"

namespace advtag {

using TagCorpus = std::vector<std::vector<int>>;

/// 100 * correct tokens / total tokens.
inline double token_accuracy(const TagCorpus& gold, const TagCorpus& pred) {
  if (gold.size() != pred.size()) throw ValueError("token_accuracy: corpus length mismatch");
  long correct = 0, total = 0;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw ValueError("token_accuracy: sentence length mismatch");
    for (size_t i = 0; i < gold[s].size(); ++i) {
      ++total;
      correct += (gold[s][i] == pred[s][i]);
    }
  }
  if (total == 0) throw ValueError("token_accuracy: empty corpus");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

/// 100 * sentences with every token correct / total sentences.
inline double sentence_accuracy(const TagCorpus& gold, const TagCorpus& pred) {
  if (gold.size() != pred.size()) throw ValueError("sentence_accuracy: corpus length mismatch");
  if (gold.empty()) throw ValueError("sentence_accuracy: empty corpus");
  long exact = 0;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw ValueError("sentence_accuracy: sentence length mismatch");
    exact += (gold[s] == pred[s]);
  }
  return 100.0 * static_cast<double>(exact) / static_cast<double>(gold.size());
}

}  // namespace advtag
