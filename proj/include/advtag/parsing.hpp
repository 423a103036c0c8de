#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "advtag/corpus.hpp"

namespace advtag {

// ---- transitions ---------------------------------------------------------

enum class TransitionKind { shift, left_arc, right_arc };

/// Transition ids: 0 = SHIFT, 1..L = LEFT_ARC(label), L+1..2L = RIGHT_ARC(label).
struct Transition {
  TransitionKind kind;
  int label = -1;  // unused for SHIFT

  bool operator==(const Transition&) const = default;
};

inline int transition_count(int n_labels) { return 1 + 2 * n_labels; }

inline int transition_id(const Transition& t, int n_labels) {
  switch (t.kind) {
    case TransitionKind::shift: return 0;
    case TransitionKind::left_arc: return 1 + t.label;
    case TransitionKind::right_arc: return 1 + n_labels + t.label;
  }
  return -1;
}

inline Transition transition_from_id(int id, int n_labels) {
  if (id == 0) return {TransitionKind::shift, -1};
  if (id <= n_labels) return {TransitionKind::left_arc, id - 1};
  return {TransitionKind::right_arc, id - 1 - n_labels};
}

// ---- parser state --------------------------------------------------------

struct Arc {
  int head, dependent, label;
  bool operator==(const Arc&) const = default;
};

/// Stack bottom->top; buffer holds token indices 1..n. Terminal iff the
/// buffer is empty and the stack is exactly [0].
struct ParserState {
  std::vector<int> stack;
  std::deque<int> buffer;
  std::vector<Arc> arcs;

  static ParserState initial(int n_tokens) {
    ParserState s;
    s.stack = {0};
    for (int i = 1; i <= n_tokens; ++i) s.buffer.push_back(i);
    return s;
  }

  bool terminal() const { return buffer.empty() && stack.size() == 1 && stack[0] == 0; }
  int top() const { return stack.back(); }
  int second() const { return stack[stack.size() - 2]; }
};

/// Legality: SHIFT needs a nonempty buffer; LEFT_ARC needs stack depth >= 2
/// with second-from-top != root; RIGHT_ARC needs stack depth >= 2. An arc
/// out of the root (RIGHT_ARC with second == 0) must carry the root label.
inline bool legal(const ParserState& s, const Transition& t, int root_label = -1) {
  switch (t.kind) {
    case TransitionKind::shift: return !s.buffer.empty();
    case TransitionKind::left_arc:
      if (s.stack.size() < 2 || s.second() == 0) return false;
      return root_label < 0 || t.label != root_label;  // "root" marks root arcs only
    case TransitionKind::right_arc:
      if (s.stack.size() < 2) return false;
      if (root_label >= 0) {
        if (s.second() == 0 && t.label != root_label) return false;
        if (s.second() != 0 && t.label == root_label) return false;
      }
      return true;
  }
  return false;
}

inline ParserState apply(ParserState s, const Transition& t, int root_label = -1) {
  if (!legal(s, t, root_label)) throw ValueError("apply: illegal transition for state");
  switch (t.kind) {
    case TransitionKind::shift:
      s.stack.push_back(s.buffer.front());
      s.buffer.pop_front();
      break;
    case TransitionKind::left_arc: {
      int top = s.top(), second = s.second();
      s.arcs.push_back({top, second, t.label});
      s.stack.erase(s.stack.end() - 2);
      break;
    }
    case TransitionKind::right_arc: {
      int top = s.top(), second = s.second();
      s.arcs.push_back({second, top, t.label});
      s.stack.pop_back();
      break;
    }
  }
  return s;
}

inline DependencyTree tree_from_arcs(const std::vector<Arc>& arcs, int n_tokens) {
  DependencyTree t;
  t.heads.assign(n_tokens, -1);
  t.labels.assign(n_tokens, -1);
  for (const auto& a : arcs) {
    t.heads[a.dependent - 1] = a.head;
    t.labels[a.dependent - 1] = a.label;
  }
  return t;
}

// ---- tree validation -----------------------------------------------------

inline bool is_single_rooted(const DependencyTree& t) {
  int roots = 0;
  for (int h : t.heads) roots += (h == 0);
  return roots == 1;
}

inline bool is_acyclic(const DependencyTree& t) {
  const int n = static_cast<int>(t.size());
  for (int i = 0; i < n; ++i) {
    int cur = i + 1, steps = 0;
    while (cur != 0) {
      cur = t.heads[cur - 1];
      if (cur < 0 || ++steps > n) return false;
    }
  }
  return true;
}

/// Projective iff no two arcs cross when drawn above the sentence; checked
/// pairwise, root arcs included via head position 0.
inline bool is_projective(const DependencyTree& t) {
  const int n = static_cast<int>(t.size());
  for (int i = 0; i < n; ++i) {
    int a = std::min(t.heads[i], i + 1), b = std::max(t.heads[i], i + 1);
    for (int j = 0; j < n; ++j) {
      int c = std::min(t.heads[j], j + 1), d = std::max(t.heads[j], j + 1);
      if ((a < c && c < b && b < d) || (c < a && a < d && d < b)) return false;
    }
  }
  return true;
}

inline bool oracle_compatible(const DependencyTree& t) {
  return is_single_rooted(t) && is_acyclic(t) && is_projective(t);
}

// ---- static oracle -------------------------------------------------------

struct NonProjectiveError : std::runtime_error {
  NonProjectiveError() : std::runtime_error("oracle: tree is not projective/single-rooted/acyclic") {}
};

/// Static arc-standard oracle. Prefers LEFT_ARC when the second-from-top's
/// gold head is the top; RIGHT_ARC when the top's gold head is the second
/// and the top has already acquired all its gold dependents; else SHIFT.
/// Replaying the result reproduces the tree in exactly 2n transitions.
inline std::vector<Transition> oracle(const DependencyTree& tree, int root_label = -1) {
  if (!oracle_compatible(tree)) throw NonProjectiveError();
  const int n = static_cast<int>(tree.size());
  std::vector<int> pending(n + 1, 0);  // gold dependents not yet attached
  for (int i = 0; i < n; ++i) ++pending[tree.heads[i]];
  std::vector<Transition> seq;
  ParserState s = ParserState::initial(n);
  while (!s.terminal()) {
    Transition t{TransitionKind::shift, -1};
    if (s.stack.size() >= 2) {
      int top = s.top(), second = s.second();
      if (second != 0 && tree.heads[second - 1] == top && pending[second] == 0) {
        t = {TransitionKind::left_arc, tree.labels[second - 1]};
      } else if (tree.heads[top - 1] == second && pending[top] == 0) {
        t = {TransitionKind::right_arc, tree.labels[top - 1]};
      }
    }
    if (t.kind == TransitionKind::shift && s.buffer.empty())
      throw NonProjectiveError();  // stuck: cannot happen on projective input
    if (t.kind != TransitionKind::shift) {
      int dep = t.kind == TransitionKind::left_arc ? s.second() : s.top();
      --pending[tree.heads[dep - 1]];
    }
    s = apply(std::move(s), t, root_label);
    seq.push_back(t);
  }
  return seq;
}

// ---- LAS -----------------------------------------------------------------

/// 100 * (#tokens with correct head AND label) / (#tokens).
inline double las(const std::vector<DependencyTree>& gold, const std::vector<DependencyTree>& pred) {
  if (gold.size() != pred.size()) throw ValueError("las: corpus length mismatch");
  long correct = 0, total = 0;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) throw ValueError("las: sentence length mismatch");
    for (size_t i = 0; i < gold[s].size(); ++i) {
      ++total;
      if (gold[s].heads[i] == pred[s].heads[i] && gold[s].labels[i] == pred[s].labels[i]) ++correct;
    }
  }
  if (total == 0) throw ValueError("las: empty corpus");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

// ---- random projective trees (used by tests and the synthesizer) ---------

/// Uniform-ish random projective single-rooted tree over n tokens: the
/// root dependent is drawn, then each side interval is split recursively
/// with heads at interval ends.
inline DependencyTree random_projective_tree(int n, int n_labels, std::mt19937& rng,
                                             int root_label = 0) {
  DependencyTree t;
  t.heads.assign(n, -1);
  t.labels.assign(n, 0);
  std::uniform_int_distribution<int> ldist(0, std::max(0, n_labels - 1));
  auto non_root_label = [&] {
    int l = ldist(rng);
    while (n_labels > 1 && l == root_label) l = ldist(rng);
    return l;
  };
  // attach(lo, hi, head): all tokens in [lo,hi] end up in head's subtree
  std::function<void(int, int, int)> attach = [&](int lo, int hi, int head) {
    if (lo > hi) return;
    std::uniform_int_distribution<int> pick(lo, hi);
    int d = pick(rng);
    t.heads[d - 1] = head;
    t.labels[d - 1] = head == 0 ? root_label : non_root_label();
    attach(lo, d - 1, d);
    attach(d + 1, hi, d);
  };
  attach(1, n, 0);
  return t;
}

}  // namespace advtag
