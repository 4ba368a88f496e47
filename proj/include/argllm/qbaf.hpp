#pragma once

// Quantitative bipolar argumentation frameworks restricted to trees rooted at
// the claim. Edges point child -> parent: (source, target, attack) means
// `source` attacks `target`.

#include <algorithm>
#include <compare>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "argllm/error.hpp"

namespace argllm {

struct ArgumentId {
  std::string value;

  ArgumentId() = default;
  ArgumentId(std::string v) : value(std::move(v)) {}  // NOLINT: implicit by intent
  ArgumentId(const char* v) : value(v) {}             // NOLINT

  bool empty() const noexcept { return value.empty(); }
  const std::string& str() const noexcept { return value; }

  friend bool operator==(const ArgumentId&, const ArgumentId&) = default;
  friend auto operator<=>(const ArgumentId&, const ArgumentId&) = default;
};

struct ArgumentIdHash {
  std::size_t operator()(const ArgumentId& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};

enum class Polarity { attack, support };
enum class Stance { pro, con };
enum class Role { root, child };

constexpr std::string_view to_string(Polarity p) { return p == Polarity::attack ? "attack" : "support"; }
constexpr std::string_view to_string(Stance s) { return s == Stance::pro ? "pro" : "con"; }

inline std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "attack") return Polarity::attack;
  if (s == "support") return Polarity::support;
  return std::nullopt;
}

struct Argument {
  ArgumentId id;
  std::string text;
  std::optional<double> base_score;  // unset while the framework is still a BAF

  double tau() const {
    if (!base_score) throw Error(ErrorCode::invalid_framework, "argument '" + id.value + "' has no base score");
    return *base_score;
  }
  friend bool operator==(const Argument&, const Argument&) = default;
};

struct Relation {
  ArgumentId source;
  ArgumentId target;
  Polarity polarity = Polarity::support;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct Path {
  std::vector<Relation> edges;

  std::size_t length() const noexcept { return edges.size(); }
  std::size_t attack_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(),
                                                  [](const Relation& r) { return r.polarity == Polarity::attack; }));
  }
};

/// Immutable framework value. The constructor only indexes; structural
/// well-formedness is reported by validate() so malformed documents can be
/// inspected rather than rejected at parse time.
class Qbaf {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Qbaf() = default;
  Qbaf(ArgumentId root, std::vector<Argument> arguments, std::vector<Relation> relations)
      : root_(std::move(root)), arguments_(std::move(arguments)), relations_(std::move(relations)) {
    reindex();
  }

  const ArgumentId& root() const noexcept { return root_; }
  const std::vector<Argument>& arguments() const noexcept { return arguments_; }
  const std::vector<Relation>& relations() const noexcept { return relations_; }
  std::size_t size() const noexcept { return arguments_.size(); }

  std::size_t index_of(const ArgumentId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? npos : it->second;
  }
  bool contains(const ArgumentId& id) const { return index_of(id) != npos; }

  const Argument& at(const ArgumentId& id) const {
    auto i = index_of(id);
    if (i == npos) throw Error(ErrorCode::unknown_argument, "no argument '" + id.value + "'");
    return arguments_[i];
  }

  /// Relation indices whose source is argument `i` (at most one in a valid tree).
  const std::vector<std::size_t>& outgoing(std::size_t i) const { return outgoing_[i]; }
  /// Relation indices whose target is argument `i`, in document order.
  const std::vector<std::size_t>& incoming(std::size_t i) const { return incoming_[i]; }

  Role role_of(const ArgumentId& id) const {
    at(id);
    return id == root_ ? Role::root : Role::child;
  }

  friend bool operator==(const Qbaf& a, const Qbaf& b) {
    return a.root_ == b.root_ && a.arguments_ == b.arguments_ && a.relations_ == b.relations_;
  }

 private:
  void reindex() {
    index_.clear();
    outgoing_.assign(arguments_.size(), {});
    incoming_.assign(arguments_.size(), {});
    for (std::size_t i = 0; i < arguments_.size(); ++i) index_.emplace(arguments_[i].id, i);
    for (std::size_t r = 0; r < relations_.size(); ++r) {
      auto s = index_of(relations_[r].source);
      auto t = index_of(relations_[r].target);
      if (s != npos) outgoing_[s].push_back(r);
      if (t != npos) incoming_[t].push_back(r);
    }
  }

  ArgumentId root_;
  std::vector<Argument> arguments_;
  std::vector<Relation> relations_;
  std::unordered_map<ArgumentId, std::size_t, ArgumentIdHash> index_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> incoming_;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  unknown_root,
  duplicate_argument,
  missing_base_score,
  base_score_out_of_range,
  self_relation,
  unknown_endpoint,
  duplicate_relation,
  root_has_outgoing,
  multiple_roots,
  multiple_outgoing,
  cycle,
  disconnected,
};

constexpr std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::unknown_root: return "unknown root";
    case ViolationKind::duplicate_argument: return "duplicate argument id";
    case ViolationKind::missing_base_score: return "missing base score";
    case ViolationKind::base_score_out_of_range: return "base score out of [0,1]";
    case ViolationKind::self_relation: return "self relation";
    case ViolationKind::unknown_endpoint: return "relation endpoint names no argument";
    case ViolationKind::duplicate_relation: return "duplicated (source, target) pair";
    case ViolationKind::root_has_outgoing: return "path from root";
    case ViolationKind::multiple_roots: return "multiple roots";
    case ViolationKind::multiple_outgoing: return "multiple outgoing relations";
    case ViolationKind::cycle: return "cyclic path";
    case ViolationKind::disconnected: return "no path to root";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string subject;  // offending argument id, or "source->target" for relations
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
  }
  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.message;
    }
    return out;
  }
};

/// `structural` checks only the tree shape (used for BAFs before scoring).
enum class ValidationMode { structural, quantitative };

inline ValidationResult validate(const Qbaf& q, ValidationMode mode = ValidationMode::quantitative) {
  ValidationResult res;
  auto add = [&](ViolationKind k, std::string subject, const std::string& detail) {
    std::string msg = std::string(to_string(k)) + " at '" + subject + "'";
    if (!detail.empty()) msg += " (" + detail + ")";
    res.violations.push_back({k, std::move(subject), std::move(msg)});
  };

  const auto& args = q.arguments();
  const auto& rels = q.relations();
  const std::size_t n = args.size();

  if (!q.contains(q.root())) add(ViolationKind::unknown_root, q.root().value, "");

  {
    std::unordered_map<ArgumentId, int, ArgumentIdHash> seen;
    for (const auto& a : args)
      if (++seen[a.id] == 2) add(ViolationKind::duplicate_argument, a.id.value, "");
  }

  for (const auto& a : args) {
    if (!a.base_score) {
      if (mode == ValidationMode::quantitative) add(ViolationKind::missing_base_score, a.id.value, "");
    } else if (!(*a.base_score >= 0.0 && *a.base_score <= 1.0)) {
      add(ViolationKind::base_score_out_of_range, a.id.value, std::to_string(*a.base_score));
    }
  }

  {
    std::unordered_map<std::string, int> pairs;
    for (const auto& r : rels) {
      std::string key = r.source.value + "->" + r.target.value;
      if (r.source == r.target) add(ViolationKind::self_relation, key, "");
      if (!q.contains(r.source) || !q.contains(r.target)) add(ViolationKind::unknown_endpoint, key, "");
      if (++pairs[key] == 2) add(ViolationKind::duplicate_relation, key, "");
    }
  }

  const std::size_t root = q.index_of(q.root());
  for (std::size_t i = 0; i < n; ++i) {
    const auto out = q.outgoing(i).size();
    if (i == root) {
      if (out > 0) add(ViolationKind::root_has_outgoing, args[i].id.value, "the root must not attack or support");
    } else if (out == 0) {
      add(ViolationKind::multiple_roots, args[i].id.value, "argument has no outgoing relation");
    } else if (out > 1) {
      add(ViolationKind::multiple_outgoing, args[i].id.value,
          "multiple outgoing relations from " + args[i].id.value);
    }
  }

  // Cycle detection: iterative three-colour DFS over child->parent edges.
  std::vector<char> colour(n, 0);
  std::vector<char> on_cycle(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    if (colour[start] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    colour[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& out = q.outgoing(node);
      if (next < out.size()) {
        auto t = q.index_of(rels[out[next++]].target);
        if (t == Qbaf::npos || t == node) continue;
        if (colour[t] == 0) {
          colour[t] = 1;
          stack.emplace_back(t, 0);
        } else if (colour[t] == 1) {
          // Mark every node of the cycle currently on the stack.
          bool in = false;
          for (auto& [s, _] : stack) {
            if (s == t) in = true;
            if (in) on_cycle[s] = 1;
          }
          add(ViolationKind::cycle, args[t].id.value, "cyclic path through " + args[t].id.value);
        }
      } else {
        colour[node] = 2;
        stack.pop_back();
      }
    }
  }

  // Reachability: walk incoming edges from the root.
  if (root != Qbaf::npos) {
    std::vector<char> reached(n, 0);
    std::vector<std::size_t> frontier{root};
    reached[root] = 1;
    while (!frontier.empty()) {
      auto cur = frontier.back();
      frontier.pop_back();
      for (auto r : q.incoming(cur)) {
        auto s = q.index_of(rels[r].source);
        if (s != Qbaf::npos && !reached[s]) {
          reached[s] = 1;
          frontier.push_back(s);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!reached[i] && !on_cycle[i] && q.outgoing(i).size() == 1)
        add(ViolationKind::disconnected, args[i].id.value, "");
  }

  return res;
}

inline void require_valid(const Qbaf& q, ValidationMode mode = ValidationMode::quantitative) {
  auto res = validate(q, mode);
  if (!res.ok()) throw Error(ErrorCode::invalid_framework, res.summary());
}

// ---------------------------------------------------------------------------
// Tree queries. These assume a valid framework; a broken parent chain raises
// invalid_framework instead of looping.

inline Path path_to_root(const Qbaf& q, const ArgumentId& id) {
  auto i = q.index_of(id);
  if (i == Qbaf::npos) throw Error(ErrorCode::unknown_argument, "no argument '" + id.value + "'");
  if (id == q.root()) throw Error(ErrorCode::argument_is_root, "'" + id.value + "' is the root");
  Path p;
  while (q.arguments()[i].id != q.root()) {
    const auto& out = q.outgoing(i);
    if (out.size() != 1 || p.edges.size() >= q.size())
      throw Error(ErrorCode::invalid_framework, "no unique path from '" + id.value + "' to the root");
    const Relation& r = q.relations()[out.front()];
    p.edges.push_back(r);
    i = q.index_of(r.target);
    if (i == Qbaf::npos) throw Error(ErrorCode::invalid_framework, "dangling relation target '" + r.target.value + "'");
  }
  return p;
}

inline Stance classify(const Qbaf& q, const ArgumentId& id) {
  return path_to_root(q, id).attack_count() % 2 == 0 ? Stance::pro : Stance::con;
}

namespace detail {
inline std::vector<ArgumentId> children_with(const Qbaf& q, const ArgumentId& id, Polarity pol) {
  auto i = q.index_of(id);
  if (i == Qbaf::npos) throw Error(ErrorCode::unknown_argument, "no argument '" + id.value + "'");
  std::vector<ArgumentId> out;
  for (auto r : q.incoming(i))
    if (q.relations()[r].polarity == pol) out.push_back(q.relations()[r].source);
  return out;
}
}  // namespace detail

inline std::vector<ArgumentId> attackers(const Qbaf& q, const ArgumentId& id) {
  return detail::children_with(q, id, Polarity::attack);
}
inline std::vector<ArgumentId> supporters(const Qbaf& q, const ArgumentId& id) {
  return detail::children_with(q, id, Polarity::support);
}

inline bool is_leaf(const Qbaf& q, const ArgumentId& id) {
  auto i = q.index_of(id);
  if (i == Qbaf::npos) throw Error(ErrorCode::unknown_argument, "no argument '" + id.value + "'");
  return q.incoming(i).empty();
}

/// Argument indices ordered so that every child precedes its parent.
inline std::vector<std::size_t> post_order(const Qbaf& q) {
  std::vector<std::size_t> order;
  auto root = q.index_of(q.root());
  if (root == Qbaf::npos) return order;
  order.reserve(q.size());
  std::vector<std::size_t> frontier{root};
  while (!frontier.empty()) {
    auto cur = frontier.back();
    frontier.pop_back();
    order.push_back(cur);
    for (auto r : q.incoming(cur)) frontier.push_back(q.index_of(q.relations()[r].source));
  }
  std::reverse(order.begin(), order.end());
  return order;
}

/// Number of edges between `id` and the root.
inline std::size_t depth_of(const Qbaf& q, const ArgumentId& id) {
  return id == q.root() ? 0 : path_to_root(q, id).length();
}

// ---------------------------------------------------------------------------
// Copy-on-edit builders.

inline Qbaf with_base_score(const Qbaf& q, const ArgumentId& id, std::optional<double> score) {
  auto args = q.arguments();
  auto i = q.index_of(id);
  if (i == Qbaf::npos) throw Error(ErrorCode::unknown_argument, "no argument '" + id.value + "'");
  args[i].base_score = score;
  return Qbaf(q.root(), std::move(args), q.relations());
}

inline Qbaf with_added_leaf(const Qbaf& q, Argument leaf, const ArgumentId& parent, Polarity polarity) {
  if (!q.contains(parent)) throw Error(ErrorCode::unknown_argument, "no argument '" + parent.value + "'");
  auto args = q.arguments();
  auto rels = q.relations();
  rels.push_back({leaf.id, parent, polarity});
  args.push_back(std::move(leaf));
  return Qbaf(q.root(), std::move(args), std::move(rels));
}

/// Removes `id` together with every argument whose path to the root crosses it.
inline Qbaf without_subtree(const Qbaf& q, const ArgumentId& id) {
  auto top = q.index_of(id);
  if (top == Qbaf::npos) throw Error(ErrorCode::unknown_argument, "no argument '" + id.value + "'");
  std::vector<char> drop(q.size(), 0);
  std::vector<std::size_t> frontier{top};
  drop[top] = 1;
  while (!frontier.empty()) {
    auto cur = frontier.back();
    frontier.pop_back();
    for (auto r : q.incoming(cur)) {
      auto s = q.index_of(q.relations()[r].source);
      if (s != Qbaf::npos && !drop[s]) {
        drop[s] = 1;
        frontier.push_back(s);
      }
    }
  }
  std::vector<Argument> args;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (!drop[i]) args.push_back(q.arguments()[i]);
  std::vector<Relation> rels;
  for (const auto& r : q.relations()) {
    auto s = q.index_of(r.source);
    auto t = q.index_of(r.target);
    if ((s == Qbaf::npos || !drop[s]) && (t == Qbaf::npos || !drop[t])) rels.push_back(r);
  }
  return Qbaf(q.root(), std::move(args), std::move(rels));
}

}  // namespace argllm
