#pragma once

// Copy-on-edit contestation of a framework: base-score changes, argument
// additions and subtree removals, each with a before/after diff and a
// predicted direction for the root strength.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "argllm/document.hpp"
#include "argllm/error.hpp"
#include "argllm/pipeline.hpp"
#include "argllm/qbaf.hpp"
#include "argllm/semantics.hpp"

namespace argllm {

enum class EditKind { set_base_score, add_argument, remove_argument };

constexpr std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::set_base_score: return "set_base_score";
    case EditKind::add_argument: return "add_argument";
    case EditKind::remove_argument: return "remove_argument";
  }
  return "?";
}

enum class Direction { nondecrease, nonincrease, none };

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::nondecrease: return "nondecrease";
    case Direction::nonincrease: return "nonincrease";
    case Direction::none: return "none";
  }
  return "?";
}

struct NewArgument {
  std::string text;
  Polarity polarity = Polarity::support;
  double base_score = 0.0;
  ArgumentId parent;
};

/// For add_argument, `target` is the id the new argument receives (an empty
/// id asks apply_edit to pick a fresh one).
struct ContestationEdit {
  EditKind kind = EditKind::set_base_score;
  ArgumentId target;
  std::optional<double> new_score;
  std::optional<NewArgument> new_argument;

  static ContestationEdit set_score(ArgumentId id, double score) {
    return {EditKind::set_base_score, std::move(id), score, std::nullopt};
  }
  static ContestationEdit add(ArgumentId id, NewArgument arg) {
    return {EditKind::add_argument, std::move(id), std::nullopt, std::move(arg)};
  }
  static ContestationEdit remove(ArgumentId id) {
    return {EditKind::remove_argument, std::move(id), std::nullopt, std::nullopt};
  }
};

struct StrengthDelta {
  std::optional<double> before;  // absent: argument added by the edit
  std::optional<double> after;   // absent: argument removed by the edit
};

struct ContestationDiff {
  ContestationEdit edit;  // as applied, with any generated id filled in
  std::string semantics;
  double before_root = 0.0;
  double after_root = 0.0;
  bool before_label = false;
  bool after_label = false;
  std::map<ArgumentId, StrengthDelta> deltas;
  Direction predicted = Direction::none;

  double observed_change() const { return after_root - before_root; }
  bool flipped() const { return before_label != after_label; }
  /// Weak inequality in the predicted direction.
  bool consistent() const {
    switch (predicted) {
      case Direction::nondecrease: return after_root >= before_root;
      case Direction::nonincrease: return after_root <= before_root;
      case Direction::none: return true;
    }
    return false;
  }
};

struct EditResult {
  Qbaf qbaf;
  StrengthMap strengths;
  ContestationDiff diff;
};

// ---------------------------------------------------------------------------

namespace detail {

inline void check_score(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "base score is not finite");
  if (v < 0.0 || v > 1.0) throw Error(ErrorCode::value_out_of_range, "base score outside [0,1]");
}

inline ArgumentId fresh_id(const Qbaf& q) {
  for (std::size_t n = 1;; ++n) {
    ArgumentId id("u" + std::to_string(n));
    if (!q.contains(id)) return id;
  }
}

/// Fills in a generated id and checks that fields match the kind.
inline ContestationEdit normalise(const Qbaf& q, ContestationEdit e) {
  switch (e.kind) {
    case EditKind::set_base_score:
      if (!e.new_score) throw Error(ErrorCode::malformed_edit, "set_base_score needs new_score");
      if (!q.contains(e.target)) throw Error(ErrorCode::unknown_target, "no argument '" + e.target.value + "'");
      check_score(*e.new_score);
      break;
    case EditKind::add_argument:
      if (!e.new_argument) throw Error(ErrorCode::malformed_edit, "add_argument needs new_argument");
      if (!q.contains(e.new_argument->parent))
        throw Error(ErrorCode::unknown_target, "no parent '" + e.new_argument->parent.value + "'");
      check_score(e.new_argument->base_score);
      if (e.target.value.empty()) e.target = fresh_id(q);
      if (q.contains(e.target)) throw Error(ErrorCode::malformed_edit, "id '" + e.target.value + "' already in use");
      break;
    case EditKind::remove_argument:
      if (!q.contains(e.target)) throw Error(ErrorCode::unknown_target, "no argument '" + e.target.value + "'");
      if (e.target == q.root()) throw Error(ErrorCode::would_remove_root, "the root cannot be removed");
      break;
  }
  return e;
}

inline Qbaf edited(const Qbaf& q, const ContestationEdit& e) {
  switch (e.kind) {
    case EditKind::set_base_score: return with_base_score(q, e.target, e.new_score);
    case EditKind::add_argument: {
      const auto& n = *e.new_argument;
      return with_added_leaf(q, Argument{e.target, n.text, n.base_score}, n.parent, n.polarity);
    }
    case EditKind::remove_argument: return without_subtree(q, e.target);
  }
  throw Error(ErrorCode::malformed_edit, "unknown edit kind");
}

inline Direction towards(Stance s) { return s == Stance::pro ? Direction::nondecrease : Direction::nonincrease; }

inline Direction inverted(Direction d) {
  if (d == Direction::nondecrease) return Direction::nonincrease;
  if (d == Direction::nonincrease) return Direction::nondecrease;
  return d;
}

}  // namespace detail

/// Direction the root strength must move (weakly). Raising the score of a pro
/// argument cannot lower the root; lowering inverts; an unchanged score is
/// read as a raise. Additions are classified in the edited tree. Removals have
/// no guarantee.
inline Direction predict_direction(const Qbaf& q, const ContestationEdit& raw) {
  const ContestationEdit e = detail::normalise(q, raw);
  switch (e.kind) {
    case EditKind::set_base_score: {
      // The root has an empty path: zero attacks, so pro.
      const Direction up = e.target == q.root() ? Direction::nondecrease : detail::towards(classify(q, e.target));
      const double old = q.at(e.target).tau();
      return *e.new_score >= old ? up : detail::inverted(up);
    }
    case EditKind::add_argument: {
      const auto& n = *e.new_argument;
      const std::size_t above = n.parent == q.root() ? 0 : path_to_root(q, n.parent).attack_count();
      const std::size_t attacks = above + (n.polarity == Polarity::attack);
      return attacks % 2 == 0 ? Direction::nondecrease : Direction::nonincrease;
    }
    case EditKind::remove_argument: return Direction::none;
  }
  return Direction::none;
}

inline EditResult apply_edit(const Qbaf& q, const ContestationEdit& raw, SemanticsId semantics) {
  require_valid(q);
  const ContestationEdit e = detail::normalise(q, raw);
  const Direction predicted = predict_direction(q, e);
  Qbaf after = detail::edited(q, e);
  require_valid(after);

  const StrengthMap s0 = evaluate(q, semantics);
  StrengthMap s1 = evaluate(after, semantics);

  ContestationDiff d;
  d.edit = e;
  d.semantics = std::string(to_string(semantics));
  d.before_root = s0.at(q.root());
  d.after_root = s1.at(after.root());
  d.before_label = decide(d.before_root);
  d.after_label = decide(d.after_root);
  d.predicted = predicted;
  for (const auto& [id, v] : s0.strengths) d.deltas[id].before = v;
  for (const auto& [id, v] : s1.strengths) d.deltas[id].after = v;
  return {std::move(after), std::move(s1), std::move(d)};
}

/// Framework after the first `upto` edits of a history (all when absent).
inline Qbaf replay(const Qbaf& initial, const std::vector<ContestationEdit>& history, SemanticsId semantics,
                   std::optional<std::size_t> upto = std::nullopt) {
  const std::size_t n = std::min(upto.value_or(history.size()), history.size());
  Qbaf q = initial;
  for (std::size_t i = 0; i < n; ++i) q = apply_edit(q, history[i], semantics).qbaf;
  return q;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const ContestationEdit& e) {
  Json j;
  j["kind"] = to_string(e.kind);
  j["target"] = e.target.value;
  if (e.new_score) j["new_score"] = *e.new_score;
  if (e.new_argument) {
    const auto& n = *e.new_argument;
    j["new_argument"] = {{"text", n.text},
                         {"polarity", n.polarity == Polarity::attack ? "attack" : "support"},
                         {"base_score", n.base_score},
                         {"parent", n.parent.value}};
  }
  return j;
}

inline ContestationEdit edit_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::malformed_edit, "edit must be an object");
    ContestationEdit e;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "set_base_score") e.kind = EditKind::set_base_score;
    else if (kind == "add_argument") e.kind = EditKind::add_argument;
    else if (kind == "remove_argument") e.kind = EditKind::remove_argument;
    else throw Error(ErrorCode::malformed_edit, "unknown edit kind '" + kind + "'");
    if (j.contains("target") && !j["target"].is_null()) e.target = j["target"].get<std::string>();
    if (j.contains("new_score") && !j["new_score"].is_null()) e.new_score = j["new_score"].get<double>();
    if (j.contains("new_argument") && !j["new_argument"].is_null()) {
      const Json& a = j["new_argument"];
      NewArgument n;
      n.text = a.value("text", std::string());
      auto pol = parse_polarity(a.at("polarity").get<std::string>());
      if (!pol) throw Error(ErrorCode::malformed_edit, "bad polarity");
      n.polarity = *pol;
      n.base_score = a.at("base_score").get<double>();
      n.parent = a.at("parent").get<std::string>();
      e.new_argument = std::move(n);
    }
    if (e.kind != EditKind::add_argument && e.target.value.empty())
      throw Error(ErrorCode::malformed_edit, "edit needs a target");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::malformed_edit, ex.what());
  }
}

/// Accepts a bare array of edits or an object with an "edits" array.
inline std::vector<ContestationEdit> edits_from_json(const Json& j) {
  const Json* list = &j;
  if (j.is_object() && j.contains("edits")) list = &j["edits"];
  if (!list->is_array()) throw Error(ErrorCode::malformed_edit, "expected a list of edits");
  std::vector<ContestationEdit> out;
  for (const auto& e : *list) out.push_back(edit_from_json(e));
  return out;
}

inline Json to_json(const ContestationDiff& d) {
  Json j;
  j["edit"] = to_json(d.edit);
  j["semantics"] = d.semantics;
  j["before"] = {{"root_strength", d.before_root}, {"label", d.before_label}};
  j["after"] = {{"root_strength", d.after_root}, {"label", d.after_label}};
  j["observed_change"] = d.observed_change();
  j["predicted_direction"] = to_string(d.predicted);
  j["consistent"] = d.consistent();
  j["flipped"] = d.flipped();
  Json deltas = Json::object();
  for (const auto& [id, sd] : d.deltas) {
    Json x;
    x["before"] = sd.before ? Json(*sd.before) : Json(nullptr);
    x["after"] = sd.after ? Json(*sd.after) : Json(nullptr);
    deltas[id.value] = x;
  }
  j["deltas"] = deltas;
  return j;
}

// ---------------------------------------------------------------------------
// Randomized property checks

struct RandomTreeShape {
  std::size_t max_depth = 4;
  std::size_t max_children = 3;
};

/// Random valid tree; base scores uniform in [0,1) so interior almost surely.
inline Qbaf random_qbaf(std::mt19937_64& rng, RandomTreeShape shape = {}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> fanout(0, shape.max_children);
  std::bernoulli_distribution coin(0.5);
  std::vector<Argument> args{{"r", "root", unit(rng)}};
  std::vector<Relation> rels;
  std::vector<std::pair<std::size_t, std::size_t>> frontier{{0, 0}};  // (index, depth)
  while (!frontier.empty()) {
    auto [i, depth] = frontier.back();
    frontier.pop_back();
    if (depth >= shape.max_depth) continue;
    const std::size_t k = fanout(rng);
    for (std::size_t c = 0; c < k; ++c) {
      ArgumentId id(args[i].id.value + "." + std::to_string(c));
      rels.push_back({id, args[i].id, coin(rng) ? Polarity::attack : Polarity::support});
      args.push_back({id, "arg", unit(rng)});
      frontier.push_back({args.size() - 1, depth + 1});
    }
  }
  return Qbaf("r", std::move(args), std::move(rels));
}

struct PropertyReport {
  std::string semantics;
  std::size_t trials = 0;
  std::size_t weak_violations = 0;
  std::size_t strict_checked = 0;    // interior instances held to strict inequality
  std::size_t strict_violations = 0;
  std::size_t equality_cases = 0;    // root unchanged although the edited argument moved
  std::vector<std::string> counterexamples;  // first few, for the report

  bool ok() const { return weak_violations == 0 && strict_violations == 0; }

  std::string summary() const {
    std::ostringstream os;
    os << "semantics " << semantics << ": " << trials << " trials, " << weak_violations << " weak violations";
    if (strict_checked) os << ", " << strict_violations << " strict violations in " << strict_checked << " interior cases";
    os << ", " << equality_cases << " equality cases";
    return os.str();
  }
};

namespace detail {
inline void record(PropertyReport& r, const Qbaf& q, const ContestationEdit& e, const std::string& what) {
  if (r.counterexamples.size() < 5)
    r.counterexamples.push_back(what + " edit=" + to_json(e).dump() + " framework=" + to_json(q).dump());
}
}  // namespace detail

/// Base-score and argument-relation contestability on random trees. Weak
/// inequalities are checked for every semantics; the strict version only for
/// QEM, on instances whose root strength is interior and whose edited
/// argument's own strength really changes.
inline PropertyReport check_properties(SemanticsId semantics, std::size_t trials, std::uint64_t seed = 0) {
  if (trials == 0) throw Error(ErrorCode::precondition, "trials must be at least 1");
  PropertyReport report;
  report.semantics = std::string(to_string(semantics));
  report.trials = trials;
  const bool strict = semantics == SemanticsId::qem;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  for (std::size_t t = 0; t < trials; ++t) {
    Qbaf q = random_qbaf(rng);
    std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
    const ArgumentId target = q.arguments()[pick(rng)].id;
    ContestationEdit e;
    if (coin(rng)) {
      double a = unit(rng), b = unit(rng);
      q = with_base_score(q, target, std::min(a, b));
      e = ContestationEdit::set_score(target, std::max(a, b));
      if (coin(rng)) {  // exercise decreases too
        q = with_base_score(q, target, std::max(a, b));
        e.new_score = std::min(a, b);
      }
    } else {
      double tau = 1.0 - unit(rng);  // (0,1]
      e = ContestationEdit::add("", {"added", coin(rng) ? Polarity::attack : Polarity::support, tau, target});
    }
    auto result = apply_edit(q, e, semantics);
    const auto& d = result.diff;
    if (!d.consistent()) {
      ++report.weak_violations;
      detail::record(report, q, e, "weak");
      continue;
    }
    const auto& moved = d.deltas.at(d.edit.target);
    const bool argument_moved = !moved.before || *moved.before != *moved.after;
    if (argument_moved && d.before_root == d.after_root) ++report.equality_cases;
    if (strict && argument_moved && d.before_root > 0.0 && d.before_root < 1.0) {
      ++report.strict_checked;
      if (d.before_root == d.after_root) {
        ++report.strict_violations;
        detail::record(report, q, e, "strict");
      }
    }
  }
  return report;
}

/// Saturated DF-QuAD instance: root 0.5 with an attacker and a supporter both
/// at 1, so raising a second supporter leaves the root exactly where it was.
inline std::pair<Qbaf, ContestationEdit> df_quad_saturation_witness() {
  Qbaf q("root",
         {{"root", "claim", 0.5}, {"att", "attacker", 1.0}, {"sup", "supporter", 1.0}, {"sup2", "weak supporter", 0.3}},
         {{"att", "root", Polarity::attack}, {"sup", "root", Polarity::support}, {"sup2", "root", Polarity::support}});
  return {q, ContestationEdit::set_score("sup2", 0.8)};
}

struct MonotonicityReport {
  std::string semantics;
  std::size_t trials = 0;
  std::size_t base_score_violations = 0;
  std::size_t relation_violations = 0;
  std::size_t zero_leaf_changes = 0;  // a tau=0 leaf moved some strength
  bool ok() const { return base_score_violations == 0 && relation_violations == 0 && zero_leaf_changes == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << "semantics " << semantics << ": " << trials << " trials, " << base_score_violations
       << " base-score violations, " << relation_violations << " relation violations, " << zero_leaf_changes
       << " zero-leaf changes";
    return os.str();
  }
};

/// Per-trial: raise the score of a random non-root argument and compare its
/// parent; add a random leaf and compare its parent; add a tau=0 leaf and
/// compare every strength.
inline MonotonicityReport check_monotonicity(SemanticsId semantics, std::size_t trials, std::uint64_t seed = 0) {
  if (trials == 0) throw Error(ErrorCode::precondition, "trials must be at least 1");
  MonotonicityReport report;
  report.semantics = std::string(to_string(semantics));
  report.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  auto respects = [](Polarity p, double before, double after) {
    return p == Polarity::support ? before <= after : before >= after;
  };

  for (std::size_t t = 0; t < trials; ++t) {
    Qbaf q = random_qbaf(rng);
    const StrengthMap s = evaluate(q, semantics);

    if (q.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, q.relations().size() - 1);
      const Relation& r = q.relations()[pick(rng)];
      const double raised = q.at(r.source).tau() + (1.0 - q.at(r.source).tau()) * unit(rng);
      const double after = evaluate(with_base_score(q, r.source, raised), semantics).at(r.target);
      if (!respects(r.polarity, s.at(r.target), after)) ++report.base_score_violations;
    }

    std::uniform_int_distribution<std::size_t> any(0, q.size() - 1);
    const ArgumentId parent = q.arguments()[any(rng)].id;
    const Polarity pol = coin(rng) ? Polarity::attack : Polarity::support;
    Qbaf grown = with_added_leaf(q, {"new", "added", unit(rng)}, parent, pol);
    if (!respects(pol, s.at(parent), evaluate(grown, semantics).at(parent))) ++report.relation_violations;

    Qbaf zero = with_added_leaf(q, {"zero", "added", 0.0}, parent, pol);
    const StrengthMap sz = evaluate(zero, semantics);
    for (const auto& [id, v] : s.strengths)
      if (sz.at(id) != v) {
        ++report.zero_leaf_changes;
        break;
      }
  }
  return report;
}

}  // namespace argllm
