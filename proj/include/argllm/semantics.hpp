#pragma once

// Gradual semantics over tree-shaped QBAFs: DF-QuAD and the quadratic energy
// model. Evaluation is a single post-order pass; no fixpoint iteration is
// needed because every argument's children are final before it is visited.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "argllm/error.hpp"
#include "argllm/qbaf.hpp"

namespace argllm {

namespace detail {
inline void require_unit(double v, std::string_view what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw Error(ErrorCode::value_out_of_range, std::string(what) + " " + std::to_string(v) + " outside [0,1]");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// DF-QuAD

/// Probabilistic-sum aggregation 1 - prod(1 - v_i); 0 for no values.
/// Values are multiplied in ascending order so the result is bit-identical
/// for every permutation of the input.
inline double df_quad_aggregate(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) detail::require_unit(v, "strength");
  if (sorted.empty()) return 0.0;
  std::sort(sorted.begin(), sorted.end());
  double product = 1.0;
  for (double v : sorted) product *= std::fabs(1.0 - v);
  return 1.0 - product;
}

inline double df_quad_aggregate(std::initializer_list<double> values) {
  return df_quad_aggregate(std::span<const double>(values.begin(), values.size()));
}

inline double df_quad_combine(double base, double agg_attack, double agg_support) {
  detail::require_unit(base, "base score");
  detail::require_unit(agg_attack, "attack aggregate");
  detail::require_unit(agg_support, "support aggregate");
  if (agg_attack == agg_support) return base;
  const double diff = std::fabs(agg_support - agg_attack);
  if (agg_attack > agg_support) return base - base * diff;
  return base + (1.0 - base) * diff;
}

// ---------------------------------------------------------------------------
// Quadratic energy model

inline double qem_influence(double energy) {
  if (!std::isfinite(energy)) throw Error(ErrorCode::non_finite, "energy must be finite");
  const double e = std::max(energy, 0.0);
  return e * e / (1.0 + e * e);
}

inline double qem_strength(double base, double energy) {
  detail::require_unit(base, "base score");
  return base + (1.0 - base) * qem_influence(energy) - base * qem_influence(-energy);
}

/// Sum of supporter strengths minus sum of attacker strengths, each summed in
/// ascending order.
inline double qem_energy(std::span<const double> attackers, std::span<const double> supporters) {
  auto sorted_sum = [](std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  return sorted_sum(supporters) - sorted_sum(attackers);
}

// ---------------------------------------------------------------------------
// Registry

enum class SemanticsId { df_quad, qem };

constexpr std::string_view to_string(SemanticsId id) { return id == SemanticsId::df_quad ? "df-quad" : "qem"; }

inline std::optional<SemanticsId> parse_semantics(std::string_view name) {
  if (name == "df-quad" || name == "dfquad" || name == "df_quad") return SemanticsId::df_quad;
  if (name == "qem") return SemanticsId::qem;
  return std::nullopt;
}

/// A semantics maps (base score, attacker strengths, supporter strengths) to a
/// strength. Anything with this shape can be registered.
using StrengthFunction =
    std::function<double(double base, std::span<const double> attackers, std::span<const double> supporters)>;

inline double df_quad_strength(double base, std::span<const double> attackers, std::span<const double> supporters) {
  return df_quad_combine(base, df_quad_aggregate(attackers), df_quad_aggregate(supporters));
}

inline double qem_node_strength(double base, std::span<const double> attackers, std::span<const double> supporters) {
  return qem_strength(base, qem_energy(attackers, supporters));
}

class SemanticsRegistry {
 public:
  static SemanticsRegistry& global() {
    static SemanticsRegistry reg = [] {
      SemanticsRegistry r;
      r.add(std::string(to_string(SemanticsId::df_quad)), df_quad_strength);
      r.add(std::string(to_string(SemanticsId::qem)), qem_node_strength);
      return r;
    }();
    return reg;
  }

  void add(std::string name, StrengthFunction fn) { table_[std::move(name)] = std::move(fn); }

  const StrengthFunction* find(const std::string& name) const {
    auto it = table_.find(name);
    return it == table_.end() ? nullptr : &it->second;
  }

  const StrengthFunction& get(SemanticsId id) const { return table_.at(std::string(to_string(id))); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : table_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, StrengthFunction> table_;
};

// ---------------------------------------------------------------------------
// Evaluation

struct StrengthMap {
  std::string semantics;
  std::map<ArgumentId, double> strengths;

  double at(const ArgumentId& id) const {
    auto it = strengths.find(id);
    if (it == strengths.end()) throw Error(ErrorCode::unknown_argument, "no strength for '" + id.value + "'");
    return it->second;
  }
  friend bool operator==(const StrengthMap&, const StrengthMap&) = default;
};

inline StrengthMap evaluate(const Qbaf& q, const StrengthFunction& fn, std::string name) {
  require_valid(q);
  const auto& args = q.arguments();
  const auto& rels = q.relations();
  std::vector<double> sigma(q.size(), 0.0);
  std::vector<double> att, sup;
  for (auto i : post_order(q)) {
    att.clear();
    sup.clear();
    for (auto r : q.incoming(i)) {
      double s = sigma[q.index_of(rels[r].source)];
      (rels[r].polarity == Polarity::attack ? att : sup).push_back(s);
    }
    sigma[i] = (att.empty() && sup.empty()) ? args[i].tau() : fn(args[i].tau(), att, sup);
  }
  StrengthMap out{std::move(name), {}};
  for (std::size_t i = 0; i < args.size(); ++i) out.strengths.emplace(args[i].id, sigma[i]);
  return out;
}

inline StrengthMap evaluate(const Qbaf& q, SemanticsId id) {
  return evaluate(q, SemanticsRegistry::global().get(id), std::string(to_string(id)));
}

inline double root_strength(const Qbaf& q, SemanticsId id) { return evaluate(q, id).at(q.root()); }

}  // namespace argllm
