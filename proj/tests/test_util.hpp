#pragma once

// Test-only oracles. Nothing here calls into the tree queries under test:
// paths are enumerated by brute force over the raw relation list.

#include <random>
#include <string>
#include <vector>

#include "argllm/qbaf.hpp"

namespace argllm::oracle {

/// Every directed path (sequence of relations, length >= 1) from `from` to
/// `to`, found by exhaustive DFS over the relation list with a length cap.
inline std::vector<std::vector<Relation>> all_paths(const Qbaf& q, const ArgumentId& from, const ArgumentId& to) {
  std::vector<std::vector<Relation>> found;
  std::vector<Relation> current;
  const std::size_t cap = q.relations().size();
  auto dfs = [&](auto&& self, const ArgumentId& at) -> void {
    if (current.size() > cap) return;
    for (const auto& r : q.relations()) {
      if (r.source != at) continue;
      current.push_back(r);
      if (r.target == to) found.push_back(current);
      else self(self, r.target);
      current.pop_back();
    }
  };
  dfs(dfs, from);
  return found;
}

/// Random tree with at most `max_nodes` arguments. Each new argument picks a
/// uniformly random existing parent, so shapes range from chains to stars.
inline Qbaf random_tree(std::mt19937_64& rng, std::size_t max_nodes) {
  std::uniform_int_distribution<std::size_t> count(1, max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = count(rng);
  std::vector<Argument> args;
  std::vector<Relation> rels;
  args.push_back({"n0", "root", unit(rng)});
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    ArgumentId id("n" + std::to_string(i));
    args.push_back({id, "arg", unit(rng)});
    rels.push_back({id, args[parent(rng)].id, coin(rng) ? Polarity::attack : Polarity::support});
  }
  return Qbaf("n0", std::move(args), std::move(rels));
}

}  // namespace argllm::oracle
