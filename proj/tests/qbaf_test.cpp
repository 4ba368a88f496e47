#include "argllm/document.hpp"
#include "argllm/qbaf.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace argllm;

namespace {

Qbaf root_with_two_leaves() {
  return Qbaf("c",
              {{"c", "claim", 0.5}, {"s", "supporter", 0.85}, {"a", "attacker", 0.70}},
              {{"s", "c", Polarity::support}, {"a", "c", Polarity::attack}});
}

// gamma attacks alpha, delta attacks gamma.
Qbaf attack_chain() {
  return Qbaf("alpha", {{"alpha", "", 0.5}, {"gamma", "", 0.5}, {"delta", "", 0.5}},
              {{"gamma", "alpha", Polarity::attack}, {"delta", "gamma", Polarity::attack}});
}

Qbaf seven_node_tree() {
  return Qbaf("c",
              {{"c", "", 0.5}, {"s", "", 0.5}, {"a", "", 0.5}, {"ss", "", 0.5}, {"sa", "", 0.5}, {"as", "", 0.5},
               {"aa", "", 0.5}},
              {{"s", "c", Polarity::support},
               {"a", "c", Polarity::attack},
               {"ss", "s", Polarity::support},
               {"sa", "s", Polarity::attack},
               {"as", "a", Polarity::support},
               {"aa", "a", Polarity::attack}});
}

}  // namespace

TEST(Validate, MinimalTreeIsOk) { EXPECT_TRUE(validate(root_with_two_leaves()).ok()); }

TEST(Validate, MultipleOutgoing) {
  Qbaf q("a", {{"a", "", 0.5}, {"b", "", 0.5}, {"c", "", 0.5}},
         {{"c", "a", Polarity::support}, {"b", "a", Polarity::attack}, {"b", "c", Polarity::attack}});
  auto res = validate(q);
  ASSERT_FALSE(res.ok());
  ASSERT_TRUE(res.has(ViolationKind::multiple_outgoing));
  bool named = false;
  for (const auto& v : res.violations)
    if (v.kind == ViolationKind::multiple_outgoing) named = v.subject == "b";
  EXPECT_TRUE(named);
  EXPECT_NE(res.summary().find("multiple outgoing relations from b"), std::string::npos);
}

TEST(Validate, TwoCycle) {
  Qbaf q("r", {{"r", "", 0.5}, {"a", "", 0.5}, {"b", "", 0.5}},
         {{"a", "b", Polarity::attack}, {"b", "a", Polarity::support}});
  auto res = validate(q);
  EXPECT_TRUE(res.has(ViolationKind::cycle));
  EXPECT_NE(res.summary().find("cyclic path"), std::string::npos);
}

// One generated counterexample family per violation class: each starts from
// a random valid tree and breaks exactly one rule.
TEST(Validate, CounterexampleFamilies) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Qbaf base = oracle::random_tree(rng, 12);
    ASSERT_TRUE(validate(base).ok());
    if (base.size() < 3) continue;
    ++checked;
    auto args = base.arguments();
    auto rels = base.relations();
    std::uniform_int_distribution<std::size_t> pick_rel(0, rels.size() - 1);
    const auto& r0 = rels[pick_rel(rng)];

    {  // duplicated (source, target)
      auto r = rels;
      r.push_back({r0.source, r0.target, r0.polarity == Polarity::attack ? Polarity::support : Polarity::attack});
      EXPECT_TRUE(validate(Qbaf(base.root(), args, r)).has(ViolationKind::duplicate_relation));
    }
    {  // self relation
      auto r = rels;
      r.push_back({r0.source, r0.source, Polarity::attack});
      EXPECT_TRUE(validate(Qbaf(base.root(), args, r)).has(ViolationKind::self_relation));
    }
    {  // second root: an argument with no outgoing edge
      auto a = args;
      a.push_back({"extra", "", 0.5});
      EXPECT_TRUE(validate(Qbaf(base.root(), a, rels)).has(ViolationKind::multiple_roots));
    }
    {  // disconnected: an argument hanging from a second root
      auto a = args;
      auto r = rels;
      a.push_back({"island", "", 0.5});
      a.push_back({"hanger", "", 0.5});
      r.push_back({"hanger", "island", Polarity::support});
      EXPECT_TRUE(validate(Qbaf(base.root(), a, r)).has(ViolationKind::disconnected));
    }
    {  // multiple outgoing
      auto r = rels;
      r.push_back({r0.source, base.root() == r0.target ? args[1].id : base.root(), Polarity::support});
      if (r.back().source != r.back().target) {
        EXPECT_TRUE(validate(Qbaf(base.root(), args, r)).has(ViolationKind::multiple_outgoing));
      }
    }
    {  // cycle through the root
      auto r = rels;
      r.push_back({base.root(), r0.source, Polarity::attack});
      auto res = validate(Qbaf(base.root(), args, r));
      EXPECT_TRUE(res.has(ViolationKind::root_has_outgoing));
      EXPECT_TRUE(res.has(ViolationKind::cycle));
    }
    {  // base score out of range
      auto a = args;
      a.back().base_score = 1.5;
      EXPECT_TRUE(validate(Qbaf(base.root(), a, rels)).has(ViolationKind::base_score_out_of_range));
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Validate, UnknownEndpointAndRoot) {
  Qbaf q("missing", {{"a", "", 0.5}}, {{"a", "ghost", Polarity::support}});
  auto res = validate(q);
  EXPECT_TRUE(res.has(ViolationKind::unknown_root));
  EXPECT_TRUE(res.has(ViolationKind::unknown_endpoint));
}

TEST(Validate, StructuralModeIgnoresMissingScores) {
  Qbaf q("c", {{"c", "claim", std::nullopt}, {"s", "x", std::nullopt}}, {{"s", "c", Polarity::support}});
  EXPECT_TRUE(validate(q, ValidationMode::structural).ok());
  EXPECT_TRUE(validate(q).has(ViolationKind::missing_base_score));
}

TEST(PathToRoot, SingleEdge) {
  auto q = root_with_two_leaves();
  auto p = path_to_root(q, "s");
  ASSERT_EQ(p.length(), 1u);
  EXPECT_EQ(p.edges[0], (Relation{"s", "c", Polarity::support}));
}

TEST(PathToRoot, Chain) {
  auto p = path_to_root(attack_chain(), "delta");
  ASSERT_EQ(p.length(), 2u);
  EXPECT_EQ(p.edges.back().target, ArgumentId("alpha"));
  EXPECT_EQ(p.edges[0].target, p.edges[1].source);
}

TEST(PathToRoot, Errors) {
  auto q = root_with_two_leaves();
  try {
    path_to_root(q, "zz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_argument);
  }
  try {
    path_to_root(q, "c");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::argument_is_root);
  }
}

TEST(PathToRoot, SevenNodeTreeMatchesEnumeration) {
  auto q = seven_node_tree();
  for (const auto& a : q.arguments()) {
    if (a.id == q.root()) continue;
    auto paths = oracle::all_paths(q, a.id, q.root());
    ASSERT_EQ(paths.size(), 1u);
    auto p = path_to_root(q, a.id);
    EXPECT_TRUE(p.length() == 1 || p.length() == 2);
    EXPECT_EQ(p.edges, paths.front());
  }
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(root_with_two_leaves(), "s"), Stance::pro);
  // A single attack is odd: con.
  EXPECT_EQ(classify(root_with_two_leaves(), "a"), Stance::con);
  // Two attacks on the way to the root: pro.
  EXPECT_EQ(classify(attack_chain(), "delta"), Stance::pro);
  EXPECT_EQ(classify(attack_chain(), "gamma"), Stance::con);
}

TEST(Children, LeafAndRoot) {
  auto q = root_with_two_leaves();
  EXPECT_TRUE(attackers(q, "s").empty());
  EXPECT_TRUE(supporters(q, "s").empty());
  EXPECT_EQ(attackers(q, "c"), std::vector<ArgumentId>{"a"});
  EXPECT_EQ(supporters(q, "c"), std::vector<ArgumentId>{"s"});
  auto t = seven_node_tree();
  EXPECT_EQ(attackers(t, "c").size() + supporters(t, "c").size(), 2u);
  for (auto id : {"s", "a"}) EXPECT_EQ(attackers(t, id).size() + supporters(t, id).size(), 2u);
  EXPECT_THROW(attackers(q, "nope"), Error);
}

// Property: exactly one path to the root, and stance equals attack parity of
// that path, for every node of random trees up to 15 nodes.
TEST(Properties, UniquePathAndParityAgainstEnumeration) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto q = oracle::random_tree(rng, 15);
    ASSERT_TRUE(validate(q).ok());
    for (const auto& a : q.arguments()) {
      if (a.id == q.root()) continue;
      auto paths = oracle::all_paths(q, a.id, q.root());
      ASSERT_EQ(paths.size(), 1u);
      std::size_t attacks = 0;
      for (const auto& r : paths[0]) attacks += r.polarity == Polarity::attack;
      EXPECT_EQ(classify(q, a.id), attacks % 2 == 0 ? Stance::pro : Stance::con);
    }
  }
}

TEST(Builders, RemoveSubtreeKeepsTreeValid) {
  auto q = seven_node_tree();
  auto r = without_subtree(q, "a");
  EXPECT_EQ(r.size(), 4u);
  EXPECT_TRUE(validate(r).ok());
  EXPECT_FALSE(r.contains("aa"));
  EXPECT_EQ(q.size(), 7u);
}

TEST(Document, RoundTripPreservesFramework) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto q = oracle::random_tree(rng, 10);
    auto text = to_json(q).dump();
    EXPECT_EQ(qbaf_from_json(Json::parse(text)), q);
  }
}

TEST(Document, MissingFieldsAreReported) {
  try {
    qbaf_from_json(Json::parse(R"({"arguments": []})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_field);
  }
  EXPECT_THROW(qbaf_from_json(Json::parse(
                   R"({"root":"c","arguments":[{"id":"c"}],"relations":[{"source":"x","target":"c","polarity":"meh"}]})")),
               Error);
}
