#include "kg/explainer.hpp"
#include "random_graph.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <deque>

using namespace kg;
using namespace kg::testing;

namespace {

const FieldId L16("L16"), L17("L17"), L18e("L18e"), L19("L19"), L20("L20");

std::vector<FieldId> child_fields(const ExplanationNode& n) {
  std::vector<FieldId> out;
  for (const auto& c : n.children) {
    out.push_back(c.field);
  }
  return out;
}

std::vector<FieldId> ids(std::initializer_list<const char*> names) {
  std::vector<FieldId> out;
  for (const auto* n : names) {
    out.emplace_back(n);
  }
  return out;
}

// Nodes in breadth-first order, as (depth, field) pairs.
std::vector<std::pair<int, FieldId>> bfs(const ExplanationNode& root) {
  std::vector<std::pair<int, FieldId>> out;
  std::deque<const ExplanationNode*> queue{&root};
  while (!queue.empty()) {
    const auto* n = queue.front();
    queue.pop_front();
    out.emplace_back(n->depth, n->field);
    for (const auto& c : n->children) {
      queue.push_back(&c);
    }
  }
  return out;
}

template <typename F>
void visit(const ExplanationNode& n, F&& fn) {
  fn(n);
  for (const auto& c : n.children) {
    visit(c, fn);
  }
}

class Payments : public ::testing::Test {
protected:
  std::shared_ptr<const KnowledgeGraph> g = load_fixture("f1040_mini.kg.xml");
  FactStore store;
  EvalState state{*g};
  std::optional<EvalResult> eval;

  void SetUp() override {
    const std::pair<const char*, const char*> facts[] = {{"L16", "400"}, {"L17", "500"}, {"L18a", "100"},
                                                         {"L18b", "0"},   {"L18c", "0"},   {"L18d", "0"}};
    for (const auto& [f, v] : facts) {
      set_fact(*g, store, state, FieldId(f), money(v));
    }
    eval = recompute(*g, store, state);
  }
};

} // namespace

TEST_F(Payments, DepthOneNamesBothInputs) {
  const auto root = explain(*g, *eval, store, L20, 1);
  EXPECT_EQ(root.text, "L20 (200.00) is L19 (600.00) minus L16 (400.00), floored at zero");
  EXPECT_EQ(root.gist, "NONNEG_SUBTRACT");
  EXPECT_EQ(root.depth, 0);
  EXPECT_EQ(child_fields(root), ids({"L19", "L16"}));
  for (const auto& c : root.children) {
    EXPECT_TRUE(c.children.empty());
    EXPECT_EQ(c.depth, 1);
  }
  EXPECT_EQ(root.children[0].value, money("600.00"));
  EXPECT_EQ(root.children[1].gist, kInputFactGist);
}

TEST_F(Payments, DepthTwoExpandsTotalPayments) {
  const auto root = explain(*g, *eval, store, L20, 2);
  ASSERT_EQ(root.children.size(), 2u);
  EXPECT_EQ(child_fields(root.children[0]), ids({"L17", "L18e"}));
  EXPECT_EQ(root.children[0].text, "L19 (600.00) is the sum of L17 (500.00) and L18e (100.00)");
  EXPECT_TRUE(root.children[0].children[1].children.empty());
  EXPECT_EQ(root.children[0].children[1].value, money("100.00"));
  EXPECT_TRUE(root.children[1].children.empty());
}

TEST_F(Payments, InputIsALeafAtAnyDepth) {
  for (int depth : {1, 2, 5, kUnlimitedDepth}) {
    const auto n = explain(*g, *eval, store, L17, depth);
    EXPECT_EQ(n.gist, kInputFactGist);
    EXPECT_TRUE(n.children.empty());
    EXPECT_EQ(n.text, "L17 (500.00) was entered");
  }
}

TEST_F(Payments, VariadicInputsJoinWithAnd) {
  const auto n = explain(*g, *eval, store, L18e, 1);
  EXPECT_EQ(n.text, "L18e (100.00) is the sum of L18a (100.00), L18b (0.00), L18c (0.00) and L18d (0.00)");
}

TEST_F(Payments, PathIsPreOrder) {
  auto fields = [&](const FieldId& f) {
    std::vector<FieldId> out;
    for (const auto& n : explain_path(*g, *eval, store, f)) {
      EXPECT_TRUE(n.children.empty());
      out.push_back(n.field);
    }
    return out;
  };
  EXPECT_EQ(fields(L20), ids({"L20", "L19", "L17", "L18e", "L18a", "L18b", "L18c", "L18d", "L16"}));
  EXPECT_EQ(fields(L17), ids({"L17"}));
  EXPECT_EQ(fields(L18e), ids({"L18e", "L18a", "L18b", "L18c", "L18d"}));
}

TEST_F(Payments, ExplainLeavesStateUntouched) {
  const auto state_before = state;
  const auto store_before = store;
  const auto eval_before = *eval;
  explain(*g, *eval, store, L20, kUnlimitedDepth);
  explain_path(*g, *eval, store, L20);
  EXPECT_EQ(state, state_before);
  EXPECT_EQ(store, store_before);
  EXPECT_EQ(*eval, eval_before);
}

TEST_F(Payments, RejectsBadArguments) {
  EXPECT_THROW(explain(*g, *eval, store, FieldId("L99"), 1), UnknownFieldError);
  EXPECT_THROW(explain(*g, *eval, store, L20, 0), std::invalid_argument);
  EXPECT_THROW(explain_path(*g, *eval, store, FieldId("nope")), UnknownFieldError);
}

TEST(Explain, UnknownValuesRenderLiteralToken) {
  auto g = load_fixture("f1040_mini.kg.xml");
  FactStore store;
  EvalState state(*g);
  set_fact(*g, store, state, L17, money("500"));
  const auto eval = recompute(*g, store, state);
  const auto root = explain(*g, eval, store, L19, 1);
  EXPECT_EQ(root.text, "L19 (unknown) is the sum of L17 (500.00) and L18e (unknown)");
  EXPECT_EQ(explain(*g, eval, store, L16, 1).text, "L16 (unknown) has not been entered");
}

TEST(Explain, DefaultsAndLabels) {
  auto r = load(
      "<knowledge-graph id=\"d\"><fields>"
      "<field role=\"input\" id=\"W\" kind=\"money\" default=\"0\" label=\"Withholding\"/>"
      "<field role=\"input\" id=\"X\" kind=\"money\" label=\"Wages\"/>"
      "<field id=\"T\" kind=\"money\" role=\"computed\" label=\"Total\"/></fields>"
      "<calcs><calc id=\"t\" gist=\"ADD\" out=\"T\"><in ref=\"X\"/><in ref=\"W\"/><in const=\"10\"/></calc></calcs>"
      "</knowledge-graph>");
  ASSERT_TRUE(r.ok());
  const auto& g = *r.graph;
  FactStore store;
  EvalState state(g);
  set_fact(g, store, state, FieldId("X"), money("5"));
  const auto eval = recompute(g, store, state);
  const auto root = explain(g, eval, store, FieldId("T"), 1);
  EXPECT_EQ(root.label, "Total");
  EXPECT_EQ(root.text, "Total (15.00) is the sum of Wages (5.00), Withholding (0.00) and 10.0000");
  ASSERT_EQ(root.children.size(), 2u);
  EXPECT_EQ(root.children[1].gist, kDefaultGist);
  EXPECT_EQ(root.children[1].text, "Withholding (0.00) is the default value");
}

TEST(Properties, ClosureMatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    RandomGraphOptions o;
    o.models = 1 + trial % 40;
    auto g = random_graph(rng, o);
    FactStore store;
    EvalState state(*g);
    for (const auto& f : g->fields()) {
      if (f.role == FieldRole::Input && std::bernoulli_distribution(0.7)(rng)) {
        set_fact(*g, store, state, f.id, random_value_for(rng, f));
      }
    }
    const auto eval = recompute(*g, store, state);
    for (const auto& m : g->models()) {
      const auto tree = explain(*g, eval, store, m.output, kUnlimitedDepth);
      std::set<FieldId> seen;
      visit(tree, [&](const ExplanationNode& n) {
        seen.insert(n.field);
        ASSERT_EQ(n.value, eval.value(n.field));
        ASSERT_NE(n.text.find(n.value.to_string()), std::string::npos) << n.text;
        const bool computed = g->producer(g->field_index(n.field)).has_value();
        if (!computed) {
          ASSERT_TRUE(n.children.empty());
        }
      });
      ASSERT_EQ(seen, brute_upstream(g->definition(), m.output)) << m.output;

      std::vector<FieldId> path;
      for (const auto& n : explain_path(*g, eval, store, m.output)) {
        path.push_back(n.field);
      }
      std::vector<FieldId> pre;
      visit(tree, [&](const ExplanationNode& n) { pre.push_back(n.field); });
      ASSERT_EQ(path, pre);
    }
  }
}

TEST(Properties, DepthMonotonicity) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    RandomGraphOptions o;
    o.models = 5 + trial % 30;
    auto g = random_graph(rng, o);
    FactStore store;
    EvalState state(*g);
    const auto eval = recompute(*g, store, state);
    const auto& target = g->models().back().output;
    auto previous = bfs(explain(*g, eval, store, target, 1));
    for (int d = 2; d <= 8; ++d) {
      const auto current = bfs(explain(*g, eval, store, target, d));
      ASSERT_GE(current.size(), previous.size());
      ASSERT_TRUE(std::equal(previous.begin(), previous.end(), current.begin())) << "depth " << d;
      for (const auto& [depth, f] : current) {
        ASSERT_LE(depth, d);
      }
      previous = current;
    }
  }
}
