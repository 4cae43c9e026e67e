#include "kg/engine.hpp"
#include "kg/wire.hpp"
#include "oracles.hpp"
#include "random_graph.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

using namespace kg;
using namespace kg::testing;

namespace {

const FieldId L16("L16"), L17("L17"), L18a("L18a"), L18b("L18b"), L18c("L18c"), L18d("L18d"), L18e("L18e"),
    L19("L19"), L20("L20");

std::vector<FieldId> ids(std::initializer_list<const char*> names) {
  std::vector<FieldId> out;
  for (const auto* n : names) {
    out.emplace_back(n);
  }
  return out;
}

class MiniForm : public ::testing::Test {
protected:
  std::shared_ptr<const KnowledgeGraph> g = load_fixture("f1040_mini.kg.xml");
  FactStore store;
  EvalState state{*g};

  void set(const FieldId& f, const std::string& v) { set_fact(*g, store, state, f, money(v)); }
  void set_six() {
    set(L16, "400");
    set(L17, "500");
    set(L18a, "100");
    set(L18b, "0");
    set(L18c, "0");
    set(L18d, "0");
  }
};

std::string serialize(const EvalResult& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [f, v] : r.values()) {
    j["values"][f.str()] = wire::to_json(v);
  }
  j["errors"] = nlohmann::json::array();
  for (const auto& e : r.errors()) {
    j["errors"].push_back(wire::to_json(e));
  }
  return j.dump();
}

std::map<std::string, std::uint64_t> counts(const KnowledgeGraph& g, const EvalState& s) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& m : g.models()) {
    out[m.id] = s.eval_count(m.id);
  }
  return out;
}

// Random input facts for `g`: each input is either set or left absent.
std::vector<std::pair<FieldId, std::optional<Value>>> random_changes(std::mt19937_64& rng, const KnowledgeGraph& g,
                                                                     std::size_t n) {
  std::vector<const FieldDecl*> inputs;
  for (const auto& f : g.fields()) {
    if (f.role == FieldRole::Input) {
      inputs.push_back(&f);
    }
  }
  std::vector<std::pair<FieldId, std::optional<Value>>> out;
  for (std::size_t i = 0; i < n && !inputs.empty(); ++i) {
    const auto& decl = *inputs[std::uniform_int_distribution<std::size_t>(0, inputs.size() - 1)(rng)];
    if (std::bernoulli_distribution(0.2)(rng)) {
      out.emplace_back(decl.id, std::nullopt);
    } else {
      out.emplace_back(decl.id, random_value_for(rng, decl));
    }
  }
  return out;
}

} // namespace

TEST_F(MiniForm, SetFactDirtiesDownstreamCone) {
  set(L17, "500.00");
  EXPECT_EQ(state.dirty(), ids({"L19", "L20"}));
}

TEST_F(MiniForm, SetFactOnRangeInputDirtiesThreeFields) {
  set(L18a, "100.00");
  EXPECT_EQ(state.dirty(), ids({"L18e", "L19", "L20"}));
}

TEST(SetFact, FieldWithoutConsumersDirtiesNothing) {
  auto g = load_fixture("synthetic_fields.kg.xml");
  FactStore store;
  EvalState state(*g);
  set_fact(*g, store, state, FieldId("L1"), money("1"));
  EXPECT_TRUE(state.dirty().empty());
  EXPECT_EQ(store.revision(), 1u);
}

TEST_F(MiniForm, ConesMatchBruteForceReachability) {
  for (const auto& f : g->fields()) {
    const auto brute = brute_downstream(g->definition(), f.id);
    const auto cone = dependency_cone(*g, f.id);
    EXPECT_EQ(std::set<FieldId>(cone.begin(), cone.end()), brute) << f.id;
  }
}

TEST_F(MiniForm, RejectsBadFactsWithoutChangingAnything) {
  set(L16, "1");
  const auto before = store;
  EXPECT_THROW(set_fact(*g, store, state, FieldId("L99"), money("1")), UnknownFieldError);
  EXPECT_THROW(set_fact(*g, store, state, L19, money("1")), NotAnInputError);
  EXPECT_THROW(set_fact(*g, store, state, L17, Value::boolean(true)), KindMismatchError);
  EXPECT_THROW(set_fact(*g, store, state, L17, Value::number(10000)), KindMismatchError);
  EXPECT_THROW(set_fact(*g, store, state, L17, Value::unknown()), KindMismatchError);
  EXPECT_EQ(store, before);
}

TEST_F(MiniForm, RevisionIncreasesPerFact) {
  set(L16, "1");
  set(L16, "2");
  set_fact(*g, store, state, L16, std::nullopt);
  EXPECT_EQ(store.revision(), 3u);
  EXPECT_TRUE(store.facts().empty());
  const auto r = recompute(*g, store, state);
  EXPECT_EQ(r.revision(), 3u);
  EXPECT_EQ(state.revision(), 3u);
}

TEST_F(MiniForm, SixFactsMatchProceduralOracle) {
  set_six();
  const auto r = recompute(*g, store, state);
  EXPECT_EQ(r.value(L18e), money("100.00"));
  EXPECT_EQ(r.value(L19), money("600.00"));
  EXPECT_EQ(r.value(L20), money("200.00"));
  EXPECT_TRUE(r.unknown_fields().empty());
  EXPECT_TRUE(r.errors().empty());
  EXPECT_TRUE(state.dirty().empty());
  EXPECT_EQ(r, full_eval(*g, store));
}

TEST_F(MiniForm, AllZeroFloorsAtZero) {
  for (const auto& f : {L16, L17, L18a, L18b, L18c, L18d}) {
    set(f, "0");
  }
  EXPECT_EQ(recompute(*g, store, state).value(L20), money("0.00"));
}

TEST_F(MiniForm, NegativeDifferenceFloorsAtZero) {
  set_six();
  set(L16, "1000");
  EXPECT_EQ(recompute(*g, store, state).value(L20), money("0.00"));
}

TEST_F(MiniForm, StrictUnknownPropagation) {
  set(L17, "500");
  const auto r = recompute(*g, store, state);
  EXPECT_TRUE(r.value(L18e).is_unknown());
  EXPECT_TRUE(r.value(L19).is_unknown());
  EXPECT_TRUE(r.value(L20).is_unknown());
  EXPECT_EQ(r.unknown_fields(), ids({"L18e", "L19", "L20"}));
  EXPECT_EQ(r.value(L17), money("500"));
}

TEST_F(MiniForm, EmptyStoreEverythingUnknown) {
  const auto r = full_eval(*g, store);
  for (const auto& [f, v] : r.values()) {
    EXPECT_TRUE(v.is_unknown()) << f;
  }
  EXPECT_EQ(r.unknown_fields(), ids({"L18e", "L19", "L20"}));
}

TEST_F(MiniForm, UnknownFieldsAreSubsetOfValues) {
  set(L18a, "3");
  const auto r = recompute(*g, store, state);
  const auto values = r.values();
  for (const auto& f : r.unknown_fields()) {
    ASSERT_TRUE(values.contains(f));
    EXPECT_TRUE(values.at(f).is_unknown());
  }
}

TEST_F(MiniForm, IncrementalRecomputeRunsOnlyTheCone) {
  set_six();
  recompute(*g, store, state);
  const auto before = counts(*g, state);
  set(L17, "700");
  const auto r = recompute(*g, store, state);
  const auto after = counts(*g, state);
  EXPECT_EQ(after.at("calc.L18e"), before.at("calc.L18e"));
  EXPECT_EQ(after.at("calc.L19"), before.at("calc.L19") + 1);
  EXPECT_EQ(after.at("calc.L20"), before.at("calc.L20") + 1);
  EXPECT_EQ(r.value(L20), money("400.00"));
}

TEST_F(MiniForm, RetractionDirtiesTheSameCone) {
  set_six();
  recompute(*g, store, state);
  set_fact(*g, store, state, L18b, std::nullopt);
  EXPECT_EQ(state.dirty(), ids({"L18e", "L19", "L20"}));
  const auto r = recompute(*g, store, state);
  EXPECT_TRUE(r.value(L20).is_unknown());
}

TEST_F(MiniForm, RecomputeWithNothingDirtyRunsNothing) {
  set_six();
  recompute(*g, store, state);
  const auto total = state.total_evaluations();
  const auto first = recompute(*g, store, state);
  EXPECT_EQ(state.total_evaluations(), total);
  EXPECT_EQ(first.value(L20), money("200.00"));
}

TEST(Oracle, PaymentsSectionOnRandomFacts) {
  auto g = load_fixture("f1040_mini.kg.xml");
  std::mt19937_64 rng(1040);
  std::uniform_int_distribution<std::int64_t> cents(0, 1'000'000'00);
  for (int trial = 0; trial < 1000; ++trial) {
    std::int64_t v[6];
    FactStore store;
    EvalState state(*g);
    const FieldId inputs[] = {L16, L17, L18a, L18b, L18c, L18d};
    for (int i = 0; i < 6; ++i) {
      v[i] = cents(rng);
      set_fact(*g, store, state, inputs[i], Value::money(v[i]));
    }
    const auto r = recompute(*g, store, state);
    const auto o = payments_oracle(v[0], v[1], v[2], v[3], v[4], v[5]);
    ASSERT_EQ(r.value(L18e), Value::money(o.l18e));
    ASSERT_EQ(r.value(L19), Value::money(o.l19));
    ASSERT_EQ(r.value(L20), Value::money(o.l20));
  }
}

TEST(Defaults, AbsentInputUsesDeclaredDefault) {
  auto def = load_fixture("f1040_mini.kg.xml")->definition();
  for (auto& f : def.fields) {
    if (f.id == L17) {
      f.default_value = money("0");
    }
  }
  auto built = KnowledgeGraph::build(def);
  ASSERT_TRUE(built.ok());
  const auto& g = *built.graph;
  FactStore store;
  EvalState state(g);
  for (const auto& f : {L16, L18a, L18b, L18c, L18d}) {
    set_fact(g, store, state, f, money("10"));
  }
  const auto r = recompute(g, store, state);
  EXPECT_EQ(r.value(L17), money("0"));
  EXPECT_EQ(r.value(L19), money("40.00"));
  EXPECT_EQ(r.value(L20), money("30.00"));
  set_fact(g, store, state, L17, money("5"));
  EXPECT_EQ(recompute(g, store, state).value(L19), money("45.00"));
}

TEST(Arithmetic, MultiplyRoundsOnceOnAssignment) {
  auto r = load(
      "<knowledge-graph id=\"m\">"
      "<fields><field role=\"input\" id=\"A\" kind=\"money\"/><field id=\"B\" kind=\"money\" role=\"computed\"/>"
      "<field id=\"C\" kind=\"money\" role=\"computed\"/></fields>"
      "<calcs><calc id=\"b\" gist=\"MULTIPLY\" out=\"B\"><in ref=\"A\"/><in const=\"0.5\"/></calc>"
      "<calc id=\"c\" gist=\"MULTIPLY\" out=\"C\"><in ref=\"A\"/><in const=\"0.5\"/><in const=\"0.5\"/></calc>"
      "</calcs></knowledge-graph>");
  ASSERT_TRUE(r.ok());
  const auto& g = *r.graph;
  auto eval = [&](const char* a) {
    FactStore s;
    EvalState st(g);
    set_fact(g, s, st, FieldId("A"), money(a));
    return recompute(g, s, st);
  };
  EXPECT_EQ(eval("0.05").value(FieldId("B")), money("0.03"));
  EXPECT_EQ(eval("-0.05").value(FieldId("B")), money("-0.03"));
  // 0.05 * 0.25 = 0.0125; one rounding gives 0.01, rounding per step would give 0.02.
  EXPECT_EQ(eval("0.05").value(FieldId("C")), money("0.01"));
}

TEST(Arithmetic, GistSemantics) {
  auto r = load(
      "<knowledge-graph id=\"s\">"
      "<fields><field role=\"input\" id=\"A\" kind=\"money\"/><field role=\"input\" id=\"B\" kind=\"money\"/><field role=\"input\" id=\"F\" kind=\"boolean\"/>"
      "<field id=\"Sub\" kind=\"money\" role=\"computed\"/><field id=\"Non\" kind=\"money\" role=\"computed\"/>"
      "<field id=\"Min\" kind=\"money\" role=\"computed\"/><field id=\"Max\" kind=\"money\" role=\"computed\"/>"
      "<field id=\"Cond\" kind=\"money\" role=\"computed\"/><field id=\"Abs\" kind=\"money\" role=\"computed\"/></fields>"
      "<calcs>"
      "<calc id=\"sub\" gist=\"SUBTRACT\" out=\"Sub\"><in role=\"subtrahend\" ref=\"B\"/><in role=\"minuend\" ref=\"A\"/></calc>"
      "<calc id=\"non\" gist=\"NONNEG_SUBTRACT\" out=\"Non\"><in role=\"minuend\" ref=\"A\"/><in role=\"subtrahend\" ref=\"B\"/></calc>"
      "<calc id=\"min\" gist=\"MIN\" out=\"Min\"><in ref=\"A\"/><in ref=\"B\"/><in const=\"3\"/></calc>"
      "<calc id=\"max\" gist=\"MAX\" out=\"Max\"><in ref=\"A\"/><in ref=\"B\"/></calc>"
      "<calc id=\"cond\" gist=\"CONDITIONAL\" out=\"Cond\"><in role=\"condition\" ref=\"F\"/>"
      "<in role=\"then\" ref=\"A\"/><in role=\"else\" const=\"7.25\"/></calc>"
      "<calc id=\"abs\" gist=\"CALC\" fn=\"ABS\" out=\"Abs\"><in ref=\"Sub\"/></calc>"
      "</calcs></knowledge-graph>");
  ASSERT_TRUE(r.ok());
  const auto& g = *r.graph;
  FactStore s;
  EvalState st(g);
  set_fact(g, s, st, FieldId("A"), money("2"));
  set_fact(g, s, st, FieldId("B"), money("5"));
  set_fact(g, s, st, FieldId("F"), Value::boolean(false));
  auto res = recompute(g, s, st);
  EXPECT_EQ(res.value(FieldId("Sub")), money("-3.00"));
  EXPECT_EQ(res.value(FieldId("Non")), money("0.00"));
  EXPECT_EQ(res.value(FieldId("Min")), money("2.00"));
  EXPECT_EQ(res.value(FieldId("Max")), money("5.00"));
  EXPECT_EQ(res.value(FieldId("Cond")), money("7.25"));
  EXPECT_EQ(res.value(FieldId("Abs")), money("3.00"));
  set_fact(g, s, st, FieldId("F"), Value::boolean(true));
  res = recompute(g, s, st);
  EXPECT_EQ(res.value(FieldId("Cond")), money("2.00"));
}

TEST(EvalErrors, DivisionByZeroRecordedAndDownstreamContinues) {
  auto r = load(
      "<knowledge-graph id=\"d\">"
      "<fields><field role=\"input\" id=\"A\" kind=\"number\"/><field role=\"input\" id=\"B\" kind=\"number\"/><field role=\"input\" id=\"Other\" kind=\"money\"/>"
      "<field id=\"Q\" kind=\"number\" role=\"computed\"/><field id=\"R\" kind=\"number\" role=\"computed\"/>"
      "<field id=\"S\" kind=\"money\" role=\"computed\"/></fields>"
      "<calcs><calc id=\"q\" gist=\"CALC\" fn=\"DIVIDE\" out=\"Q\"><in ref=\"A\"/><in ref=\"B\"/></calc>"
      "<calc id=\"r\" gist=\"ADD\" out=\"R\"><in ref=\"Q\"/></calc>"
      "<calc id=\"s\" gist=\"ADD\" out=\"S\"><in ref=\"Other\"/></calc></calcs></knowledge-graph>");
  ASSERT_TRUE(r.ok());
  const auto& g = *r.graph;
  FactStore store;
  EvalState state(g);
  set_fact(g, store, state, FieldId("A"), number("1"));
  set_fact(g, store, state, FieldId("B"), number("0"));
  set_fact(g, store, state, FieldId("Other"), money("4"));
  auto res = recompute(g, store, state);
  ASSERT_EQ(res.errors().size(), 1u);
  EXPECT_EQ(res.errors()[0].model_id, "q");
  EXPECT_EQ(res.errors()[0].error.code, EvalErrorCode::DivisionByZero);
  EXPECT_TRUE(res.value(FieldId("Q")).is_unknown());
  EXPECT_TRUE(res.value(FieldId("R")).is_unknown());
  EXPECT_EQ(res.value(FieldId("S")), money("4"));
  EXPECT_EQ(res, full_eval(g, store));

  set_fact(g, store, state, FieldId("B"), number("3"));
  res = recompute(g, store, state);
  EXPECT_TRUE(res.errors().empty());
  EXPECT_EQ(res.value(FieldId("Q")), number("0.3333"));
  EXPECT_EQ(res.value(FieldId("R")), number("0.3333"));
}

TEST(EvalErrors, EnumMismatchOnAssignment) {
  // Validation keeps authored branches inside the enumeration, so the only
  // way to produce a stray token is a host function.
  auto functions = FunctionTable::standard();
  functions.add("REGION", {1, [](std::span<const Value> in) {
                  return Value::text(in[0].as_decimal().is_negative() ? "TX" : "CA");
                }});
  auto r = load(
      "<knowledge-graph id=\"e\">"
      "<fields><field role=\"input\" id=\"A\" kind=\"number\"/>"
      "<field id=\"State\" kind=\"text\" role=\"computed\"><enum value=\"CA\"/><enum value=\"NY\"/></field></fields>"
      "<calcs><calc id=\"pick\" gist=\"CALC\" fn=\"REGION\" out=\"State\"><in ref=\"A\"/></calc></calcs>"
      "</knowledge-graph>",
      "<input>", GistRegistry::builtin(), functions);
  ASSERT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : format_diagnostic(r.diagnostics[0]));
  const auto& g = *r.graph;
  FactStore store;
  EvalState state(g);
  set_fact(g, store, state, FieldId("A"), number("-1"));
  auto res = recompute(g, store, state);
  ASSERT_EQ(res.errors().size(), 1u);
  EXPECT_EQ(res.errors()[0].error.code, EvalErrorCode::EnumMismatch);
  EXPECT_EQ(res.errors()[0].model_id, "pick");
  EXPECT_TRUE(res.value(FieldId("State")).is_unknown());
  set_fact(g, store, state, FieldId("A"), number("2"));
  res = recompute(g, store, state);
  EXPECT_TRUE(res.errors().empty());
  EXPECT_EQ(res.value(FieldId("State")), Value::text("CA"));
}

TEST(EvalErrors, OverflowBecomesUnknown) {
  auto r = load(
      "<knowledge-graph id=\"o\">"
      "<fields><field role=\"input\" id=\"A\" kind=\"money\"/><field id=\"B\" kind=\"money\" role=\"computed\"/></fields>"
      "<calcs><calc id=\"b\" gist=\"MULTIPLY\" out=\"B\"><in ref=\"A\"/><in ref=\"A\"/></calc></calcs>"
      "</knowledge-graph>");
  ASSERT_TRUE(r.ok());
  FactStore store;
  EvalState state(*r.graph);
  set_fact(*r.graph, store, state, FieldId("A"), money("90000000000"));
  const auto res = recompute(*r.graph, store, state);
  ASSERT_EQ(res.errors().size(), 1u);
  EXPECT_EQ(res.errors()[0].error.code, EvalErrorCode::Overflow);
  EXPECT_TRUE(res.value(FieldId("B")).is_unknown());
}

TEST(Incremental, EqualsFullEvalOnRandomSequences) {
  std::mt19937_64 rng(99);
  auto mini = load_fixture("f1040_mini.kg.xml");
  for (int trial = 0; trial < 1200; ++trial) {
    std::shared_ptr<const KnowledgeGraph> g = mini;
    if (trial % 2 == 1) {
      RandomGraphOptions o;
      o.money_inputs = 2 + trial % 7;
      o.models = 1 + trial % 25;
      g = random_graph(rng, o);
    }
    FactStore store;
    EvalState state(*g);
    const auto changes = random_changes(rng, *g, 1 + trial % 12);
    for (std::size_t i = 0; i < changes.size(); ++i) {
      set_fact(*g, store, state, changes[i].first, changes[i].second);
      // Recompute at random points so batches of facts are exercised too.
      if (std::bernoulli_distribution(0.5)(rng)) {
        recompute(*g, store, state);
      }
    }
    const auto incremental = recompute(*g, store, state);
    ASSERT_EQ(incremental, full_eval(*g, store)) << "trial " << trial;
    ASSERT_TRUE(state.dirty().empty());
  }
}

TEST(Incremental, ConeMinimalityOnRandomGraphs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    RandomGraphOptions o;
    o.money_inputs = 3 + trial % 8;
    o.models = 5 + trial % 60;
    auto g = random_graph(rng, o);
    FactStore store;
    EvalState state(*g);
    for (const auto& [f, v] : random_changes(rng, *g, 8)) {
      set_fact(*g, store, state, f, v);
    }
    recompute(*g, store, state);
    const auto before = counts(*g, state);

    const auto change = random_changes(rng, *g, 1).front();
    set_fact(*g, store, state, change.first, change.second);
    const auto result = recompute(*g, store, state);
    const auto after = counts(*g, state);
    const auto cone = brute_downstream(g->definition(), change.first);
    const auto expected = models_writing(g->definition(), cone);
    for (const auto& [model, n] : after) {
      const std::uint64_t delta = n - before.at(model);
      ASSERT_EQ(delta, expected.contains(model) ? 1u : 0u) << "trial " << trial << " model " << model;
    }
    ASSERT_EQ(result, full_eval(*g, store));
  }
}

TEST(Incremental, MonotoneUnknownWhenAddingFacts) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    RandomGraphOptions o;
    o.models = 5 + trial % 30;
    o.default_probability = 0;
    auto g = random_graph(rng, o);
    FactStore store;
    EvalState state(*g);
    std::vector<FieldId> absent;
    for (const auto& f : g->fields()) {
      if (f.role == FieldRole::Input) {
        absent.push_back(f.id);
      }
    }
    std::shuffle(absent.begin(), absent.end(), rng);
    auto prev = recompute(*g, store, state);
    for (const auto& f : absent) {
      set_fact(*g, store, state, f, random_value_for(rng, g->field(g->field_index(f))));
      const auto next = recompute(*g, store, state);
      for (const auto& m : g->models()) {
        if (!prev.value(m.output).is_unknown()) {
          ASSERT_FALSE(next.value(m.output).is_unknown()) << m.output << " after setting " << f;
        }
      }
      prev = next;
    }
  }
}

TEST(Determinism, IdenticalSequencesSerializeIdentically) {
  std::mt19937_64 seed_rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seed = seed_rng();
    std::mt19937_64 graph_rng(seed);
    auto g = random_graph(graph_rng, RandomGraphOptions{});
    std::string runs[2];
    for (auto& out : runs) {
      std::mt19937_64 rng(seed);
      FactStore store;
      EvalState state(*g);
      for (const auto& [f, v] : random_changes(rng, *g, 10)) {
        set_fact(*g, store, state, f, v);
      }
      out = serialize(recompute(*g, store, state));
    }
    ASSERT_EQ(runs[0], runs[1]);
  }
}

TEST(EvalState, CountsOnlyIncrease) {
  auto g = load_fixture("f1040_mini.kg.xml");
  FactStore store;
  EvalState state(*g);
  EXPECT_FALSE(state.primed());
  recompute(*g, store, state);
  EXPECT_TRUE(state.primed());
  EXPECT_EQ(state.eval_count("calc.L19"), 1u);
  EXPECT_EQ(state.eval_count("missing-model"), 0u);
  std::uint64_t last = state.total_evaluations();
  std::mt19937_64 rng(1);
  for (const auto& [f, v] : random_changes(rng, *g, 50)) {
    set_fact(*g, store, state, f, v);
    recompute(*g, store, state);
    ASSERT_GE(state.total_evaluations(), last);
    last = state.total_evaluations();
  }
}
