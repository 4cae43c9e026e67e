// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "kg/compiler.hpp"
#include "kg/completeness.hpp"
#include "kg/engine.hpp"
#include "kg/explainer.hpp"
#include "kg/loader.hpp"
#include "oracles.hpp"
#include "random_graph.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

using namespace kg;
using namespace kg::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first failure; later checks are skipped once one fails.
class Check {
public:
  bool operator()(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
    return ok;
  }
  bool failed() const { return !out_.pass; }
  Outcome done(std::string detail) {
    if (out_.pass) {
      out_.detail = std::move(detail);
    }
    return out_;
  }

private:
  Outcome out_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int places = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(places);
  os << v;
  return os.str();
}

Outcome oracle_equivalence() {
  Check check;
  const auto start = Clock::now();
  auto g = load_fixture("f1040_mini.kg.xml");
  const char* inputs[] = {"L16", "L17", "L18a", "L18b", "L18c", "L18d"};
  std::mt19937_64 rng(1);
  FactStore store;
  EvalState state(*g);
  for (int trial = 0; trial < 1000 && !check.failed(); ++trial) {
    std::int64_t v[6];
    for (int i = 0; i < 6; ++i) {
      const auto m = random_money(rng, 0, 1'000'000'00);
      v[i] = m.money_cents();
      set_fact(*g, store, state, FieldId(inputs[i]), m);
    }
    const auto eval = recompute(*g, store, state);
    const auto o = payments_oracle(v[0], v[1], v[2], v[3], v[4], v[5]);
    check(eval.value(FieldId("L18e")) == Value::money(o.l18e) && eval.value(FieldId("L19")) == Value::money(o.l19) &&
              eval.value(FieldId("L20")) == Value::money(o.l20) && eval.errors().empty(),
          "trial " + std::to_string(trial) + " disagrees with the procedural oracle");
    check(eval == full_eval(*g, store), "incremental and full evaluation differ");
  }
  const double secs = seconds_since(start);
  check(secs < 5.0, "took " + fmt(secs) + " s");
  return check.done("1000 trials, exact equality, " + fmt(secs) + " s");
}

Outcome truth_table_fidelity() {
  Check check;
  auto g = load_fixture("eligibility.kg.xml");
  const auto* cg = g->find_completeness("credit");
  if (!check(cg != nullptr, "no completeness graph 'credit'")) {
    return check.done("");
  }
  const FieldId age("Age"), residence("Residence");
  struct Row {
    const char* state;
    const char* age;
    const char* outcome;
  };
  const Row rows[] = {{"CA", "19", "Qualified"}, {"NY", "19", "Disqualified"}, {"CA", "17", "Disqualified"},
                      {"NY", "17", "Disqualified"}};
  for (const auto& r : rows) {
    const std::map<FieldId, Value> facts{{residence, Value::text(r.state)}, {age, number(r.age)}};
    const auto status = assess(*cg, facts);
    const auto* d = std::get_if<Decided>(&status);
    check(d != nullptr && d->decision == r.outcome,
          std::string("Residence=") + r.state + ", Age=" + r.age + " should give " + r.outcome);
  }
  const auto derived = derive_truth_table(*cg);
  check(derived.rows.size() == 4, "derived table does not have four rows");

  const std::map<FieldId, Value> only_age{{age, number("17")}};
  const auto status = assess(*cg, only_age);
  const auto* d = std::get_if<Decided>(&status);
  check(d != nullptr && d->decision == "Disqualified", "Age=17 alone is not decided as Disqualified");
  check(!next_question(*cg, only_age).has_value(), "a question is still asked once Age=17 is known");

  int worst = 0;
  for (const auto* st : {"CA", "NY", "TX", "WA"}) {
    for (const auto* a : {"17", "18", "19", "40"}) {
      std::map<FieldId, Value> facts;
      int asked = 0;
      while (auto q = next_question(*cg, facts)) {
        if (!check(!facts.contains(*q) && asked < 4, "question loop does not terminate")) {
          break;
        }
        facts[*q] = *q == age ? number(a) : Value::text(st);
        ++asked;
      }
      check(std::holds_alternative<Decided>(assess(*cg, facts)), "interview ended undecided");
      worst = std::max(worst, asked);
    }
  }
  check(worst <= 2, "an answer path needed " + std::to_string(worst) + " questions");
  return check.done("4/4 rows, Age=17 decided with no question, at most " + std::to_string(worst) +
                    " questions per path");
}

// One trial: prime with a full evaluation, change one input, compare counts.
void cone_trial(Check& check, const KnowledgeGraph& g, std::mt19937_64& rng, const std::string& label) {
  FactStore store;
  EvalState state(g);
  std::vector<const FieldDecl*> inputs;
  for (const auto& f : g.fields()) {
    if (f.role == FieldRole::Input) {
      inputs.push_back(&f);
      if (std::bernoulli_distribution(0.6)(rng)) {
        set_fact(g, store, state, f.id, random_value_for(rng, f));
      }
    }
  }
  recompute(g, store, state);
  const auto& target = *inputs[std::uniform_int_distribution<std::size_t>(0, inputs.size() - 1)(rng)];
  std::map<std::string, std::uint64_t> before;
  for (const auto& m : g.models()) {
    before[m.id] = state.eval_count(m.id);
  }
  const std::optional<Value> next =
      std::bernoulli_distribution(0.15)(rng) ? std::nullopt : std::optional(random_value_for(rng, target));
  set_fact(g, store, state, target.id, next);
  const auto eval = recompute(g, store, state);
  const auto expected = models_writing(g.definition(), brute_downstream(g.definition(), target.id));
  for (const auto& m : g.models()) {
    const auto delta = state.eval_count(m.id) - before[m.id];
    check(delta == (expected.contains(m.id) ? 1u : 0u),
          label + ": model " + m.id + " evaluated " + std::to_string(delta) + " times after setting " + target.id.str());
  }
  check(eval == full_eval(g, store), label + ": incremental values differ from a full evaluation");
}

Outcome cone_minimality() {
  Check check;
  const auto start = Clock::now();
  std::mt19937_64 rng(3);
  auto fixture = load_fixture("f1040_mini.kg.xml");
  int trials = 0;
  for (int i = 0; i < 100 && !check.failed(); ++i, ++trials) {
    cone_trial(check, *fixture, rng, "fixture trial " + std::to_string(i));
  }
  for (int i = 0; i < 500 && !check.failed(); ++i, ++trials) {
    RandomGraphOptions o;
    o.models = 1 + static_cast<std::size_t>(rng() % 200);
    o.money_inputs = 4 + static_cast<std::size_t>(rng() % 20);
    auto g = random_graph(rng, o);
    cone_trial(check, *g, rng, "random trial " + std::to_string(i));
  }
  const double secs = seconds_since(start);
  check(secs < 10.0, "took " + fmt(secs) + " s");
  return check.done(std::to_string(trials) + " trials, " + fmt(secs) + " s");
}

Outcome explanation_structure() {
  Check check;
  auto g = load_fixture("f1040_mini.kg.xml");
  FactStore store;
  EvalState state(*g);
  const std::pair<const char*, const char*> facts[] = {{"L16", "400"}, {"L17", "500"}, {"L18a", "100"},
                                                       {"L18b", "0"},   {"L18c", "0"},   {"L18d", "0"}};
  for (const auto& [f, v] : facts) {
    set_fact(*g, store, state, FieldId(f), money(v));
  }
  const auto eval = recompute(*g, store, state);
  const auto state_before = state;
  const auto store_before = store;
  const auto eval_before = eval;

  std::vector<std::string> order;
  std::function<void(const ExplanationNode&)> visit = [&](const ExplanationNode& n) {
    order.push_back(n.field.str());
    for (const auto& c : n.children) {
      visit(c);
    }
  };
  const auto tree = explain(*g, eval, store, FieldId("L20"), kUnlimitedDepth);
  visit(tree);
  const std::vector<std::string> expected{"L20", "L19", "L17", "L18e", "L18a", "L18b", "L18c", "L18d", "L16"};
  check(order == expected, "unlimited explanation does not visit the backward closure in pre-order");

  const auto again = explain(*g, eval, store, FieldId("L20"), kUnlimitedDepth);
  check(again == tree, "explanation is not deterministic");

  const auto one = explain(*g, eval, store, FieldId("L20"), 1);
  check(one.children.size() == 2 && one.children[0].field.str() == "L19" && one.children[1].field.str() == "L16" &&
            one.children[0].children.empty(),
        "depth 1 should show L19 and L16 only");
  const auto two = explain(*g, eval, store, FieldId("L20"), 2);
  check(two.children.size() == 2 && two.children[0].children.size() == 2 &&
            two.children[0].children[0].field.str() == "L17" && two.children[0].children[1].field.str() == "L18e" &&
            two.children[0].children[1].children.empty(),
        "depth 2 should expand L19 into L17 and L18e");
  check(one.text == "L20 (200.00) is L19 (600.00) minus L16 (400.00), floored at zero",
        "unexpected root text: " + one.text);

  explain_path(*g, eval, store, FieldId("L20"));
  check(state == state_before && store == store_before && eval == eval_before, "explaining changed engine state");
  return check.done("closure of 9 fields in pre-order, depths 1 and 2 match, state untouched");
}

Outcome compiler_soundness() {
  Check check;
  const auto fields = load_fixture("synthetic_fields.kg.xml")->definition().fields;
  const auto corpus = parse_corpus_tsv(fixture_text("synthetic_corpus.tsv"));
  const auto result = compile_form(corpus, fields);

  // Precision: only lines labelled as calculations (11..60) may match.
  std::size_t labelled_calc = 0;
  for (const auto& l : result.lines) {
    const bool is_calc = std::stoi(l.line.line) > 10;
    labelled_calc += is_calc ? 1 : 0;
    check(is_calc || l.status != LineStatus::Matched, "non-calculation line " + l.line.line + " was compiled");
    check(!is_calc || l.status != LineStatus::NotCalculation, "calculation line " + l.line.line + " was skipped");
  }
  const auto payments = compile_form(parse_corpus_tsv(fixture_text("f1040_payments.tsv")),
                                     load_fixture("f1040_mini.kg.xml")->definition().fields);
  for (const auto& l : payments.lines) {
    const bool is_calc = l.line.line == "18e" || l.line.line == "19" || l.line.line == "20";
    check(is_calc == (l.status == LineStatus::Matched), "payments line " + l.line.line + " misclassified");
  }

  auto built = KnowledgeGraph::build(result.fragment);
  if (!check(built.ok(), "compiled fragment does not validate")) {
    return check.done("");
  }
  const auto& g = *built.graph;
  check(synthetic_oracle().size() == result.matched, "matched models and oracle lines differ in number");
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100 && !check.failed(); ++trial) {
    FactStore store;
    EvalState state(g);
    Cents v;
    for (const auto& f : g.fields()) {
      if (f.role != FieldRole::Input) {
        continue;
      }
      const Value value = f.kind == ValueKind::Number
                              ? Value::number(std::uniform_int_distribution<std::int64_t>(0, 2'0000)(rng))
                              : random_money(rng, 0, 100'000'00);
      v[f.id.str()] = f.kind == ValueKind::Number ? value.number_units() : value.money_cents();
      set_fact(g, store, state, f.id, value);
    }
    const auto eval = recompute(g, store, state);
    check(eval.errors().empty(), "evaluation errors on trial " + std::to_string(trial));
    for (const auto& [line, oracle] : synthetic_oracle()) {
      const auto id = "L" + std::to_string(line);
      v[id] = oracle(v);
      check(eval.value(FieldId(id)) == Value::money(v[id]),
            "line " + std::to_string(line) + " disagrees with its oracle on trial " + std::to_string(trial));
    }
  }
  const auto rate = result.automation_rate();
  check(rate && *rate >= 0.72, "automation rate " + format_rate(rate) + " below 0.72");
  return check.done(std::to_string(result.matched) + "/" + std::to_string(labelled_calc) +
                    " calculation lines compiled, rate " + format_rate(rate) +
                    ", precision 100%, 100 oracle trials agree");
}

Outcome scale_smoke() {
  Check check;
  std::mt19937_64 rng(6);
  RandomGraphOptions o;
  o.models = 10'000;
  o.money_inputs = 500;
  o.bool_inputs = 20;
  const auto text = save(random_definition(rng, o));

  const auto start = Clock::now();
  auto loaded = load(text, "scale.kg.xml");
  if (!check(loaded.ok(), "generated graph failed to load")) {
    return check.done("");
  }
  const auto& g = *loaded.graph;
  FactStore store;
  EvalState state(g);
  for (const auto& f : g.fields()) {
    if (f.role == FieldRole::Input) {
      set_fact(g, store, state, f.id, random_value_for(rng, f));
    }
  }
  recompute(g, store, state);
  const double full = seconds_since(start);
  check(g.models().size() == 10'000, "expected 10000 models");
  check(full < 1.0, "load, validate and full evaluation took " + fmt(full) + " s");

  std::vector<const FieldDecl*> inputs;
  for (const auto& f : g.fields()) {
    if (f.role == FieldRole::Input) {
      inputs.push_back(&f);
    }
  }
  std::vector<double> times;
  for (int i = 0; i < 201; ++i) {
    const auto& f = *inputs[rng() % inputs.size()];
    const auto value = random_value_for(rng, f);
    const auto t0 = Clock::now();
    set_fact(g, store, state, f.id, value);
    recompute(g, store, state);
    times.push_back(seconds_since(t0) * 1000.0);
  }
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  const double median = times[times.size() / 2];
  check(median < 10.0, "median incremental update " + fmt(median) + " ms");
  return check.done("10000 models: load+validate+full eval " + fmt(full) + " s, median update " + fmt(median) +
                    " ms");
}

Outcome production_metrics() {
  return {true, "acknowledged: support-call, rating, authoring and full-form figures are population metrics; "
                "not measured here"};
}

} // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle-equivalence", oracle_equivalence},
      {"truth-table-fidelity", truth_table_fidelity},
      {"incremental-cone-minimality", cone_minimality},
      {"explanation-structure", explanation_structure},
      {"compiler-soundness-and-rate", compiler_soundness},
      {"scale-smoke", scale_smoke},
      {"production-metrics-excluded", production_metrics},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << ": " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
