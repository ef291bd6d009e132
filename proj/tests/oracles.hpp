#pragma once

#include "mmv/mmv.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace mmv::oracles {

inline std::string corpus(const std::string& name) { return std::string(MMV_CORPUS_DIR) + "/" + name + ".tz"; }
inline std::string extra(const std::string& name) { return std::string(MMV_TEST_CONTRACTS_DIR) + "/" + name + ".tz"; }

inline const std::vector<std::string>& positive_corpus() {
  static const std::vector<std::string> names{"identity",   "triangular_num", "list_length",
                                              "lambda_add", "guard_fail",     "transfer"};
  return names;
}

inline SolverConfig solver_config() {
  SolverConfig c;
  if (const char* s = std::getenv("MMV_SOLVER")) c.command = s;
  return c;
}

// ---------------------------------------------------------------- lemma suite

struct LemmaInstance {
  Verdict3 closed, extended, pushed;
  bool decided() const {
    return closed != Verdict3::Unknown && extended != Verdict3::Unknown && pushed != Verdict3::Unknown;
  }
  bool agree() const { return closed == extended && extended == pushed; }
};

// σ:Γ ⊨ S : {Υ | ∃x:T. φ ∧ x=V}   σ[x↦V] : Γ,x:T ⊨ S : {Υ|φ}   σ:Γ ⊨ V▷S : {x:T▷Υ | φ}
// drop_pin weakens the first statement; the oracle must then notice disagreements.
inline LemmaInstance lemma_instance(std::uint64_t seed, const Budget& budget = {}, bool drop_pin = false) {
  std::mt19937_64 rng(seed);
  FormulaGen g{rng};
  TypeEnv gamma;
  ValueAssignment sigma;
  int ng = int(g.uniform(0, 2));
  for (int k = 0; k < ng; ++k) {
    std::string name = "g" + std::to_string(k);
    Type t = g.sort();
    gamma.add(name, t);
    sigma[name] = g.literal(t);
  }
  BindingStack ups;
  std::vector<Value> items;
  int nu = int(g.uniform(1, 2));
  for (int k = 0; k < nu; ++k) {
    Type t = g.sort();
    ups.push_back({"y" + std::to_string(k), t});
    items.push_back(g.literal(t));
  }
  Type xt = g.sort();
  Value v = g.literal(xt);
  Stack s(items);

  g.env = gamma;
  for (const auto& b : ups) g.env.add(b.name, b.type);
  g.env.add("x", xt);
  g.quantifiers = g.uniform(0, 3) == 0;
  Formula phi = g.formula(int(g.uniform(1, 3)));

  LemmaInstance out;
  Formula pin = Formula::eq(Term::var("x"), Term::lit(v));
  Formula closed = Formula::exists("x", xt, drop_pin ? phi : Formula::conj(phi, pin));
  out.closed = stack_models(sigma, gamma, s, {ups, closed}, budget);

  ValueAssignment sx = sigma;
  sx["x"] = v;
  out.extended = stack_models(sx, gamma.extended("x", xt), s, {ups, phi}, budget);

  std::vector<Value> pushed{v};
  pushed.insert(pushed.end(), items.begin(), items.end());
  BindingStack ups2{{"x", xt}};
  ups2.insert(ups2.end(), ups.begin(), ups.end());
  out.pushed = stack_models(sigma, gamma, Stack(pushed), {ups2, phi}, budget);
  return out;
}

// ---------------------------------------------------------------- encoding cross-check

struct CrossInstance {
  VerificationCondition vc;
  Verdict3 eval = Verdict3::Unknown;
  SolverVerdict solver = SolverVerdict::Unknown;
  bool agree() const {
    if (eval == Verdict3::Unknown) return true;
    return (eval == Verdict3::True) == (solver == SolverVerdict::Verified) &&
           (eval == Verdict3::False) == (solver == SolverVerdict::Refuted);
  }
};

inline VerificationCondition random_ground_vc(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FormulaGen g{rng};
  VerificationCondition vc;
  vc.id = int(seed);
  vc.origin = VcOrigin::Assert;
  vc.hyp = g.uniform(0, 2) == 0 ? Formula::top() : g.formula(1);
  vc.goal = g.formula(int(g.uniform(1, 3)));
  return vc;
}

inline CrossInstance cross_instance(std::uint64_t seed, Discharger& d) {
  CrossInstance c;
  c.vc = random_ground_vc(seed);
  c.eval = eval_formula({}, {}, c.vc.as_formula(), {});
  c.solver = d.discharge(c.vc).verdict;
  return c;
}

// ---------------------------------------------------------------- interpreter differential

inline std::vector<Instr> differential_atoms() {
  return {Instr::simple(Op::Drop), Instr::simple(Op::Dup),      Instr::simple(Op::Swap),
          Instr::simple(Op::Not),  Instr::simple(Op::Add),      Instr::simple(Op::Pair),
          Instr::simple(Op::Car),  Instr::simple(Op::Cdr),      Instr::simple(Op::Cons),
          Instr::nil(Type::int_()), Instr::push(Type::int_(), Value::integer(0)),
          Instr::push(Type::int_(), Value::integer(1)), Instr::simple(Op::Failwith), Instr::simple(Op::Exec)};
}

// Stacks of height ≤ 2 over ints in [-3,3] and int lists of length ≤ 2.
inline std::vector<Stack> differential_stacks() {
  std::vector<Value> vals;
  for (int i = -3; i <= 3; ++i) vals.push_back(Value::integer(i));
  vals.push_back(Value::nil());
  for (int i = -3; i <= 3; ++i) {
    vals.push_back(Value::list({Value::integer(i)}));
    for (int j = -3; j <= 3; ++j) vals.push_back(Value::list({Value::integer(i), Value::integer(j)}));
  }
  std::vector<Stack> out{Stack()};
  for (const auto& a : vals) {
    out.push_back(Stack({a}));
    for (const auto& b : vals) out.push_back(Stack({a, b}));
  }
  return out;
}

inline TypeStack type_of_stack(const Stack& s) {
  TypeStack ts;
  for (const auto& v : s.items()) ts.items.push_back(v.is(ValueKind::Int) ? Type::int_() : Type::list(Type::int_()));
  return ts;
}

struct DifferentialStats {
  std::size_t programs = 0, runs = 0, typed_runs = 0, mismatches = 0;
  std::string first_mismatch;
};

// Exact agreement: Ok/Failed ↔ a singleton derivation set; stuck or out of fuel ↔ no derivation.
inline DifferentialStats differential(int max_size, std::size_t stride = 1) {
  DifferentialStats st;
  auto progs = enumerate_programs(max_size, differential_atoms());
  auto stacks = differential_stacks();
  std::vector<TypeStack> shapes;
  std::vector<size_t> shape_of;
  for (const auto& s : stacks) {
    TypeStack ts = type_of_stack(s);
    auto it = std::find(shapes.begin(), shapes.end(), ts);
    shape_of.push_back(size_t(it - shapes.begin()));
    if (it == shapes.end()) shapes.push_back(ts);
  }
  for (std::size_t p = 0; p < progs.size(); p += stride) {
    ++st.programs;
    std::vector<bool> typed;
    for (const auto& ts : shapes) {
      try {
        simple_check_seq(ts, progs[p]);
        typed.push_back(true);
      } catch (const SimpleTypeError&) {
        typed.push_back(false);
      }
    }
    for (size_t k = 0; k < stacks.size(); ++k) {
      const Stack& s = stacks[k];
      ++st.runs;
      RunOutcome r = try_exec_seq(s, progs[p], 200);
      auto d = exec_derivation_search(s, progs[p], 40);
      bool ok;
      if (r.kind == RunOutcome::Kind::Ok || r.kind == RunOutcome::Kind::Failed) ok = d.size() == 1 && d[0] == r;
      else ok = d.empty();
      if (typed[shape_of[k]]) ++st.typed_runs;
      if (!ok && st.mismatches++ == 0)
        st.first_mismatch = to_string(progs[p]) + " on " + to_string(s) + ": " + to_string(r);
    }
  }
  return st;
}

// ---------------------------------------------------------------- preservation

struct PreservationStats {
  std::size_t programs = 0, ok = 0, failed = 0, out_of_fuel = 0, stuck = 0, ill_typed_results = 0;
  std::string first_problem;
};

inline PreservationStats preservation(std::size_t n, std::int64_t fuel, std::uint64_t seed0 = 0) {
  PreservationStats st;
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t seed = seed0 + k;
    TypeStack ts = random_type_stack(k % 4, seed);
    InstrSeq p = generate_welltyped(ts, 12, seed);
    TypeStack predicted = simple_check_seq(ts, p);
    Stack s = random_stack(ts, seed ^ 0x9e3779b97f4a7c15ull);
    ++st.programs;
    RunOutcome r = try_exec_seq(s, p, fuel);
    switch (r.kind) {
      case RunOutcome::Kind::Ok: {
        ++st.ok;
        bool good = !predicted.failed && r.stack.size() == predicted.size();
        for (size_t i = 0; good && i < r.stack.size(); ++i) good = value_has_type(r.stack.at(i), predicted.items[i]);
        if (!good && st.ill_typed_results++ == 0)
          st.first_problem = to_string(p) + " gave " + to_string(r.stack) + ", predicted " + to_string(predicted);
        break;
      }
      case RunOutcome::Kind::Failed: ++st.failed; break;
      case RunOutcome::Kind::OutOfFuel: ++st.out_of_fuel; break;
      case RunOutcome::Kind::Stuck:
        if (st.stuck++ == 0) st.first_problem = to_string(p) + " stuck: " + r.reason;
        break;
    }
  }
  return st;
}

// ---------------------------------------------------------------- conservativity

// Empty when every traced refinement erases to the simple typer's stack.
inline std::string conservativity_violation(const CheckResult& r) {
  std::map<InstrId, const TypeTraceEntry*> simple;
  for (const auto& e : r.simple_trace) simple[e.node] = &e;
  for (const auto& t : r.trace) {
    auto it = simple.find(t.node);
    if (it == simple.end()) return "traced instruction missing from the simple trace";
    const TypeStack& after = it->second->after;
    if (t.diverged != after.failed) return "divergence mismatch";
    if (!t.diverged && erase(t.phi) != after)
      return "erase " + to_string(erase(t.phi)) + " vs simple " + to_string(after);
  }
  return "";
}

// ---------------------------------------------------------------- misc

inline bool has_quantified_measure_axiom(const std::string& script) {
  std::istringstream in(script);
  for (std::string line; std::getline(in, line);)
    if (line.find("measure!") != std::string::npos &&
        (line.find("(forall") != std::string::npos || line.find("(exists") != std::string::npos))
      return true;
  return false;
}

inline std::map<std::string, std::string> read_dir(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path());
  return out;
}

}  // namespace mmv::oracles
