#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

using namespace mmv;
namespace fs = std::filesystem;

namespace {

Discharger& solver() {
  static Discharger d(oracles::solver_config());
  return d;
}

RefinementStackType rst(BindingStack bs, const std::string& pred) {
  TypeEnv env = binding_env(bs);
  return {bs, parse_formula(pred, env)};
}

Formula closed(const std::string& text) { return parse_formula_raw(text, true); }

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mmv_unit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

void annotate_all(AnnotatedContract& c, const InstrSeq& is) {
  for (const auto& i : is) {
    if (i.op() == Op::Loop || i.op() == Op::Iter) {
      Annotation a{AnnotKind::LoopInv, {}, {}, {}};
      a.stack.rest = true;
      c.annotations[i.id()].before.push_back(a);
    } else if (i.op() == Op::Lambda) {
      Annotation a{AnnotKind::LambdaAnnot, {}, {}, {}};
      a.spec.pre.items = {Pattern::wild()};
      a.spec.post.items = {Pattern::wild()};
      a.spec.exc.items = {Pattern::wild()};
      c.annotations[i.id()].before.push_back(a);
    }
    annotate_all(c, i.body());
    annotate_all(c, i.body2());
  }
}

}  // namespace

// ---------------------------------------------------------------- core syntax

TEST(Syntax, TypeRoundTrip) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (const auto& t : random_type_stack(3, seed).items) {
      EXPECT_EQ(parse_type(to_string(t)), t) << to_string(t);
    }
  }
}

TEST(Syntax, ValueRoundTrip) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    TypeStack ts = random_type_stack(3, seed);
    Stack s = random_stack(ts, seed);
    for (size_t k = 0; k < ts.size(); ++k) {
      std::string text = to_string(s.at(k));
      EXPECT_EQ(parse_value(text, ts.items[k]), s.at(k)) << text;
    }
  }
}

TEST(Syntax, ValueSyntax) {
  Type t = parse_type("pair int (list nat)");
  EXPECT_EQ(parse_value("Pair -1 { 2 ; 3 }", t),
            Value::pair(Value::integer(-1), Value::list({Value::integer(2), Value::integer(3)})));
  EXPECT_EQ(parse_value("(Pair 0 {})", t), Value::pair(Value::integer(0), Value::nil()));
  EXPECT_THROW(parse_value("Pair 0 { -1 }", t), ParseError);
  EXPECT_THROW(parse_value("Pair 0", t), ParseError);
}

TEST(Syntax, CodeEqualityIsIntensional) {
  Value a = Value::code({Instr::simple(Op::Dup), Instr::simple(Op::Add)});
  Value b = Value::code({Instr::simple(Op::Dup), Instr::simple(Op::Add)});
  Value c = Value::code({Instr::push(Type::int_(), Value::integer(2)), Instr::simple(Op::Add)});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Syntax, ConsRequiresList) { EXPECT_THROW(Value::cons(Value::integer(1), Value::integer(2)), StructuralError); }

// ---------------------------------------------------------------- assertion logic

TEST(Logic, FormulaRoundTrip) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(seed);
    FormulaGen g{rng};
    g.env.add("a", Type::int_());
    g.env.add("l", Type::list(Type::int_()));
    g.quantifiers = seed % 3 == 0;
    Formula f = g.formula(3);
    std::string text = to_string(f);
    EXPECT_EQ(elaborate_formula(g.env, parse_formula_raw(text, true)), elaborate_formula(g.env, f)) << text;
    EXPECT_EQ(to_string(parse_formula_raw(text, true)), text);
  }
}

TEST(Logic, FreeVarsAndSubstitution) {
  Formula f = closed("exists y:int. x + y = z");
  EXPECT_EQ(free_vars(f), (std::set<std::string>{"x", "z"}));
  Formula g = substitute(f, TermSubst{{"x", Term::var("y")}});
  EXPECT_EQ(free_vars(g), (std::set<std::string>{"y", "z"}));
  EXPECT_TRUE(has_quantifier(g));
  ValueAssignment sigma{{"y", Value::integer(2)}, {"z", Value::integer(5)}};
  EXPECT_EQ(eval_formula(sigma, {}, g, {}), Verdict3::True);
}

TEST(Logic, FreshAvoiding) {
  std::set<std::string> used{"x", "x#1", "x#2"};
  std::string x = fresh_avoiding("x", used);
  EXPECT_EQ(used.count(x), 0u);
  EXPECT_EQ(name_base(x), "x");
}

TEST(Logic, WellFormedness) {
  TypeEnv gamma{{"n", Type::nat()}, {"b", Type::bytes()}, {"l", Type::list(Type::int_())}};
  EXPECT_NO_THROW(wf_formula(gamma, closed("n + 1 <= size b")));
  EXPECT_NO_THROW(wf_formula(gamma, closed("l = n :: []")));
  EXPECT_THROW(wf_formula(gamma, closed("b = 1")), SortError);
  EXPECT_THROW(wf_formula(gamma, closed("m = 1")), SortError);
  EXPECT_THROW(wf_formula(gamma, closed("len n = 1")), SortError);
}

TEST(Logic, UserPredicatesRejectQuantifiers) {
  EXPECT_THROW(parse_formula_raw("exists x:int. x = 1"), ParseError);
  EXPECT_NO_THROW(parse_formula_raw("exists x:int. x = 1", true));
}

TEST(Logic, EvalExamples) {
  ValueAssignment sigma{{"x", Value::integer(3)}, {"l", Value::list({Value::integer(1), Value::integer(2)})}};
  TypeEnv gamma{{"x", Type::int_()}, {"l", Type::list(Type::int_())}};
  EXPECT_EQ(eval_formula(sigma, gamma, closed("x = 3 && (x, 1) = (3, 1)"), {}), Verdict3::True);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("l = 1 :: 2 :: []"), {}), Verdict3::True);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("exists y:nat. y + x = 0"), {}), Verdict3::Unknown);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("exists y:int. y + x = 0"), {}), Verdict3::True);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("forall y:nat. y + x <= 4"), {}), Verdict3::False);
  EXPECT_EQ(eval_formula({}, {}, closed("size (sha256 (pack 1)) = 32"), {}), Verdict3::True);
}

TEST(Logic, EvalOutsideBudgetIsUnknown) {
  EXPECT_EQ(eval_formula({}, {}, closed("forall y:int. y <= 1000"), {}), Verdict3::Unknown);
  EXPECT_EQ(eval_formula({}, {}, closed("exists y:int. 1000 <= y"), {}), Verdict3::Unknown);
}

TEST(Logic, CallPredicates) {
  Value inc = Value::code({Instr::push(Type::int_(), Value::integer(1)), Instr::simple(Op::Add)});
  Value boom = Value::code({Instr::simple(Op::Failwith)});
  ValueAssignment sigma{{"f", inc}, {"g", boom}};
  TypeEnv gamma{{"f", Type::arrow(Type::int_(), Type::int_())}, {"g", Type::arrow(Type::int_(), Type::int_())}};
  EXPECT_EQ(eval_formula(sigma, gamma, closed("call(f, 1) = 2"), {}), Verdict3::True);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("call(f, 1) = 3"), {}), Verdict3::False);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("call_err(g, 4) = 4"), {}), Verdict3::True);
  EXPECT_EQ(eval_formula(sigma, gamma, closed("call(g, 4) = 4"), {}), Verdict3::False);
}

TEST(Logic, LemmaSuiteAgrees) {
  size_t decided = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto li = oracles::lemma_instance(seed);
    if (!li.decided()) continue;
    ++decided;
    EXPECT_TRUE(li.agree()) << "seed " << seed;
  }
  EXPECT_GE(decided, 180u);
}

TEST(Logic, LemmaOracleDetectsDroppedPin) {
  size_t disagreements = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto li = oracles::lemma_instance(seed, {}, true);
    if (li.decided() && !li.agree()) ++disagreements;
  }
  EXPECT_GT(disagreements, 0u);
}

// ---------------------------------------------------------------- frontend parser

TEST(Parser, CorpusRoundTrip) {
  for (const auto& dir : {std::string(MMV_CORPUS_DIR), std::string(MMV_TEST_CONTRACTS_DIR)}) {
    for (const auto& [name, text] : oracles::read_dir(dir)) {
      AnnotatedContract c = parse_contract(text);
      std::string printed = pretty_print(c);
      AnnotatedContract d = parse_contract(printed);
      EXPECT_TRUE(contracts_equal(c, d)) << name << "\n" << printed;
      EXPECT_EQ(pretty_print(d), printed) << name;
    }
  }
}

TEST(Parser, GeneratedProgramRoundTrip) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    AnnotatedContract c;
    c.parameter = Type::int_();
    c.storage = Type::int_();
    c.spec.pre.items = {Pattern::wild()};
    c.spec.post.items = {Pattern::wild()};
    c.spec.exc.items = {Pattern::wild()};
    c.code = generate_welltyped(random_type_stack(seed % 3, seed), 10, seed);
    annotate_all(c, c.code);
    std::string printed = pretty_print(c);
    AnnotatedContract d;
    ASSERT_NO_THROW(d = parse_contract(printed)) << printed;
    EXPECT_TRUE(contracts_equal(c, d)) << printed;
  }
}

TEST(Parser, ErrorPositions) {
  try {
    parse_contract("parameter int;\nstorage int;\ncode { DUP ; FOO };");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_contract("parameter int;\nstorage int;\ncode { LOOP { } };"), ParseError);
  EXPECT_THROW(parse_contract("parameter int;\nstorage int;\ncode { PUSH int 1 1 };"), ParseError);
  EXPECT_THROW(parse_contract("parameter int;\nstorage int;\ncode { PUSH nat -1 };"), ParseError);
  EXPECT_THROW(parse_contract("parameter int;\nstorage int;\n<< LoopInv { _ | True } >>\ncode { DUP };"), ParseError);
}

// ---------------------------------------------------------------- simple typer

TEST(SimpleTyper, Examples) {
  TypeStack in{{Type::pair(Type::int_(), Type::int_())}};
  TypeStack out = simple_check_seq(in, {Instr::simple(Op::Car), Instr::simple(Op::Dup), Instr::simple(Op::Add)});
  EXPECT_EQ(out, TypeStack{{Type::int_()}});
  TypeStack f = simple_check_seq(in, {Instr::simple(Op::Failwith)});
  EXPECT_TRUE(f.failed);
  TypeStack branch = simple_check_seq(
      TypeStack{{Type::int_(), Type::int_()}},
      {Instr::if_({Instr::simple(Op::Failwith)}, {Instr::push(Type::int_(), Value::integer(1)), Instr::simple(Op::Add)})});
  EXPECT_EQ(branch, TypeStack{{Type::int_()}});
}

TEST(SimpleTyper, Errors) {
  EXPECT_THROW(simple_check_seq(TypeStack{}, {Instr::simple(Op::Drop)}), SimpleTypeError);
  EXPECT_THROW(simple_check_seq(TypeStack{{Type::bytes(), Type::int_()}}, {Instr::simple(Op::Add)}), SimpleTypeError);
  EXPECT_THROW(simple_check_seq(TypeStack{{Type::int_()}}, {Instr::if_({}, {Instr::simple(Op::Drop)})}),
               SimpleTypeError);
  EXPECT_THROW(simple_check_seq(TypeStack{{Type::int_()}}, {Instr::loop({})}),
               SimpleTypeError);
}

// ---------------------------------------------------------------- interpreter

TEST(Interpreter, Examples) {
  Stack s({Value::integer(2), Value::integer(5)});
  RunOutcome r = exec_seq(s, {Instr::simple(Op::Add), Instr::simple(Op::Dup), Instr::simple(Op::Pair)});
  ASSERT_EQ(r.kind, RunOutcome::Kind::Ok);
  EXPECT_EQ(r.stack.at(0), Value::pair(Value::integer(7), Value::integer(7)));

  RunOutcome f = exec_seq(s, {Instr::simple(Op::Failwith)});
  ASSERT_EQ(f.kind, RunOutcome::Kind::Failed);
  EXPECT_EQ(f.value, Value::integer(2));

  InstrSeq forever{Instr::push(Type::int_(), Value::integer(1)), Instr::loop({Instr::push(Type::int_(), Value::integer(1))})};
  EXPECT_EQ(exec_seq(Stack(), forever, 1000).kind, RunOutcome::Kind::OutOfFuel);
  EXPECT_THROW(exec_seq(Stack(), {Instr::simple(Op::Drop)}), StuckError);
  EXPECT_EQ(try_exec_seq(Stack(), {Instr::simple(Op::Drop)}).kind, RunOutcome::Kind::Stuck);
}

TEST(Interpreter, IfIsNonzeroTest) {
  InstrSeq p{Instr::if_({Instr::push(Type::int_(), Value::integer(10))}, {Instr::push(Type::int_(), Value::integer(20))})};
  EXPECT_EQ(exec_seq(Stack({Value::integer(-4)}), p).stack.at(0), Value::integer(10));
  EXPECT_EQ(exec_seq(Stack({Value::integer(0)}), p).stack.at(0), Value::integer(20));
}

TEST(Interpreter, CorpusRuns) {
  AnnotatedContract tri = load_contract(oracles::corpus("triangular_num"));
  RunOutcome r = exec_seq(Stack({parse_value("Pair 10 0", Type::pair(tri.parameter, tri.storage))}), tri.code);
  ASSERT_EQ(r.kind, RunOutcome::Kind::Ok);
  EXPECT_EQ(to_string(r.stack.at(0)), "(Pair {} 55)");

  AnnotatedContract len = load_contract(oracles::corpus("list_length"));
  RunOutcome l = exec_seq(Stack({parse_value("Pair { 4 ; 5 ; 6 } 0", Type::pair(len.parameter, len.storage))}), len.code);
  ASSERT_EQ(l.kind, RunOutcome::Kind::Ok);
  EXPECT_EQ(l.stack.at(0).snd(), Value::integer(3));
}

TEST(Interpreter, DifferentialSmall) {
  auto st = oracles::differential(2);
  EXPECT_EQ(st.mismatches, 0u) << st.first_mismatch;
  EXPECT_GT(st.typed_runs, 0u);
}

TEST(Interpreter, DifferentialSize3Strided) {
  auto st = oracles::differential(3, 97);
  EXPECT_EQ(st.mismatches, 0u) << st.first_mismatch;
}

TEST(Interpreter, Preservation) {
  auto st = oracles::preservation(1000, 10000, 7000);
  EXPECT_EQ(st.stuck, 0u) << st.first_problem;
  EXPECT_EQ(st.ill_typed_results, 0u) << st.first_problem;
  EXPECT_GT(st.ok, 500u);
}

// ---------------------------------------------------------------- refinement verifier

TEST(Verifier, VcCounts) {
  EXPECT_EQ(check_contract(load_contract(oracles::corpus("identity"))).vcs.size(), 2u);
  EXPECT_EQ(check_contract(load_contract(oracles::corpus("triangular_num"))).vcs.size(), 4u);
  CheckResult a = check_contract(load_contract(oracles::extra("assert_mid")));
  EXPECT_EQ(std::count_if(a.vcs.begin(), a.vcs.end(), [](const auto& vc) { return vc.origin == VcOrigin::Assert; }), 1);
}

TEST(Verifier, Conservativity) {
  for (const auto& name : oracles::positive_corpus()) {
    CheckResult r = check_contract(load_contract(oracles::corpus(name)));
    EXPECT_FALSE(r.trace.empty());
    EXPECT_EQ(oracles::conservativity_violation(r), "") << name;
  }
}

TEST(Verifier, BindersAreFreshInVcs) {
  for (const auto& name : oracles::positive_corpus()) {
    for (const auto& vc : check_contract(load_contract(oracles::corpus(name))).vcs) {
      std::set<std::string> seen;
      for (const auto& b : vc.binders) EXPECT_TRUE(seen.insert(b.name).second) << name << ": " << b.name;
      EXPECT_TRUE(free_vars(vc.as_formula()).empty()) << name << ": " << to_string(vc.as_formula());
    }
  }
}

TEST(Verifier, StrongestPostArithmetic) {
  RefinementStackType phi = rst({{"x", Type::int_()}}, "x = 3");
  RefinementStackType p1 = strongest_post({}, phi, Instr::push(Type::int_(), Value::integer(1)));
  EXPECT_EQ(erase(p1), (TypeStack{{Type::int_(), Type::int_()}}));
  RefinementStackType p2 = strongest_post({}, p1, Instr::simple(Op::Add));
  EXPECT_EQ(erase(p2), (TypeStack{{Type::int_()}}));
  auto good = subtype_vc({}, p2, rst({{"r", Type::int_()}}, "r = 4"), VcOrigin::Assert);
  auto bad = subtype_vc({}, p2, rst({{"r", Type::int_()}}, "r = 5"), VcOrigin::Assert);
  EXPECT_EQ(solver().discharge(good).verdict, SolverVerdict::Verified);
  EXPECT_EQ(solver().discharge(bad).verdict, SolverVerdict::Refuted);
}

TEST(Verifier, StrongestPostFailwithDiverges) {
  bool diverged = false;
  strongest_post({}, rst({{"x", Type::int_()}}, "True"), Instr::simple(Op::Failwith), {}, &diverged);
  EXPECT_TRUE(diverged);
}

TEST(Verifier, SubtypingShapeMismatch) {
  EXPECT_THROW(subtype_vc({}, rst({{"x", Type::int_()}}, "True"), rst({{"x", Type::nat()}}, "True"), VcOrigin::Assert),
               VerifyError);
}

TEST(Verifier, AssumeModesAndTaint) {
  AnnotatedContract c = load_contract(oracles::extra("assume_unsound"));
  CheckOptions conj;
  conj.assume = AssumeMode::Conjoin;
  EXPECT_TRUE(check_contract(c).assume_tainted);
  EXPECT_TRUE(check_contract(c, conj).assume_tainted);
  EXPECT_FALSE(check_contract(load_contract(oracles::corpus("identity"))).assume_tainted);
  VerifyOptions opt;
  opt.solver = oracles::solver_config();
  Report r = verify_contract(c, opt, solver());
  EXPECT_TRUE(r.verified);
  EXPECT_TRUE(r.assume_tainted);
  EXPECT_FALSE(soundness_harness(c, {}).passed);
}

TEST(Verifier, IllTypedContractIsStructuralError) {
  AnnotatedContract c = parse_contract(
      "parameter int;\nstorage int;\n<< ContractAnnot { _ | True } -> { _ | True } & { _ | True } >>\n"
      "code { CAR; CAR; NIL operation; PAIR };");
  EXPECT_THROW(check_contract(c), VerifyError);
  VerifyOptions opt;
  opt.solver = oracles::solver_config();
  Report r = verify_contract(c, opt, solver());
  EXPECT_FALSE(r.verified);
  EXPECT_FALSE(r.error.empty());
}

// ---------------------------------------------------------------- smt backend

TEST(Smt, MangleExamples) {
  EXPECT_EQ(mangle("mk", Type::pair(Type::int_(), Type::list(Type::nat()))), "mk!pair!int!list!nat");
  EXPECT_EQ(mangle("call", Type::arrow(Type::int_(), Type::bytes())), "call!int!to!bytes");
  auto [base, t] = demangle("cons!list!pair!int!address");
  EXPECT_EQ(base, "cons");
  EXPECT_EQ(t, Type::list(Type::pair(Type::int_(), Type::address())));
}

TEST(Smt, MangleRoundTrip) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (const auto& t : random_type_stack(3, seed).items) {
      std::string m = mangle("f", t);
      auto [base, u] = demangle(m);
      EXPECT_EQ(base, "f");
      EXPECT_EQ(u, t) << m;
    }
  }
}

TEST(Smt, SortPredicates) {
  EXPECT_EQ(sort_predicate(Type::nat(), "x"), "(>= x 0)");
  EXPECT_TRUE(trivial_predicate(Type::int_()));
  EXPECT_TRUE(trivial_predicate(Type::list(Type::int_())));
  EXPECT_FALSE(trivial_predicate(Type::list(Type::nat())));
  EXPECT_FALSE(trivial_predicate(Type::pair(Type::int_(), Type::nat())));
  EXPECT_EQ(sort_predicate(Type::int_(), "x"), "true");
}

TEST(Smt, SortGuards) {
  VerificationCondition nat_vc, int_vc;
  nat_vc.binders = {{"x", Type::nat()}};
  nat_vc.goal = Formula::le(Term::integer(0), Term::var("x"));
  int_vc.binders = {{"x", Type::int_()}};
  int_vc.goal = nat_vc.goal;
  EXPECT_EQ(solver().discharge(nat_vc).verdict, SolverVerdict::Verified);
  EXPECT_EQ(solver().discharge(int_vc).verdict, SolverVerdict::Refuted);
}

TEST(Smt, QuantifiedNatGuard) {
  VerificationCondition vc;
  vc.goal = closed("forall l:list nat. forall h:nat. forall t:list nat. l = h :: t => 0 <= h");
  EXPECT_EQ(solver().discharge(vc).verdict, SolverVerdict::Verified);
  vc.goal = closed("exists y:nat. y + 1 = 0");
  EXPECT_EQ(solver().discharge(vc).verdict, SolverVerdict::Refuted);
}

TEST(Smt, MeasureInstantiationCounts) {
  Measures ms = load_contract(oracles::corpus("list_length")).measures;
  ASSERT_EQ(ms.size(), 1u);
  VerificationCondition one;
  one.binders = {{"x1", Type::int_()}, {"x2", Type::list(Type::int_())}};
  one.goal = closed("len (x1 :: x2) = 1 + len x2");
  EXPECT_EQ(instantiate_measure_axioms(one, ms, 2).size(), 2u);

  VerificationCondition none;
  none.binders = {{"l", Type::list(Type::int_())}};
  none.goal = closed("len l = len l");
  EXPECT_EQ(instantiate_measure_axioms(none, ms, 2).size(), 1u);

  VerificationCondition nested;
  nested.goal = closed("len (1 :: 2 :: []) = 2");
  EXPECT_EQ(instantiate_measure_axioms(nested, ms, 2).size(), 3u);
  EXPECT_EQ(solver().discharge(nested, ms, {}).verdict, SolverVerdict::Verified);
  EXPECT_EQ(solver().discharge(one, ms, {}).verdict, SolverVerdict::Verified);
  EXPECT_FALSE(oracles::has_quantified_measure_axiom(encode_vc(one, ms)));
}

TEST(Smt, EncodeIsDeterministic) {
  AnnotatedContract c = load_contract(oracles::corpus("lambda_add"));
  CheckResult a = check_contract(c), b = check_contract(c);
  ASSERT_EQ(a.vcs.size(), b.vcs.size());
  for (size_t k = 0; k < a.vcs.size(); ++k)
    EXPECT_EQ(encode_vc(a.vcs[k], c.measures), encode_vc(b.vcs[k], c.measures));
}

TEST(Smt, StringLiteralEscapes) {
  EXPECT_EQ(smt_string_literal("ab"), "\"ab\"");
  EXPECT_EQ(smt_string_literal(std::string("\x05\"", 2)), "\"\\u{05}\"\"\"");
}

TEST(Smt, TimeoutAndMissingSolver) {
  VerificationCondition vc;
  vc.goal = closed("1 = 1");
  SolverConfig zero = oracles::solver_config();
  zero.timeout_s = 0;
  EXPECT_EQ(Discharger(zero).discharge(vc).verdict, SolverVerdict::Unknown);
  SolverConfig missing;
  missing.command = "/nonexistent/solver -in";
  EXPECT_THROW(Discharger(missing).discharge(vc), SolverError);
}

TEST(Smt, CrossCheckSubset) {
  Discharger d(oracles::solver_config());
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto ci = oracles::cross_instance(seed, d);
    EXPECT_TRUE(ci.agree()) << to_string(ci.vc.as_formula()) << " eval " << to_string(ci.eval) << " solver "
                            << to_string(ci.solver);
  }
}

TEST(Smt, SolverCacheHits) {
  Discharger d(oracles::solver_config());
  VerificationCondition vc;
  vc.goal = closed("2 = 1 + 1");
  d.discharge(vc);
  d.discharge(vc);
  EXPECT_EQ(d.cache_size(), 1u);
}

// ---------------------------------------------------------------- cli and corpus

TEST(Driver, VerifyExitCodes) {
  VerifyOptions opt;
  opt.solver = oracles::solver_config();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(oracles::corpus("identity"), opt, false, out, err), 0);
  EXPECT_EQ(cmd_verify(oracles::corpus("identity_bad"), opt, false, out, err), 1);
  EXPECT_EQ(cmd_verify(oracles::corpus("does_not_exist"), opt, false, out, err), 2);
  EXPECT_NE(out.str().find("VERIFIED"), std::string::npos);
}

TEST(Driver, JsonReport) {
  VerifyOptions opt;
  opt.solver = oracles::solver_config();
  std::ostringstream a, b, err;
  cmd_verify(oracles::corpus("triangular_num"), opt, true, a, err);
  cmd_verify(oracles::corpus("triangular_num"), opt, true, b, err);
  auto ja = nlohmann::ordered_json::parse(a.str());
  auto jb = nlohmann::ordered_json::parse(b.str());
  EXPECT_EQ(ja["verdict"], "VERIFIED");
  EXPECT_EQ(ja["vcs"].size(), 4u);
  EXPECT_TRUE(ja.contains("timing"));
  EXPECT_EQ(strip_timing(ja), strip_timing(jb));
}

TEST(Driver, RunCommand) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(oracles::corpus("guard_fail"), "Pair 0 7", kDefaultFuel, out, err), 0);
  EXPECT_EQ(out.str(), "Failed 7\n");
  std::ostringstream o2;
  EXPECT_EQ(cmd_run(oracles::corpus("triangular_num"), "Pair 10 0", 1, o2, err), 0);
  EXPECT_EQ(o2.str(), "OutOfFuel\n");
  EXPECT_EQ(cmd_run(oracles::corpus("triangular_num"), "Pair 10", 100, o2, err), 2);
}

TEST(Driver, EmitSmt) {
  fs::path a = scratch("emit_a"), b = scratch("emit_b");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_emit_smt(oracles::corpus("triangular_num"), a.string(), {}, out, err), 0);
  ASSERT_EQ(cmd_emit_smt(oracles::corpus("triangular_num"), b.string(), {}, out, err), 0);
  auto fa = oracles::read_dir(a.string());
  EXPECT_EQ(fa.size(), 4u + 2u);
  EXPECT_EQ(fa, oracles::read_dir(b.string()));
  EXPECT_NE(fa["index.txt"].find("LoopInvPreserve"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Driver, HarnessExamples) {
  HarnessOptions opt;
  opt.samples = 30;
  EXPECT_TRUE(soundness_harness(load_contract(oracles::corpus("list_length")), opt).passed);
  HarnessReport bad = soundness_harness(load_contract(oracles::corpus("identity_bad")), opt);
  EXPECT_FALSE(bad.passed);
  EXPECT_FALSE(bad.counterexamples.empty());
  HarnessReport vac = soundness_harness(load_contract(oracles::extra("unsat_pre")), opt);
  EXPECT_TRUE(vac.passed);
  EXPECT_EQ(vac.samples, 0u);
  EXPECT_EQ(vac.notes.size(), 1u);
}
