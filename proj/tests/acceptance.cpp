// One line per acceptance criterion; exit status is nonzero if any fails.
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace mmv;
namespace fs = std::filesystem;

namespace {

constexpr double kContractLimitMs = 5000;
constexpr double kVcTimeoutS = 10;
constexpr std::size_t kHarnessSamples = 100;
constexpr double kHarnessLimitMs = 60000;
constexpr std::size_t kLemmaInstances = 1000;
constexpr double kLemmaDecidedFraction = 0.90;
constexpr int kDifferentialMaxSize = 3;
constexpr std::size_t kPreservationPrograms = 5000;
constexpr std::int64_t kPreservationFuel = 10000;
constexpr double kSortGuardLimitMs = 1000;
constexpr std::size_t kCrossInstances = 500;

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

VerifyOptions verify_options() {
  VerifyOptions o;
  o.solver = oracles::solver_config();
  o.solver.timeout_s = kVcTimeoutS;
  return o;
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& title, const std::function<Outcome()>& body) {
  auto t0 = clock_type::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.0f ms)\n", o.pass ? "PASS" : "FAIL", n, title.c_str(), o.detail.c_str(),
              ms_since(t0));
  std::fflush(stdout);
}

std::vector<std::string> verified_contracts() {
  std::vector<std::string> out;
  for (const auto& n : oracles::positive_corpus()) out.push_back(oracles::corpus(n));
  return out;
}

}  // namespace

int main() {
  criterion(1, "corpus verdicts", [] {
    Discharger d(verify_options().solver);
    std::string bad;
    double worst = 0;
    for (const auto& name : oracles::positive_corpus()) {
      for (const auto& [file, want] : {std::pair{name, true}, std::pair{name + "_bad", false}}) {
        auto t0 = clock_type::now();
        Report r = verify_contract(load_contract(oracles::corpus(file)), verify_options(), d, file);
        double ms = ms_since(t0);
        worst = std::max(worst, ms);
        if (r.verified != want) bad += " " + file + (r.verified ? "=VERIFIED" : "=UNVERIFIED");
        if (ms >= kContractLimitMs) bad += " " + file + " too slow";
      }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "12 contracts, slowest %.0f ms", worst);
    return Outcome{bad.empty(), bad.empty() ? buf : bad};
  });

  criterion(2, "empirical soundness", [] {
    auto t0 = clock_type::now();
    HarnessOptions opt;
    opt.samples = kHarnessSamples;
    opt.seed = 0;
    std::string bad;
    std::size_t samples = 0;
    for (const auto& path : verified_contracts()) {
      HarnessReport r = soundness_harness(load_contract(path), opt);
      samples += r.samples;
      if (!r.passed) bad += " " + fs::path(path).stem().string() + ": " + r.counterexamples.front();
    }
    double ms = ms_since(t0);
    if (ms >= kHarnessLimitMs) bad += " total time over limit";
    return Outcome{bad.empty(), bad.empty() ? std::to_string(samples) + " samples, no False verdicts" : bad};
  });

  criterion(3, "lemma suite", [] {
    std::size_t decided = 0, disagree = 0;
    std::uint64_t first = 0;
    for (std::uint64_t seed = 0; seed < kLemmaInstances; ++seed) {
      auto li = oracles::lemma_instance(seed);
      if (!li.decided()) continue;
      ++decided;
      if (!li.agree() && disagree++ == 0) first = seed;
    }
    bool ok = disagree == 0 && double(decided) >= kLemmaDecidedFraction * double(kLemmaInstances);
    std::string d = std::to_string(decided) + "/" + std::to_string(kLemmaInstances) + " decided, " +
                    std::to_string(disagree) + " disagreements";
    if (disagree) d += " (first seed " + std::to_string(first) + ")";
    return Outcome{ok, d};
  });

  criterion(4, "interpreter differential", [] {
    auto st = oracles::differential(kDifferentialMaxSize, 1);
    std::string d = std::to_string(st.programs) + " programs, " + std::to_string(st.runs) + " runs (" +
                    std::to_string(st.typed_runs) + " simply typed), " + std::to_string(st.mismatches) + " mismatches";
    if (st.mismatches) d += ": " + st.first_mismatch;
    return Outcome{st.mismatches == 0 && st.typed_runs > 0, d};
  });

  criterion(5, "simple-type soundness", [] {
    auto st = oracles::preservation(kPreservationPrograms, kPreservationFuel);
    std::string d = std::to_string(st.programs) + " programs: " + std::to_string(st.ok) + " ok, " +
                    std::to_string(st.failed) + " failed, " + std::to_string(st.out_of_fuel) + " out of fuel, " +
                    std::to_string(st.stuck) + " stuck, " + std::to_string(st.ill_typed_results) + " ill-typed";
    if (!st.first_problem.empty()) d += ": " + st.first_problem;
    return Outcome{st.stuck == 0 && st.ill_typed_results == 0, d};
  });

  criterion(6, "conservativity", [] {
    Discharger d(verify_options().solver);
    std::vector<std::string> paths = verified_contracts();
    for (const auto& [name, text] : oracles::read_dir(MMV_TEST_CONTRACTS_DIR))
      paths.push_back(std::string(MMV_TEST_CONTRACTS_DIR) + "/" + name);
    std::size_t checked = 0, entries = 0;
    std::string bad;
    for (const auto& p : paths) {
      AnnotatedContract c = load_contract(p);
      if (!verify_contract(c, verify_options(), d).verified) continue;
      CheckResult r = check_contract(c);
      ++checked;
      entries += r.trace.size();
      std::string v = oracles::conservativity_violation(r);
      if (!v.empty()) bad += " " + fs::path(p).stem().string() + ": " + v;
    }
    return Outcome{bad.empty() && checked > 0,
                   bad.empty() ? std::to_string(checked) + " verified contracts, " + std::to_string(entries) +
                                     " traced stacks"
                               : bad};
  });

  criterion(7, "sort guards", [] {
    Discharger d(oracles::solver_config());
    VerificationCondition nat_vc, int_vc;
    nat_vc.binders = {{"x", Type::nat()}};
    nat_vc.goal = Formula::le(Term::integer(0), Term::var("x"));
    int_vc.binders = {{"x", Type::int_()}};
    int_vc.goal = nat_vc.goal;
    auto t0 = clock_type::now();
    SolverVerdict a = d.discharge(nat_vc).verdict;
    double ma = ms_since(t0);
    auto t1 = clock_type::now();
    SolverVerdict b = d.discharge(int_vc).verdict;
    double mb = ms_since(t1);
    bool ok = a == SolverVerdict::Verified && b == SolverVerdict::Refuted && ma < kSortGuardLimitMs &&
              mb < kSortGuardLimitMs;
    char buf[160];
    std::snprintf(buf, sizeof buf, "nat: %s in %.0f ms, int: %s in %.0f ms", to_string(a), ma, to_string(b), mb);
    return Outcome{ok, buf};
  });

  criterion(8, "measure pipeline", [] {
    Discharger d(verify_options().solver);
    AnnotatedContract good = load_contract(oracles::corpus("list_length"));
    AnnotatedContract bad = load_contract(oracles::corpus("list_length_bad"));
    bool gv = verify_contract(good, verify_options(), d).verified;
    bool bv = verify_contract(bad, verify_options(), d).verified;
    std::size_t scripts = 0, quantified = 0;
    for (const auto* c : {&good, &bad}) {
      for (const auto& s : encode_all(check_contract(*c), c->measures, {})) {
        ++scripts;
        if (oracles::has_quantified_measure_axiom(s)) ++quantified;
      }
    }
    std::string det = std::string("list_length ") + (gv ? "VERIFIED" : "UNVERIFIED") + ", +1 twin " +
                      (bv ? "VERIFIED" : "UNVERIFIED") + ", " + std::to_string(quantified) + "/" +
                      std::to_string(scripts) + " scripts with quantified measure axioms";
    return Outcome{gv && !bv && quantified == 0 && scripts > 0, det};
  });

  criterion(9, "encoding cross-check", [] {
    Discharger d(oracles::solver_config());
    std::size_t decided = 0, disagree = 0;
    std::string first;
    for (std::uint64_t seed = 0; seed < kCrossInstances; ++seed) {
      auto ci = oracles::cross_instance(seed, d);
      if (ci.eval != Verdict3::Unknown) ++decided;
      if (!ci.agree() && disagree++ == 0)
        first = to_string(ci.vc.as_formula()) + " eval " + to_string(ci.eval) + " solver " + to_string(ci.solver);
    }
    std::string det = std::to_string(decided) + "/" + std::to_string(kCrossInstances) + " decided, " +
                      std::to_string(disagree) + " disagreements";
    if (disagree) det += ": " + first;
    return Outcome{disagree == 0 && decided > 0, det};
  });

  criterion(10, "determinism", [] {
    fs::path base = fs::temp_directory_path() / ("mmv_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    std::string bad;
    std::size_t files = 0;
    for (const auto& name : oracles::positive_corpus()) {
      std::string path = oracles::corpus(name);
      std::ostringstream out, err;
      fs::path a = base / (name + "_a"), b = base / (name + "_b");
      if (cmd_emit_smt(path, a.string(), verify_options(), out, err) != 0 ||
          cmd_emit_smt(path, b.string(), verify_options(), out, err) != 0)
        bad += " " + name + ": emit failed";
      auto fa = oracles::read_dir(a.string());
      files += fa.size();
      if (fa != oracles::read_dir(b.string())) bad += " " + name + ": scripts differ";
      std::ostringstream j1, j2;
      cmd_verify(path, verify_options(), true, j1, err);
      cmd_verify(path, verify_options(), true, j2, err);
      if (strip_timing(nlohmann::ordered_json::parse(j1.str())) != strip_timing(nlohmann::ordered_json::parse(j2.str())))
        bad += " " + name + ": JSON reports differ";
    }
    fs::remove_all(base);
    return Outcome{bad.empty(), bad.empty() ? std::to_string(files) + " emitted files identical, JSON reports equal" : bad};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
