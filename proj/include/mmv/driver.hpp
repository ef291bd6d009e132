#pragma once

#include "mmv/generate.hpp"
#include "mmv/parser.hpp"
#include "mmv/smt.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

namespace mmv {

struct VerifyOptions {
  SolverConfig solver;
  SmtOptions smt;
  CheckOptions check;
  int jobs = 1;
};

struct VcRow {
  int id = 0;
  VcOrigin origin{};
  Span span;
  SolverVerdict verdict = SolverVerdict::Unknown;
  double time_ms = 0;
  std::string model;
};

struct Report {
  std::string contract;
  bool verified = false;
  bool assume_tainted = false;
  std::string error;  // structural failure: no VCs were discharged
  std::vector<VcRow> rows;
  double check_ms = 0, solve_ms = 0, total_ms = 0;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline AnnotatedContract load_contract(const std::string& path) { return parse_contract(read_file(path)); }

inline std::vector<DischargeResult> discharge_all(const std::vector<std::string>& scripts, Discharger& d, int jobs) {
  std::vector<DischargeResult> out(scripts.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (size_t k; (k = next++) < scripts.size();) {
      try {
        out[k] = d.discharge(scripts[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  size_t n = std::min<size_t>(size_t(std::max(jobs, 1)), scripts.size());
  std::vector<std::thread> pool;
  for (size_t k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline std::vector<std::string> encode_all(const CheckResult& r, const Measures& ms, const SmtOptions& opt) {
  std::vector<std::string> out;
  for (const auto& vc : r.vcs) out.push_back(encode_vc(vc, ms, opt));
  return out;
}

inline Report verify_contract(const AnnotatedContract& c, const VerifyOptions& opt, Discharger& d,
                              const std::string& name = "") {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  Report rep;
  rep.contract = name;
  CheckResult r;
  try {
    r = check_contract(c, opt.check);
  } catch (const VerifyError& e) {
    rep.error = e.what();
    rep.check_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    rep.total_ms = rep.check_ms;
    return rep;
  }
  rep.assume_tainted = r.assume_tainted;
  std::vector<std::string> scripts = encode_all(r, c.measures, opt.smt);
  auto t1 = clock::now();
  rep.check_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::vector<DischargeResult> res = discharge_all(scripts, d, opt.jobs);
  rep.solve_ms = std::chrono::duration<double, std::milli>(clock::now() - t1).count();
  rep.verified = true;
  for (size_t k = 0; k < r.vcs.size(); ++k) {
    const auto& vc = r.vcs[k];
    rep.rows.push_back({vc.id, vc.origin, vc.span, res[k].verdict, res[k].time_ms, res[k].model});
    if (res[k].verdict != SolverVerdict::Verified) rep.verified = false;
  }
  rep.total_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  return rep;
}

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["contract"] = r.contract;
  j["verdict"] = r.verified ? "VERIFIED" : "UNVERIFIED";
  j["assume_tainted"] = r.assume_tainted;
  if (!r.error.empty()) j["error"] = r.error;
  j["vcs"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json v;
    v["id"] = row.id;
    v["origin"] = to_string(row.origin);
    v["span"] = to_string(row.span);
    v["verdict"] = to_string(row.verdict);
    v["time_ms"] = row.time_ms;
    j["vcs"].push_back(v);
  }
  j["timing"] = {{"check_ms", r.check_ms}, {"solve_ms", r.solve_ms}, {"total_ms", r.total_ms}};
  return j;
}

// The report with every timing field removed.
inline nlohmann::ordered_json strip_timing(nlohmann::ordered_json j) {
  j.erase("timing");
  for (auto& v : j["vcs"]) v.erase("time_ms");
  return j;
}

inline std::string to_text(const Report& r) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(1);
  if (!r.error.empty()) o << "error: " << r.error << "\n";
  for (const auto& row : r.rows) {
    o << "  vc " << row.id << "  " << std::left << std::setw(16) << to_string(row.origin) << " " << std::setw(6)
      << (row.span.line ? to_string(row.span) : "-") << " " << std::setw(9) << to_string(row.verdict) << std::right
      << std::setw(9) << row.time_ms << " ms\n";
  }
  if (r.assume_tainted) o << "note: relies on Assume annotations\n";
  o << (r.verified ? "VERIFIED" : "UNVERIFIED") << "  (" << r.rows.size() << " VCs, " << r.total_ms << " ms)\n";
  return o.str();
}

inline std::string describe_error(const std::string& path, const std::exception& e) {
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) return path + ": parse error: " + p->what();
  return path + ": " + e.what();
}

// Exit 0 verified, 1 unverified, 2 on input or tool errors.
inline int cmd_verify(const std::string& path, const VerifyOptions& opt, bool json, std::ostream& out,
                      std::ostream& err) {
  try {
    AnnotatedContract c = load_contract(path);
    Discharger d(opt.solver);
    Report r = verify_contract(c, opt, d, path);
    if (json) out << to_json(r).dump(2) << "\n";
    else out << path << "\n" << to_text(r);
    return r.verified ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << describe_error(path, e) << "\n";
    return 2;
  }
}

inline int cmd_run(const std::string& path, const std::string& input, std::int64_t fuel, std::ostream& out,
                   std::ostream& err) {
  try {
    AnnotatedContract c = load_contract(path);
    Value v = parse_value(input, Type::pair(c.parameter, c.storage));
    RunOutcome o = try_exec_seq(Stack({v}), c.code, fuel);
    if (o.kind == RunOutcome::Kind::Stuck) {
      err << "error: stuck: " << o.reason << "\n";
      return 2;
    }
    if (o.kind == RunOutcome::Kind::Ok) {
      out << "Ok";
      for (const auto& x : o.stack.items()) out << " " << to_string(x);
      out << "\n";
    } else {
      out << to_string(o) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << describe_error(path, e) << "\n";
    return 2;
  }
}

// Writes vc_<id>.smt2 per VC, index.txt and vcs.sexp into dir.
inline int cmd_emit_smt(const std::string& path, const std::string& dir, const VerifyOptions& opt, std::ostream& out,
                        std::ostream& err) {
  namespace fs = std::filesystem;
  try {
    AnnotatedContract c = load_contract(path);
    CheckResult r = check_contract(c, opt.check);
    fs::create_directories(dir);
    std::ostringstream index, sexp;
    for (const auto& vc : r.vcs) {
      std::ostringstream name;
      name << "vc_" << std::setw(3) << std::setfill('0') << vc.id << ".smt2";
      std::ofstream f(fs::path(dir) / name.str(), std::ios::binary);
      f << encode_vc(vc, c.measures, opt.smt);
      if (!f) throw InputError("cannot write " + (fs::path(dir) / name.str()).string());
      index << name.str() << " " << to_string(vc.origin) << " " << to_string(vc.span) << "\n";
      sexp << to_sexpr(vc) << "\n";
    }
    std::ofstream(fs::path(dir) / "index.txt", std::ios::binary) << index.str();
    std::ofstream(fs::path(dir) / "vcs.sexp", std::ios::binary) << sexp.str();
    out << r.vcs.size() << " scripts written to " << dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << describe_error(path, e) << "\n";
    return 2;
  }
}

// ---------------------------------------------------------------- soundness harness

struct HarnessOptions {
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  Budget budget;
  std::int64_t fuel = kDefaultFuel;
  CheckOptions check;
};

struct HarnessReport {
  bool passed = true;
  std::size_t samples = 0, ok = 0, failed = 0, out_of_fuel = 0, undecided = 0;
  std::vector<std::string> counterexamples;
  std::vector<std::string> notes;
};

inline HarnessReport soundness_harness(const AnnotatedContract& c, const HarnessOptions& opt) {
  HarnessReport rep;
  CheckResult r = check_contract(c, opt.check);
  std::vector<Sample> xs = sample_stack(r.gamma, r.pre, opt.budget, opt.samples * 100, opt.seed, c.measures, opt.samples);
  rep.samples = xs.size();
  if (xs.empty()) rep.notes.push_back("0 samples: no pre-satisfying stack found; vacuous pass");
  for (const auto& s : xs) {
    RunOutcome o = try_exec_seq(s.stack, c.code, opt.fuel);
    Verdict3 v = Verdict3::True;
    std::string what;
    switch (o.kind) {
      case RunOutcome::Kind::Ok:
        ++rep.ok;
        v = stack_models(s.sigma, r.gamma, o.stack, r.post, opt.budget, c.measures);
        what = "post";
        break;
      case RunOutcome::Kind::Failed:
        ++rep.failed;
        v = stack_models(s.sigma, r.gamma, Stack({o.value}), r.exc, opt.budget, c.measures);
        what = "exception";
        break;
      case RunOutcome::Kind::OutOfFuel: ++rep.out_of_fuel; continue;
      case RunOutcome::Kind::Stuck:
        v = Verdict3::False;
        what = "progress (" + o.reason + ")";
        break;
    }
    if (v == Verdict3::Unknown) ++rep.undecided;
    if (v == Verdict3::False) {
      rep.passed = false;
      std::string sigma;
      for (const auto& [x, val] : s.sigma) sigma += (sigma.empty() ? "" : ", ") + x + "=" + to_string(val);
      rep.counterexamples.push_back(what + " violated: input " + to_string(s.stack) + " [" + sigma + "] -> " +
                                    to_string(o));
    }
  }
  return rep;
}

inline std::string to_text(const HarnessReport& r) {
  std::ostringstream o;
  o << (r.passed ? "PASS" : "FAIL") << ": " << r.samples << " samples (" << r.ok << " ok, " << r.failed << " failed, "
    << r.out_of_fuel << " out of fuel, " << r.undecided << " undecided)\n";
  for (const auto& n : r.notes) o << "note: " << n << "\n";
  for (size_t k = 0; k < r.counterexamples.size() && k < 5; ++k) o << "counterexample: " << r.counterexamples[k] << "\n";
  if (r.counterexamples.size() > 5) o << "(" << r.counterexamples.size() - 5 << " more)\n";
  return o.str();
}

}  // namespace mmv
