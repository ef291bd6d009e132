#include "mmv/mmv.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

mmv::Budget parse_budget(const std::string& s) {
  mmv::Budget b;
  auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--budget", "expected B,L");
  b.int_bound = std::stoi(s.substr(0, comma));
  b.list_len = std::stoi(s.substr(comma + 1));
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mini-Michelson refinement type verifier"};
  app.require_subcommand(1);

  std::string solver = "z3 -in";
  double timeout = 10;
  std::int64_t fuel = mmv::kDefaultFuel;
  std::string budget_text = "5,3";
  std::uint64_t seed = 0;
  int jobs = 1;
  if (const char* s = std::getenv("MMV_SOLVER")) solver = s;
  if (const char* t = std::getenv("MMV_TIMEOUT")) timeout = std::atof(t);

  app.add_option("--solver", solver, "solver command reading SMT-LIB from stdin");
  app.add_option("--timeout", timeout, "seconds per VC");
  app.add_option("--fuel", fuel, "interpreter step budget");
  app.add_option("--budget", budget_text, "oracle budget: int bound, list length");
  app.add_option("--seed", seed, "sampling seed");
  app.add_option("--jobs", jobs, "parallel solver processes")->check(CLI::PositiveNumber);

  std::string file, input, dir, emit_dir, assume = "replace";
  bool json = false;
  std::size_t samples = 100;

  auto* verify = app.add_subcommand("verify", "check a contract and discharge its VCs");
  verify->add_option("file", file)->required();
  verify->add_flag("--json", json, "machine-readable report");
  verify->add_option("--emit-smt", emit_dir, "also write the SMT scripts to DIR");
  verify->add_option("--assume", assume, "Assume handling")->check(CLI::IsMember({"replace", "conjoin"}));

  auto* run = app.add_subcommand("run", "execute a contract on Pair PARAM STORAGE");
  run->add_option("file", file)->required();
  run->add_option("input", input)->required();

  auto* emit = app.add_subcommand("emit-smt", "write one SMT script per VC");
  emit->add_option("file", file)->required();
  emit->add_option("dir", dir)->required();

  auto* harness = app.add_subcommand("harness", "sample pre-states, run, and check post and exception specs");
  harness->add_option("file", file)->required();
  harness->add_option("--samples", samples);

  CLI11_PARSE(app, argc, argv);

  mmv::VerifyOptions opt;
  opt.solver.command = solver;
  opt.solver.timeout_s = timeout;
  opt.jobs = jobs;
  opt.check.assume = assume == "conjoin" ? mmv::AssumeMode::Conjoin : mmv::AssumeMode::Replace;

  if (*verify) {
    if (!emit_dir.empty()) {
      int rc = mmv::cmd_emit_smt(file, emit_dir, opt, std::cerr, std::cerr);
      if (rc != 0) return rc;
    }
    return mmv::cmd_verify(file, opt, json, std::cout, std::cerr);
  }
  if (*run) return mmv::cmd_run(file, input, fuel, std::cout, std::cerr);
  if (*emit) return mmv::cmd_emit_smt(file, dir, opt, std::cout, std::cerr);
  try {
    mmv::HarnessOptions h;
    h.samples = samples;
    h.seed = seed;
    h.budget = parse_budget(budget_text);
    h.fuel = fuel;
    h.check = opt.check;
    mmv::HarnessReport r = mmv::soundness_harness(mmv::load_contract(file), h);
    std::cout << mmv::to_text(r);
    return r.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << mmv::describe_error(file, e) << "\n";
    return 2;
  }
}
