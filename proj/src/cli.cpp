#include "qguess/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "qguess/relations.hpp"

namespace qguess {

namespace {

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

int effective_dim_e(const RunConfig& cfg) { return cfg.dim_e < 0 ? cfg.d : cfg.dim_e; }

unsigned thread_budget(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QGUESS_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Writes to the configured file, or to `out` when no path is set.
bool emit(const RunConfig& cfg, const std::string& text, std::ostream& out, std::ostream& err) {
  if (cfg.output_path.empty()) {
    out << text;
    return static_cast<bool>(out);
  }
  std::ofstream f(cfg.output_path, std::ios::binary);
  if (!f) {
    err << "error: cannot open " << cfg.output_path << " for writing\n";
    return false;
  }
  f << text;
  if (!f) {
    err << "error: write to " << cfg.output_path << " failed\n";
    return false;
  }
  return true;
}

std::vector<RelationReport> check_state(const LabeledState& psi, const RelationOptions& opts) {
  const LabeledState ab = partial_trace(psi, {labels::A, labels::B});
  std::vector<RelationReport> out;
  out.push_back(check_eq3(ab, opts));
  out.push_back(check_theorem1(ab, opts));
  out.push_back(check_lemma1(ab, opts));
  auto [t2a, t2b] = check_theorem2(ab, opts);
  out.push_back(std::move(t2a));
  out.push_back(std::move(t2b));
  auto [t3a, t3b] = check_theorem3(psi, opts);
  out.push_back(std::move(t3a));
  out.push_back(std::move(t3b));
  out.push_back(check_eq13(psi, opts));
  out.push_back(check_duality(psi, opts));
  return out;
}

const char* kVerifyCsvHeader =
    "state,relation_id,lhs_lo,lhs_hi,rhs_lo,rhs_hi,slack,pass,seed,status\n";

void write_report(std::ostringstream& text, const RelationReport& r, long state, bool csv) {
  if (csv) {
    text << state << ',' << to_string(r.relation_id) << ',' << fmt12(r.lhs.lo) << ','
         << fmt12(r.lhs.hi) << ',' << fmt12(r.rhs.lo) << ',' << fmt12(r.rhs.hi) << ','
         << fmt12(r.slack) << ',' << (r.pass() ? "true" : "false") << ',' << r.seed << ','
         << to_string(r.status) << '\n';
    return;
  }
  auto j = to_json(r);
  j["state"] = state;
  text << j.dump() << '\n';
}

LabeledState demo_state(const RunConfig& cfg) {
  const int d = cfg.d;
  if (cfg.state == "phi") return max_entangled(d);
  if (cfg.state == "ghz") return ghz(d);
  if (cfg.state == "theta") {
    return tensor(theta_state(d, cfg.theta), basis_state({{labels::B, 1}}, {0}));
  }
  if (cfg.state == "product") {
    return basis_state({{labels::A, d}, {labels::B, cfg.dim_b}}, {0, 0});
  }
  if (cfg.state == "random") {
    return random_pure({{labels::A, d}, {labels::B, cfg.dim_b}, {labels::E, effective_dim_e(cfg)}},
                       cfg.seed);
  }
  throw std::invalid_argument("unknown demo state '" + cfg.state + "'");
}

void print_certificate(std::ostringstream& t, const std::string& name, const GuessCertificate& c) {
  t << "  " << name << ": primal " << fmt6(c.p_primal) << "  dual " << fmt6(c.p_dual)
    << "  gap " << c.gap << "  iterations " << c.iterations
    << (c.converged ? "" : "  (not converged)") << '\n';
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.d < 2) throw std::invalid_argument("--d must be at least 2");
  if (cfg.dim_b < 1) throw std::invalid_argument("--dim-b must be at least 1");
  if (cfg.dim_e != -1 && cfg.dim_e < 1) throw std::invalid_argument("--dim-e must be at least 1");
  if (cfg.count < 1) throw std::invalid_argument("--count must be at least 1");
  if (!(cfg.tol > 0)) throw std::invalid_argument("--tol must be positive");
  if (cfg.grid < 2) throw std::invalid_argument("--grid must be at least 2");
  if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "json") {
    throw std::invalid_argument("--format must be csv or json");
  }
  if (!(cfg.theta >= 0 && cfg.theta <= std::acos(0.0))) {
    throw std::invalid_argument("--theta must lie in [0, pi/2]");
  }
}

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  RelationOptions opts;
  opts.tol = cfg.tol;
  const Systems systems{{labels::A, cfg.d}, {labels::B, cfg.dim_b}, {labels::E, effective_dim_e(cfg)}};
  const auto n = static_cast<std::size_t>(cfg.count);

  std::vector<std::vector<RelationReport>> results(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const std::uint64_t s = derive_seed(cfg.seed, i);
        auto reports = check_state(random_pure(systems, s), opts);
        for (auto& r : reports) r.seed = s;
        results[i] = std::move(reports);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned threads = thread_budget(n);
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
  }

  if (cfg.d == 2) {
    RelationReport circle = check_qubit_circle(cfg.grid, std::min(cfg.tol, 1e-9));
    circle.seed = cfg.seed;
    results.push_back({std::move(circle)});
  }

  const bool csv = cfg.format == "csv";
  std::ostringstream text;
  if (csv) text << kVerifyCsvHeader;
  std::size_t pass = 0, fail = 0, inconclusive = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::stable_sort(results[i].begin(), results[i].end(), [](const auto& a, const auto& b) {
      return a.relation_id < b.relation_id;
    });
    const long state = i < n ? static_cast<long>(i) : -1;
    for (const auto& r : results[i]) {
      write_report(text, r, state, csv);
      switch (r.status) {
        case Verdict::Pass: ++pass; break;
        case Verdict::Fail: ++fail; break;
        case Verdict::Inconclusive: ++inconclusive; break;
      }
    }
  }
  if (!emit(cfg, text.str(), out, err)) return 2;
  err << "verify: states " << n << ", reports " << pass + fail + inconclusive << ", pass " << pass
      << ", fail " << fail << ", inconclusive " << inconclusive;
  if (inconclusive > 0) err << " (warning: " << inconclusive << " inconclusive)";
  err << '\n';
  return fail > 0 ? 1 : 0;
}

int run_region(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const double inv_d = 1.0 / cfg.d;
  std::ostringstream text;
  const bool json = cfg.format == "json";
  if (!json) text << "theta,p_z,p_x,thm3_pz_cap,thm3_px_cap\n";
  for (double theta : theta_grid(cfg.grid)) {
    const ThetaPoint p = theta_point(cfg.d, theta);
    const double pz_cap = 1.0 - (p.p_x - inv_d) * (p.p_x - inv_d);
    const double px_cap = 1.0 - (p.p_z - inv_d) * (p.p_z - inv_d);
    if (json) {
      nlohmann::ordered_json j;
      j["theta"] = theta;
      j["p_z"] = p.p_z;
      j["p_x"] = p.p_x;
      j["thm3_pz_cap"] = pz_cap;
      j["thm3_px_cap"] = px_cap;
      text << j.dump() << '\n';
    } else {
      text << fmt12(theta) << ',' << fmt12(p.p_z) << ',' << fmt12(p.p_x) << ',' << fmt12(pz_cap)
           << ',' << fmt12(px_cap) << '\n';
    }
  }
  return emit(cfg, text.str(), out, err) ? 0 : 2;
}

int run_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LabeledState psi = LabeledState::pure(CVector::Ones(1), {});
  try {
    validate(cfg);
    psi = demo_state(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const int d = cfg.d;
  const LabeledState ab = psi.has(labels::E) ? partial_trace(psi, {labels::A, labels::B}) : psi;
  const LabeledState full = psi.has(labels::E) ? psi : purify(ab, labels::E);
  const LabeledState copied = psi_z(ab);

  std::ostringstream t;
  t << "state " << cfg.state << ", d = " << d << ", systems";
  for (const auto& s : psi.systems()) t << ' ' << s.name << '(' << s.dim << ')';
  t << '\n';

  const auto pz = guess_prob(ab, labels::A, Basis::Z, {labels::B});
  const auto px = guess_prob(ab, labels::A, Basis::X, {labels::B});
  const auto pxp = guess_prob(copied, labels::A, Basis::X, {labels::Ap, labels::B});
  t << "guessing certificates\n";
  print_certificate(t, "P(Z|B)     ", pz);
  print_certificate(t, "P(X|B)     ", px);
  print_certificate(t, "P(X|A'B)_Z ", pxp);

  const RecoveryCircuit circuit = build_recovery(ab, pz.povm, pxp.povm);
  const CircuitChain chain = circuit_chain(ab, circuit);
  const double bound = cosine_bound(pz.p_primal, pxp.p_primal);
  t << "recovery circuit\n";
  t << "  Z stage fidelity       " << fmt6(chain.z_step) << '\n';
  t << "  X stage fidelity       " << fmt6(chain.x_step) << '\n';
  t << "  circuit fidelity       " << fmt6(chain.total) << '\n';
  t << "  guaranteed bound       " << fmt6(bound) << '\n';

  const auto f = max_recovery_fidelity(ab, labels::A, {labels::B});
  t << "  optimal F(A|B)         [" << fmt6(f.value.lower) << ", " << fmt6(f.value.upper) << "]\n";

  const double q_ze = q_fidelity(full, labels::A, Basis::Z, {labels::E});
  const double q_xape =
      q_fidelity(psi_z(full), labels::A, Basis::X, {labels::Ap, labels::E});
  t << "decoupling fidelities\n";
  t << "  Q(Z|E)                 " << fmt6(q_ze) << '\n';
  t << "  Q(X|A'E)_Z             " << fmt6(q_xape) << '\n';
  return emit(cfg, t.str(), out, err) ? 0 : 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guessing probabilities, recovery fidelities and uncertainty relations"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--d", cfg.d, "dimension of A");
    sub->add_option("--seed", cfg.seed, "64-bit seed");
    sub->add_option("--tol", cfg.tol, "relation tolerance");
    sub->add_option("--output,-o", cfg.output_path, "output file (default stdout)");
    sub->add_option("--format", cfg.format, "csv or json");
  };
  CLI::App* verify = app.add_subcommand("verify", "seeded sweep over random states");
  add_common(verify);
  verify->add_option("--dim-b", cfg.dim_b, "dimension of B");
  verify->add_option("--dim-e", cfg.dim_e, "dimension of E (default d)");
  verify->add_option("--count", cfg.count, "number of random states");
  verify->add_option("--grid", cfg.grid, "theta grid for the qubit circle");

  CLI::App* region = app.add_subcommand("region", "theta-family guessing curve and caps");
  add_common(region);
  region->add_option("--grid", cfg.grid, "number of theta points");

  CLI::App* demo = app.add_subcommand("demo", "one state in detail");
  add_common(demo);
  demo->add_option("--state", cfg.state, "phi, ghz, theta, product or random");
  demo->add_option("--theta", cfg.theta, "angle for the theta state");
  demo->add_option("--dim-b", cfg.dim_b, "dimension of B");
  demo->add_option("--dim-e", cfg.dim_e, "dimension of E for random states");

  // CLI11 consumes a reversed argument list without the program name.
  std::vector<std::string> reversed;
  for (std::size_t i = args.size(); i-- > 1;) reversed.push_back(args[i]);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (verify->parsed()) cfg.command = Command::Verify;
  if (region->parsed()) cfg.command = Command::Region;
  if (demo->parsed()) cfg.command = Command::Demo;
  try {
    switch (cfg.command) {
      case Command::Verify: return run_verify(cfg, out, err);
      case Command::Region: return run_region(cfg, out, err);
      case Command::Demo: return run_demo(cfg, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace qguess
