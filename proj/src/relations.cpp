#include "qguess/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qguess {

namespace {

enum class Sense { LessEq, GreaterEq };

class Diagnostics {
 public:
  void add(std::string name, double value) { items_.emplace_back(std::move(name), value); }

  void solver(const std::string& name, const GuessCertificate& c) {
    add(name + "_gap", c.gap);
    add(name + "_iterations", c.iterations);
    if (!c.converged) ok_ = false;
  }

  void ascent(const std::string& name, const FidelityEnclosure& f) {
    add(name + "_width", f.width());
    add(name + "_iterations", f.iterations);
    if (!f.converged) ok_ = false;
  }

  // Side conditions that must hold; a definite violation fails the report.
  void require(const std::string& name, double margin, double tol) {
    add(name, margin);
    if (margin < -tol) violated_ = true;
  }

  bool solvers_ok() const { return ok_; }
  bool violated() const { return violated_; }
  std::vector<std::pair<std::string, double>> take() { return std::move(items_); }

 private:
  std::vector<std::pair<std::string, double>> items_;
  bool ok_ = true;
  bool violated_ = false;
};

RelationReport compare(RelationId id, Interval lhs, Sense sense, Interval rhs, double tol,
                       Diagnostics& diag) {
  RelationReport r;
  r.relation_id = id;
  r.lhs = lhs;
  r.rhs = rhs;
  double optimistic = 0.0;
  if (sense == Sense::LessEq) {
    r.slack = rhs.lo - lhs.hi;
    optimistic = rhs.hi - lhs.lo;
  } else {
    r.slack = lhs.lo - rhs.hi;
    optimistic = lhs.hi - rhs.lo;
  }
  if (optimistic < -tol || diag.violated()) {
    r.status = Verdict::Fail;
  } else if (r.slack >= -tol && diag.solvers_ok()) {
    r.status = Verdict::Pass;
  } else {
    r.status = Verdict::Inconclusive;
  }
  r.diagnostics = diag.take();
  return r;
}

Interval enclosure(const GuessCertificate& c) {
  return {std::clamp(c.p_primal, 0.0, 1.0), std::clamp(c.p_dual, 0.0, 1.0)};
}

Interval enclosure(const FidelityEnclosure& f) { return {f.lower, f.upper}; }

Interval cosine_bound(Interval p, Interval q) {
  return {qguess::cosine_bound(p.lo, q.lo), qguess::cosine_bound(p.hi, q.hi)};
}

// P + (Q - 1/d)^2, monotone in both arguments for Q >= 1/d.
Interval tripartite_lhs(Interval p, Interval q, double d) {
  auto f = [d](double x, double y) {
    const double s = std::max(0.0, y - 1.0 / d);
    return x + s * s;
  };
  return {f(p.lo, q.lo), f(p.hi, q.hi)};
}

int dim_of(const LabeledState& psi, const std::string& label) { return psi.system(label).dim; }

}  // namespace

const char* to_string(RelationId id) {
  switch (id) {
    case RelationId::EQ3: return "EQ3";
    case RelationId::THM1: return "THM1";
    case RelationId::LEMMA1: return "LEMMA1";
    case RelationId::THM2A: return "THM2A";
    case RelationId::THM2B: return "THM2B";
    case RelationId::THM3A: return "THM3A";
    case RelationId::THM3B: return "THM3B";
    case RelationId::EQ13: return "EQ13";
    case RelationId::QUBIT_CIRCLE: return "QUBIT_CIRCLE";
    case RelationId::DUALITY: return "DUALITY";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

double RelationReport::diagnostic(const std::string& name) const {
  for (const auto& [k, v] : diagnostics) {
    if (k == name) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

nlohmann::ordered_json to_json(const RelationReport& report) {
  nlohmann::ordered_json j;
  j["relation_id"] = to_string(report.relation_id);
  j["lhs_lo"] = report.lhs.lo;
  j["lhs_hi"] = report.lhs.hi;
  j["rhs_lo"] = report.rhs.lo;
  j["rhs_hi"] = report.rhs.hi;
  j["slack"] = report.slack;
  j["pass"] = report.pass();
  j["seed"] = report.seed;
  j["status"] = to_string(report.status);
  nlohmann::ordered_json diag = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.diagnostics) diag[k] = v;
  j["diagnostics"] = std::move(diag);
  return j;
}

double cosine_bound(double p, double q) {
  const double a = std::acos(std::clamp(p, 0.0, 1.0));
  const double b = std::acos(std::clamp(q, 0.0, 1.0));
  return std::cos(std::min(a + b, std::numbers::pi / 2));
}

RelationReport check_eq3(const LabeledState& psi, const RelationOptions& opts) {
  Diagnostics diag;
  const auto pz = guess_prob(psi, opts.a, Basis::Z, {opts.b}, opts.solver);
  const auto px = guess_prob(psi, opts.a, Basis::X, {opts.b}, opts.solver);
  const auto f = max_recovery_fidelity(psi, opts.a, {opts.b}, opts.ascent);
  diag.solver("p_z", pz);
  diag.solver("p_x", px);
  diag.ascent("f_ab", f.value);
  return compare(RelationId::EQ3, enclosure(f.value), Sense::GreaterEq,
                 cosine_bound(enclosure(pz), enclosure(px)), opts.tol, diag);
}

RelationReport check_theorem1(const LabeledState& psi, const RelationOptions& opts) {
  Diagnostics diag;
  const auto pz = guess_prob(psi, opts.a, Basis::Z, {opts.b}, opts.solver);
  const LabeledState copied = psi_z(psi, opts.a, labels::Ap);
  const auto pxp = guess_prob(copied, opts.a, Basis::X, {labels::Ap, opts.b}, opts.solver);
  diag.solver("p_z", pz);
  diag.solver("p_x_given_ap", pxp);

  const RecoveryCircuit circuit = build_recovery(psi, pz.povm, pxp.povm, opts.a);
  const CircuitChain chain = circuit_chain(psi, circuit, opts.a);
  diag.add("circuit_fidelity", chain.total);
  diag.add("z_step_fidelity", chain.z_step);
  diag.add("x_step_fidelity", chain.x_step);
  // Triangle inequality along the chain and the sqrt(Lambda) >= Lambda bounds.
  diag.require("triangle_margin",
               std::acos(chain.z_step) + std::acos(chain.x_step) - std::acos(chain.total),
               opts.tol);
  diag.require("z_step_margin", chain.z_step - pz.p_primal, opts.tol);
  diag.require("x_step_margin", chain.x_step - pxp.p_primal, opts.tol);

  const auto f = max_recovery_fidelity(psi, opts.a, {opts.b}, opts.ascent);
  diag.ascent("f_ab", f.value);
  diag.require("f_ab_dominates_circuit", f.value.upper - chain.total, opts.tol);

  return compare(RelationId::THM1, Interval::point(chain.total), Sense::GreaterEq,
                 cosine_bound(enclosure(pz), enclosure(pxp)), opts.tol, diag);
}

RelationReport check_lemma1(const LabeledState& psi, const RelationOptions& opts) {
  Diagnostics diag;
  const int d = dim_of(psi, opts.a);
  const auto px = guess_prob(psi, opts.a, Basis::X, {opts.b}, opts.solver);
  const LabeledState copied = psi_z(psi, opts.a, labels::Ap);
  const Ensemble shifted = conditional_ensemble(copied, opts.a, Basis::X, {labels::Ap, opts.b});
  const auto pxp = guess_prob(shifted, opts.solver);
  diag.solver("p_x", px);
  diag.solver("p_x_given_ap", pxp);

  const Povm xi = shift_difference_measurement(px.povm, d, labels::Ap);
  const double xi_value = success_probability(shifted, xi);
  diag.add("xi_value", xi_value);
  diag.require("xi_margin", xi_value - px.p_dual, opts.tol);

  const Interval lhs{std::max(std::clamp(pxp.p_primal, 0.0, 1.0), xi_value),
                     std::clamp(pxp.p_dual, 0.0, 1.0)};
  return compare(RelationId::LEMMA1, lhs, Sense::GreaterEq, enclosure(px), opts.tol, diag);
}

std::pair<RelationReport, RelationReport> check_theorem2(const LabeledState& psi,
                                                         const RelationOptions& opts) {
  const LabeledState bipartite = partial_trace(psi, {opts.a, opts.b});
  const LabeledState full = purify(bipartite, opts.e);
  const LabeledState copied = psi_z(full, opts.a, labels::Ap);

  const auto pz = guess_prob(bipartite, opts.a, Basis::Z, {opts.b}, opts.solver);
  const auto f = max_recovery_fidelity(bipartite, opts.a, {opts.b}, opts.ascent);
  const double q_ze = q_fidelity(full, opts.a, Basis::Z, {opts.e});
  const double q_xape = q_fidelity(copied, opts.a, Basis::X, {labels::Ap, opts.e});
  const auto pxp = guess_prob(copied, opts.a, Basis::X, {labels::Ap, opts.b}, opts.solver);

  auto common = [&](Diagnostics& diag) {
    diag.solver("p_z", pz);
    diag.solver("p_x_given_ap", pxp);
    diag.ascent("f_ab", f.value);
    diag.add("q_z_e", q_ze);
    diag.add("q_x_ap_e", q_xape);
    // Q(Z|E) >= P(X|A'B)_{psi_Z} and Q(X|A'E)_{psi_Z} >= P(Z|B).
    diag.require("order_q_z_e", q_ze - pxp.p_primal, opts.tol);
    diag.require("order_q_x_ap_e", q_xape - pz.p_primal, opts.tol);
  };

  Diagnostics da;
  common(da);
  RelationReport first = compare(RelationId::THM2A, enclosure(f.value), Sense::GreaterEq,
                                 cosine_bound(enclosure(pz), Interval::point(q_ze)), opts.tol, da);
  Diagnostics db;
  common(db);
  RelationReport second =
      compare(RelationId::THM2B, enclosure(f.value), Sense::GreaterEq,
              cosine_bound(Interval::point(q_xape), Interval::point(q_ze)), opts.tol, db);
  return {std::move(first), std::move(second)};
}

std::pair<RelationReport, RelationReport> check_theorem3(const LabeledState& psi,
                                                         const RelationOptions& opts) {
  const double d = dim_of(psi, opts.a);
  const auto pze = guess_prob(psi, opts.a, Basis::Z, {opts.e}, opts.solver);
  const auto pxb = guess_prob(psi, opts.a, Basis::X, {opts.b}, opts.solver);
  auto common = [&](Diagnostics& diag) {
    diag.solver("p_z_e", pze);
    diag.solver("p_x_b", pxb);
  };
  Diagnostics da;
  common(da);
  RelationReport first =
      compare(RelationId::THM3A, tripartite_lhs(enclosure(pze), enclosure(pxb), d),
              Sense::LessEq, Interval::point(1.0), opts.tol, da);
  Diagnostics db;
  common(db);
  RelationReport second =
      compare(RelationId::THM3B, tripartite_lhs(enclosure(pxb), enclosure(pze), d),
              Sense::LessEq, Interval::point(1.0), opts.tol, db);
  return {std::move(first), std::move(second)};
}

RelationReport check_eq13(const LabeledState& psi, const RelationOptions& opts) {
  Diagnostics diag;
  const auto sigma = max_sigma_fidelity(psi, opts.a, Basis::Z, {opts.e}, opts.ascent);
  const auto pxb = guess_prob(psi, opts.a, Basis::X, {opts.b}, opts.solver);
  diag.ascent("max_sigma_f", sigma);
  diag.solver("p_x_b", pxb);
  const Interval lhs{sigma.lower * sigma.lower, sigma.upper * sigma.upper};
  return compare(RelationId::EQ13, lhs, Sense::GreaterEq, enclosure(pxb), opts.tol, diag);
}

DualityPoint duality_point(const LabeledState& psi, const RelationOptions& opts) {
  const int d = dim_of(psi, opts.a);
  const Interval pze = enclosure(guess_prob(psi, opts.a, Basis::Z, {opts.e}, opts.solver));
  const Interval pxb = enclosure(guess_prob(psi, opts.a, Basis::X, {opts.b}, opts.solver));
  auto affine = [d](Interval p) {
    return Interval{(d * p.lo - 1.0) / (d - 1), (d * p.hi - 1.0) / (d - 1)};
  };
  return {d, affine(pze), affine(pxb)};
}

RelationReport check_duality(const LabeledState& psi, const RelationOptions& opts) {
  Diagnostics diag;
  const int d = dim_of(psi, opts.a);
  const auto pze = guess_prob(psi, opts.a, Basis::Z, {opts.e}, opts.solver);
  const auto pxb = guess_prob(psi, opts.a, Basis::X, {opts.b}, opts.solver);
  diag.solver("p_z_e", pze);
  diag.solver("p_x_b", pxb);
  const DualityPoint pt = duality_point(psi, opts);
  diag.add("distinguishability", pt.distinguishability.hi);
  diag.add("fourier_visibility", pt.fourier_visibility.hi);

  // The tripartite bound after P = (1 + (d-1) D)/d: D + (d-1) V^2/d <= 1 and symmetric.
  const double c = static_cast<double>(d - 1) / d;
  auto sq = [](double x) { return std::max(0.0, x) * std::max(0.0, x); };
  auto worst = [&](double dd, double vv) {
    double w = std::max(dd + c * sq(vv), vv + c * sq(dd));
    if (d == 2) w = std::max(w, sq(dd) + sq(vv));
    return w;
  };
  const Interval lhs{worst(pt.distinguishability.lo, pt.fourier_visibility.lo),
                     worst(pt.distinguishability.hi, pt.fourier_visibility.hi)};
  return compare(RelationId::DUALITY, lhs, Sense::LessEq, Interval::point(1.0), opts.tol, diag);
}

ThetaPoint theta_point(int d, double theta) {
  const LabeledState s = theta_state(d, theta);
  const auto z = guess_prob(s, labels::A, Basis::Z, {});
  const auto x = guess_prob(s, labels::A, Basis::X, {});
  return {theta, z.p_primal, x.p_primal};
}

std::vector<double> theta_grid(int points) {
  if (points < 2) throw std::invalid_argument("theta grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] = (std::numbers::pi / 2) * k / (points - 1);
  }
  grid.back() = std::numbers::pi / 2;
  return grid;
}

RelationReport check_qubit_circle(int points, double tol) {
  Diagnostics diag;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double worst = 0.0;
  for (double theta : theta_grid(points)) {
    const ThetaPoint p = theta_point(2, theta);
    const double v = (2 * p.p_z - 1) * (2 * p.p_z - 1) + (2 * p.p_x - 1) * (2 * p.p_x - 1);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    worst = std::max(worst, std::abs(v - 1.0));
  }
  diag.add("points", points);
  diag.add("max_deviation", worst);
  RelationReport r;
  r.relation_id = RelationId::QUBIT_CIRCLE;
  r.lhs = {lo, hi};
  r.rhs = Interval::point(1.0);
  r.slack = -worst;
  r.status = worst <= tol ? Verdict::Pass : Verdict::Fail;
  r.diagnostics = diag.take();
  return r;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over the pair.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace qguess
