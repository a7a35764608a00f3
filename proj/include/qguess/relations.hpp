#pragma once

// One checker per uncertainty relation. Every checker compares certified
// enclosures in the conservative direction: PASS means the inequality holds
// for the true optima, FAIL means it is violated even under the most
// favourable reading of the enclosures, anything else is INCONCLUSIVE.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qguess/discrimination.hpp"
#include "qguess/recovery.hpp"

namespace qguess {

enum class RelationId {
  EQ3,           // acos F(A|B) <= acos P(Z|B) + acos P(X|B)
  THM1,          // constructive circuit bound with P(X|BA')_{psi_Z}
  LEMMA1,        // P(X|BA')_{psi_Z} >= P(X|B)
  THM2A,         // acos F(A|B) <= acos P(Z|B) + acos Q(Z|E)
  THM2B,         // acos F(A|B) <= acos Q(X|A'E)_{psi_Z} + acos Q(Z|E)
  THM3A,         // P(Z|E) + (P(X|B) - 1/d)^2 <= 1
  THM3B,         // P(X|B) + (P(Z|E) - 1/d)^2 <= 1
  EQ13,          // max_sigma F(psi_Z^{AE}, pi (x) sigma)^2 >= P(X|B)
  QUBIT_CIRCLE,  // (2P_Z - 1)^2 + (2P_X - 1)^2 = 1 along the theta family, d = 2
  DUALITY,       // distinguishability/visibility form of THM3 (and the circle for d = 2)
};

const char* to_string(RelationId id);

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double x) { return {x, x}; }
};

struct RelationReport {
  RelationId relation_id = RelationId::EQ3;
  Interval lhs;
  Interval rhs;
  double slack = 0.0;  // conservative margin; >= -tol is a pass
  Verdict status = Verdict::Inconclusive;
  std::uint64_t seed = 0;
  // Ordered (name, value) pairs: solver gaps, iteration counts, side checks.
  std::vector<std::pair<std::string, double>> diagnostics;

  bool pass() const { return status == Verdict::Pass; }
  double diagnostic(const std::string& name) const;  // NaN if absent
};

// JSON object with relation_id, lhs_lo, lhs_hi, rhs_lo, rhs_hi, slack, pass,
// seed, followed by status and diagnostics.
nlohmann::ordered_json to_json(const RelationReport& report);

struct RelationOptions {
  double tol = 1e-6;
  SolverOptions solver;
  AscentOptions ascent;
  std::string a = labels::A;
  std::string b = labels::B;
  std::string e = labels::E;
};

// cos(min(acos p + acos q, pi/2)), with arguments clamped to [0, 1]. This is
// the fidelity bound the acos relations assert; it is increasing in p and q.
double cosine_bound(double p, double q);

RelationReport check_eq3(const LabeledState& psi, const RelationOptions& opts = {});
RelationReport check_theorem1(const LabeledState& psi, const RelationOptions& opts = {});
RelationReport check_lemma1(const LabeledState& psi, const RelationOptions& opts = {});
std::pair<RelationReport, RelationReport> check_theorem2(const LabeledState& psi,
                                                         const RelationOptions& opts = {});
std::pair<RelationReport, RelationReport> check_theorem3(const LabeledState& psi,
                                                         const RelationOptions& opts = {});
RelationReport check_eq13(const LabeledState& psi, const RelationOptions& opts = {});

/// Wave-particle duality coordinates. Visibility uses the Fourier X only, not
/// a maximum over every observable conjugate to Z.
struct DualityPoint {
  int d = 2;
  Interval distinguishability;   // (d P(Z|E) - 1)/(d - 1)
  Interval fourier_visibility;   // (d P(X|B) - 1)/(d - 1)
};

DualityPoint duality_point(const LabeledState& psi, const RelationOptions& opts = {});
RelationReport check_duality(const LabeledState& psi, const RelationOptions& opts = {});

/// Deterministic guessing of Z and X on one copy of |theta>.
struct ThetaPoint {
  double theta;
  double p_z;
  double p_x;
};

ThetaPoint theta_point(int d, double theta);
// Uniform grid of `points` angles over [0, pi/2].
std::vector<double> theta_grid(int points);
RelationReport check_qubit_circle(int points, double tol = 1e-9);

// Independent 64-bit seed for state `index` of a sweep.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace qguess
