#pragma once
// Mechanical evaluation of the sufficient criteria on a coefficient field.
//
// Every check runs on deterministic shell samples (dyadic radii, fixed
// direction sets) and reports one of three verdicts:
//   holds              - fitted growth data satisfies the hypothesis with margin
//   fails_on_witness   - hypothesis demonstrably violated at a recorded point
//   undetermined       - neither, within the guard bands
// plus fitted constants and per-criterion caveats. Bound fitting over finite
// samples can never prove an almost-everywhere hypothesis; verdicts are
// evidence, and the independent probes exist to cross-check them.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divlab/field.hpp"
#include "divlab/quadrature.hpp"

namespace divlab {

enum class CriterionId {
  THM31_I,
  THM31_II,
  THM33,
  S2,
  PROP44_I,
  PROP44_II,
  CMP_TAKEDA,
  CMP_STURM,
  CMP_SECTORIAL,
};

const char* criterion_name(CriterionId id);

enum class Verdict { holds, fails_on_witness, undetermined };

const char* verdict_name(Verdict v);

struct Witness {
  std::vector<double> x;
  double lhs = 0.0;  // the quantity that must stay below the bound
  double rhs = 0.0;  // the violated bound's value at x
  std::string note;
};

// Dyadic growth data backing a verdict: shell radii, the sampled extreme
// values, their log2 slopes, and the fitted envelope constants.
struct GrowthFit {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> slopes;
  double c1 = 0.0, c2 = 0.0, beta_vol = 0.0;  // volume side: mu(B_r) <= c1 r^beta + c2
  double C1 = 0.0, alpha = 0.0;               // coefficient side: <= C1 r^{2 alpha}
  int N0 = 0;                                 // base radius of the shell ladder
  double margin = 0.0;                        // distance to the verdict threshold
};

struct CriterionVerdict {
  CriterionId id = CriterionId::THM31_I;
  Verdict verdict = Verdict::undetermined;
  std::optional<Witness> witness;
  std::optional<GrowthFit> fit;
  std::vector<std::pair<std::string, double>> constants;  // report order preserved
  std::string caveat;  // applicability notes specific to this criterion
  std::string error;   // non-empty: evaluation failed (verdict is undetermined)
};

struct CriteriaSpec {
  double r_max = 1024.0;
  int directions = 512;
  int radial_per_shell = 64;
  std::uint64_t seed = 1;
  double tail_fraction = 0.5;
};

// --- individual checks -------------------------------------------------------

// Polynomial volume growth of mu plus coefficient growth |A| + |C|^2/Phi_A
// + |Bbar|^2 <= C1 |x|^{2 alpha}, alpha < 1.
CriterionVerdict check_thm31_i(const CoefficientField& f, const MuEstimate& mu,
                               const CriteriaSpec& spec);

// Integral form: (|A| + |C|^2/Phi_A)/(1+|x|^2) + |Bbar|/(1+|x|) in L^1(mu).
CriterionVerdict check_thm31_ii(const CoefficientField& f, const CriteriaSpec& spec);

// Log-Lyapunov rate: <A x, x>/|x|^2 + |C|^2/Phi_A + |<Bbar, x>| log|x|
// <= K (|x| log|x|)^2.
CriterionVerdict check_thm33(const CoefficientField& f, const CriteriaSpec& spec);

// Global bounds of the weighted coefficients: theta 1 <= rho A <= M 1 and
// max |rho c_ij| <= M, with declared Bbar = 0. Also records whether rho and
// 1/rho look bounded (used by the dichotomy rules downstream).
CriterionVerdict check_s2(const CoefficientField& f, const CriteriaSpec& spec);

// Uniformly bounded setting: c1 <= rho <= c2, A uniformly elliptic and
// bounded, |c_ij| <= Lambda.
CriterionVerdict check_prop44_i(const CoefficientField& f, const CriteriaSpec& spec);

// Factorized setting: rho with at-most-polynomial decay/growth and declared
// bounded elliptic products rho A, rho C.
CriterionVerdict check_prop44_ii(const CoefficientField& f, const CriteriaSpec& spec);

// Comparison rows (never feed the classifier):
CriterionVerdict check_cmp_takeda(const CoefficientField& f, const CriteriaSpec& spec);
CriterionVerdict check_cmp_sturm(const CoefficientField& f, const MuEstimate& mu,
                                 const CriteriaSpec& spec);
CriterionVerdict check_cmp_sectorial(const CoefficientField& f, const CriteriaSpec& spec);

// All criteria in report order, each wrapped so evaluation errors become
// per-criterion error verdicts instead of aborting the batch.
std::vector<CriterionVerdict> run_all_criteria(const CoefficientField& f,
                                               const MuEstimate& mu,
                                               const CriteriaSpec& spec);

// Dyadic shell bounds of the density, sampled with the same fan-aware shell
// sweep the criteria use; the classifier's boundedness flags derive from it.
struct RhoShellBounds {
  std::vector<double> radii, sup, inf;
};
RhoShellBounds rho_shell_bounds(const CoefficientField& f, const CriteriaSpec& spec);

// --- classification -----------------------------------------------------------

enum class YNU { yes, no, unknown };
enum class DichotomyV { recurrent, transient, unknown };
enum class InvUniqueV { yes, no_invariant_exists, unknown };

const char* ynu_name(YNU v);
const char* dichotomy_name(DichotomyV v);
const char* inv_unique_name(InvUniqueV v);

struct Classification {
  YNU conservative = YNU::unknown;
  std::string conservative_from;
  YNU mu_invariant = YNU::unknown;
  std::string mu_invariant_from;
  YNU mu_unique_infinitesimal = YNU::unknown;
  std::string mu_unique_infinitesimal_from;
  InvUniqueV mu_unique_invariant = InvUniqueV::unknown;
  std::string mu_unique_invariant_from;
  DichotomyV dichotomy = DichotomyV::unknown;
  std::string dichotomy_from;
  YNU l1_unique = YNU::unknown;  // yes or unknown only
  std::string l1_unique_from;
  Finiteness mu_finite = Finiteness::unknown;
  double mu_total = 0.0;
  bool rho_bounded = false;
  bool inv_rho_bounded = false;
};

// Derives the classification from criterion verdicts plus the measure
// estimate via the fixed dictionary rules. Only `holds` verdicts fire rules;
// fails_on_witness and undetermined are treated identically (a failed
// sufficient condition concludes nothing). Derivations that contradict each
// other raise ErrKind::internal naming both anchors.
Classification classify(const CoefficientField& f,
                        const std::vector<CriterionVerdict>& verdicts,
                        const MuEstimate& mu, const CriteriaSpec& spec);

}  // namespace divlab
