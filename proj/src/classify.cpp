#include <algorithm>
#include <cmath>
#include <limits>

#include "divlab/criteria.hpp"

namespace divlab {

const char* ynu_name(YNU v) {
  switch (v) {
    case YNU::yes: return "yes";
    case YNU::no: return "no";
    case YNU::unknown: return "unknown";
  }
  return "unknown";
}

const char* dichotomy_name(DichotomyV v) {
  switch (v) {
    case DichotomyV::recurrent: return "recurrent";
    case DichotomyV::transient: return "transient";
    case DichotomyV::unknown: return "unknown";
  }
  return "unknown";
}

const char* inv_unique_name(InvUniqueV v) {
  switch (v) {
    case InvUniqueV::yes: return "yes";
    case InvUniqueV::no_invariant_exists: return "no-invariant-exists";
    case InvUniqueV::unknown: return "unknown";
  }
  return "unknown";
}

namespace {

bool holds(const std::vector<CriterionVerdict>& vs, CriterionId id) {
  for (const auto& v : vs)
    if (v.id == id) return v.verdict == Verdict::holds;
  return false;
}

void set_ynu(YNU* slot, std::string* from, YNU value, const std::string& anchor) {
  if (value == YNU::unknown) return;
  if (*slot == YNU::unknown) {
    *slot = value;
    *from = anchor;
    return;
  }
  if (*slot != value)
    fail(ErrKind::internal, "classification contradiction: conclusion derived as '" +
                                std::string(ynu_name(*slot)) + "' via " + *from +
                                " and as '" + ynu_name(value) + "' via " + anchor);
}

void set_dich(DichotomyV* slot, std::string* from, DichotomyV value, const std::string& anchor) {
  if (value == DichotomyV::unknown) return;
  if (*slot == DichotomyV::unknown) {
    *slot = value;
    *from = anchor;
    return;
  }
  if (*slot != value)
    fail(ErrKind::internal, "classification contradiction: dichotomy derived as '" +
                                std::string(dichotomy_name(*slot)) + "' via " + *from +
                                " and as '" + dichotomy_name(value) + "' via " + anchor);
}

void set_inv(InvUniqueV* slot, std::string* from, InvUniqueV value, const std::string& anchor) {
  if (value == InvUniqueV::unknown) return;
  if (*slot == InvUniqueV::unknown) {
    *slot = value;
    *from = anchor;
    return;
  }
  if (*slot != value)
    fail(ErrKind::internal, "classification contradiction: invariant uniqueness derived as '" +
                                std::string(inv_unique_name(*slot)) + "' via " + *from +
                                " and as '" + inv_unique_name(value) + "' via " + anchor);
}

}  // namespace

Classification classify(const CoefficientField& f,
                        const std::vector<CriterionVerdict>& verdicts,
                        const MuEstimate& mu, const CriteriaSpec& spec) {
  Classification c;
  c.mu_finite = mu.finiteness;
  c.mu_total = mu.total;

  // Boundedness of rho and 1/rho, sampled independently of any criterion so
  // the dichotomy rules do not depend on which checks were requested.
  {
    const RhoShellBounds rb = rho_shell_bounds(f, spec);
    // A shell sup that underflows to exact zero witnesses decay, not growth;
    // floor the sups before taking slopes so a vanishing tail reads as a flat
    // (non-increasing) sequence instead of poisoning the log-slopes with NaNs.
    // The inf side keeps the raw values: a zero there genuinely means 1/rho
    // is unbounded, and the positivity gate below catches it.
    std::vector<double> sup_floor = rb.sup;
    for (double& v : sup_floor) v = std::max(v, std::numeric_limits<double>::min());
    const double up = tail_median(dyadic_log2_slopes(sup_floor), spec.tail_fraction);
    const double dn = tail_median(dyadic_log2_slopes(rb.inf), spec.tail_fraction);
    bool sup_finite = true;
    for (const double v : rb.sup)
      if (!std::isfinite(v)) sup_finite = false;
    c.rho_bounded = sup_finite && !std::isnan(up) && up <= 0.05;
    bool inf_positive = true;
    for (const double v : rb.inf)
      if (!(v > 0.0)) inf_positive = false;
    c.inv_rho_bounded = inf_positive && !std::isnan(dn) && dn >= -0.05;
  }

  const bool fin = mu.finiteness == Finiteness::finite;

  // Direct criterion rules, then the dictionary closure to a fixed point.
  if (holds(verdicts, CriterionId::THM31_I)) {
    set_ynu(&c.conservative, &c.conservative_from, YNU::yes, "THM31_I");
    set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::yes, "THM31_I");
    set_ynu(&c.l1_unique, &c.l1_unique_from, YNU::yes, "THM31_I");
  }
  if (holds(verdicts, CriterionId::THM31_II)) {
    set_ynu(&c.conservative, &c.conservative_from, YNU::yes, "THM31_II");
    set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::yes, "THM31_II");
    set_ynu(&c.l1_unique, &c.l1_unique_from, YNU::yes, "THM31_II");
  }
  if (holds(verdicts, CriterionId::THM33) && fin) {
    set_dich(&c.dichotomy, &c.dichotomy_from, DichotomyV::recurrent, "THM33");
    set_ynu(&c.l1_unique, &c.l1_unique_from, YNU::yes, "THM33");
  }
  const bool s2 = holds(verdicts, CriterionId::S2);
  if (s2) {
    set_ynu(&c.mu_unique_infinitesimal, &c.mu_unique_infinitesimal_from, YNU::yes, "THM41");
  }
  if (s2 && (c.rho_bounded || c.inv_rho_bounded)) {
    if (f.d == 2) {
      set_dich(&c.dichotomy, &c.dichotomy_from, DichotomyV::recurrent, "THM43_I");
    } else if (f.d >= 3) {
      set_dich(&c.dichotomy, &c.dichotomy_from, DichotomyV::transient, "THM43_II");
      if (c.rho_bounded && fin) {
        set_ynu(&c.conservative, &c.conservative_from, YNU::no, "THM43_III");
        set_inv(&c.mu_unique_invariant, &c.mu_unique_invariant_from,
                InvUniqueV::no_invariant_exists, "THM43_III");
        set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::no, "THM43_III");
      }
    }
  }
  if (holds(verdicts, CriterionId::PROP44_I)) {
    set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::yes, "PROP44_I");
    set_inv(&c.mu_unique_invariant, &c.mu_unique_invariant_from, InvUniqueV::yes, "PROP44_I");
    set_ynu(&c.mu_unique_infinitesimal, &c.mu_unique_infinitesimal_from, YNU::yes, "PROP44_I");
  }
  if (holds(verdicts, CriterionId::PROP44_II)) {
    set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::yes, "PROP44_II");
    set_inv(&c.mu_unique_invariant, &c.mu_unique_invariant_from, InvUniqueV::yes, "PROP44_II");
    set_ynu(&c.mu_unique_infinitesimal, &c.mu_unique_infinitesimal_from, YNU::yes, "PROP44_II");
  }

  // Dictionary closure. Each pass may unlock another rule; the rule set is
  // monotone, so a handful of sweeps reaches the fixed point.
  for (int pass = 0; pass < 8; ++pass) {
    const Classification before = c;

    // Recurrence is stronger than conservativeness, and forces uniqueness.
    if (c.dichotomy == DichotomyV::recurrent) {
      set_ynu(&c.conservative, &c.conservative_from, YNU::yes, "REC_CONS");
      set_ynu(&c.mu_unique_infinitesimal, &c.mu_unique_infinitesimal_from, YNU::yes, "REC_UNIQ");
      set_inv(&c.mu_unique_invariant, &c.mu_unique_invariant_from, InvUniqueV::yes, "REC_UNIQ");
    }
    // mu invariant <=> L1 unique (yes direction both ways).
    if (c.mu_invariant == YNU::yes)
      set_ynu(&c.l1_unique, &c.l1_unique_from, YNU::yes, "PROP22_II");
    if (c.l1_unique == YNU::yes)
      set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::yes, "PROP22_II");
    // Finite mass: invariance <=> conservativeness <=> recurrence.
    if (fin) {
      if (c.conservative == YNU::yes) {
        set_dich(&c.dichotomy, &c.dichotomy_from, DichotomyV::recurrent, "PROP22_IV");
        set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::yes, "PROP22_IV");
      }
      if (c.mu_invariant == YNU::yes)
        set_ynu(&c.conservative, &c.conservative_from, YNU::yes, "PROP22_IV");
      if (c.dichotomy == DichotomyV::transient)
        set_ynu(&c.conservative, &c.conservative_from, YNU::no, "PROP22_IV");
      if (c.conservative == YNU::no)
        set_dich(&c.dichotomy, &c.dichotomy_from, DichotomyV::transient, "PROP22_IV");
    }
    // No invariant measure at all certainly means mu is not invariant.
    if (c.mu_unique_invariant == InvUniqueV::no_invariant_exists)
      set_ynu(&c.mu_invariant, &c.mu_invariant_from, YNU::no, "THM43_III");

    const bool stable = c.conservative == before.conservative &&
                        c.mu_invariant == before.mu_invariant &&
                        c.mu_unique_infinitesimal == before.mu_unique_infinitesimal &&
                        c.mu_unique_invariant == before.mu_unique_invariant &&
                        c.dichotomy == before.dichotomy && c.l1_unique == before.l1_unique;
    if (stable) break;
  }
  return c;
}

}  // namespace divlab
