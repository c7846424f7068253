#pragma once

#include <cstddef>
#include <vector>

#include "octstrip/forward_freq.hpp"
#include "octstrip/signal.hpp"

namespace octstrip {

// Mirror at z=r reflecting with amplitude s=-1 (perfect conductor):
// (u_r - u0)^(w, z_d) = -u0^(w, 2r - z_d).
std::vector<cdouble> reference_field(double r, const GaussianPulse& pulse,
                                     double z_d, const FrequencyBand& band);
cdouble reference_field_at(double r, const GaussianPulse& pulse, double z_d,
                           double omega);

// Intersections of |x| = m_s with |x + ref| = m_r; gaps within `tol` are
// closed by projecting onto the m_s circle, larger gaps yield count 0.
struct CandidatePair {
  int count = 0;
  cdouble x[2];
};
CandidatePair circle_candidates(double m_r, double m_s, cdouble ref,
                                double tol);

struct PhaseDiagnostics {
  int candidates_1 = 0;
  int candidates_2 = 0;
  double residual = 0.0;  // distance between the matched cross-pair
  bool ambiguous = false;
  bool filled = false;  // repaired from the nearest unambiguous neighbor
};

struct PhaseRetrievalResult {
  SampledSpectrum field;  // |field| == m_s sample-by-sample
  std::vector<PhaseDiagnostics> diagnostics;
  std::size_t ambiguous_count = 0;
};

// Picks, per omega, the closest pair of candidates across the two mirror
// datasets; ties within tolerance are flagged ambiguous and filled from the
// nearest clean neighbor's phase.
PhaseRetrievalResult resolve(const OctDataset& data, const GaussianPulse& pulse,
                             double z_d);

}  // namespace octstrip
