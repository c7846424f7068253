#pragma once

#include <cstdint>
#include <vector>

#include "octstrip/medium.hpp"
#include "octstrip/signal.hpp"

namespace octstrip {

struct FrequencyBand {
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  std::size_t samples = 0;
  double domega() const {
    return (omega_hi - omega_lo) / static_cast<double>(samples - 1);
  }
  double omega(std::size_t i) const {
    return omega_lo + domega() * static_cast<double>(i);
  }
  void validate() const;
};

// Zero-valued spectrum on the band grid.
SampledSpectrum band_grid(const FrequencyBand& band);

// Coefficients alpha0 of the incident field u0 = alpha0 e^{i (w/c) n0 z} in
// the entry region.
SampledSpectrum incident_coefficients(const GaussianPulse& pulse,
                                      const FrequencyBand& band,
                                      double n0 = 1.0);

// Back-reflected field (u - u0)^(w, z_d): front-surface reflection plus the
// per-layer multiple-bounce series truncated at eta_max round trips.
SampledSpectrum multilayer_response(const LayeredMedium& medium,
                                    const SampledSpectrum& alpha0, double z_d,
                                    int eta_max);

// Exact total reflection amplitude of the stack (all multiple reflections),
// referenced like the series: reflected field = r(w) alpha0 e^{-i(w/c) n0 z}.
cdouble transfer_matrix_reflectance(const LayeredMedium& medium, double omega);

// Same, evaluated on a band against given incident coefficients, including
// the detector-plane phase; the exact counterpart of multilayer_response.
SampledSpectrum transfer_matrix_response(const LayeredMedium& medium,
                                         const SampledSpectrum& alpha0,
                                         double z_d);

// Phase-less OCT measurement set: sample magnitude plus two reference
// interferograms with the mirror at r1 and r2.
struct OctDataset {
  FrequencyBand band;
  double r1 = 0.0;
  double r2 = 0.0;
  double z_d = 0.0;
  double noise_delta = 0.0;
  std::vector<double> m_r1, m_r2, m_s;
  std::vector<cdouble> resolved;  // noise-free complex truth, for diagnostics
};

OctDataset simulate_oct(const LayeredMedium& medium, const GaussianPulse& pulse,
                        const FrequencyBand& band, double z_d, double r1,
                        double r2, double delta, std::uint64_t seed,
                        int eta_max = 5);

}  // namespace octstrip
