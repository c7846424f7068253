#include "octstrip/forward_freq.hpp"

#include <cmath>
#include <stdexcept>

#include "octstrip/constants.hpp"
#include "octstrip/phase_retrieval.hpp"

namespace octstrip {

void FrequencyBand::validate() const {
  if (!(0.0 < omega_lo && omega_lo < omega_hi))
    throw std::invalid_argument("FrequencyBand: need 0 < omega_lo < omega_hi");
  if (samples < 2) throw std::invalid_argument("FrequencyBand: samples < 2");
}

SampledSpectrum band_grid(const FrequencyBand& band) {
  band.validate();
  SampledSpectrum s;
  s.omega_lo = band.omega_lo;
  s.domega = band.domega();
  s.values.assign(band.samples, cdouble(0.0));
  return s;
}

SampledSpectrum incident_coefficients(const GaussianPulse& pulse,
                                      const FrequencyBand& band, double n0) {
  SampledSpectrum out = band_grid(band);
  const double c = speed_of_light;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = out.omega(i);
    const double d = pulse.sigma * (w - pulse.omega0) / c;
    out.values[i] = std::sqrt(2.0 * pi) * pulse.sigma / (2.0 * c) *
                    std::exp(-0.5 * d * d) *
                    std::exp(cdouble(0.0, -w / c * n0 * pulse.z0));
  }
  return out;
}

SampledSpectrum multilayer_response(const LayeredMedium& medium,
                                    const SampledSpectrum& alpha0, double z_d,
                                    int eta_max) {
  if (eta_max < 1)
    throw std::invalid_argument("multilayer_response: eta_max must be >= 1");
  medium.validate();
  const std::size_t nifc = medium.interfaces.size();
  const double c = speed_of_light;

  SampledSpectrum out = alpha0;
  for (std::size_t s = 0; s < alpha0.size(); ++s) {
    const double w = alpha0.omega(s);
    std::vector<cdouble> n(nifc + 1);
    for (std::size_t r = 0; r <= nifc; ++r) n[r] = medium.region_index(w, r);
    std::vector<cdouble> rho(nifc + 1);  // rho[j], interface j = 1..nifc
    for (std::size_t j = 1; j <= nifc; ++j)
      rho[j] = fresnel_coefficients(n[j - 1], n[j]).rho;

    const cdouble iwc = cdouble(0.0, w / c);
    // front-surface reflection
    cdouble acc =
        rho[1] * std::exp(iwc * (2.0 * n[0] * medium.interfaces[0]));

    cdouble trans = 1.0;    // prod_j (1 - rho_j^2)
    cdouble walkoff = 0.0;  // sum_l 2 (n_{l-1} - n_l) z_l
    for (std::size_t k = 1; k < nifc; ++k) {
      trans *= 1.0 - rho[k] * rho[k];
      walkoff += 2.0 * (n[k - 1] - n[k]) * medium.interfaces[k - 1];
      const double zk = medium.interfaces[k - 1];
      const double zk1 = medium.interfaces[k];
      cdouble bounce = rho[k + 1];  // rho_{k+1}^q (-rho_k)^{q-1}
      for (int q = 1; q <= eta_max; ++q) {
        acc += bounce * trans *
               std::exp(iwc * (n[k] * (2.0 * q * zk1 - 2.0 * (q - 1) * zk) +
                               walkoff));
        bounce *= -rho[k] * rho[k + 1];
      }
    }
    out.values[s] =
        alpha0.values[s] * acc * std::exp(-iwc * (n[0] * z_d));
  }
  return out;
}

cdouble transfer_matrix_reflectance(const LayeredMedium& medium, double omega) {
  const std::size_t nifc = medium.interfaces.size();
  const double c = speed_of_light;
  std::vector<cdouble> n(nifc + 1);
  for (std::size_t r = 0; r <= nifc; ++r) n[r] = medium.region_index(omega, r);

  // backward recursion over interfaces for the stack reflection amplitude
  cdouble r_next = fresnel_coefficients(n[nifc - 1], n[nifc]).rho;
  for (std::size_t j = nifc - 1; j >= 1; --j) {
    const cdouble rho = fresnel_coefficients(n[j - 1], n[j]).rho;
    const double len = medium.interfaces[j] - medium.interfaces[j - 1];
    const cdouble phase = std::exp(cdouble(0.0, 2.0 * omega / c) * n[j] * len);
    r_next = (rho + r_next * phase) / (1.0 + rho * r_next * phase);
  }
  return r_next *
         std::exp(cdouble(0.0, 2.0 * omega / c) * n[0] * medium.interfaces[0]);
}

SampledSpectrum transfer_matrix_response(const LayeredMedium& medium,
                                         const SampledSpectrum& alpha0,
                                         double z_d) {
  medium.validate();
  SampledSpectrum out = alpha0;
  const double c = speed_of_light;
  for (std::size_t s = 0; s < alpha0.size(); ++s) {
    const double w = alpha0.omega(s);
    const cdouble n0 = medium.region_index(w, 0);
    out.values[s] = alpha0.values[s] * transfer_matrix_reflectance(medium, w) *
                    std::exp(cdouble(0.0, -w / c) * n0 * z_d);
  }
  return out;
}

OctDataset simulate_oct(const LayeredMedium& medium, const GaussianPulse& pulse,
                        const FrequencyBand& band, double z_d, double r1,
                        double r2, double delta, std::uint64_t seed,
                        int eta_max) {
  if (r1 == r2) throw std::invalid_argument("simulate_oct: r1 == r2");
  OctDataset data;
  data.band = band;
  data.r1 = r1;
  data.r2 = r2;
  data.z_d = z_d;
  data.noise_delta = delta;

  const auto alpha0 = incident_coefficients(pulse, band, medium.n0);
  const auto field = multilayer_response(medium, alpha0, z_d, eta_max);
  const auto ref1 = reference_field(r1, pulse, z_d, band);
  const auto ref2 = reference_field(r2, pulse, z_d, band);

  data.resolved = field.values;
  const std::size_t n = band.samples;
  SampledSignal ms, mr1, mr2;
  ms.dt = mr1.dt = mr2.dt = 1.0;  // placeholder grids, only values matter
  ms.values.resize(n);
  mr1.values.resize(n);
  mr2.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ms.values[i] = std::abs(field.values[i]);
    mr1.values[i] = std::abs(field.values[i] + ref1[i]);
    mr2.values[i] = std::abs(field.values[i] + ref2[i]);
  }
  if (delta > 0.0) {
    mr1 = add_noise(mr1, delta, seed);
    mr2 = add_noise(mr2, delta, seed + 1);
    ms = add_noise(ms, delta, seed + 2);
  }
  data.m_s = std::move(ms.values);
  data.m_r1 = std::move(mr1.values);
  data.m_r2 = std::move(mr2.values);
  return data;
}

}  // namespace octstrip
