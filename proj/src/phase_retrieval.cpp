#include "octstrip/phase_retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octstrip/constants.hpp"

namespace octstrip {

cdouble reference_field_at(double r, const GaussianPulse& pulse, double z_d,
                           double omega) {
  return -pulse_spectrum(pulse, omega, 2.0 * r - z_d);
}

std::vector<cdouble> reference_field(double r, const GaussianPulse& pulse,
                                     double z_d, const FrequencyBand& band) {
  band.validate();
  std::vector<cdouble> out(band.samples);
  for (std::size_t i = 0; i < band.samples; ++i)
    out[i] = reference_field_at(r, pulse, z_d, band.omega(i));
  return out;
}

CandidatePair circle_candidates(double m_r, double m_s, cdouble ref,
                                double tol) {
  if (m_r < 0.0 || m_s < 0.0)
    throw std::invalid_argument("circle_candidates: negative magnitude");
  CandidatePair out;
  const double d = std::abs(ref);
  if (d == 0.0) return out;  // concentric circles carry no phase information
  const cdouble u = -ref / d;  // unit vector from 0 toward the second center

  if (m_s == 0.0) {
    if (std::abs(m_r - d) <= tol) {
      out.count = 1;
      out.x[0] = cdouble(0.0);
    }
    return out;
  }

  const double a = (m_s * m_s - m_r * m_r + d * d) / (2.0 * d);
  const double h2 = m_s * m_s - a * a;
  if (h2 >= 0.0) {
    const double h = std::sqrt(h2);
    const cdouble v = u * cdouble(0.0, 1.0);
    out.count = h == 0.0 ? 1 : 2;
    out.x[0] = a * u + h * v;
    out.x[1] = a * u - h * v;
    return out;
  }
  // no intersection: nearest point of the m_s circle to the other circle
  const cdouble p = (a >= 0.0 ? m_s : -m_s) * u;
  if (std::abs(std::abs(p + ref) - m_r) <= tol) {
    out.count = 1;
    out.x[0] = p;
  }
  return out;
}

PhaseRetrievalResult resolve(const OctDataset& data, const GaussianPulse& pulse,
                             double z_d) {
  const std::size_t n = data.band.samples;
  if (data.m_r1.size() != n || data.m_r2.size() != n || data.m_s.size() != n)
    throw std::invalid_argument("resolve: dataset arrays off the band grid");

  double max_ms = 0.0, rms_ms = 0.0;
  for (double v : data.m_s) {
    max_ms = std::max(max_ms, v);
    rms_ms += v * v;
  }
  rms_ms = std::sqrt(rms_ms / std::max<std::size_t>(n, 1));
  const double tol = 1e-6 * max_ms + 3.0 * data.noise_delta * rms_ms;

  PhaseRetrievalResult res;
  res.field.omega_lo = data.band.omega_lo;
  res.field.domega = data.band.domega();
  res.field.values.assign(n, cdouble(0.0));
  res.diagnostics.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double w = data.band.omega(i);
    const cdouble ref1 = reference_field_at(data.r1, pulse, z_d, w);
    const cdouble ref2 = reference_field_at(data.r2, pulse, z_d, w);
    // noise can push magnitudes slightly below zero near interference nulls
    const double ms = std::max(0.0, data.m_s[i]);
    const auto c1 = circle_candidates(std::max(0.0, data.m_r1[i]), ms, ref1, tol);
    const auto c2 = circle_candidates(std::max(0.0, data.m_r2[i]), ms, ref2, tol);
    auto& diag = res.diagnostics[i];
    diag.candidates_1 = c1.count;
    diag.candidates_2 = c2.count;
    if (c1.count == 0 || c2.count == 0) {
      diag.ambiguous = true;
      continue;
    }
    double best = -1.0, second = -1.0;
    cdouble pick(0.0);
    for (int a = 0; a < c1.count; ++a)
      for (int b = 0; b < c2.count; ++b) {
        const double dist = std::abs(c1.x[a] - c2.x[b]);
        if (best < 0.0 || dist < best) {
          second = best;
          best = dist;
          pick = 0.5 * (c1.x[a] + c2.x[b]);
        } else if (second < 0.0 || dist < second) {
          second = dist;
        }
      }
    diag.residual = best;
    if (second >= 0.0 && second - best <= tol) {
      diag.ambiguous = true;
      continue;
    }
    // constrain the answer to the m_s circle
    const double mag = std::abs(pick);
    res.field.values[i] =
        mag > 0.0 ? cdouble(ms) * pick / mag : cdouble(ms);
  }

  // repair flagged samples with the nearest unambiguous neighbor's phase
  for (std::size_t i = 0; i < n; ++i) {
    if (!res.diagnostics[i].ambiguous) continue;
    ++res.ambiguous_count;
    for (std::size_t step = 1; step < n; ++step) {
      const bool left_ok =
          step <= i && !res.diagnostics[i - step].ambiguous;
      const bool right_ok =
          i + step < n && !res.diagnostics[i + step].ambiguous;
      if (!left_ok && !right_ok) continue;
      const std::size_t j = left_ok ? i - step : i + step;
      const cdouble v = res.field.values[j];
      const double mag = std::abs(v);
      const double ms = std::max(0.0, data.m_s[i]);
      res.field.values[i] =
          mag > 0.0 ? cdouble(ms) * v / mag : cdouble(ms);
      res.diagnostics[i].filled = true;
      break;
    }
  }
  return res;
}

}  // namespace octstrip
