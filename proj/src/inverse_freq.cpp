#include "octstrip/inverse_freq.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "octstrip/constants.hpp"
#include "octstrip/forward_freq.hpp"

namespace octstrip {

namespace {

// Least-squares parabola y = a + b x + c x^2 in the scaled coordinate
// x = (omega - center)/scale; keeps the normal equations well conditioned
// at optical frequencies.
struct QuadFit {
  double a = 0.0, b = 0.0, c = 0.0;
  double center = 0.0;
  double scale = 1.0;
  double eval(double omega) const {
    const double x = (omega - center) / scale;
    return a + x * (b + x * c);
  }
  double deriv(double omega) const {
    const double x = (omega - center) / scale;
    return (b + 2.0 * c * x) / scale;
  }
};

QuadFit fit_quadratic(const SampledSpectrum& grid, const std::vector<double>& y,
                      std::size_t begin, std::size_t end) {
  QuadFit fit;
  fit.center = 0.5 * (grid.omega(begin) + grid.omega(end - 1));
  fit.scale = std::max(0.5 * (grid.omega(end - 1) - grid.omega(begin)), 1.0);
  double s[5] = {0, 0, 0, 0, 0};
  double t[3] = {0, 0, 0};
  for (std::size_t i = begin; i < end; ++i) {
    const double x = (grid.omega(i) - fit.center) / fit.scale;
    const double v = y[i - begin];
    double xp = 1.0;
    for (int p = 0; p < 5; ++p, xp *= x) {
      s[p] += xp;
      if (p < 3) t[p] += v * xp;
    }
  }
  // Solve the 3x3 normal equations by Cramer's rule.
  const double m00 = s[0], m01 = s[1], m02 = s[2];
  const double m11 = s[2], m12 = s[3], m22 = s[4];
  const double det = m00 * (m11 * m22 - m12 * m12) -
                     m01 * (m01 * m22 - m12 * m02) +
                     m02 * (m01 * m12 - m11 * m02);
  if (std::abs(det) < 1e-12 * std::max(1.0, m00 * m11 * m22)) {
    fit.a = t[0] / std::max(m00, 1.0);
    return fit;
  }
  const double d0 = t[0] * (m11 * m22 - m12 * m12) -
                    m01 * (t[1] * m22 - m12 * t[2]) +
                    m02 * (t[1] * m12 - m11 * t[2]);
  const double d1 = m00 * (t[1] * m22 - t[2] * m12) -
                    t[0] * (m01 * m22 - m12 * m02) +
                    m02 * (m01 * t[2] - t[1] * m02);
  const double d2 = m00 * (m11 * t[2] - t[1] * m12) -
                    m01 * (m01 * t[2] - t[1] * m02) +
                    t[0] * (m01 * m12 - m11 * m02);
  fit.a = d0 / det;
  fit.b = d1 / det;
  fit.c = d2 / det;
  return fit;
}

double max_magnitude(const SampledSpectrum& s) {
  double m = 0.0;
  for (const cdouble& v : s.values) m = std::max(m, std::abs(v));
  return m;
}

bool curve_in_band(const std::vector<double>& n, double lo, double hi) {
  for (double v : n) {
    if (!(v >= lo && v <= hi)) return false;
  }
  return true;
}

std::size_t checked_size(const SampledSpectrum& a, const SampledSpectrum& b,
                         const char* what) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument(std::string(what) + ": size mismatch");
  return a.size();
}

}  // namespace

GatedPeak isolate_first_peak(const SampledSpectrum& m, const GatePolicy& gate) {
  if (m.size() < 2) throw std::invalid_argument("isolate_first_peak: band too small");
  if (!(gate.prominence > 0.0 && gate.prominence < 1.0))
    throw std::invalid_argument("isolate_first_peak: prominence outside (0,1)");
  if (!(gate.sigma_factor > 0.0) || !(gate.max_gap_fraction > 0.0))
    throw std::invalid_argument("isolate_first_peak: gate widths must be positive");

  GatedPeak out;
  const ComplexTrace g = band_time_trace(m, gate.pad_to);
  const std::size_t n = g.size();
  std::vector<double> env(n);
  double gmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    env[i] = std::abs(g.values[i]);
    gmax = std::max(gmax, env[i]);
  }
  if (gmax <= 0.0) return out;

  // Candidate arrivals are found on a smoothed envelope.  A pulse whose
  // spectrum fills the whole measured band rings in time with sinc sidelobes
  // spaced one resolution lobe (2 pi / bandwidth = pad factor in samples)
  // apart; averaging over two lobes per side melts those sidelobes into a
  // monotone skirt so each arrival contributes one maximum.  Peak position,
  // height and width are then refined on the raw envelope.
  const std::size_t lobe = (n + m.size() - 1) / m.size();
  const std::size_t h = 2 * lobe;
  std::vector<double> pref(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) pref[i + 1] = pref[i] + env[i];
  std::vector<double> smooth(n);
  double smax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > h ? i - h : 0;
    const std::size_t hi = std::min(i + h, n - 1);
    smooth[i] = (pref[hi + 1] - pref[lo]) / static_cast<double>(hi + 1 - lo);
    smax = std::max(smax, smooth[i]);
  }

  const double floor = gate.prominence * smax;
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (smooth[i] >= floor && smooth[i] >= smooth[i - 1] && smooth[i] > smooth[i + 1])
      cand.push_back(i);
  }
  if (cand.empty()) return out;

  // A strong arrival's smoothed skirt still undulates gently, and those bumps
  // pass the floor test.  Distinct arrivals are separated by deep valleys, so
  // keep a candidate only if the envelope falls below half its height before
  // climbing to higher ground; skirt ripples barely dip and are dropped.  The
  // tallest candidate never finds higher ground and is always kept.
  {
    std::vector<std::size_t> keep;
    for (std::size_t c : cand) {
      bool skirt = false;
      double low = smooth[c];
      for (std::size_t i = c; i-- > 0;) {
        low = std::min(low, smooth[i]);
        if (smooth[i] > smooth[c]) {
          skirt = low > 0.5 * smooth[c];
          break;
        }
      }
      if (!skirt) {
        low = smooth[c];
        for (std::size_t i = c + 1; i < n; ++i) {
          low = std::min(low, smooth[i]);
          if (smooth[i] > smooth[c]) {
            skirt = low > 0.5 * smooth[c];
            break;
          }
        }
      }
      if (!skirt) keep.push_back(c);
    }
    cand = std::move(keep);
  }

  // Ripples riding on one arrival's plateau yield maxima a lobe apart; merge
  // anything within the smoothing radius into one candidate (the strongest),
  // so the gap cap below only sees genuinely distinct arrivals.
  std::vector<std::size_t> merged;
  for (std::size_t c : cand) {
    if (!merged.empty() && c - merged.back() <= 2 * h) {
      if (smooth[c] > smooth[merged.back()]) merged.back() = c;
    } else {
      merged.push_back(c);
    }
  }
  cand = std::move(merged);

  // Sharpen the earliest candidate to the raw-envelope maximum nearby.
  std::size_t pk = cand.front();
  {
    const std::size_t lo = std::max<std::size_t>(pk > h + 1 ? pk - h - 1 : 0, 1);
    const std::size_t hi = std::min(pk + h + 1, n - 2);
    for (std::size_t i = lo; i <= hi; ++i)
      if (env[i] > env[pk]) pk = i;
    pk = std::clamp<std::size_t>(pk, 1, n - 2);
  }

  // Log-parabola refinement of the arrival time and height.
  double tp = g.time(pk);
  double amp = env[pk];
  if (env[pk - 1] > 0.0 && env[pk + 1] > 0.0 && env[pk] > 0.0) {
    const double la = std::log(env[pk - 1]);
    const double lb = std::log(env[pk]);
    const double lc = std::log(env[pk + 1]);
    const double den = la - 2.0 * lb + lc;
    if (den < 0.0) {
      const double delta = std::clamp(0.5 * (la - lc) / den, -0.5, 0.5);
      tp = g.time(pk) + delta * g.dt;
      amp = std::exp(lb - 0.25 * (la - lc) * delta);
    }
  }

  // Measured width: e^{-1/2} crossings of the envelope around the peak.
  const double level = amp * std::exp(-0.5);
  double t_left = g.time(0);
  for (std::size_t i = pk; i-- > 0;) {
    if (env[i] < level) {
      const double frac = (level - env[i]) / std::max(env[i + 1] - env[i], 1e-300);
      t_left = g.time(i) + frac * g.dt;
      break;
    }
  }
  double t_right = g.time(n - 1);
  for (std::size_t i = pk + 1; i < n; ++i) {
    if (env[i] < level) {
      const double frac = (env[i - 1] - level) / std::max(env[i - 1] - env[i], 1e-300);
      t_right = g.time(i - 1) + frac * g.dt;
      break;
    }
  }
  const double sigma = std::max(0.5 * (t_right - t_left), g.dt);

  // Half-width: sigma_factor widths, capped by the gaps to neighbor peaks.
  // The sharpened peak can sit a few samples off the smoothed candidate that
  // seeded it, so candidates within the smoothing radius are this same
  // arrival, not a neighbor to keep out of the gate.
  double half = gate.sigma_factor * sigma;
  for (std::size_t c : cand) {
    const double gap = std::abs(g.time(c) - tp);
    if (gap <= static_cast<double>(2 * h) * g.dt) continue;
    half = std::min(half, gate.max_gap_fraction * gap);
  }
  half = std::max(half, g.dt);

  const double t1 = tp - half;
  const double t2 = tp + half;
  out.gated = apply_time_gate(m, t1, t2, gate.pad_to);
  out.t_peak = tp;
  out.amplitude = amp;
  out.sigma = sigma;
  out.t1 = t1;
  out.t2 = t2;
  out.found = true;
  return out;
}

SampledSpectrum apply_time_gate(const SampledSpectrum& m, double t1, double t2,
                                std::size_t pad_to) {
  const ComplexTrace g = band_time_trace(m, pad_to);
  ComplexTrace win = g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = g.time(i);
    if (t < t1 || t > t2) win.values[i] = cdouble(0.0, 0.0);
  }
  return band_from_time_trace(win, m.omega_lo, m.domega, m.size());
}

IndexStep recover_index_scalar(const SampledSpectrum& gated,
                               const SampledSpectrum& alpha0, double n_current,
                               double n_lo, double n_hi) {
  checked_size(gated, alpha0, "recover_index_scalar");
  const double a = max_magnitude(alpha0);
  if (!(a > 0.0))
    throw std::invalid_argument("recover_index_scalar: zero incident spectrum");
  const double p = max_magnitude(gated) / a;
  return recover_index_step({}, p, n_current, n_lo, n_hi);
}

IndexCurveStep recover_index_curve(const SampledSpectrum& gated,
                                   const SampledSpectrum& known_phase,
                                   const std::vector<double>& n_prev,
                                   std::size_t begin, std::size_t end,
                                   double n_lo, double n_hi) {
  const std::size_t size = checked_size(gated, known_phase, "recover_index_curve");
  if (n_prev.size() != size)
    throw std::invalid_argument("recover_index_curve: index history size mismatch");
  if (!(begin < end) || end > size)
    throw std::invalid_argument("recover_index_curve: bad window");

  IndexCurveStep out;
  const std::size_t count = end - begin;
  out.n.resize(count);
  out.rho.resize(count);
  std::vector<double> flipped_n(count);
  for (std::size_t i = begin; i < end; ++i) {
    const cdouble k = known_phase.values[i];
    const cdouble g = gated.values[i];
    const cdouble num = k - g;
    const cdouble den = k + g;
    const double ka = std::abs(k);
    if (std::abs(den) < 1e-9 * std::max(ka, 1e-300) ||
        std::abs(num) < 1e-9 * std::max(ka, 1e-300))
      throw std::runtime_error(
          "recover_index_curve: reflection magnitude near unity");
    const cdouble r = num / den;
    out.n[i - begin] = n_prev[i] * std::real(r);
    flipped_n[i - begin] = n_prev[i] * std::real(1.0 / r);
  }
  if (!curve_in_band(out.n, n_lo, n_hi)) {
    if (!curve_in_band(flipped_n, n_lo, n_hi)) {
      double dlo = out.n[0], dhi = out.n[0], flo = flipped_n[0], fhi = flipped_n[0];
      for (std::size_t i = 0; i < count; ++i) {
        dlo = std::min(dlo, out.n[i]);
        dhi = std::max(dhi, out.n[i]);
        flo = std::min(flo, flipped_n[i]);
        fhi = std::max(fhi, flipped_n[i]);
      }
      throw std::runtime_error(
          "recover_index_curve: both sign branches leave the admissible band "
          "(direct [" + std::to_string(dlo) + ", " + std::to_string(dhi) +
          "], flipped [" + std::to_string(flo) + ", " + std::to_string(fhi) +
          "], band [" + std::to_string(n_lo) + ", " + std::to_string(n_hi) + "])");
    }
    out.n = std::move(flipped_n);
    out.flipped = true;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double np = n_prev[begin + i];
    out.rho[i] = (np - out.n[i]) / (np + out.n[i]);
  }
  return out;
}

PhaseSlope recover_length_freq(const SampledSpectrum& gated,
                               const SampledSpectrum& known_phase,
                               double group_index, double path_offset,
                               std::size_t omega_star_index, std::size_t begin,
                               std::size_t end) {
  const std::size_t size = checked_size(gated, known_phase, "recover_length_freq");
  if (!(group_index > 0.0))
    throw std::invalid_argument("recover_length_freq: group index must be positive");
  if (begin < spectral_derivative_margin ||
      end + spectral_derivative_margin > size || !(begin < end))
    throw std::invalid_argument("recover_length_freq: window inside differentiator margins required");
  if (omega_star_index < begin || omega_star_index >= end)
    throw std::invalid_argument("recover_length_freq: evaluation index outside window");

  SampledSpectrum f;
  f.omega_lo = gated.omega_lo;
  f.domega = gated.domega;
  f.values.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const cdouble k = known_phase.values[i];
    if (std::abs(k) <= 0.0)
      throw std::invalid_argument("recover_length_freq: vanishing known phase");
    const cdouble q = gated.values[i] / k;
    const double mag = std::abs(q);
    f.values[i] = mag > 0.0 ? q / mag : cdouble(1.0, 0.0);
  }
  const SampledSpectrum df = spectral_derivative(f);

  PhaseSlope out;
  out.phi.resize(size);
  for (std::size_t i = 0; i < size; ++i)
    out.phi[i] = speed_of_light * std::abs(df.values[i]);
  out.phi_star = out.phi[omega_star_index];

  double lo = out.phi[begin], hi = out.phi[begin], sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    lo = std::min(lo, out.phi[i]);
    hi = std::max(hi, out.phi[i]);
    sum += out.phi[i];
  }
  const double mean = sum / static_cast<double>(end - begin);
  out.phi_mean = mean;
  out.flatness = mean > 0.0 ? (hi - lo) / mean : 0.0;

  const double plus = (out.phi_star + path_offset) / (2.0 * group_index);
  out.z = plus >= 0.0 ? plus : (path_offset - out.phi_star) / (2.0 * group_index);
  return out;
}

SampledSpectrum multiple_reflection_model(const SampledSpectrum& alpha0,
                                          double n0_zd,
                                          const std::vector<double>& n_layer,
                                          const std::vector<double>& walkoff,
                                          double z_top, double thickness,
                                          const std::vector<double>& rho_top,
                                          const std::vector<double>& rho_bottom,
                                          int order_lo, int order_hi) {
  const std::size_t size = alpha0.size();
  if (n_layer.size() != size || walkoff.size() != size ||
      rho_top.size() != size || rho_bottom.size() != size)
    throw std::invalid_argument("multiple_reflection_model: size mismatch");
  if (order_lo < 1)
    throw std::invalid_argument("multiple_reflection_model: order_lo must be >= 1");

  SampledSpectrum out;
  out.omega_lo = alpha0.omega_lo;
  out.domega = alpha0.domega;
  out.values.assign(size, cdouble(0.0, 0.0));
  if (order_hi < order_lo || !(thickness > 0.0)) return out;

  for (std::size_t i = 0; i < size; ++i) {
    const double k0 = alpha0.omega(i) / speed_of_light;
    const double rb = rho_bottom[i];
    const double rt = -rho_top[i];
    // amp_q = rb^q rt^{q-1}; phase_q = walkoff + n (2 z_top + 2 q l) - n0 z_d.
    double amp = rb;
    for (int q = 1; q < order_lo; ++q) amp *= rb * rt;
    cdouble sum(0.0, 0.0);
    for (int q = order_lo; q <= order_hi; ++q) {
      const double path = walkoff[i] +
                          n_layer[i] * (2.0 * z_top + 2.0 * q * thickness) -
                          n0_zd;
      sum += amp * std::polar(1.0, k0 * path);
      amp *= rb * rt;
    }
    out.values[i] = alpha0.values[i] * sum;
  }
  return out;
}

SampledSpectrum update_data(const SampledSpectrum& m,
                            const SampledSpectrum& gated,
                            const std::vector<double>& rho_band,
                            const SampledSpectrum& echoes) {
  const std::size_t size = checked_size(m, gated, "update_data");
  checked_size(m, echoes, "update_data");
  if (rho_band.size() != size)
    throw std::invalid_argument("update_data: rho size mismatch");

  SampledSpectrum out;
  out.omega_lo = m.omega_lo;
  out.domega = m.domega;
  out.values.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double t = 1.0 - rho_band[i] * rho_band[i];
    if (!(t > 0.0))
      throw std::runtime_error("update_data: interface transmits nothing");
    out.values[i] = (m.values[i] - gated.values[i] - echoes.values[i]) / t;
  }
  return out;
}

void FreqReconstructionConfig::validate() const {
  if (!(n_hi > n_lo) || !(n_lo > 0.0))
    throw std::invalid_argument("index band must satisfy 0 < n_lo < n_hi");
  if (!(exit_n_lo >= 0.0) || !(exit_n_lo < n_hi))
    throw std::invalid_argument("exit index bound must lie below n_hi");
  if (!(n0 > 0.0)) throw std::invalid_argument("ambient index must be positive");
  if (!(gate.prominence > 0.0 && gate.prominence < 1.0))
    throw std::invalid_argument("gate prominence outside (0,1)");
  if (!(gate.sigma_factor > 0.0) || !(gate.max_gap_fraction > 0.0) ||
      gate.pad_to < 16)
    throw std::invalid_argument("bad gate policy");
  if (!(trust_fraction > 0.0 && trust_fraction <= 1.0))
    throw std::invalid_argument("trust fraction outside (0,1]");
  if (echo_orders < 1) throw std::invalid_argument("echo orders must be >= 1");
  if (!(slope_warn > 0.0))
    throw std::invalid_argument("slope warning threshold must be positive");
}

FreqReconstructionResult reconstruct_freq(const SampledSpectrum& m,
                                          const GaussianPulse& pulse,
                                          const FreqReconstructionConfig& cfg) {
  cfg.validate();
  const std::size_t size = m.size();
  if (size < 2 * spectral_derivative_margin + 8)
    throw std::invalid_argument("reconstruct_freq: band grid too small");
  if (!(m.domega > 0.0))
    throw std::invalid_argument("reconstruct_freq: bad band spacing");

  FreqReconstructionResult res;

  // Trusted window: central trust_fraction of the band, clamped clear of the
  // differentiator margins.
  std::size_t begin = static_cast<std::size_t>(
      std::floor(0.5 * (1.0 - cfg.trust_fraction) * static_cast<double>(size)));
  std::size_t end = size - begin;
  begin = std::max(begin, spectral_derivative_margin);
  end = std::min(end, size - spectral_derivative_margin);
  if (!(begin + 8 <= end))
    throw std::invalid_argument("reconstruct_freq: trusted window too small");

  FrequencyBand band;
  band.omega_lo = m.omega_lo;
  band.omega_hi = m.omega(size - 1);
  band.samples = size;
  const SampledSpectrum alpha0 = incident_coefficients(pulse, band, cfg.n0);
  const double n0_zd = cfg.n0 * cfg.z_d;

  // A probe much longer than the band resolution leaves the window edges with
  // no incident power; ratios formed there are gating residue, not data.
  // Tighten the window to where the spectrum keeps at least 1% of its peak.
  const double a0max = max_magnitude(alpha0);
  if (!(a0max > 0.0))
    throw std::invalid_argument("reconstruct_freq: dead incident spectrum");
  while (begin + 8 < end && std::abs(alpha0.values[begin]) < 0.01 * a0max)
    ++begin;
  while (begin + 8 < end && std::abs(alpha0.values[end - 1]) < 0.01 * a0max)
    --end;
  res.window_begin = begin;
  res.window_end = end;

  std::size_t star = (begin + end) / 2;
  if (cfg.omega_star > 0.0) {
    const double x = (cfg.omega_star - m.omega_lo) / m.domega;
    const double clamped = std::clamp(
        x, static_cast<double>(begin), static_cast<double>(end - 1));
    star = static_cast<std::size_t>(std::lround(clamped));
  }
  res.omega_star = m.omega(star);

  SampledSpectrum cur = m;
  std::vector<double> walk(size, 0.0);          // accumulated interface walk-off
  std::vector<double> n_prev(size, cfg.n0);     // region above the interface
  std::vector<double> rho_top(size, 0.0);       // top interface of that region
  QuadFit prev_fit;                             // smooth model of n_prev
  prev_fit.a = cfg.n0;
  double n_prev_star = cfg.n0;
  double z_prev = cfg.z_d;
  double legacy_len_prev = cfg.z_d - pulse.z0;  // optical standoff n0 l_pre
  double legacy_n_prev = cfg.n0;

  for (std::size_t k = 0; k <= cfg.layers; ++k) {
    const GatedPeak gp = isolate_first_peak(cur, cfg.gate);
    if (!gp.found) {
      if (k == 0 && cfg.layers == 0) return res;
      throw std::runtime_error("reconstruct_freq: no arrival found for interface " +
                               std::to_string(k + 1));
    }

    // Expected phase of the arrival referenced to the previous interface:
    // everything but 2 n_k (z_{k+1} - z_k) is known, so the residual slope
    // stays short and inside the differentiator passband.
    SampledSpectrum known = alpha0;
    for (std::size_t i = 0; i < size; ++i)
      known.values[i] *= std::polar(
          1.0, m.omega(i) / speed_of_light *
                   (walk[i] + 2.0 * n_prev[i] * z_prev - n0_zd));

    const double group_star =
        prev_fit.eval(res.omega_star) + res.omega_star * prev_fit.deriv(res.omega_star);
    const PhaseSlope ps = recover_length_freq(gp.gated, known, group_star, 0.0,
                                              star, begin, end);
    res.phi_flatness.push_back(ps.flatness);
    if (ps.flatness > cfg.slope_warn)
      res.warnings.push_back("interface " + std::to_string(k + 1) +
                             ": phase slope flatness " + std::to_string(ps.flatness));

    // Fixed evaluation frequency when configured, window-average slope else.
    double length = cfg.omega_star > 0.0 ? ps.z
                                         : ps.phi_mean / (2.0 * group_star);
    if (cfg.legacy_dk) {
      // Literal length recursion: divide by the incident coefficients only
      // and convert the slope with d_k = n0 l_pre - 2 n_{k-1} l_{k-1}.
      const PhaseSlope lp = recover_length_freq(gp.gated, alpha0, group_star,
                                                n0_zd, star, begin, end);
      const double lphi = cfg.omega_star > 0.0 ? lp.phi_star : lp.phi_mean;
      const double d = (cfg.z_d - pulse.z0) * cfg.n0 -
                       (k == 0 ? 0.0 : 2.0 * legacy_n_prev * legacy_len_prev);
      double len = (lphi + d) / (2.0 * group_star);
      if (len < 0.0) len = (d - lphi) / (2.0 * group_star);
      length = len;
      legacy_len_prev = len;
    }
    if (!(length > 0.0))
      throw std::runtime_error("reconstruct_freq: non-positive layer thickness");
    const double z = z_prev + length;

    // Index of the region below the interface.
    const bool exit_interface = (k == cfg.layers);
    const double lo = exit_interface ? cfg.exit_n_lo : cfg.n_lo;
    std::vector<double> n_new(size);
    QuadFit fit;
    double n_star_new;
    bool flipped;
    if (cfg.dispersive) {
      // Extend the known phase by the round trip through the new layer, then
      // pass the reference through the identical time gate: the gate's
      // truncation of the arrival divides out of the per-frequency ratio.
      SampledSpectrum kfull = known;
      for (std::size_t i = 0; i < size; ++i)
        kfull.values[i] *= std::polar(
            1.0, m.omega(i) / speed_of_light * 2.0 * n_prev[i] * length);
      const SampledSpectrum kgate =
          apply_time_gate(kfull, gp.t1, gp.t2, cfg.gate.pad_to);
      const IndexCurveStep ic =
          recover_index_curve(gp.gated, kgate, n_prev, begin, end, lo, cfg.n_hi);
      fit = fit_quadratic(m, ic.n, begin, end);
      for (std::size_t i = 0; i < size; ++i)
        n_new[i] = (i >= begin && i < end) ? ic.n[i - begin] : fit.eval(m.omega(i));
      n_star_new = ic.n[star - begin];
      flipped = ic.flipped;
    } else {
      const IndexStep st =
          recover_index_scalar(gp.gated, alpha0, n_prev_star, lo, cfg.n_hi);
      std::fill(n_new.begin(), n_new.end(), st.n);
      fit = QuadFit{};
      fit.a = st.n;
      n_star_new = st.n;
      flipped = st.flipped;
    }
    std::vector<double> rho_new(size);
    for (std::size_t i = 0; i < size; ++i)
      rho_new[i] = (n_prev[i] - n_new[i]) / (n_prev[i] + n_new[i]);

    res.base.rho.push_back((n_prev_star - n_star_new) / (n_prev_star + n_star_new));
    res.base.n.push_back(n_star_new);
    res.base.sign_flips += flipped ? 1 : 0;
    res.n_curves.push_back(n_new);
    if (k == 0)
      res.base.l_front = z - cfg.z_d;
    else
      res.base.lengths.push_back(length);
    res.base.interfaces.push_back(z - cfg.z_d);

    if (k < cfg.layers) {
      // Multiples of the layer just completed can precede the next arrival;
      // subtract their analytic model along with the gated reflection.
      SampledSpectrum echoes = alpha0;
      echoes.values.assign(size, cdouble(0.0, 0.0));
      if (k >= 1 && cfg.echo_orders >= 2)
        echoes = multiple_reflection_model(alpha0, n0_zd, n_prev, walk, z_prev,
                                           length, rho_top, rho_new, 2,
                                           cfg.echo_orders);
      cur = update_data(cur, gp.gated, rho_new, echoes);
    }

    for (std::size_t i = 0; i < size; ++i)
      walk[i] += 2.0 * (n_prev[i] - n_new[i]) * z;
    rho_top = std::move(rho_new);
    n_prev = std::move(n_new);
    prev_fit = fit;
    legacy_n_prev = n_prev_star;
    n_prev_star = n_star_new;
    z_prev = z;
  }
  return res;
}

}  // namespace octstrip
