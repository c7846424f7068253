#include "octstrip/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>

namespace octstrip {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// FFTW's planner is not thread-safe; serialize whole transforms.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void fft_inplace(std::vector<cdouble>& data, int sign) {
  if (data.empty()) return;
  std::lock_guard<std::mutex> lock(fftw_mutex());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan =
      fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr,
                       sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

double pulse_time(const GaussianPulse& p, double t, double z) {
  const double arg = z - p.z0 - speed_of_light * t;
  return std::exp(-arg * arg / (2.0 * p.sigma * p.sigma)) *
         std::cos(p.omega0 / speed_of_light * arg);
}

cdouble pulse_spectrum(const GaussianPulse& p, double omega, double z) {
  if (omega <= 0.0)
    throw std::domain_error("pulse_spectrum: omega must be positive");
  const double c = speed_of_light;
  const double d = p.sigma * (omega - p.omega0) / c;
  const double mag =
      std::sqrt(2.0 * pi) * p.sigma / (2.0 * c) * std::exp(-0.5 * d * d);
  return mag * std::exp(cdouble(0.0, omega / c * (z - p.z0)));
}

SampledSpectrum dft(const SampledSignal& s, std::size_t pad_to) {
  if (s.dt <= 0.0) throw std::invalid_argument("dft: dt must be positive");
  const std::size_t n = s.size();
  if (pad_to == 0) pad_to = n;
  if (pad_to < n) throw std::length_error("dft: pad_to smaller than signal");
  std::vector<cdouble> buf(pad_to, cdouble(0.0));
  for (std::size_t i = 0; i < n; ++i) buf[i] = s.values[i];
  fft_inplace(buf, +1);
  SampledSpectrum out;
  out.omega_lo = 0.0;
  out.domega = 2.0 * pi / (static_cast<double>(pad_to) * s.dt);
  out.values.resize(pad_to);
  for (std::size_t k = 0; k < pad_to; ++k)
    out.values[k] =
        s.dt * std::exp(cdouble(0.0, out.omega(k) * s.t0)) * buf[k];
  return out;
}

SampledSignal idft(const SampledSpectrum& s, double t0, std::size_t count) {
  if (s.domega <= 0.0)
    throw std::invalid_argument("idft: domega must be positive");
  if (s.omega_lo != 0.0)
    throw std::invalid_argument("idft: expects a full spectrum from omega=0");
  const std::size_t m = s.size();
  if (count == 0) count = m;
  if (count > m) throw std::length_error("idft: count exceeds grid size");
  const double dt = 2.0 * pi / (static_cast<double>(m) * s.domega);
  std::vector<cdouble> buf(m);
  for (std::size_t k = 0; k < m; ++k)
    buf[k] = s.values[k] * std::exp(cdouble(0.0, -s.omega(k) * t0));
  fft_inplace(buf, -1);
  SampledSignal out;
  out.t0 = t0;
  out.dt = dt;
  out.values.resize(count);
  const double scale = 1.0 / (static_cast<double>(m) * dt);
  for (std::size_t i = 0; i < count; ++i) out.values[i] = scale * buf[i].real();
  return out;
}

// The band offset omega_lo is handled as an explicit phase ramp e^{-i w_lo t}
// outside the FFT, so the band grid need not align with FFT bins.
ComplexTrace band_time_trace(const SampledSpectrum& s, std::size_t pad_to) {
  if (s.domega <= 0.0)
    throw std::invalid_argument("band_time_trace: domega must be positive");
  if (s.size() > pad_to)
    throw std::length_error("band_time_trace: pad_to too small for band");
  std::vector<cdouble> buf(pad_to, cdouble(0.0));
  for (std::size_t j = 0; j < s.size(); ++j) buf[j] = s.values[j];
  fft_inplace(buf, -1);
  ComplexTrace g;
  g.t0 = 0.0;
  g.dt = 2.0 * pi / (static_cast<double>(pad_to) * s.domega);
  const double scale = s.domega / (2.0 * pi);
  g.values.resize(pad_to);
  for (std::size_t i = 0; i < pad_to; ++i)
    g.values[i] =
        scale * buf[i] * std::exp(cdouble(0.0, -s.omega_lo * g.time(i)));
  return g;
}

SampledSpectrum band_from_time_trace(const ComplexTrace& g, double omega_lo,
                                     double domega, std::size_t count) {
  if (g.dt <= 0.0 || domega <= 0.0)
    throw std::invalid_argument("band_from_time_trace: bad grid");
  const std::size_t m = g.size();
  if (count > m)
    throw std::length_error("band_from_time_trace: band exceeds grid");
  std::vector<cdouble> buf(m);
  for (std::size_t i = 0; i < m; ++i)
    buf[i] = g.values[i] * std::exp(cdouble(0.0, omega_lo * g.time(i)));
  fft_inplace(buf, +1);
  SampledSpectrum out;
  out.omega_lo = omega_lo;
  out.domega = domega;
  out.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) out.values[j] = g.dt * buf[j];
  return out;
}

namespace {

// Box-Muller on a fixed engine keeps noise realizations identical across
// platforms (std::normal_distribution is implementation-defined).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : gen_(seed) {}
  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uni_(gen_);
    } while (u1 <= 0.0);
    const double u2 = uni_(gen_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * pi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * pi * u2);
  }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

SampledSignal add_noise(const SampledSignal& s, double delta,
                        std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("add_noise: delta < 0");
  if (delta == 0.0 || s.values.empty()) return s;
  NormalSource src(seed);
  std::vector<double> v(s.size());
  double norm_m = 0.0, norm_v = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    v[i] = src.next();
    norm_m += s.values[i] * s.values[i];
    norm_v += v[i] * v[i];
  }
  if (norm_v == 0.0) return s;
  const double scale = delta * std::sqrt(norm_m / norm_v);
  SampledSignal out = s;
  for (std::size_t i = 0; i < s.size(); ++i) out.values[i] += scale * v[i];
  return out;
}

SampledSpectrum add_noise(const SampledSpectrum& s, double delta,
                          std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("add_noise: delta < 0");
  if (delta == 0.0 || s.values.empty()) return s;
  NormalSource src(seed);
  std::vector<cdouble> v(s.size());
  double norm_m = 0.0, norm_v = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    v[i] = cdouble(src.next(), src.next());
    norm_m += std::norm(s.values[i]);
    norm_v += std::norm(v[i]);
  }
  if (norm_v == 0.0) return s;
  const double scale = delta * std::sqrt(norm_m / norm_v);
  SampledSpectrum out = s;
  for (std::size_t i = 0; i < s.size(); ++i) out.values[i] += scale * v[i];
  return out;
}

namespace {

// Zero the FFT bins above a raised-cosine edge [pass, stop] (two-sided).
void lowpass_inplace(std::vector<cdouble>& spec, double domega, double pass,
                     double stop) {
  const std::size_t m = spec.size();
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t kk = std::min(k, m - k);  // fold negative frequencies
    const double w = static_cast<double>(kk) * domega;
    if (w <= pass) continue;
    if (w >= stop) {
      spec[k] = 0.0;
    } else {
      const double x = (w - pass) / (stop - pass);
      spec[k] *= 0.5 * (1.0 + std::cos(pi * x));
    }
  }
}

// Locate the doubled-carrier band of |FFT(m^2)|: skip the baseband lobe,
// then take the argmax of what remains.
double doubled_carrier_estimate(const std::vector<cdouble>& spec,
                                double domega) {
  const std::size_t m = spec.size();
  const std::size_t half = m / 2;
  double peak0 = 0.0;
  for (std::size_t k = 0; k <= half; ++k)
    peak0 = std::max(peak0, std::abs(spec[k]));
  if (peak0 == 0.0) return 0.0;
  std::size_t k = 1;
  while (k <= half && std::abs(spec[k]) > 1e-3 * peak0) ++k;
  double best = 0.0;
  std::size_t best_k = 0;
  for (; k <= half; ++k) {
    const double a = std::abs(spec[k]);
    if (a > best) {
      best = a;
      best_k = k;
    }
  }
  if (best < 1e-3 * peak0) return 0.0;  // no carrier band: baseband signal
  return static_cast<double>(best_k) * domega;
}

}  // namespace

std::vector<double> envelope(const SampledSignal& s, double carrier) {
  const std::size_t n = s.size();
  if (n == 0) return {};
  if (s.dt <= 0.0) throw std::invalid_argument("envelope: dt must be positive");
  const std::size_t m = next_pow2(2 * n);
  const double domega = 2.0 * pi / (static_cast<double>(m) * s.dt);

  double vmax = 0.0, vmin = 0.0;
  for (double v : s.values) {
    vmax = std::max(vmax, std::abs(v));
    vmin = std::min(vmin, v);
  }
  std::vector<double> env(n, 0.0);
  if (vmax == 0.0) return env;
  const bool rectified = vmin >= -1e-12 * vmax;

  if (!rectified) {
    // analytic-signal magnitude
    std::vector<cdouble> buf(m, cdouble(0.0));
    for (std::size_t i = 0; i < n; ++i) buf[i] = s.values[i];
    fft_inplace(buf, +1);
    for (std::size_t k = 1; k < m / 2; ++k) buf[k] *= 2.0;
    for (std::size_t k = m / 2 + 1; k < m; ++k) buf[k] = 0.0;
    fft_inplace(buf, -1);
    for (std::size_t i = 0; i < n; ++i)
      env[i] = std::abs(buf[i]) / static_cast<double>(m);
    return env;
  }

  // rectified input: m^2 = env^2 (1 + cos 2 phi)/2, lowpass keeps env^2/2
  std::vector<cdouble> buf(m, cdouble(0.0));
  for (std::size_t i = 0; i < n; ++i) buf[i] = s.values[i] * s.values[i];
  fft_inplace(buf, +1);
  double band2 = carrier > 0.0 ? 2.0 * carrier
                               : doubled_carrier_estimate(buf, domega);
  if (band2 <= 0.0) {
    // no carrier present, the rectified signal is its own envelope
    for (std::size_t i = 0; i < n; ++i) env[i] = s.values[i];
    return env;
  }
  lowpass_inplace(buf, domega, 0.475 * band2, 0.525 * band2);
  fft_inplace(buf, -1);
  for (std::size_t i = 0; i < n; ++i)
    env[i] = std::sqrt(
        2.0 * std::max(0.0, buf[i].real() / static_cast<double>(m)));
  return env;
}

PeakList detect_peaks(const SampledSignal& s, double min_prominence,
                      double min_separation, double carrier) {
  const std::vector<double> env = envelope(s, carrier);
  const std::size_t n = env.size();
  PeakList out;
  if (n < 3) return out;
  double emax = 0.0;
  for (double e : env) emax = std::max(emax, e);
  if (emax == 0.0) return out;
  const double thr = min_prominence * emax;

  struct Cand {
    double t, a;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(env[i] > thr)) continue;
    if (!(env[i - 1] < env[i] && env[i] >= env[i + 1])) continue;
    double t = s.time(i), a = env[i];
    if (env[i - 1] > 0.0 && env[i + 1] > 0.0 && env[i + 1] != env[i]) {
      // log-parabola vertex (exact for Gaussian envelopes)
      const double la = std::log(env[i - 1]);
      const double lb = std::log(env[i]);
      const double lc = std::log(env[i + 1]);
      const double den = la - 2.0 * lb + lc;
      if (den < 0.0) {
        const double d = 0.5 * (la - lc) / den;
        if (std::abs(d) <= 0.75) {
          t += d * s.dt;
          a = std::exp(lb - 0.25 * (la - lc) * d);
        }
      }
    }
    cands.push_back({t, a});
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& x, const Cand& y) { return x.a > y.a; });
  std::vector<Cand> kept;
  for (const Cand& c : cands) {
    bool ok = true;
    for (const Cand& k : kept)
      if (std::abs(c.t - k.t) < min_separation) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const Cand& x, const Cand& y) { return x.t < y.t; });
  for (const Cand& c : kept) out.push_back({c.t, c.a});
  return out;
}

namespace {

// Least-squares type-III differentiator: antisymmetric taps c_m solving
//   min over [0, p] of (2 sum_m c_m sin(m w) - w)^2,
// via the closed-form Gram matrix; Cholesky solve of the 16x16 system.
std::vector<double> differentiator_taps() {
  constexpr int K = 16;
  constexpr double p = 0.6 * pi;
  double G[K][K];
  double b[K];
  for (int i = 0; i < K; ++i) {
    const int n = i + 1;
    b[i] = std::sin(n * p) / (n * n) - p * std::cos(n * p) / n;
    for (int j = 0; j < K; ++j) {
      const int mm = j + 1;
      const double s_plus = std::sin((n + mm) * p) / (n + mm);
      const double s_minus =
          n == mm ? p : std::sin((n - mm) * p) / (n - mm);
      G[i][j] = 0.5 * (s_minus - s_plus);
    }
  }
  // Cholesky G = L L^T; the Gram matrix is near-singular, so retry with a
  // tiny ridge if rounding spoils a pivot (response quality is insensitive).
  double L[K][K] = {};
  for (double ridge : {0.0, 1e-13, 1e-11}) {
    bool ok = true;
    for (int i = 0; i < K && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = G[i][j] + (i == j ? ridge : 0.0);
        for (int k = 0; k < j; ++k) sum -= L[i][k] * L[j][k];
        if (i == j) {
          if (sum <= 0.0) {
            ok = false;
            break;
          }
          L[i][i] = std::sqrt(sum);
        } else {
          L[i][j] = sum / L[j][j];
        }
      }
    }
    if (ok) break;
  }
  double y[K], d[K];
  for (int i = 0; i < K; ++i) {
    double sum = b[i];
    for (int k = 0; k < i; ++k) sum -= L[i][k] * y[k];
    y[i] = sum / L[i][i];
  }
  for (int i = K - 1; i >= 0; --i) {
    double sum = y[i];
    for (int k = i + 1; k < K; ++k) sum -= L[k][i] * d[k];
    d[i] = sum / L[i][i];
  }
  std::vector<double> taps(2 * K + 1, 0.0);  // taps[K+m] = c_m
  for (int mth = 1; mth <= K; ++mth) {
    taps[K + mth] = 0.5 * d[mth - 1];
    taps[K - mth] = -0.5 * d[mth - 1];
  }
  return taps;
}

}  // namespace

SampledSpectrum spectral_derivative(const SampledSpectrum& f) {
  static const std::vector<double> taps = differentiator_taps();
  constexpr int K = static_cast<int>(spectral_derivative_margin);
  const std::size_t n = f.size();
  if (n < taps.size())
    throw std::length_error("spectral_derivative: input shorter than filter");
  SampledSpectrum out;
  out.omega_lo = f.omega_lo;
  out.domega = f.domega;
  out.values.assign(n, cdouble(std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t i = K; i + K < n; ++i) {
    cdouble acc(0.0);
    for (int m = -K; m <= K; ++m)
      acc += taps[static_cast<std::size_t>(K + m)] *
             f.values[static_cast<std::size_t>(static_cast<long long>(i) + m)];
    out.values[i] = acc / f.domega;
  }
  return out;
}

}  // namespace octstrip
