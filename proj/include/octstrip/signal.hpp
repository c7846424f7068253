#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "octstrip/constants.hpp"
#include "octstrip/medium.hpp"

namespace octstrip {

// Gaussian wave packet: envelope width sigma (m), carrier omega0 (rad/s),
// launched centered at z0.
struct GaussianPulse {
  double omega0 = 0.0;
  double sigma = 0.0;
  double z0 = 0.0;
  double lambda0() const { return 2.0 * pi * speed_of_light / omega0; }
};

// u0(t,z) = exp(-(z-z0-ct)^2 / 2 sigma^2) * cos((omega0/c)(z-z0-ct))
double pulse_time(const GaussianPulse& p, double t, double z);

// Positive-frequency spectrum of the right-moving packet,
// sqrt(2 pi) (sigma/2c) exp(-sigma^2 (w-w0)^2 / 2c^2) exp(i (w/c)(z-z0)).
cdouble pulse_spectrum(const GaussianPulse& p, double omega, double z);

struct SampledSignal {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  std::size_t size() const { return values.size(); }
};

struct SampledSpectrum {
  double omega_lo = 0.0;
  double domega = 0.0;
  std::vector<cdouble> values;
  double omega(std::size_t i) const {
    return omega_lo + domega * static_cast<double>(i);
  }
  std::size_t size() const { return values.size(); }
};

struct Peak {
  double t = 0.0;
  double amplitude = 0.0;
};
using PeakList = std::vector<Peak>;

// Unnormalized in-place FFT; sign=+1 applies kernel e^{+2 pi i k n / M}.
void fft_inplace(std::vector<cdouble>& data, int sign);

// Continuous-transform estimate F(f)(w) = \int f(t) e^{+iwt} dt on the grid
// w_k = 2 pi k / (M dt), M = max(pad_to, size). Includes the e^{i w t0} offset
// phase, so the output approximates the transform of the physical signal.
SampledSpectrum dft(const SampledSignal& s, std::size_t pad_to = 0);

// Inverse of dft for full FFT-grid spectra; returns real part. count=0 keeps
// all M samples.
SampledSignal idft(const SampledSpectrum& s, double t0 = 0.0,
                   std::size_t count = 0);

// Band-limited spectrum -> complex time trace via zero padding to a length-M
// grid: g(t_n) = (dw/2pi) sum_band f_k e^{-i w_k t_n}, t_n = n 2pi/(M dw).
// For Hermitian-completable data this is (analytic signal)/2.
struct ComplexTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cdouble> values;
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  std::size_t size() const { return values.size(); }
};
ComplexTrace band_time_trace(const SampledSpectrum& s, std::size_t pad_to);

// Exact inverse of band_time_trace on the same grid: reads back `count` bins
// starting at omega_lo.
SampledSpectrum band_from_time_trace(const ComplexTrace& g, double omega_lo,
                                     double domega, std::size_t count);

// m_delta = m + delta (|m|_2 / |v|_2) v, v i.i.d. standard normal; the
// relative L2 perturbation equals delta exactly. Deterministic per seed.
SampledSignal add_noise(const SampledSignal& s, double delta,
                        std::uint64_t seed);
SampledSpectrum add_noise(const SampledSpectrum& s, double delta,
                          std::uint64_t seed);

// Carrier-free amplitude envelope. Signed input: magnitude of the analytic
// signal. Rectified (nonnegative) input: sqrt(2 LP(m^2)) with the lowpass cut
// midway to the doubled-carrier band; carrier<=0 autodetects the band.
std::vector<double> envelope(const SampledSignal& s, double carrier = 0.0);

// Envelope maxima above min_prominence * global max, at least min_separation
// apart (greedy, largest first); times/amplitudes refined by log-parabola.
PeakList detect_peaks(const SampledSignal& s, double min_prominence,
                      double min_separation, double carrier = 0.0);

// FIR least-squares differentiator along omega (order 32, passband 0.6 pi).
// The `spectral_derivative_margin` samples at each end are set to NaN.
inline constexpr std::size_t spectral_derivative_margin = 16;
SampledSpectrum spectral_derivative(const SampledSpectrum& f);

}  // namespace octstrip
