#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "octstrip/inverse_time.hpp"
#include "octstrip/signal.hpp"

namespace octstrip {

// Time-gate policy for isolating the earliest arrival of a band spectrum.
struct GatePolicy {
  double prominence = 0.05;        // peak floor, fraction of the trace maximum
  double sigma_factor = 8.0;       // half-width in measured envelope widths
  double max_gap_fraction = 0.35;  // half-width cap, fraction of neighbor gaps
  std::size_t pad_to = std::size_t(1) << 17;  // zero-padded inverse-FFT length
};

struct GatedPeak {
  SampledSpectrum gated;   // band spectrum of the time-gated first arrival
  double t_peak = 0.0;     // refined envelope-peak arrival (s)
  double amplitude = 0.0;  // envelope height at the peak
  double sigma = 0.0;      // measured envelope width (s)
  double t1 = 0.0;         // applied gate window
  double t2 = 0.0;
  bool found = false;
};

// Reconstruct the complex time trace of a band-limited spectrum by
// zero-padded inverse FFT, pick the earliest envelope peak above the
// prominence floor, and return the spectrum of the time-gated window
// around it. found == false when the trace is identically zero.
GatedPeak isolate_first_peak(const SampledSpectrum& m, const GatePolicy& gate);

// Zero a spectrum's time trace outside [t1, t2] and return the band spectrum
// of what remains, exactly as isolate_first_peak windows its arrival.
SampledSpectrum apply_time_gate(const SampledSpectrum& m, double t1, double t2,
                                std::size_t pad_to);

// Scalar index recovery (non-dispersive rule): reflection magnitude from the
// ratio of spectral maxima, positive sign first, flipped if the implied
// index leaves [n_lo, n_hi]; both out throws std::runtime_error.
IndexStep recover_index_scalar(const SampledSpectrum& gated,
                               const SampledSpectrum& alpha0, double n_current,
                               double n_lo, double n_hi);

struct IndexCurveStep {
  std::vector<double> n;    // recovered index on [begin, end)
  std::vector<double> rho;  // implied reflection coefficient on [begin, end)
  bool flipped = false;
};

// Per-frequency index recovery on the trusted window [begin, end):
// n_next = n_prev * Re{(K - g)/(K + g)} with K the fully known phase term
// (incident coefficients, accumulated interface walk-off, recovered depth,
// detector phase). The whole curve is sign-flipped if its window extremes
// leave [n_lo, n_hi]; both branches out throws std::runtime_error, as does
// a near-vanishing denominator.
IndexCurveStep recover_index_curve(const SampledSpectrum& gated,
                                   const SampledSpectrum& known_phase,
                                   const std::vector<double>& n_prev,
                                   std::size_t begin, std::size_t end,
                                   double n_lo, double n_hi);

struct PhaseSlope {
  double z = 0.0;          // implied one-way path length (m)
  double phi_star = 0.0;   // c |f'| at the evaluation frequency
  double phi_mean = 0.0;   // window average of c |f'|
  double flatness = 0.0;   // (max - min)/mean of phi over the window
  std::vector<double> phi; // per-sample c |f'| (NaN at differentiator margins)
};

// One-way distance from the phase slope of the gated arrival: normalize
// gated/known_phase to unit modulus, differentiate along omega, and read
// phi = c|f'| = |2 z (n + w n') - offset| at omega_star_index, so
// z = (phi + offset)/(2 g), or (offset - phi)/(2 g) if that is negative.
// Referencing known_phase to the previous interface keeps the residual
// slope short (offset 0, z the layer thickness); an incident-only divisor
// needs offset = n0 z_d and yields the absolute depth.
PhaseSlope recover_length_freq(const SampledSpectrum& gated,
                               const SampledSpectrum& known_phase,
                               double group_index, double path_offset,
                               std::size_t omega_star_index, std::size_t begin,
                               std::size_t end);

// Multiple-reflection model of one recovered layer (bounce orders
// order_lo..order_hi), in the renormalized data scaling:
// rho_bottom^q (-rho_top)^(q-1) alpha0 exp(i w/c (walkoff + n(2 z_top + 2 q l) - n0 z_d)).
SampledSpectrum multiple_reflection_model(const SampledSpectrum& alpha0,
                                          double n0_zd,
                                          const std::vector<double>& n_layer,
                                          const std::vector<double>& walkoff,
                                          double z_top, double thickness,
                                          const std::vector<double>& rho_top,
                                          const std::vector<double>& rho_bottom,
                                          int order_lo, int order_hi);

// Strip one recovered reflection: (m - gated - echoes) / (1 - rho^2),
// renormalizing the remaining data by the interface transmission.
// |rho| >= 1 anywhere throws std::runtime_error.
SampledSpectrum update_data(const SampledSpectrum& m,
                            const SampledSpectrum& gated,
                            const std::vector<double>& rho_band,
                            const SampledSpectrum& echoes);

struct FreqReconstructionConfig {
  double n_lo = 1.345;  // admissible index band for buried layers
  double n_hi = 2.0;
  double exit_n_lo = 0.0;  // relaxed lower bound for the exit half-space
  double n0 = 1.0;
  double z_d = 0.0;        // detector position (m)
  std::size_t layers = 0;  // number of finite layers N
  bool dispersive = false; // per-frequency index curves instead of scalars
  GatePolicy gate;
  double trust_fraction = 0.6;  // central band fraction used as trusted window
  double omega_star = 0.0;      // evaluation frequency; 0 = window average slope,
                                // indices read at the window center
  int echo_orders = 4;          // analytic multiple-reflection model depth
  double slope_warn = 0.02;     // phase-slope flatness warning threshold
  bool legacy_dk = false;       // literal single-term length recursion
  void validate() const;
};

struct FreqReconstructionResult {
  ReconstructionResult base;  // scalar summary (indices at omega*, lengths)
  std::vector<std::vector<double>> n_curves;  // per region, full band grid
  std::vector<double> phi_flatness;           // per recovered interface
  std::vector<std::string> warnings;
  std::size_t window_begin = 0;  // trusted window as band indices [begin,end)
  std::size_t window_end = 0;
  double omega_star = 0.0;  // evaluation frequency actually used
};

// Layer stripping on complex band data: per interface gate the earliest
// arrival, recover depth from its phase slope and index from amplitude
// (scalar) or the per-frequency ratio (dispersive), subtract the gated
// reflection plus modeled multiples, renormalize, repeat. The source
// standoff is carried by pulse.z0. Epsilon is left NaN.
FreqReconstructionResult reconstruct_freq(const SampledSpectrum& m,
                                          const GaussianPulse& pulse,
                                          const FreqReconstructionConfig& cfg);

}  // namespace octstrip
