#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "octstrip/signal.hpp"

namespace octstrip {

// Rule used to turn a round-trip flight time into a layer thickness.
// `traversed_index` divides by the index of the layer the echo actually
// crossed. `legacy_recursive` keeps an alternative recursion (divide by the
// index one region earlier and subtract the previously recovered length);
// it is retained behind a compatibility switch for comparison and is wrong
// for media whose adjacent layers differ.
enum class LengthRule { traversed_index, legacy_recursive };

struct TimeReconstructionConfig {
  double n_lo = 1.345;   // admissible index band for buried layers
  double n_hi = 2.0;
  double exit_n_lo = 0.0;  // relaxed lower bound for the exit half-space
  double tol = 0.1e-12;    // multiple-reflection matching tolerance (s)
  double n0 = 1.0;         // ambient index in front of the medium
  double l_pre = 0.0;      // source standoff behind the detector (m)
  std::size_t layers = 0;  // number of finite layers N
  LengthRule length_rule = LengthRule::traversed_index;

  void validate() const;  // throws std::invalid_argument
};

struct ReconstructionResult {
  double l_front = 0.0;            // detector -> first interface distance (m)
  std::vector<double> n;           // recovered indices; last entry = exit half-space
  std::vector<double> lengths;     // finite layer thicknesses (m)
  std::vector<double> interfaces;  // interface depths measured from the detector (m)
  std::vector<double> rho;         // signed reflection coefficient per interface
  std::size_t suppressed_peaks = 0;  // peaks discarded as multiple reflections
  std::size_t sign_flips = 0;        // bounds-forced reflection sign changes
  double epsilon = std::numeric_limits<double>::quiet_NaN();  // optical-thickness error (m)
};

struct IndexStep {
  double rho;    // signed reflection coefficient at the new interface
  double n;      // index of the region behind it
  bool flipped;  // admissible band forced the negative-sign branch
};

// One amplitude step of the layer-stripping recursion: divide the peak
// amplitude by the accumulated two-way transmission of the interfaces above,
// take the positive reflection sign first and flip it if the implied index
// leaves [n_lo, n_hi]. Both signs out of bounds is unrecoverable and throws
// std::runtime_error. p_next == 0 leaves the index unchanged.
IndexStep recover_index_step(const std::vector<double>& rho_history, double p_next,
                             double n_current, double n_lo, double n_hi);

// Thickness of the region crossed between two consecutive echo arrivals:
// (c (t_b - t_a) / n_traversed - l_prev) / 2. l_prev is the one-way path
// already accounted for (the source standoff for the front gap, zero
// otherwise). Throws std::invalid_argument unless t_b > t_a and
// std::runtime_error if the resulting thickness is negative.
double recover_length_step(double t_a, double t_b, double n_traversed, double l_prev);

// Remove peaks that sit within tol of a predicted multiple-reflection
// arrival t_ref + j * 2 n_layer l_layer / c, j = 1..max_order. Only peaks
// strictly later than t_ref are candidates. A zero-thickness layer or
// max_order == 0 returns the input unchanged.
PeakList suppress_multiples(const PeakList& peaks, double t_ref, double n_layer,
                            double l_layer, double tol, std::size_t max_order);

// Layer-stripping reconstruction from phase-less peak data: sort the peaks
// in time, then per interface recover the reflection amplitude and index,
// convert the arrival gap into the thickness of the region above, and drop
// later peaks explained as multiple reflections inside that region. Needs
// one surviving peak per interface (layers + 1); fewer throws
// std::runtime_error. epsilon is left NaN; see optical_thickness_error.
ReconstructionResult reconstruct_time(const PeakList& peaks,
                                      const TimeReconstructionConfig& cfg);

// Root-sum-square mismatch of the per-layer optical thicknesses
// (n_true[k] l_true[k] vs recovered), in meters, over the finite layers.
double optical_thickness_error(const std::vector<double>& n_true,
                               const std::vector<double>& l_true,
                               const ReconstructionResult& rec);

}  // namespace octstrip
