#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "octstrip/medium.hpp"
#include "octstrip/signal.hpp"

namespace octstrip {

struct FdtdGrid {
  double z_min = 0.0;
  double z_max = 0.0;
  double dz = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t points() const {
    return static_cast<std::size_t>(
               std::llround((z_max - z_min) / dz)) +
           1;
  }
  double z(std::size_t i) const { return z_min + dz * static_cast<double>(i); }
  std::size_t node(double zq) const {  // nearest node, must be on-grid
    return static_cast<std::size_t>(std::llround((zq - z_min) / dz));
  }
};

// Grid sized for a scattering run: detector on a node, pulse support and the
// stack inside the domain, dt = cfl * dz * n_min / c.
FdtdGrid make_fdtd_grid(const LayeredMedium& medium, const GaussianPulse& pulse,
                        double z_d, double t_final,
                        double points_per_lambda0 = 100.0, double cfl = 0.9,
                        double pad_left = 0.05e-3, double pad_right = 0.05e-3);

struct FdtdOptions {
  // cache blocking of the space-time sweep; block=0 or rows<=1 runs the
  // canonical step-by-step order
  std::size_t block = 12288;
  std::size_t rows = 4096;
};

// Leapfrog integration of d_tt u = (c/n)^2 d_zz u with first-order absorbing
// ends; returns (u - u0)(t, z_d) sampled at every step t = dt ... steps*dt.
SampledSignal fdtd_solve(const LayeredMedium& medium, const GaussianPulse& pulse,
                         const FdtdGrid& grid, double z_d,
                         const FdtdOptions& opt = {});

// One reflected wavefront of the closed-form series.
struct ReflectionEvent {
  int layer = 0;         // k: the layer the wave bounced in (0 = front face)
  int order = 1;         // q: round trips inside that layer
  double arrival = 0.0;  // detector arrival time (s)
  double amplitude = 0.0;
  std::string path;
};

std::vector<ReflectionEvent> reflection_events(const LayeredMedium& medium,
                                               const GaussianPulse& pulse,
                                               double z_d, int eta_max);

// Sum of the closed-form reflected pulses on the given time grid.
SampledSignal analytic_reflection_series(const LayeredMedium& medium,
                                         const GaussianPulse& pulse, double z_d,
                                         int eta_max, double t0, double dt,
                                         std::size_t samples);

// m(t) = |(u - u0)(t, z_d)|
SampledSignal measurement_time(const SampledSignal& field_difference);

}  // namespace octstrip
