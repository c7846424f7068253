#include "octstrip/forward_time.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "octstrip/constants.hpp"

namespace octstrip {

namespace {

double min_region_index(const LayeredMedium& medium, double omega) {
  double n_min = medium.n0;
  for (std::size_t r = 1; r <= medium.layer_count() + 1; ++r)
    n_min = std::min(n_min, medium.region_index(omega, r).real());
  return n_min;
}

// u^{N+1}_i = 2 u^N_i - u^{N-1}_i + w_i d2(u^N)_i + w4_i d4(u^N)_i, written
// over u^{N-1}, for interior columns [lo, hi).  The d4 term cancels the
// leading (k dz)^2 dispersion of the leapfrog stencil in homogeneous runs of
// cells (w4 = w(w-1)/12, zeroed near interfaces and ends).  Compiled without
// FP contraction so every update is the same bit-exact op sequence no matter
// how the sweep is blocked.
void sweep_row(double* __restrict nxt, const double* __restrict cur,
               const double* __restrict w, const double* __restrict w4,
               std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi; ++i)
    nxt[i] = 2.0 * cur[i] - nxt[i] +
             w[i] * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) +
             w4[i] * (cur[i + 2] - 4.0 * cur[i + 1] + 6.0 * cur[i] -
                      4.0 * cur[i - 1] + cur[i - 2]);
}

// exact d'Alembert advection for vacuum cells at the magic time step
// (w = 1, w4 = 0): u^{N+1}_i = u^N_{i+1} + u^N_{i-1} - u^{N-1}_i
void sweep_row_unit(double* __restrict nxt, const double* __restrict cur,
                    std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi; ++i)
    nxt[i] = cur[i - 1] + cur[i + 1] - nxt[i];
}

// dispatch a row over the precomputed vacuum runs: generic stencil between
// them, exact advection inside; the kernel a cell gets never depends on how
// the sweep is blocked
void sweep_row_mixed(double* nxt, const double* cur, const double* w,
                     const double* w4,
                     const std::vector<std::array<std::size_t, 2>>& runs,
                     std::size_t lo, std::size_t hi) {
  std::size_t pos = lo;
  for (const auto& r : runs) {
    if (r[1] <= pos) continue;
    if (r[0] >= hi) break;
    const std::size_t a = std::max(r[0], pos);
    const std::size_t b = std::min(r[1], hi);
    if (a > pos) sweep_row(nxt, cur, w, w4, pos, a);
    sweep_row_unit(nxt, cur, a, b);
    pos = b;
    if (pos >= hi) return;
  }
  if (pos < hi) sweep_row(nxt, cur, w, w4, pos, hi);
}

// cell average of n^2 over [z - dz/2, z + dz/2]; sub-cell interface
// positions enter through the mixed cell, which keeps the effective
// scattering center at the true interface to second order.  Uniform cells
// return n^2 exactly so coefficient snapping below stays reliable.
double cell_permittivity(const LayeredMedium& medium, double omega, double z,
                         double dz) {
  const auto& ifc = medium.interfaces;
  const double a = z - 0.5 * dz;
  const double b = z + 0.5 * dz;
  std::size_t reg = static_cast<std::size_t>(
      std::upper_bound(ifc.begin(), ifc.end(), a) - ifc.begin());
  if (reg == ifc.size() || ifc[reg] >= b) {
    const double n = medium.region_index(omega, reg).real();
    return n * n;
  }
  double total = 0.0;
  double lo = a;
  while (reg < ifc.size() && ifc[reg] < b) {
    const double n = medium.region_index(omega, reg).real();
    total += (ifc[reg] - lo) * (n * n);
    lo = ifc[reg];
    ++reg;
  }
  const double n = medium.region_index(omega, reg).real();
  total += (b - lo) * (n * n);
  return total / dz;
}

}  // namespace

FdtdGrid make_fdtd_grid(const LayeredMedium& medium, const GaussianPulse& pulse,
                        double z_d, double t_final, double points_per_lambda0,
                        double cfl, double pad_left, double pad_right) {
  medium.validate();
  if (!(pulse.omega0 > 0.0) || !(pulse.sigma > 0.0))
    throw std::invalid_argument("make_fdtd_grid: pulse needs omega0 > 0, sigma > 0");
  if (!(points_per_lambda0 >= 2.0))
    throw std::invalid_argument("make_fdtd_grid: points_per_lambda0 < 2");
  if (!(cfl > 0.0) || cfl > 1.0)
    throw std::invalid_argument("make_fdtd_grid: cfl must lie in (0, 1]");
  if (!(t_final > 0.0))
    throw std::invalid_argument("make_fdtd_grid: t_final must be positive");
  if (!(pad_left >= 0.0) || !(pad_right >= 0.0))
    throw std::invalid_argument("make_fdtd_grid: negative padding");

  FdtdGrid g;
  g.dz = pulse.lambda0() / points_per_lambda0;
  // keep the initial pulse support and the detector inside, stack plus exit
  // padding on the right; the lattice is anchored so z_d is exactly a node
  const double z_lo = std::min(z_d, pulse.z0 - 12.0 * pulse.sigma) - pad_left;
  const double z_hi = medium.interfaces.back() + pad_right;
  const double left_cells = std::ceil((z_d - z_lo) / g.dz - 1e-9);
  const double right_cells = std::ceil((z_hi - z_d) / g.dz - 1e-9);
  g.z_min = z_d - left_cells * g.dz;
  g.z_max = z_d + right_cells * g.dz;
  const double n_min = min_region_index(medium, pulse.omega0);
  g.dt = cfl * g.dz * n_min / speed_of_light;
  g.steps = static_cast<std::size_t>(std::ceil(t_final / g.dt - 1e-9));
  return g;
}

SampledSignal fdtd_solve(const LayeredMedium& medium, const GaussianPulse& pulse,
                         const FdtdGrid& grid, double z_d,
                         const FdtdOptions& opt) {
  medium.validate();
  if (!medium.all_constant())
    throw std::domain_error(
        "fdtd_solve: dispersive index models are not supported here");
  if (!medium.all_real())
    throw std::domain_error(
        "fdtd_solve: absorbing index models are not supported here");
  if (!(grid.dz > 0.0) || !(grid.dt > 0.0) || grid.steps == 0 ||
      !(grid.z_max > grid.z_min))
    throw std::invalid_argument("fdtd_solve: malformed grid");
  const std::size_t M = grid.points();
  if (M < 8) throw std::invalid_argument("fdtd_solve: grid too small");
  const std::size_t i_d = grid.node(z_d);
  if (i_d == 0 || i_d >= M - 1 ||
      std::abs(grid.z(i_d) - z_d) > 1e-6 * grid.dz)
    throw std::invalid_argument(
        "fdtd_solve: detector must be an interior grid node");

  // per-cell coefficients: w from the cell-averaged permittivity, w4 the
  // dispersion correction, kept away from interfaces and ends so the local
  // interface physics stays purely second order
  const double s = speed_of_light * grid.dt / grid.dz;
  const double s2 = s * s;
  std::vector<double> w(M), w4(M);
  double w_max = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    w[i] = s2 * (1.0 / cell_permittivity(medium, pulse.omega0, grid.z(i), grid.dz));
    // vacuum cells at the magic step deviate from 1 only through the dt
    // round trip; snapping restores the exact d'Alembert update there
    if (std::abs(w[i] - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon())
      w[i] = 1.0;
    w_max = std::max(w_max, w[i]);
  }
  if (std::sqrt(w_max) > 1.0 + 1e-9)
    throw std::invalid_argument("fdtd_solve: time step violates the stability bound");
  for (std::size_t i = 0; i < M; ++i) w4[i] = w[i] * (w[i] - 1.0) / 12.0;
  for (double zi : medium.interfaces) {
    const long long j = std::llround((zi - grid.z_min) / grid.dz);
    const long long a = std::max<long long>(j - 2, 0);
    const long long b = std::min<long long>(j + 3, static_cast<long long>(M));
    for (long long idx = a; idx < b; ++idx) w4[static_cast<std::size_t>(idx)] = 0.0;
  }
  w4[0] = w4[1] = 0.0;
  w4[M - 2] = w4[M - 1] = 0.0;

  // contiguous runs of exact-vacuum cells take the two-op advection kernel
  std::vector<std::array<std::size_t, 2>> fast;
  for (std::size_t i = 0; i < M;) {
    if (w[i] == 1.0 && w4[i] == 0.0) {
      std::size_t j = i + 1;
      while (j < M && w[j] == 1.0 && w4[j] == 0.0) ++j;
      fast.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }

  // one-way ends: u^{n+1}_0 = u^n_1 + b (u^{n+1}_1 - u^n_0); exact at nu = 1
  const double nu_l = std::sqrt(w.front()), nu_r = std::sqrt(w.back());
  const double bl = (nu_l - 1.0) / (nu_l + 1.0);
  const double br = (nu_r - 1.0) / (nu_r + 1.0);

  // launch the right-moving packet: u^0 is the profile at t=0 and u^{-1} the
  // profile one step earlier, which discards the left-going d'Alembert half.
  // Two ghost cells at each end stay zero; u^m lives in q[m & 1].
  const double n0 = medium.n0;
  std::vector<double> qa(M + 4, 0.0), qb(M + 4, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    qa[i + 2] = pulse_time(pulse, 0.0, grid.z(i));
    qb[i + 2] = pulse_time(pulse, -grid.dt / n0, grid.z(i));
  }
  double* q[2] = {qa.data() + 2, qb.data() + 2};

  SampledSignal out;
  out.t0 = grid.dt;
  out.dt = grid.dt;
  out.values.assign(grid.steps, 0.0);

  // space-time blocking: blocks sweep left to right, each advancing its
  // parallelogram of `rows` steps while the cells stay cache-resident; column
  // ranges shift left two cells per row so every read of the five-point
  // stencil sees the correct time level (writes land in the stale array, so
  // same-row neighbors keep their old values).
  const bool canonical = opt.block == 0 || opt.rows <= 1 || opt.block >= M;
  const std::size_t B = canonical ? M : std::max<std::size_t>(opt.block, 8);
  const std::size_t Tb =
      canonical ? 1 : std::max<std::size_t>(std::min(opt.rows, B / 4), 1);
  const std::size_t nb = std::max<std::size_t>(1, M / B);

  for (std::size_t base = 0; base < grid.steps; base += Tb) {
    const std::size_t H = std::min(Tb, grid.steps - base);
    for (std::size_t k = 0; k < nb; ++k) {
      for (std::size_t step = 0; step < H; ++step) {
        const std::size_t N = base + step;
        const double* cur = q[N & 1];
        double* nxt = q[(N + 1) & 1];
        const std::size_t lo = (k == 0) ? 0 : k * B - 2 * step;
        const std::size_t hi = (k + 1 == nb) ? M : k * B + B - 2 * step;
        sweep_row_mixed(nxt, cur, w.data(), w4.data(), fast,
                        std::max<std::size_t>(lo, 1), std::min(hi, M - 1));
        if (lo == 0) nxt[0] = cur[1] + bl * (nxt[1] - cur[0]);
        if (hi == M) nxt[M - 1] = cur[M - 2] + br * (nxt[M - 2] - cur[M - 1]);
        if (i_d >= lo && i_d < hi) {
          const double t = grid.dt * static_cast<double>(N + 1);
          out.values[N] = nxt[i_d] - pulse_time(pulse, t / n0, z_d);
        }
      }
    }
  }
  return out;
}

std::vector<ReflectionEvent> reflection_events(const LayeredMedium& medium,
                                               const GaussianPulse& pulse,
                                               double z_d, int eta_max) {
  medium.validate();
  if (!medium.all_constant() || !medium.all_real())
    throw std::domain_error("reflection_events: constant real models required");
  if (eta_max < 1)
    throw std::invalid_argument("reflection_events: eta_max must be >= 1");

  const double c = speed_of_light;
  const double n0 = medium.n0;
  const std::size_t nifc = medium.interfaces.size();
  std::vector<double> n(nifc + 1);
  n[0] = n0;
  for (std::size_t r = 1; r <= nifc; ++r)
    n[r] = medium.region_index(pulse.omega0, r).real();
  std::vector<double> rho(nifc + 1, 0.0);
  for (std::size_t j = 1; j <= nifc; ++j)
    rho[j] = fresnel_coefficients(n[j - 1], n[j]).rho.real();

  // detector-referred optical path of the front-face bounce, then per layer k
  // the q round-trip family: path = 2 q n_k l_k + 2 (n_0 z_1 + sum_{j<k} n_j l_j)
  // with the common source/detector offset -n_0 (z_0 + z_d)
  std::vector<ReflectionEvent> events;
  const double offset = -n0 * (pulse.z0 + z_d);
  {
    ReflectionEvent e;
    e.layer = 0;
    e.order = 1;
    e.amplitude = rho[1];
    e.arrival = (2.0 * n0 * medium.interfaces[0] + offset) / c;
    e.path = "front face";
    events.push_back(e);
  }
  double entry = 2.0 * n0 * medium.interfaces[0];  // doubled path to layer k
  double trans = 1.0;                              // prod (1 - rho_j^2)
  for (std::size_t k = 1; k < nifc; ++k) {
    trans *= 1.0 - rho[k] * rho[k];
    const double lk = medium.interfaces[k] - medium.interfaces[k - 1];
    double amp = trans * rho[k + 1];
    for (int q = 1; q <= eta_max; ++q) {
      ReflectionEvent e;
      e.layer = static_cast<int>(k);
      e.order = q;
      e.amplitude = amp;
      e.arrival = (2.0 * q * n[k] * lk + entry + offset) / c;
      e.path = "layer " + std::to_string(k) + ", " + std::to_string(q) +
               (q == 1 ? " round trip" : " round trips");
      events.push_back(e);
      amp *= -rho[k] * rho[k + 1];
    }
    entry += 2.0 * n[k] * lk;
  }
  std::sort(events.begin(), events.end(),
            [](const ReflectionEvent& a, const ReflectionEvent& b) {
              return a.arrival < b.arrival;
            });
  return events;
}

SampledSignal analytic_reflection_series(const LayeredMedium& medium,
                                         const GaussianPulse& pulse, double z_d,
                                         int eta_max, double t0, double dt,
                                         std::size_t samples) {
  if (!(dt > 0.0) || samples == 0)
    throw std::invalid_argument("analytic_reflection_series: bad time grid");
  const auto events = reflection_events(medium, pulse, z_d, eta_max);

  SampledSignal out;
  out.t0 = t0;
  out.dt = dt;
  out.values.assign(samples, 0.0);
  const double c = speed_of_light;
  const double half_support = 12.0 * pulse.sigma / c;
  for (const auto& e : events) {
    const auto first = static_cast<long long>(
        std::ceil((e.arrival - half_support - t0) / dt));
    const auto last = static_cast<long long>(
        std::floor((e.arrival + half_support - t0) / dt));
    const long long lo = std::max<long long>(first, 0);
    const long long hi =
        std::min<long long>(last, static_cast<long long>(samples) - 1);
    for (long long i = lo; i <= hi; ++i) {
      const double x = c * (e.arrival - (t0 + dt * static_cast<double>(i)));
      out.values[static_cast<std::size_t>(i)] +=
          e.amplitude * std::exp(-x * x / (2.0 * pulse.sigma * pulse.sigma)) *
          std::cos(pulse.omega0 / c * x);
    }
  }
  return out;
}

SampledSignal measurement_time(const SampledSignal& field_difference) {
  SampledSignal out = field_difference;
  for (double& v : out.values) v = std::abs(v);
  return out;
}

}  // namespace octstrip
