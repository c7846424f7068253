#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace octstrip {

using cdouble = std::complex<double>;

// n(lambda) = b1 + b2/lambda^2 + b3/lambda^4
double cauchy_eval(double b1, double b2, double b3, double lambda);

// Dispersion model of one homogeneous region.
class IndexModel {
public:
  enum class Kind { constant, cauchy, tabulated };

  IndexModel() = default;

  static IndexModel constant(double n);
  static IndexModel cauchy(double b1, double b2, double b3);
  // nu + i*kappa samples on the uniform grid omega_lo + k*delta_omega.
  // Out-of-grid queries clamp to the end samples when extrapolate is set,
  // otherwise they throw.
  static IndexModel tabulated(double omega_lo, double delta_omega,
                              std::vector<cdouble> values, bool extrapolate = false);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  bool is_real() const;
  double constant_value() const;
  cdouble eval(double omega) const;

private:
  Kind kind_ = Kind::constant;
  double n_ = 1.0;
  double b1_ = 0, b2_ = 0, b3_ = 0;
  double omega_lo_ = 0, delta_omega_ = 0;
  std::vector<cdouble> table_;
  bool extrapolate_ = false;
};

struct Fresnel {
  cdouble rho;
  cdouble tau;
};

// rho = (n_left - n_right)/(n_left + n_right), tau = 2 n_left/(n_left + n_right)
Fresnel fresnel_coefficients(cdouble n_left, cdouble n_right);

// Piecewise-homogeneous stack: background n0 left of z_1, layer j between
// z_j and z_{j+1}, exit model beyond z_{N+1}.
struct LayeredMedium {
  double n0 = 1.0;
  std::vector<double> interfaces;  // z_1..z_{N+1}, strictly increasing (m)
  std::vector<IndexModel> layers;  // one model per layer, N = interfaces-1
  IndexModel exit = IndexModel::constant(1.0);

  std::size_t layer_count() const { return layers.size(); }
  void validate() const;  // throws std::invalid_argument

  // region r: 0 = background, 1..N = layer r, N+1 = exit half-space
  cdouble region_index(double omega, std::size_t region) const;
  bool all_constant() const;
  bool all_real() const;
};

cdouble evaluate_index(const LayeredMedium& medium, double omega, double z);

// Distances the algorithms work with: l_pre = |z_d - z_0|, l0 = z_1 - z_d,
// lengths = l_1..l_N.  Convention: detector at z_d, source at z_d - l_pre.
struct LayerGeometry {
  double l_pre = 0;
  double l0 = 0;
  std::vector<double> lengths;
};

std::vector<double> interfaces_from_geometry(const LayerGeometry& g, double z_d = 0.0);
LayerGeometry geometry_from_interfaces(const std::vector<double>& z, double z_d = 0.0,
                                       double z_0 = 0.0);

} // namespace octstrip
