#include "octstrip/medium.hpp"

#include <cmath>
#include <stdexcept>

#include "octstrip/constants.hpp"

namespace octstrip {

double cauchy_eval(double b1, double b2, double b3, double lambda) {
  if (lambda <= 0.0) throw std::domain_error("cauchy_eval: lambda must be positive");
  const double il2 = 1.0 / (lambda * lambda);
  return b1 + b2 * il2 + b3 * il2 * il2;
}

IndexModel IndexModel::constant(double n) {
  IndexModel m;
  m.kind_ = Kind::constant;
  m.n_ = n;
  return m;
}

IndexModel IndexModel::cauchy(double b1, double b2, double b3) {
  IndexModel m;
  m.kind_ = Kind::cauchy;
  m.b1_ = b1;
  m.b2_ = b2;
  m.b3_ = b3;
  return m;
}

IndexModel IndexModel::tabulated(double omega_lo, double delta_omega,
                                 std::vector<cdouble> values, bool extrapolate) {
  if (delta_omega <= 0.0) throw std::invalid_argument("tabulated: delta_omega must be positive");
  if (values.size() < 2) throw std::invalid_argument("tabulated: need at least two samples");
  IndexModel m;
  m.kind_ = Kind::tabulated;
  m.omega_lo_ = omega_lo;
  m.delta_omega_ = delta_omega;
  m.table_ = std::move(values);
  m.extrapolate_ = extrapolate;
  return m;
}

bool IndexModel::is_real() const {
  if (kind_ != Kind::tabulated) return true;
  for (const cdouble& v : table_)
    if (v.imag() != 0.0) return false;
  return true;
}

double IndexModel::constant_value() const {
  if (kind_ != Kind::constant) throw std::logic_error("constant_value: model is not constant");
  return n_;
}

cdouble IndexModel::eval(double omega) const {
  switch (kind_) {
    case Kind::constant:
      return n_;
    case Kind::cauchy: {
      if (omega <= 0.0) throw std::domain_error("IndexModel::eval: omega must be positive");
      return cauchy_eval(b1_, b2_, b3_, 2.0 * pi * speed_of_light / omega);
    }
    case Kind::tabulated: {
      const double u = (omega - omega_lo_) / delta_omega_;
      const double last = double(table_.size() - 1);
      if (u < 0.0 || u > last) {
        if (!extrapolate_)
          throw std::out_of_range("IndexModel::eval: omega outside tabulated band");
        return u < 0.0 ? table_.front() : table_.back();
      }
      const std::size_t i = std::size_t(u) >= table_.size() - 1 ? table_.size() - 2 : std::size_t(u);
      const double w = u - double(i);
      return (1.0 - w) * table_[i] + w * table_[i + 1];
    }
  }
  throw std::logic_error("IndexModel::eval: bad kind");
}

Fresnel fresnel_coefficients(cdouble n_left, cdouble n_right) {
  const cdouble den = n_left + n_right;
  if (std::abs(den) == 0.0)
    throw std::domain_error("fresnel_coefficients: singular interface (n_left + n_right = 0)");
  return {(n_left - n_right) / den, 2.0 * n_left / den};
}

void LayeredMedium::validate() const {
  if (n0 <= 0.0) throw std::invalid_argument("LayeredMedium: n0 must be positive");
  if (layers.empty()) throw std::invalid_argument("LayeredMedium: need at least one layer");
  if (interfaces.size() != layers.size() + 1)
    throw std::invalid_argument("LayeredMedium: interface count must be layer count + 1");
  for (std::size_t i = 1; i < interfaces.size(); ++i)
    if (!(interfaces[i] > interfaces[i - 1]))
      throw std::invalid_argument("LayeredMedium: interfaces must be strictly increasing");
}

cdouble LayeredMedium::region_index(double omega, std::size_t region) const {
  if (region == 0) return n0;
  if (region <= layers.size()) return layers[region - 1].eval(omega);
  if (region == layers.size() + 1) return exit.eval(omega);
  throw std::out_of_range("LayeredMedium::region_index: bad region");
}

bool LayeredMedium::all_constant() const {
  for (const IndexModel& m : layers)
    if (!m.is_constant()) return false;
  return exit.is_constant();
}

bool LayeredMedium::all_real() const {
  for (const IndexModel& m : layers)
    if (!m.is_real()) return false;
  return exit.is_real();
}

cdouble evaluate_index(const LayeredMedium& medium, double omega, double z) {
  if (z < medium.interfaces.front()) return medium.n0;
  if (z >= medium.interfaces.back()) return medium.exit.eval(omega);
  // layer j spans [z_j, z_{j+1})
  std::size_t lo = 0, hi = medium.interfaces.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (medium.interfaces[mid] <= z ? lo : hi) = mid;
  }
  return medium.layers[lo].eval(omega);
}

std::vector<double> interfaces_from_geometry(const LayerGeometry& g, double z_d) {
  std::vector<double> z(g.lengths.size() + 1);
  z[0] = z_d + g.l0;
  for (std::size_t k = 0; k < g.lengths.size(); ++k) z[k + 1] = z[k] + g.lengths[k];
  return z;
}

LayerGeometry geometry_from_interfaces(const std::vector<double>& z, double z_d, double z_0) {
  if (z.empty()) throw std::invalid_argument("geometry_from_interfaces: no interfaces");
  LayerGeometry g;
  g.l_pre = std::abs(z_d - z_0);
  g.l0 = z.front() - z_d;
  g.lengths.resize(z.size() - 1);
  for (std::size_t k = 0; k + 1 < z.size(); ++k) g.lengths[k] = z[k + 1] - z[k];
  return g;
}

} // namespace octstrip
