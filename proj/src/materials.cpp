#include "eqsadj/materials.hpp"

#include <cmath>
#include <stdexcept>

namespace eqsadj {

ParamSelector parse_selector(const std::string& name) {
  if (name == "sigma") return ParamSelector::sigma;
  if (name == "eps") return ParamSelector::eps;
  if (name == "a1") return ParamSelector::a1;
  if (name == "a2") return ParamSelector::a2;
  if (name == "a3") return ParamSelector::a3;
  if (name == "a4") return ParamSelector::a4;
  throw std::invalid_argument("unknown parameter selector '" + name + "'");
}

std::string selector_name(ParamSelector s) {
  switch (s) {
    case ParamSelector::sigma: return "sigma";
    case ParamSelector::eps: return "eps";
    case ParamSelector::a1: return "a1";
    case ParamSelector::a2: return "a2";
    case ParamSelector::a3: return "a3";
    case ParamSelector::a4: return "a4";
  }
  return "?";
}

void validate_material(const MaterialModel& m) {
  if (m.eps <= 0.0) throw std::invalid_argument("material: eps must be > 0");
  if (m.kind == MaterialKind::linear) {
    if (m.sigma < 0.0)
      throw std::invalid_argument("material: sigma must be >= 0");
  } else {
    if (m.a1 <= 0.0) throw std::invalid_argument("material: a1 must be > 0");
    if (m.a2 <= 0.0) throw std::invalid_argument("material: a2 must be > 0");
    if (m.a3 <= m.a2)
      throw std::invalid_argument("material: a3 must be > a2");
    if (m.a4 <= 1.0) throw std::invalid_argument("material: a4 must be > 1");
  }
}

namespace {

// log(1 + e^t), safe for any t.
double softplus(double t) {
  if (t > 40.0) return t + std::log1p(std::exp(-t));
  if (t < -40.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

// 1 / (1 + e^-t), safe for any t.
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double et = std::exp(t);
  return et / (1.0 + et);
}

}  // namespace

double sigma_fgm(double E, const MaterialModel& m) {
  const double L = std::log(m.a4);
  const double x = (E - m.a2) * L / m.a2;
  const double y = (E - m.a3) * L / m.a2;
  return m.a1 * std::exp(softplus(x) - softplus(y));
}

double sigma_fgm_dE(double E, const MaterialModel& m) {
  const double L = std::log(m.a4);
  const double x = (E - m.a2) * L / m.a2;
  const double y = (E - m.a3) * L / m.a2;
  return sigma_fgm(E, m) * (L / m.a2) * (logistic(x) - logistic(y));
}

double conductivity(double E, const MaterialModel& m) {
  return m.kind == MaterialKind::linear ? m.sigma : sigma_fgm(E, m);
}

double conductivity_dE(double E, const MaterialModel& m) {
  return m.kind == MaterialKind::linear ? 0.0 : sigma_fgm_dE(E, m);
}

double permittivity(const MaterialModel& m) { return m.eps; }

Eigen::Matrix2d differential_conductivity(const Eigen::Vector2d& E_vec,
                                          const MaterialModel& m) {
  const double E = E_vec.norm();
  if (E < E_floor)
    return conductivity(0.0, m) * Eigen::Matrix2d::Identity();
  // Materialize the outer product before scaling: folding the scalar into
  // one factor rounds the two off-diagonal entries differently, and the
  // tensor must stay symmetric to the last bit.
  const Eigen::Matrix2d outer = E_vec * E_vec.transpose();
  return conductivity(E, m) * Eigen::Matrix2d::Identity() +
         (conductivity_dE(E, m) / E) * outer;
}

Eigen::Matrix2d differential_permittivity(const Eigen::Vector2d& /*E_vec*/,
                                          const MaterialModel& m) {
  return m.eps * Eigen::Matrix2d::Identity();
}

double sigma_dparam(double E, const MaterialModel& m, ParamSelector j) {
  if (j == ParamSelector::eps) return 0.0;
  if (m.kind == MaterialKind::linear) {
    if (j != ParamSelector::sigma)
      throw std::invalid_argument("sigma_dparam: selector '" +
                                  selector_name(j) +
                                  "' not applicable to a linear material");
    return 1.0;
  }
  if (j == ParamSelector::sigma)
    throw std::invalid_argument(
        "sigma_dparam: selector 'sigma' not applicable to an fgm material");
  const double sigma = sigma_fgm(E, m);
  const double L = std::log(m.a4);
  const double x = (E - m.a2) * L / m.a2;
  const double y = (E - m.a3) * L / m.a2;
  switch (j) {
    case ParamSelector::a1:
      return sigma / m.a1;
    case ParamSelector::a2: {
      // dx/da2 = -L*E/a2^2, dy/da2 = -L*(E - a3)/a2^2
      const double dx = -L * E / (m.a2 * m.a2);
      const double dy = -L * (E - m.a3) / (m.a2 * m.a2);
      return sigma * (logistic(x) * dx - logistic(y) * dy);
    }
    case ParamSelector::a3:
      return sigma * logistic(y) * L / m.a2;
    case ParamSelector::a4: {
      const double dx = (E - m.a2) / (m.a2 * m.a4);
      const double dy = (E - m.a3) / (m.a2 * m.a4);
      return sigma * (logistic(x) * dx - logistic(y) * dy);
    }
    default:
      return 0.0;
  }
}

double eps_dparam(const MaterialModel& /*m*/, ParamSelector j) {
  return j == ParamSelector::eps ? 1.0 : 0.0;
}

double& param_ref(MaterialModel& m, ParamSelector j) {
  if (j == ParamSelector::eps) return m.eps;
  if (m.kind == MaterialKind::linear) {
    if (j == ParamSelector::sigma) return m.sigma;
    throw std::invalid_argument("param_ref: selector '" + selector_name(j) +
                                "' not applicable to a linear material");
  }
  switch (j) {
    case ParamSelector::a1: return m.a1;
    case ParamSelector::a2: return m.a2;
    case ParamSelector::a3: return m.a3;
    case ParamSelector::a4: return m.a4;
    default:
      throw std::invalid_argument(
          "param_ref: selector 'sigma' not applicable to an fgm material");
  }
}

const MaterialModel& material_for(const MaterialMap& materials, int region) {
  auto it = materials.find(region);
  if (it == materials.end())
    throw std::invalid_argument("no material for region " +
                                std::to_string(region));
  return it->second;
}

}  // namespace eqsadj
