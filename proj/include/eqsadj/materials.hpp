#pragma once

#include <Eigen/Core>
#include <map>
#include <string>

namespace eqsadj {

enum class MaterialKind { linear, fgm };

// Design-parameter selectors usable in sensitivity studies. `sigma`/`eps`
// apply to linear materials (eps to fgm as well), a1..a4 to the fgm law.
enum class ParamSelector { sigma, eps, a1, a2, a3, a4 };

ParamSelector parse_selector(const std::string& name);
std::string selector_name(ParamSelector s);

struct MaterialModel {
  int region = 0;
  MaterialKind kind = MaterialKind::linear;
  double sigma = 0.0;  // A/Vm, linear law
  double eps = 0.0;    // As/Vm, field-independent in all shipped laws
  // fgm law sigma(E) = a1*(1 + a4^((E-a2)/a2)) / (1 + a4^((E-a3)/a2))
  double a1 = 0.0;  // A/Vm
  double a2 = 0.0;  // V/m
  double a3 = 0.0;  // V/m
  double a4 = 0.0;  // dimensionless
};

// Throws std::invalid_argument when the model violates its invariants
// (linear: sigma >= 0, eps > 0; fgm: a1 > 0, a2 > 0, a3 > a2, a4 > 1, eps > 0).
void validate_material(const MaterialModel& m);

// Guard for the 1/|E| factor of the tensor formula.
inline constexpr double E_floor = 1e-12;  // V/m

double sigma_fgm(double E, const MaterialModel& m);
double sigma_fgm_dE(double E, const MaterialModel& m);

// Active law dispatch: sigma(|E|) and d sigma/d|E|.
double conductivity(double E, const MaterialModel& m);
double conductivity_dE(double E, const MaterialModel& m);
double permittivity(const MaterialModel& m);

// sigma_d = sigma(|E|) I + (sigma'(|E|)/|E|) E E^T; sigma(0) I below E_floor.
Eigen::Matrix2d differential_conductivity(const Eigen::Vector2d& E_vec,
                                          const MaterialModel& m);
// eps_d = eps I for the shipped field-independent permittivities.
Eigen::Matrix2d differential_permittivity(const Eigen::Vector2d& E_vec,
                                          const MaterialModel& m);

// Partial derivative of the active sigma law w.r.t. the selected parameter.
// Selectors of the other law kind throw std::invalid_argument; `eps` returns
// 0 (sigma never depends on eps).
double sigma_dparam(double E, const MaterialModel& m, ParamSelector j);
// Partial derivative of eps w.r.t. the selector: 1 for `eps`, else 0.
double eps_dparam(const MaterialModel& m, ParamSelector j);

// Mutable access to the selected parameter (perturbation hooks for the FD
// oracle and config round-trips). Throws on kind mismatch.
double& param_ref(MaterialModel& m, ParamSelector j);

using MaterialMap = std::map<int, MaterialModel>;

const MaterialModel& material_for(const MaterialMap& materials, int region);

}  // namespace eqsadj
