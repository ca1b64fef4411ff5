#include "eqsadj/oracle.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

namespace eqsadj {
namespace {

// Coefficients of phi_m(t) = A sin(wt) + B cos(wt) - B exp(-a t) for a
// sinusoidal drive, plus their derivatives with respect to eps1 / sigma1.
struct SinusoidCoeffs {
  double A = 0.0, B = 0.0, a = 0.0;
  double dA = 0.0, dB = 0.0, da = 0.0;
};

enum class Sel { eps1, sigma1 };

SinusoidCoeffs sinusoid_coeffs(const LumpedTwoLayer& m, Sel sel) {
  const double w = m.U.omega;
  const double uh = m.U.amplitude;
  const double S = m.sigma1 + m.sigma2;
  const double P = m.eps1 + m.eps2;
  const double D = S * S + w * w * P * P;
  SinusoidCoeffs c;
  c.a = S / P;
  c.A = uh * (m.sigma1 * S + m.eps1 * w * w * P) / D;
  c.B = uh * w * (m.eps1 * S - m.sigma1 * P) / D;
  if (sel == Sel::eps1) {
    const double dD = 2.0 * w * w * P;
    c.dA = uh * (w * w * (P + m.eps1) * D - (m.sigma1 * S + m.eps1 * w * w * P) * dD) / (D * D);
    c.dB = uh * w * ((S - m.sigma1) * D - (m.eps1 * S - m.sigma1 * P) * dD) / (D * D);
    c.da = -S / (P * P);
  } else {
    const double dD = 2.0 * S;
    c.dA = uh * ((S + m.sigma1) * D - (m.sigma1 * S + m.eps1 * w * w * P) * dD) / (D * D);
    c.dB = uh * w * ((m.eps1 - P) * D - (m.eps1 * S - m.sigma1 * P) * dD) / (D * D);
    c.da = 1.0 / P;
  }
  return c;
}

double phi_m_dc(const LumpedTwoLayer& m, double t) {
  const double S = m.sigma1 + m.sigma2;
  const double a = S / (m.eps1 + m.eps2);
  return (m.sigma1 * m.U.value / S) * (1.0 - std::exp(-a * t));
}

double dphi_m_dc(const LumpedTwoLayer& m, double t, Sel sel) {
  const double S = m.sigma1 + m.sigma2;
  const double P = m.eps1 + m.eps2;
  const double a = S / P;
  const double e = std::exp(-a * t);
  const double amp = m.sigma1 * m.U.value / S;
  if (sel == Sel::eps1) {
    const double da = -S / (P * P);
    return amp * t * da * e;
  }
  const double da = 1.0 / P;
  return (m.U.value * m.sigma2 / (S * S)) * (1.0 - e) + amp * t * da * e;
}

double dphi_m_sel(const LumpedTwoLayer& m, double t, Sel sel) {
  switch (m.U.kind) {
    case TimeFunction::Kind::dc:
      return dphi_m_dc(m, t, sel);
    case TimeFunction::Kind::sinusoid: {
      const SinusoidCoeffs c = sinusoid_coeffs(m, sel);
      const double w = m.U.omega;
      const double e = std::exp(-c.a * t);
      return c.dA * std::sin(w * t) + c.dB * std::cos(w * t) -
             (c.dB - c.B * c.da * t) * e;
    }
    case TimeFunction::Kind::impulse:
      break;
  }
  throw std::invalid_argument("LumpedTwoLayer: closed forms cover dc and sinusoid drives");
}

// Adaptive Simpson quadrature with absolute tolerance split per subinterval.
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = 1e-13 * std::max(std::abs(coarse), 1.0);
  return simpson(f, a, b, fa, fm, fb, tol, 48);
}

}  // namespace

double LumpedTwoLayer::phi_m(double t) const {
  switch (U.kind) {
    case TimeFunction::Kind::dc:
      return phi_m_dc(*this, t);
    case TimeFunction::Kind::sinusoid: {
      const SinusoidCoeffs c = sinusoid_coeffs(*this, Sel::eps1);
      return c.A * std::sin(U.omega * t) + c.B * std::cos(U.omega * t) -
             c.B * std::exp(-c.a * t);
    }
    case TimeFunction::Kind::impulse:
      break;
  }
  throw std::invalid_argument("LumpedTwoLayer: closed forms cover dc and sinusoid drives");
}

double LumpedTwoLayer::dphi_m_deps1(double t) const { return dphi_m_sel(*this, t, Sel::eps1); }
double LumpedTwoLayer::dphi_m_dsigma1(double t) const { return dphi_m_sel(*this, t, Sel::sigma1); }

double LumpedTwoLayer::phi_ref(double t) const { return 0.5 * (U(t) + phi_m(t)); }
double LumpedTwoLayer::dphi_ref_deps1(double t) const { return 0.5 * dphi_m_deps1(t); }
double LumpedTwoLayer::dphi_ref_dsigma1(double t) const { return 0.5 * dphi_m_dsigma1(t); }

double LumpedTwoLayer::W_el(double ta, double tb) const {
  const auto f = [this](double t) {
    const double pm = phi_m(t);
    const double du = U(t) - pm;
    return sigma1 * du * du + sigma2 * pm * pm;
  };
  return (width / d) * integrate(f, ta, tb);
}

double LumpedTwoLayer::dW_el_dsigma1(double ta, double tb) const {
  const auto f = [this](double t) {
    const double pm = phi_m(t);
    const double du = U(t) - pm;
    const double dpm = dphi_m_dsigma1(t);
    return du * du + 2.0 * (sigma2 * pm - sigma1 * du) * dpm;
  };
  return (width / d) * integrate(f, ta, tb);
}

double LumpedTwoLayer::dW_el_deps1(double ta, double tb) const {
  const auto f = [this](double t) {
    const double pm = phi_m(t);
    const double du = U(t) - pm;
    const double dpm = dphi_m_deps1(t);
    return 2.0 * (sigma2 * pm - sigma1 * du) * dpm;
  };
  return (width / d) * integrate(f, ta, tb);
}

double LumpedTwoLayer::phi_m_rk4(double t_end, int steps) const {
  const double S = sigma1 + sigma2;
  const double P = eps1 + eps2;
  const auto rhs = [&](double t, double y) {
    return (sigma1 * U(t) + eps1 * U.derivative(t) - S * y) / P;
  };
  const double h = t_end / steps;
  double y = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const double k1 = rhs(t, y);
    const double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = rhs(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

std::vector<OracleReport> fd_sensitivity(const Scenario& sc,
                                         const std::string& param_name,
                                         int n_main_override, int threads) {
  std::vector<std::string> qoi_names;
  for (const QoiSpec& q : sc.qois) qoi_names.push_back(q.name);
  const double p0 = scenario_param_value(sc, param_name);
  const ScenarioQoiFn eval = [&sc, &param_name, n_main_override](double p) {
    return eval_scenario_qois(sc, {{param_name, p}}, n_main_override, 1);
  };
  return fd_sensitivity(eval, qoi_names, param_name, p0, sc.run.fd_h_rel,
                        0.01, threads);
}

LumpedTwoLayer lumped_model(const Scenario& sc) {
  if (sc.mesh_source.kind != MeshSource::Kind::layered_rect)
    throw std::invalid_argument(
        "lumped_model: only layered_rect scenarios have a closed form");
  const MaterialModel& m1 = material_for(sc.materials, 1);
  const MaterialModel& m2 = material_for(sc.materials, 2);
  if (m1.kind != MaterialKind::linear || m2.kind != MaterialKind::linear)
    throw std::invalid_argument("lumped_model: both layers must be linear");
  LumpedTwoLayer L;
  L.sigma1 = m1.sigma;
  L.eps1 = m1.eps;
  L.sigma2 = m2.sigma;
  L.eps2 = m2.eps;
  L.d = sc.mesh_source.layer_thickness;
  L.width = sc.mesh_source.width;
  const auto it = sc.excitation.markers.find("top_electrode");
  if (it == sc.excitation.markers.end())
    throw std::invalid_argument("lumped_model: needs a driven top_electrode");
  L.U = it->second;
  return L;
}

double lumped_reference_value(const Scenario& sc, const QoiSpec& qoi) {
  const LumpedTwoLayer L = lumped_model(sc);
  switch (qoi.kind) {
    case QoiKind::energy_integral:
      return L.W_el(qoi.t_a, qoi.t_b);
    case QoiKind::pointwise_potential:
      return L.phi_ref(qoi.t_ref);
    default:
      throw std::invalid_argument("lumped reference: unsupported QoI kind " +
                                  qoi_kind_name(qoi.kind));
  }
}

double lumped_reference_sensitivity(const Scenario& sc, const QoiSpec& qoi,
                                    const ParameterSpec& param) {
  const LumpedTwoLayer L = lumped_model(sc);
  if (param.region != 1)
    throw std::invalid_argument(
        "lumped reference: closed-form derivatives cover layer 1 parameters");
  const bool is_eps = param.select == ParamSelector::eps;
  if (!is_eps && param.select != ParamSelector::sigma)
    throw std::invalid_argument(
        "lumped reference: closed-form derivatives cover sigma and eps");
  switch (qoi.kind) {
    case QoiKind::energy_integral:
      return is_eps ? L.dW_el_deps1(qoi.t_a, qoi.t_b)
                    : L.dW_el_dsigma1(qoi.t_a, qoi.t_b);
    case QoiKind::pointwise_potential:
      return is_eps ? L.dphi_ref_deps1(qoi.t_ref)
                    : L.dphi_ref_dsigma1(qoi.t_ref);
    default:
      throw std::invalid_argument("lumped reference: unsupported QoI kind " +
                                  qoi_kind_name(qoi.kind));
  }
}

std::vector<OracleReport> fd_sensitivity(const ScenarioQoiFn& eval,
                                         const std::vector<std::string>& qoi_names,
                                         const std::string& param_name,
                                         double p0, double h_rel,
                                         double spread_tol, int threads) {
  if (!(h_rel > 0.0)) throw std::invalid_argument("fd_sensitivity: h_rel must be positive");
  const double h = h_rel * std::max(std::abs(p0), p_floor);
  const double offsets[4] = {p0 + h, p0 - h, p0 + 0.5 * h, p0 - 0.5 * h};
  Eigen::VectorXd g[4];
  if (threads > 1) {
    std::future<Eigen::VectorXd> jobs[4];
    for (int i = 0; i < 4; ++i)
      jobs[i] = std::async(std::launch::async, [&eval, &offsets, i] { return eval(offsets[i]); });
    for (int i = 0; i < 4; ++i) g[i] = jobs[i].get();
  } else {
    for (int i = 0; i < 4; ++i) g[i] = eval(offsets[i]);
  }
  for (int i = 1; i < 4; ++i)
    if (g[i].size() != g[0].size())
      throw std::logic_error("fd_sensitivity: evaluation returned inconsistent QoI counts");
  if (g[0].size() != static_cast<Eigen::Index>(qoi_names.size()))
    throw std::logic_error("fd_sensitivity: QoI name count does not match evaluation size");

  std::vector<OracleReport> out(qoi_names.size());
  for (size_t q = 0; q < qoi_names.size(); ++q) {
    OracleReport& r = out[q];
    r.qoi = qoi_names[q];
    r.param = param_name;
    r.h = h;
    const auto i = static_cast<Eigen::Index>(q);
    r.value = (g[0][i] - g[1][i]) / (2.0 * h);
    r.value_half = (g[2][i] - g[3][i]) / h;
    r.richardson = (4.0 * r.value_half - r.value) / 3.0;
    const double scale = std::max(std::abs(r.richardson), 1e-300);
    r.spread_rel = std::abs(r.value - r.value_half) / scale;
    r.reliable = r.spread_rel <= spread_tol;
  }
  return out;
}

}  // namespace eqsadj
