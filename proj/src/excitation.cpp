#include "eqsadj/excitation.hpp"

#include <cmath>
#include <stdexcept>

namespace eqsadj {

double impulse_voltage(double t, double u_hat, double tau1, double tau2) {
  if (!(tau2 > tau1 && tau1 > 0.0))
    throw std::invalid_argument("impulse_voltage: requires tau2 > tau1 > 0");
  return u_hat * (tau2 / (tau2 - tau1)) *
         (std::exp(-t / tau2) - std::exp(-t / tau1));
}

double TimeFunction::operator()(double t) const {
  switch (kind) {
    case Kind::dc:
      return value;
    case Kind::sinusoid:
      return amplitude * std::sin(omega * t);
    case Kind::impulse:
      return value + impulse_voltage(t, u_hat, tau1, tau2);
  }
  return 0.0;
}

double TimeFunction::derivative(double t) const {
  switch (kind) {
    case Kind::dc:
      return 0.0;
    case Kind::sinusoid:
      return amplitude * omega * std::cos(omega * t);
    case Kind::impulse:
      return u_hat * (tau2 / (tau2 - tau1)) *
             (std::exp(-t / tau1) / tau1 - std::exp(-t / tau2) / tau2);
  }
  return 0.0;
}

TimeFunction TimeFunction::dc(double value) {
  TimeFunction f;
  f.kind = Kind::dc;
  f.value = value;
  return f;
}

TimeFunction TimeFunction::sinusoid(double amplitude, double omega) {
  TimeFunction f;
  f.kind = Kind::sinusoid;
  f.amplitude = amplitude;
  f.omega = omega;
  return f;
}

TimeFunction TimeFunction::impulse(double u_hat, double tau1, double tau2,
                                   double dc_offset) {
  if (!(tau2 > tau1 && tau1 > 0.0))
    throw std::invalid_argument("impulse: requires tau2 > tau1 > 0");
  TimeFunction f;
  f.kind = Kind::impulse;
  f.u_hat = u_hat;
  f.tau1 = tau1;
  f.tau2 = tau2;
  f.value = dc_offset;
  return f;
}

std::map<std::string, double> Excitation::values_at(double t) const {
  std::map<std::string, double> out;
  for (const auto& [marker, f] : markers) out[marker] = f(t);
  return out;
}

}  // namespace eqsadj
