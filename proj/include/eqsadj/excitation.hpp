#pragma once

#include <map>
#include <string>

namespace eqsadj {

// Standard double-exponential impulse; zero at t = 0, peak near
// tau1*tau2/(tau2-tau1)*ln(tau2/tau1).
double impulse_voltage(double t, double u_hat, double tau1, double tau2);

struct TimeFunction {
  enum class Kind { dc, sinusoid, impulse };
  Kind kind = Kind::dc;
  double value = 0.0;      // dc level; also the offset under an impulse
  double amplitude = 0.0;  // sinusoid
  double omega = 0.0;      // rad/s
  double u_hat = 0.0;      // impulse
  double tau1 = 0.0;
  double tau2 = 0.0;

  double operator()(double t) const;
  double derivative(double t) const;

  static TimeFunction dc(double value);
  static TimeFunction sinusoid(double amplitude, double omega);
  static TimeFunction impulse(double u_hat, double tau1, double tau2,
                              double dc_offset = 0.0);
};

// Dirichlet data: boundary marker -> voltage waveform.
struct Excitation {
  std::map<std::string, TimeFunction> markers;

  std::map<std::string, double> values_at(double t) const;
};

}  // namespace eqsadj
