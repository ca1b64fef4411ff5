#pragma once

#include <vector>

namespace eqsadj {

// Strictly increasing samples t[0]=0 ... t[N-1]=T. Refined instants carry
// inserted neighbors at t_ref +- dt_imp with dt_imp = ratio * dt_main.
struct TimeGrid {
  std::vector<double> t;
  double T = 0.0;
  double dt_main = 0.0;
  int n_main = 0;
  double ratio = 1e-8;
  std::vector<double> refined_at;

  int size() const { return static_cast<int>(t.size()); }
  double dt_imp() const { return ratio * dt_main; }
  // Index of the sample equal to `time` (within half the refined spacing);
  // throws std::invalid_argument when absent.
  int index_of(double time) const;
  // Global trapezoid weights: (t[n+1]-t[n-1])/2 inside, half end intervals.
  std::vector<double> trapezoid_weights() const;
};

// Uniform main grid of n_main steps on [0,T] plus refinement triples
// (t_ref - dt_imp, t_ref, t_ref + dt_imp) for each instant in `refine_at`,
// plus plain inserted samples from `extra`. Coincident samples are merged.
TimeGrid build_timegrid(double T, int n_main,
                        const std::vector<double>& refine_at = {},
                        double ratio = 1e-8,
                        const std::vector<double>& extra = {});

}  // namespace eqsadj
