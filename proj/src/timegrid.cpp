#include "eqsadj/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eqsadj {

int TimeGrid::index_of(double time) const {
  const double tol = 0.45 * dt_imp();
  auto it = std::lower_bound(t.begin(), t.end(), time - tol);
  if (it != t.end() && std::abs(*it - time) <= tol)
    return static_cast<int>(it - t.begin());
  throw std::invalid_argument("timegrid: no sample at t = " +
                              std::to_string(time) +
                              " (grid must be built with refine_at)");
}

std::vector<double> TimeGrid::trapezoid_weights() const {
  const int n = size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  w[0] = 0.5 * (t[1] - t[0]);
  w[n - 1] = 0.5 * (t[n - 1] - t[n - 2]);
  for (int i = 1; i + 1 < n; ++i) w[i] = 0.5 * (t[i + 1] - t[i - 1]);
  return w;
}

TimeGrid build_timegrid(double T, int n_main,
                        const std::vector<double>& refine_at, double ratio,
                        const std::vector<double>& extra) {
  if (T <= 0.0 || n_main < 1)
    throw std::invalid_argument("build_timegrid: need T > 0 and n_main >= 1");
  if (ratio <= 0.0 || ratio >= 0.5)
    throw std::invalid_argument("build_timegrid: ratio out of range");
  TimeGrid grid;
  grid.T = T;
  grid.n_main = n_main;
  grid.dt_main = T / n_main;
  grid.ratio = ratio;
  grid.refined_at = refine_at;
  const double dt_imp = grid.dt_imp();

  std::vector<double> samples;
  samples.reserve(n_main + 1 + 3 * refine_at.size() + extra.size());
  for (int i = 0; i <= n_main; ++i) samples.push_back(T * i / n_main);
  for (double tr : refine_at) {
    if (!(tr > dt_imp && tr < T - dt_imp))
      throw std::invalid_argument(
          "build_timegrid: refinement instant outside (0, T)");
    samples.push_back(tr - dt_imp);
    samples.push_back(tr);
    samples.push_back(tr + dt_imp);
  }
  for (double te : extra) {
    if (te < 0.0 || te > T)
      throw std::invalid_argument("build_timegrid: extra sample outside [0, T]");
    samples.push_back(te);
  }
  std::sort(samples.begin(), samples.end());
  // Merge coincident samples; the threshold is well below dt_imp so genuine
  // refinement neighbors survive.
  const double merge_tol = 0.25 * dt_imp;
  grid.t.push_back(samples.front());
  for (double s : samples) {
    if (s - grid.t.back() > merge_tol) grid.t.push_back(s);
  }
  grid.t.back() = T;
  return grid;
}

}  // namespace eqsadj
