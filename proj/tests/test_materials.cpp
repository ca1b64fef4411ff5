#include <cmath>
#include <random>

#include "doctest.h"
#include "eqsadj/materials.hpp"

using namespace eqsadj;

namespace {

MaterialModel paper_fgm() {
  MaterialModel m;
  m.region = 2;
  m.kind = MaterialKind::fgm;
  m.a1 = 1e-10;
  m.a2 = 0.7e6;
  m.a3 = 2.4e6;
  m.a4 = 1864.0;
  m.eps = 2.0 * 8.8541878128e-12;
  return m;
}

MaterialModel linear_material(double sigma, double eps) {
  MaterialModel m;
  m.region = 1;
  m.kind = MaterialKind::linear;
  m.sigma = sigma;
  m.eps = eps;
  return m;
}

}  // namespace

TEST_CASE("fgm conductivity at anchor fields") {
  const MaterialModel m = paper_fgm();
  // sigma(0) = a1 (1 + a4^-1) / (1 + a4^(-a3/a2))
  CHECK(sigma_fgm(0.0, m) == doctest::Approx(1.00054e-10).epsilon(1e-4));
  // saturation level a1 * a4^((a3-a2)/a2)
  const double sat = m.a1 * std::pow(m.a4, (m.a3 - m.a2) / m.a2);
  CHECK(sat == doctest::Approx(8.8e-3).epsilon(0.02));
  CHECK(sigma_fgm(1e9, m) == doctest::Approx(sat).epsilon(1e-3));
  // huge fields must not overflow
  CHECK(std::isfinite(sigma_fgm(1e12, m)));
}

TEST_CASE("fgm with a4 near one degenerates to a constant") {
  MaterialModel m = paper_fgm();
  m.a4 = 1.0 + 1e-12;
  for (double E : {0.0, 1e3, 1e6, 1e8})
    CHECK(sigma_fgm(E, m) == doctest::Approx(m.a1).epsilon(1e-9));
}

TEST_CASE("fgm field derivative matches finite differences") {
  const MaterialModel m = paper_fgm();
  const double h = 1.0;
  SUBCASE("at zero field") {
    const double fd = (sigma_fgm(h, m) - sigma_fgm(0.0, m)) / h;  // one-sided
    CHECK(sigma_fgm_dE(0.0, m) == doctest::Approx(fd).epsilon(1e-6));
  }
  SUBCASE("on the knee") {
    for (double E : {0.5e6, 0.7e6, 1e6, 2.4e6}) {
      const double fd = (sigma_fgm(E + h, m) - sigma_fgm(E - h, m)) / (2 * h);
      CHECK(sigma_fgm_dE(E, m) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  SUBCASE("plateau slope is negligible") {
    double peak = 0.0;
    for (double E = 1e3; E <= 1e8; E *= 1.1)
      peak = std::max(peak, sigma_fgm_dE(E, m));
    CHECK(sigma_fgm_dE(1e7, m) < 1e-15 * peak);
  }
}

TEST_CASE("fgm conductivity is non-decreasing") {
  const MaterialModel m = paper_fgm();
  double prev = sigma_fgm(1e3, m);
  for (double E = 1e3 * 1.05; E <= 1e8; E *= 1.05) {
    const double cur = sigma_fgm(E, m);
    // allow last-digit rounding wiggle of the exp-difference evaluation on
    // the saturated plateau
    CHECK(cur >= prev * (1.0 - 1e-12));
    prev = cur;
  }
}

TEST_CASE("differential conductivity tensor") {
  SUBCASE("linear material gives sigma I for any field") {
    const MaterialModel m = linear_material(10.0, 40.0);
    const Eigen::Matrix2d t = differential_conductivity({3.0, -4.0}, m);
    CHECK((t - 10.0 * Eigen::Matrix2d::Identity()).norm() == 0.0);
  }
  SUBCASE("zero field falls back to sigma(0) I") {
    const MaterialModel m = paper_fgm();
    const Eigen::Matrix2d t = differential_conductivity({0.0, 0.0}, m);
    CHECK(t(0, 0) == doctest::Approx(sigma_fgm(0.0, m)).epsilon(1e-14));
    CHECK(t(0, 1) == 0.0);
    CHECK(t(1, 0) == 0.0);
    CHECK(t(1, 1) == t(0, 0));
  }
  SUBCASE("axis-aligned field splits tangent and secant entries") {
    const MaterialModel m = paper_fgm();
    const double E = 1e6;
    const Eigen::Matrix2d t = differential_conductivity({E, 0.0}, m);
    // (1,1): d(sigma(E) E)/dE, (2,2): sigma(E); verified against FD of J(E)
    const double h = 1.0;
    const double dJ_dE =
        (sigma_fgm(E + h, m) * (E + h) - sigma_fgm(E - h, m) * (E - h)) /
        (2 * h);
    CHECK(t(0, 0) == doctest::Approx(dJ_dE).epsilon(1e-6));
    CHECK(t(1, 1) == doctest::Approx(sigma_fgm(E, m)).epsilon(1e-12));
    CHECK(t(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("vector FD of J(E) = sigma(|E|) E on a slanted field") {
    const MaterialModel m = paper_fgm();
    const Eigen::Vector2d E0(0.8e6, -0.45e6);
    const Eigen::Matrix2d t = differential_conductivity(E0, m);
    const double h = 1.0;
    for (int dir = 0; dir < 2; ++dir) {
      Eigen::Vector2d ep = E0, em = E0;
      ep[dir] += h;
      em[dir] -= h;
      const Eigen::Vector2d fd =
          (sigma_fgm(ep.norm(), m) * ep - sigma_fgm(em.norm(), m) * em) /
          (2 * h);
      CHECK(t(0, dir) == doctest::Approx(fd[0]).epsilon(1e-6));
      CHECK(t(1, dir) == doctest::Approx(fd[1]).epsilon(1e-6));
    }
  }
}

TEST_CASE("tensor symmetry and rotation covariance") {
  const MaterialModel m = paper_fgm();
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> mag(1e4, 5e6), ang(0.0, 6.283);
  for (int trial = 0; trial < 20; ++trial) {
    const double r = mag(rng), phi = ang(rng), theta = ang(rng);
    const Eigen::Vector2d E(r * std::cos(phi), r * std::sin(phi));
    const Eigen::Matrix2d t = differential_conductivity(E, m);
    CHECK(std::abs(t(0, 1) - t(1, 0)) <= 1e-18);

    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Eigen::Matrix2d rotated = differential_conductivity(R * E, m);
    const Eigen::Matrix2d expected = R * t * R.transpose();
    CHECK((rotated - expected).norm() <= 1e-12 * expected.norm());
  }
}

TEST_CASE("differential permittivity is eps I") {
  const MaterialModel m = paper_fgm();
  const Eigen::Matrix2d t = differential_permittivity({1e6, -2e6}, m);
  CHECK((t - m.eps * Eigen::Matrix2d::Identity()).norm() == 0.0);
}

TEST_CASE("parameter derivatives of the conductivity laws") {
  SUBCASE("linear: d sigma / d sigma = 1") {
    const MaterialModel m = linear_material(10.0, 40.0);
    CHECK(sigma_dparam(0.0, m, ParamSelector::sigma) == 1.0);
    CHECK(sigma_dparam(1e6, m, ParamSelector::sigma) == 1.0);
    CHECK(sigma_dparam(1e6, m, ParamSelector::eps) == 0.0);
  }
  SUBCASE("fgm: a1 is a multiplicative prefactor") {
    const MaterialModel m = paper_fgm();
    for (double E : {0.0, 1e5, 1e6, 1e7})
      CHECK(sigma_dparam(E, m, ParamSelector::a1) ==
            doctest::Approx(sigma_fgm(E, m) / m.a1).epsilon(1e-12));
  }
  SUBCASE("fgm: a2 derivative matches FD at the knee") {
    MaterialModel m = paper_fgm();
    const double h = 1.0;
    MaterialModel mp = m, mm = m;
    mp.a2 += h;
    mm.a2 -= h;
    const double fd = (sigma_fgm(1e6, mp) - sigma_fgm(1e6, mm)) / (2 * h);
    CHECK(sigma_dparam(1e6, m, ParamSelector::a2) ==
          doctest::Approx(fd).epsilon(1e-6));
  }
  SUBCASE("selector of the wrong law kind throws") {
    CHECK_THROWS_AS(sigma_dparam(1e6, paper_fgm(), ParamSelector::sigma),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        sigma_dparam(1e6, linear_material(1.0, 1.0), ParamSelector::a2),
        std::invalid_argument);
  }
}

TEST_CASE("all parameter derivatives match FD on random valid models") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    MaterialModel m;
    m.kind = MaterialKind::fgm;
    m.a1 = std::pow(10.0, -11.0 + 2.0 * uni(rng));
    m.a2 = 0.4e6 + 0.6e6 * uni(rng);
    m.a3 = m.a2 * (2.0 + 2.0 * uni(rng));
    m.a4 = 50.0 + 3000.0 * uni(rng);
    m.eps = 1e-11;
    const double E = 3e6 * uni(rng);
    for (ParamSelector sel : {ParamSelector::a1, ParamSelector::a2,
                              ParamSelector::a3, ParamSelector::a4}) {
      MaterialModel mp = m, mm = m;
      const double p0 = param_ref(mp, sel);
      const double h = 1e-6 * std::abs(p0);
      param_ref(mp, sel) = p0 + h;
      param_ref(mm, sel) = p0 - h;
      const double fd = (sigma_fgm(E, mp) - sigma_fgm(E, mm)) / (2 * h);
      const double an = sigma_dparam(E, m, sel);
      // cancellation floor of the central difference itself
      const double noise = 1e-15 * sigma_fgm(E, m) / h;
      if (std::abs(fd) > 1e3 * noise)
        CHECK(std::abs(an - fd) <= 1e-5 * std::abs(fd));
      else
        CHECK(std::abs(an) <= 1e3 * noise + 1e-5 * std::abs(fd));
    }
  }
}

TEST_CASE("eps_dparam selects the permittivity slot only") {
  const MaterialModel m = paper_fgm();
  CHECK(eps_dparam(m, ParamSelector::eps) == 1.0);
  CHECK(eps_dparam(m, ParamSelector::a2) == 0.0);
  CHECK(eps_dparam(linear_material(1.0, 2.0), ParamSelector::sigma) == 0.0);
}

TEST_CASE("selector names round trip") {
  for (ParamSelector s : {ParamSelector::sigma, ParamSelector::eps,
                          ParamSelector::a1, ParamSelector::a2,
                          ParamSelector::a3, ParamSelector::a4})
    CHECK(parse_selector(selector_name(s)) == s);
  CHECK_THROWS_AS(parse_selector("bogus"), std::invalid_argument);
}

TEST_CASE("material validation enforces the law invariants") {
  CHECK_NOTHROW(validate_material(paper_fgm()));
  CHECK_NOTHROW(validate_material(linear_material(0.0, 1.0)));
  SUBCASE("linear needs positive eps") {
    MaterialModel m = linear_material(1.0, 0.0);
    CHECK_THROWS_AS(validate_material(m), std::invalid_argument);
  }
  SUBCASE("linear needs nonnegative sigma") {
    MaterialModel m = linear_material(-1.0, 1.0);
    CHECK_THROWS_AS(validate_material(m), std::invalid_argument);
  }
  SUBCASE("fgm needs a3 > a2") {
    MaterialModel m = paper_fgm();
    m.a3 = m.a2;
    CHECK_THROWS_AS(validate_material(m), std::invalid_argument);
  }
  SUBCASE("fgm needs a4 > 1") {
    MaterialModel m = paper_fgm();
    m.a4 = 1.0;
    CHECK_THROWS_AS(validate_material(m), std::invalid_argument);
  }
}
