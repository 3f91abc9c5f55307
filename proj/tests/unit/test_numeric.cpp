#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "afrelay/errors.hpp"
#include "afrelay/numeric.hpp"

using namespace afrelay;

TEST_CASE("db conversions round trip") {
  for (double v : {1e-9, 0.5, 1.0, 10.0, 3.3e7}) {
    CHECK(db_to_linear(linear_to_db(v)) == doctest::Approx(v).epsilon(1e-12));
  }
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
  CHECK(db_to_linear(0.0) == 1.0);
}

TEST_CASE("condition number dB scales") {
  CHECK(zeta_from_db(20.0, Zeta2DbScale::kPower) == doctest::Approx(10.0));
  CHECK(zeta_from_db(40.0, Zeta2DbScale::kAmplitude) == doctest::Approx(10.0));
  CHECK(db_from_zeta(zeta_from_db(37.0)) == doctest::Approx(37.0));
  CHECK(db_from_zeta(zeta_from_db(37.0, Zeta2DbScale::kAmplitude), Zeta2DbScale::kAmplitude) ==
        doctest::Approx(37.0));
}

TEST_CASE("integrate: smooth, infinite and endpoint-singular integrands") {
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
  // semicircle area: pi/2
  CHECK(integrate_sqrt_ends([](double x) { return std::sqrt(1 - x * x); }, -1.0, 1.0) ==
        doctest::Approx(M_PI / 2).epsilon(1e-12));
  // int_0^x (1 - 1/(1+t)) / t dt = ln(1 + x)
  for (double x : {1e-3, 0.7, 1.0, 50.0, 1e6})
    CHECK(integrate_over_t([](double t) { return t / (1 + t); }, x) == doctest::Approx(std::log1p(x)).epsilon(1e-11));
}

TEST_CASE("integrate rejects non-finite results") {
  CHECK_THROWS_AS(integrate([](double) { return NAN; }, 0.0, 1.0), NumericError);
}

TEST_CASE("find_root") {
  CHECK(find_root([](double x) { return x * x - 2; }, 0.0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("solve_cubic recovers known roots") {
  using lc = std::complex<long double>;
  const std::vector<std::vector<lc>> cases = {
      {lc(1), lc(2), lc(3)},
      {lc(-1e-6), lc(1), lc(1e6)},
      {lc(0.5, 2), lc(0.5, -2), lc(-3)},
      {lc(1), lc(1), lc(1 + 1e-7)},
  };
  for (const auto& r : cases) {
    // expand (z - r0)(z - r1)(z - r2)
    const lc c2 = -(r[0] + r[1] + r[2]);
    const lc c1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
    const lc c0 = -r[0] * r[1] * r[2];
    const auto got = solve_cubic(1.0L, c2, c1, c0);
    for (const auto& want : r) {
      long double best = 1e300;
      for (const auto& g : got) best = std::min(best, std::abs(g - want));
      CHECK(double(best) <= 1e-4 * std::max(1.0, double(std::abs(want))));
    }
  }
}

TEST_CASE("solve_cubic degrades to lower degree") {
  const auto q = solve_cubic(0.0L, 1.0L, -3.0L, 2.0L);  // (z-1)(z-2)
  int found = 0;
  for (const auto& g : q)
    if (std::isfinite(double(g.real())) && (std::abs(g - 1.0L) < 1e-12 || std::abs(g - 2.0L) < 1e-12)) ++found;
  CHECK(found == 2);
  CHECK(std::isnan(double(q[2].real())));
}

TEST_CASE("compensated sum keeps small terms") {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(v) == 2.0);
}
