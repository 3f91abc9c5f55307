#include "afrelay/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "afrelay/errors.hpp"

namespace afrelay {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

double zeta_from_db(double zeta2_db, Zeta2DbScale scale) {
  const double div = scale == Zeta2DbScale::kPower ? 20.0 : 40.0;
  return std::pow(10.0, zeta2_db / div);
}

double db_from_zeta(double zeta, Zeta2DbScale scale) {
  const double mul = scale == Zeta2DbScale::kPower ? 20.0 : 40.0;
  return mul * std::log10(zeta);
}

double integrate(const RealFn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 25, tol, &err);
  if (!std::isfinite(v)) throw NumericError("quadrature returned a non-finite value");
  return v;
}

double integrate_sqrt_ends(const RealFn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double w = b - a;
  auto g = [&](double th) {
    const double s = std::sin(th), c = std::cos(th);
    return f(a + w * s * s) * 2.0 * w * s * c;
  };
  return integrate(g, 0.0, kPi / 2, tol);
}

double integrate_over_t(const RealFn& g, double x, double tol) {
  if (x <= 0.0) return 0.0;
  const double x0 = std::min(x, 1.0);
  double v = integrate([&](double t) { return t > 0.0 ? g(t) / t : 0.0; }, 0.0, x0, tol);
  if (x > 1.0) v += integrate([&](double s) { return g(std::exp(s)); }, 0.0, std::log(x), tol);
  return v;
}

double find_root(const RealFn& f, double lo, double hi, int bits) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NumericError("find_root: interval does not bracket a root");
  std::uintmax_t iters = 200;
  auto [l, h] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(bits), iters);
  return 0.5 * (l + h);
}

namespace {

lcplx horner(const std::array<lcplx, 4>& c, lcplx z) {
  return ((c[0] * z + c[1]) * z + c[2]) * z + c[3];
}

lcplx horner_d(const std::array<lcplx, 4>& c, lcplx z) {
  return (3.0L * c[0] * z + 2.0L * c[1]) * z + c[2];
}

// Newton steps, kept only while the residual shrinks.
lcplx polish(const std::array<lcplx, 4>& c, lcplx z) {
  for (int i = 0; i < 3; ++i) {
    const lcplx p = horner(c, z);
    const lcplx dp = horner_d(c, z);
    if (std::abs(dp) == 0.0L) break;
    const lcplx zn = z - p / dp;
    if (!(std::abs(horner(c, zn)) < std::abs(p))) break;
    z = zn;
  }
  return z;
}

}  // namespace

namespace {

// Roots of c2 z^2 + c1 z + c0 without cancellation.
std::array<lcplx, 2> stable_quadratic(lcplx c2, lcplx c1, lcplx c0) {
  const lcplx disc = std::sqrt(c1 * c1 - 4.0L * c2 * c0);
  const lcplx q = -0.5L * (c1 + (std::real(std::conj(c1) * disc) >= 0 ? disc : -disc));
  return {q / c2, std::abs(q) > 0.0L ? c0 / q : lcplx(0.0L)};
}

}  // namespace

std::array<lcplx, 3> solve_cubic(lcplx c3, lcplx c2, lcplx c1, lcplx c0) {
  constexpr long double nan = std::numeric_limits<long double>::quiet_NaN();
  std::array<lcplx, 3> r{lcplx(nan, nan), lcplx(nan, nan), lcplx(nan, nan)};
  const long double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0L) return r;
  if (std::abs(c3) <= 1e-300L * scale) {
    if (std::abs(c2) <= 1e-300L * scale) {
      if (std::abs(c1) > 0.0L) r[0] = -c0 / c1;
      return r;
    }
    const auto q = stable_quadratic(c2, c1, c0);
    r[0] = q[0];
    r[1] = q[1];
    return r;
  }
  // Cardano on the depressed cubic for the root of largest modulus only; the
  // other two come from backward deflation, which stays accurate when that
  // root is huge (nearly vanishing leading coefficient).
  const lcplx B = c2 / c3, C = c1 / c3, D = c0 / c3;
  const lcplx p = C - B * B / 3.0L;
  const lcplx q = 2.0L * B * B * B / 27.0L - B * C / 3.0L + D;
  const lcplx s = std::sqrt(q * q / 4.0L + p * p * p / 27.0L);
  lcplx u3 = -q / 2.0L + s;
  const lcplx alt = -q / 2.0L - s;
  if (std::abs(alt) > std::abs(u3)) u3 = alt;
  const lcplx u = std::pow(u3, 1.0L / 3.0L);
  const lcplx w(-0.5L, std::sqrt(3.0L) / 2.0L);
  const std::array<lcplx, 4> coeffs{c3, c2, c1, c0};
  lcplx big(0.0L), wk(1.0L, 0.0L);
  for (int k = 0; k < 3; ++k) {
    const lcplx uk = u * wk;
    const lcplx vk = std::abs(uk) > 0.0L ? -p / (3.0L * uk) : lcplx(0.0L);
    const lcplx cand = uk + vk - B / 3.0L;
    if (k == 0 || std::abs(cand) > std::abs(big)) big = cand;
    wk *= w;
  }
  big = polish(coeffs, big);
  if (std::abs(big) == 0.0L) {
    // all roots at the origin region: c0 == 0 and deflation by z
    const auto rest = stable_quadratic(c3, c2, c1);
    r = {big, polish(coeffs, rest[0]), polish(coeffs, rest[1])};
    return r;
  }
  const lcplx q0 = -c0 / big;
  const lcplx q1 = (q0 - c1) / big;
  const lcplx q2 = c3;
  const auto rest = std::abs(q2) > 0.0L ? stable_quadratic(q2, q1, q0)
                                        : std::array<lcplx, 2>{lcplx(nan, nan), lcplx(nan, nan)};
  r = {big, polish(coeffs, rest[0]), polish(coeffs, rest[1])};
  return r;
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    comp_ += (sum_ - t) + v;
  else
    comp_ += (v - t) + sum_;
  sum_ = t;
}

double compensated_sum(std::span<const double> v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value();
}

}  // namespace afrelay
