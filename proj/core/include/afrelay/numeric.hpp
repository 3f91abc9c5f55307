#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>

namespace afrelay {

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;

inline constexpr double kPi = 3.14159265358979323846;

// dB helpers. Power quantities use 10*log10.
double db_to_linear(double db);
double linear_to_db(double lin);

// Axis convention for condition numbers quoted in dB.
//   kPower:     zeta^2 = 10^(dB/10), i.e. zeta = 10^(dB/20)
//   kAmplitude: dB = 20*log10(zeta^2), i.e. zeta = 10^(dB/40)
enum class Zeta2DbScale { kPower, kAmplitude };
double zeta_from_db(double zeta2_db, Zeta2DbScale scale = Zeta2DbScale::kPower);
double db_from_zeta(double zeta, Zeta2DbScale scale = Zeta2DbScale::kPower);

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (15 point) on [a, b]. Infinite b is allowed.
// Throws NumericError on a non-finite result.
double integrate(const RealFn& f, double a, double b, double tol = 1e-12);

// Same, for integrands with square-root behaviour at both ends:
// x = a + (b - a) sin^2(theta).
double integrate_sqrt_ends(const RealFn& f, double a, double b, double tol = 1e-12);

// int_0^x g(t)/t dt where g(t) ~ O(t) at 0, split at t = 1 with a log map
// above. Used for Shannon transforms from eta transforms.
double integrate_over_t(const RealFn& g, double x, double tol = 1e-12);

// Bracketed root on [lo, hi] (TOMS 748). f(lo) and f(hi) must differ in sign.
double find_root(const RealFn& f, double lo, double hi, int bits = 52);

// Roots of c3 z^3 + c2 z^2 + c1 z + c0. Falls back to lower degree when the
// leading coefficients vanish; unused slots are NaN.
std::array<lcplx, 3> solve_cubic(lcplx c3, lcplx c2, lcplx c1, lcplx c0);

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> v);

}  // namespace afrelay
