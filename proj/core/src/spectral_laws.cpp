#include "afrelay/spectral_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "afrelay/errors.hpp"

namespace afrelay {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive and finite");
}

void check_zeta(double zeta) {
  if (!(zeta >= 1.0) || !std::isfinite(zeta))
    throw ConfigError("zeta must be >= 1 (condition number zeta^2 >= 1)");
}

// Below this zeta the closed forms divided by (zeta-1)^2 lose too many digits.
constexpr double kTslNearOne = 1.01;

// 1 - eta for the tilted semicircle, free of cancellation as x -> 0.
double tsl_one_minus_eta(double x, double z) {
  const double root = std::sqrt((x + z) * (x * z + 1.0));
  const double delta = std::sqrt(z) * x * (x * z + 1.0 + z * z) / (root + std::sqrt(z));
  const double den = (z + 1.0) * (z + 1.0) + 2.0 * z * x + 2.0 * delta;
  return (2.0 * z * x + 2.0 * delta) / den;
}

}  // namespace

// ---------------------------------------------------------------- MP

double mp_support_lo(MpParams p) {
  const double s = 1.0 - std::sqrt(p.beta);
  return s * s;
}

double mp_support_hi(MpParams p) {
  const double s = 1.0 + std::sqrt(p.beta);
  return s * s;
}

double mp_density(double x, MpParams p) {
  check_beta(p.beta);
  const double a = mp_support_lo(p), b = mp_support_hi(p);
  if (x <= a || x >= b || x <= 0.0) return 0.0;
  return std::sqrt((x - a) * (b - x)) / (2.0 * kPi * x);
}

double mp_atom_weight(MpParams p) {
  check_beta(p.beta);
  return std::max(1.0 - p.beta, 0.0);
}

double mp_cdf_beta1(double x) {
  x = std::clamp(x, 0.0, 4.0);
  const double s = std::sqrt(x * (4.0 - x));
  // arcsin(x/2 - 1) written as atan2 so both endpoints are exact
  return (s + 2.0 * std::atan2(x - 2.0, s) + kPi) / (2.0 * kPi);
}

double mp_eta(double x, MpParams p) {
  check_beta(p.beta);
  if (x <= 0.0) return 1.0;
  const double sb = std::sqrt(p.beta);
  const double A = std::sqrt(x * (1.0 + sb) * (1.0 + sb) + 1.0);
  const double B = std::sqrt(x * (1.0 - sb) * (1.0 - sb) + 1.0);
  const double s2 = (A + B) * (A + B);
  // eta = 1 - 4 x beta / (A+B)^2, numerator rearranged to avoid cancellation
  double num;
  if (p.beta <= 1.0) {
    num = 2.0 * x * (1.0 - p.beta) + 2.0 + 2.0 * A * B;
  } else {
    const double ab_minus = (2.0 * x * (1.0 + p.beta) + 1.0) / (A * B + x * (p.beta - 1.0));
    num = 2.0 + 2.0 * ab_minus;
  }
  return num / s2;
}

double mp_sigma(double x, MpParams p) {
  check_beta(p.beta);
  return 1.0 / (p.beta + x);
}

double mp_shannon(double x, MpParams p) {
  check_beta(p.beta);
  if (x <= 0.0) return 0.0;
  const double eta = mp_eta(x, p);
  // phi/4 = x (1 - eta)
  return p.beta * std::log1p(x * eta) + std::log1p(x * (p.beta - 1.0 + eta)) - (1.0 - eta);
}

// ---------------------------------------------------------------- M

double m_support_lo(FirstHopShiftedParams p) { return 1.0 + p.mu_bar * mp_support_lo({p.beta}); }
double m_support_hi(FirstHopShiftedParams p) { return 1.0 + p.mu_bar * mp_support_hi({p.beta}); }

double m_density(double x, FirstHopShiftedParams p) {
  check_beta(p.beta);
  if (p.mu_bar < 0.0) throw ConfigError("mu_bar must be >= 0");
  if (p.mu_bar == 0.0) return 0.0;
  return mp_density((x - 1.0) / p.mu_bar, {p.beta}) / p.mu_bar;
}

std::optional<Atom> m_atom(FirstHopShiftedParams p) {
  check_beta(p.beta);
  if (p.mu_bar == 0.0) return Atom{1.0, 1.0};
  const double w = mp_atom_weight({p.beta});
  if (w > 0.0) return Atom{1.0, w};
  return std::nullopt;
}

double m_cdf_beta1(double x, double mu_bar) {
  if (mu_bar == 0.0) return x < 1.0 ? 0.0 : 1.0;
  return mp_cdf_beta1((x - 1.0) / mu_bar);
}

double m_eta(double gamma, FirstHopShiftedParams p) {
  return mp_eta(gamma * p.mu_bar / (1.0 + gamma), {p.beta}) / (1.0 + gamma);
}

double m_inv_eta_d(double d, FirstHopShiftedParams p) {
  check_beta(p.beta);
  if (d <= 0.0) return 0.0;
  if (d >= 1.0) return std::numeric_limits<double>::infinity();
  const double h = 1.0 - d;
  const double mb = p.mu_bar;
  const double A = -p.beta * mb - 1.0 + d * mb;
  const double D = A * A + 4.0 * mb * d;
  const double sD = std::sqrt(D);
  // Rationalized branch when A < 0, direct branch otherwise.
  if (A < 0.0) return 2.0 * d / (h * (sD - A));
  return (A + sD) / (2.0 * h * mb);
}

double m_inv_eta(double h, FirstHopShiftedParams p) {
  if (!(h > 0.0 && h <= 1.0)) throw ConfigError("m_inv_eta: h must lie in (0, 1]");
  return m_inv_eta_d(1.0 - h, p);
}

// ---------------------------------------------------------------- TSL

std::optional<Atom> tsl_atom(TslParams p) {
  check_zeta(p.zeta);
  if (p.zeta == 1.0) return Atom{1.0, 1.0};
  return std::nullopt;
}

double tsl_density(double x, TslParams p) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  if (z == 1.0) throw std::domain_error("tsl_density: zeta = 1 is a unit atom at x = 1");
  const double a = 1.0 / z;
  if (x <= a || x >= z) return 0.0;
  return 2.0 * z / (kPi * (z - 1.0) * (z - 1.0) * x * x) * std::sqrt((x - a) * (z - x));
}

namespace {

// Antiderivatives of x^{-2} sqrt(R) and x^{-1} sqrt(R), R = (x - 1/zeta)(zeta - x).
double tsl_i2(double x, double z) {
  const double a = 1.0 / z, s = std::sqrt(std::max((x - a) * (z - x), 0.0));
  return -s / x - std::atan2(2.0 * x - a - z, 2.0 * s) +
         0.5 * (a + z) * std::atan2((a + z) * x - 2.0, 2.0 * s);
}

double tsl_i1(double x, double z) {
  const double a = 1.0 / z, s = std::sqrt(std::max((x - a) * (z - x), 0.0));
  return s + 0.5 * (a + z) * std::atan2(2.0 * x - a - z, 2.0 * s) -
         std::atan2((a + z) * x - 2.0, 2.0 * s);
}

}  // namespace

double tsl_cdf(double x, TslParams p) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  if (z == 1.0) return x < 1.0 ? 0.0 : 1.0;
  const double a = 1.0 / z;
  if (x <= a) return 0.0;
  if (x >= z) return 1.0;
  double v;
  if (z < kTslNearOne) {
    v = integrate_sqrt_ends([&](double t) { return tsl_density(t, p); }, a, x);
  } else {
    const double c = 2.0 * z / (kPi * (z - 1.0) * (z - 1.0));
    v = c * (tsl_i2(x, z) - tsl_i2(a, z));
  }
  return std::clamp(v, 0.0, 1.0);
}

double tsl_partial_mean(double x, TslParams p) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  if (z == 1.0) return x < 1.0 ? 0.0 : 1.0;
  const double a = 1.0 / z;
  if (x <= a) return 0.0;
  x = std::min(x, z);
  if (z < kTslNearOne)
    return integrate_sqrt_ends([&](double t) { return t * tsl_density(t, p); }, a, x);
  const double c = 2.0 * z / (kPi * (z - 1.0) * (z - 1.0));
  return c * (tsl_i1(x, z) - tsl_i1(a, z));
}

double tsl_quantile(double u, TslParams p) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  if (z == 1.0) return 1.0;
  if (u <= 0.0) return 1.0 / z;
  if (u >= 1.0) return z;
  return find_root([&](double x) { return tsl_cdf(x, p) - u; }, 1.0 / z, z);
}

double tsl_eta(double x, TslParams p, TransformForm form) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  if (x <= -1.0 / z) return kNaN;
  const double den = 1.0 + 2.0 * z * x + z * z + 2.0 * std::sqrt(z * (x + z) * (1.0 + z * x));
  const double eta = x >= 0.0 ? 1.0 - tsl_one_minus_eta(x, z) : (z + 1.0) * (z + 1.0) / den;
  if (form == TransformForm::kAsPrinted) return eta / ((z + 1.0) * (z + 1.0));
  return eta;
}

cplx tsl_stieltjes(cplx zc, TslParams p, TransformForm form) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  double scale = form == TransformForm::kAsPrinted ? 1.0 / ((z + 1.0) * (z + 1.0)) : 1.0;
  if (zc == cplx(0.0, 0.0)) {
    if (z == 1.0) return scale;
    return scale * integrate_sqrt_ends([&](double t) { return tsl_density(t, p) / t; }, 1.0 / z, z);
  }
  cplx g = -1.0 / zc;
  // approach the real axis from the upper half plane
  if (zc.imag() == 0.0) g = cplx(g.real(), 0.0);
  const cplx sz(std::sqrt(z), 0.0);
  const cplx den = 1.0 + 2.0 * z * g + z * z + 2.0 * sz * std::sqrt(g + z) * std::sqrt(1.0 + z * g);
  const cplx eta = (z + 1.0) * (z + 1.0) / den;
  return -scale * eta / zc;
}

double tsl_r(double x, TslParams p, TransformForm form) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  const double disc = z * z - z * x * (z - 1.0) * (z - 1.0);
  if (disc < 0.0) return kNaN;
  const double r = 2.0 * z / (z + std::sqrt(disc));
  if (form == TransformForm::kAsPrinted) return r / ((z + 1.0) * (z + 1.0));
  return r;
}

double tsl_sigma(double x, TslParams p) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  return 1.0 - (z - 1.0) * (z - 1.0) * x / (4.0 * z);
}

double tsl_shannon(double x, TslParams p) {
  check_zeta(p.zeta);
  const double z = p.zeta;
  if (x <= 0.0) return 0.0;
  if (z == 1.0) return std::log1p(x);
  if (z < kTslNearOne)
    return integrate_over_t([&](double t) { return tsl_one_minus_eta(t, z); }, x);
  // Closed form regrouped around r - zeta = delta so the log arguments are
  // written as log1p of small quantities.
  const double root = std::sqrt((x + z) * (x * z + 1.0));
  const double delta = std::sqrt(z) * x * (x * z + 1.0 + z * z) / (root + std::sqrt(z));
  const double zp1 = z + 1.0;
  const double num = 2.0 * delta - 2.0 * x * z +
                     (1.0 + z * z) * std::log1p((2.0 * x * z + 2.0 * delta) / (zp1 * zp1)) -
                     2.0 * z * std::log1p((x * (1.0 + z * z) + 2.0 * delta) / (4.0 * z));
  return num / ((z - 1.0) * (z - 1.0));
}

double tsl_second_moment(TslParams p) {
  check_zeta(p.zeta);
  return (p.zeta + 1.0) * (p.zeta + 1.0) / (4.0 * p.zeta);
}

// ---------------------------------------------------------------- uniform

namespace {
void check_uniform(UniformSpreadParams p) {
  if (!(p.zeta > 1.0) || !std::isfinite(p.zeta)) throw ConfigError("uniform model needs zeta > 1");
}
double uniform_level(double z) { return z / (z * z - 1.0); }
}  // namespace

double uniform_density(double x, UniformSpreadParams p) {
  check_uniform(p);
  const double z = p.zeta;
  if (x < 1.0 / z || x > z) return 0.0;
  return uniform_level(z);
}

double uniform_cdf(double x, UniformSpreadParams p) {
  check_uniform(p);
  const double z = p.zeta;
  return std::clamp((x - 1.0 / z) * uniform_level(z), 0.0, 1.0);
}

double uniform_quantile(double u, UniformSpreadParams p) {
  check_uniform(p);
  const double z = p.zeta;
  u = std::clamp(u, 0.0, 1.0);
  return 1.0 / z + u / uniform_level(z);
}

double uniform_partial_mean(double x, UniformSpreadParams p) {
  check_uniform(p);
  const double z = p.zeta;
  x = std::clamp(x, 1.0 / z, z);
  return 0.5 * uniform_level(z) * (x * x - 1.0 / (z * z));
}

double uniform_mean(UniformSpreadParams p) {
  check_uniform(p);
  return (p.zeta * p.zeta + 1.0) / (2.0 * p.zeta);
}

double uniform_eta(double x, UniformSpreadParams p) {
  check_uniform(p);
  const double z = p.zeta;
  if (x == 0.0) return 1.0;
  if (std::abs(x) < 1e-9) return 1.0 - uniform_mean(p) * x;
  return uniform_level(z) * (std::log1p(x * z) - std::log1p(x / z)) / x;
}

cplx uniform_stieltjes(cplx zc, UniformSpreadParams p) {
  check_uniform(p);
  const double z = p.zeta, c = uniform_level(z);
  if (zc.imag() == 0.0) {
    const double x = zc.real();
    const double re = c * std::log(std::abs(z - x) / std::abs(1.0 / z - x));
    const double im = (x > 1.0 / z && x < z) ? kPi * c : 0.0;
    return {re, im};
  }
  return c * (std::log(z - zc) - std::log(1.0 / z - zc));
}

UniformTransforms uniform_transforms(double x, UniformSpreadParams p) {
  return {uniform_density(x, p), uniform_eta(x, p), uniform_stieltjes(cplx(x, 0.0), p)};
}

const char* model_name(const SecondHopModel& m) {
  struct V {
    const char* operator()(const TslParams&) const { return "tsl"; }
    const char* operator()(const UniformSpreadParams&) const { return "uniform"; }
    const char* operator()(const RankParams&) const { return "rank"; }
    const char* operator()(const IdentityModel&) const { return "identity"; }
  };
  return std::visit(V{}, m);
}

}  // namespace afrelay
