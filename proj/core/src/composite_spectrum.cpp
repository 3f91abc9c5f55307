#include "afrelay/composite_spectrum.hpp"

#include <algorithm>
#include <math.h>  // boost 1.74 pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "afrelay/errors.hpp"
#include "parallel.hpp"

namespace afrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pair is "complex" when its imaginary part is significant against its own
// modulus; a huge third root must not set the scale.
constexpr long double kPairTol = 1e-10L;

double tilt(double zeta) { return (zeta - 1.0) * (zeta - 1.0) / (4.0 * zeta); }

void check(const CompositeSpectrumParams& p) {
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) throw ConfigError("beta must be positive");
  if (!(p.mu_bar >= 0.0) || !std::isfinite(p.mu_bar)) throw ConfigError("mu_bar must be >= 0");
  if (!(p.zeta >= 1.0) || !std::isfinite(p.zeta)) throw ConfigError("zeta must be >= 1");
}

FirstHopShiftedParams first_hop(const CompositeSpectrumParams& p) { return {p.beta, p.mu_bar}; }

// The subordination equation z^2 s^2 (1-h) - h z s A - h^2 mu_bar = 0 with
// s = 1 + c(1-h), A = -h mu_bar - beta mu_bar + mu_bar - 1, h = -z S.
// For c >= 1 it is solved in y = c(h - 1), which keeps the spurious double root
// near h = (1+c)/c apart from the physical one.
struct CubicForm {
  bool y_form = false;
  double c = 0.0;
  std::array<lcplx, 4> coeffs{};
};

CubicForm cubic_form(lcplx z, const CompositeSpectrumParams& p) {
  CubicForm f;
  const long double c = tilt(p.zeta), mb = p.mu_bar, b = p.beta;
  f.c = static_cast<double>(c);
  if (c >= 1.0L) {
    f.y_form = true;
    f.coeffs = {
        -z * (c * z + mb) / c,
        -b * mb * z - mb * z + 2.0L * z * z - z + mb * z / c - mb / c,
        -b * c * mb * z + b * mb * z - c * z + mb * z - 2.0L * mb - z * z + z,
        c * (b * mb * z - mb + z),
    };
  } else {
    const long double g = b * mb - mb + 1.0L;
    f.coeffs = {
        -c * z * (c * z + mb),
        -b * c * mb * z + 3.0L * c * c * z * z + 2.0L * c * mb * z + 2.0L * c * z * z - c * z +
            mb * z - mb,
        -z * (c + 1.0L) * (3.0L * c * z + z - g),
        z * z * (c + 1.0L) * (c + 1.0L),
    };
  }
  return f;
}

// Roots mapped back to h = -z S.
std::array<lcplx, 3> h_roots(const CubicForm& f) {
  auto r = solve_cubic(f.coeffs[0], f.coeffs[1], f.coeffs[2], f.coeffs[3]);
  if (f.y_form)
    for (auto& v : r) v = 1.0L + v / static_cast<long double>(f.c);
  return r;
}

cplx mp_eta_c(cplx w, double beta) {
  const double sb = std::sqrt(beta);
  const cplx d = std::sqrt(w * (1.0 + sb) * (1.0 + sb) + 1.0) -
                 std::sqrt(w * (1.0 - sb) * (1.0 - sb) + 1.0);
  return 1.0 - d * d / (4.0 * w);
}

double subordination_residual(cplx h, cplx z, const CompositeSpectrumParams& p) {
  const double c = tilt(p.zeta);
  const cplx gamma = (-1.0 / z) / (1.0 + c * (1.0 - h));
  const cplx eta_m = mp_eta_c(gamma * p.mu_bar / (1.0 + gamma), p.beta) / (1.0 + gamma);
  return std::abs(h - eta_m);
}

bool valid_root(const lcplx& r) { return std::isfinite(std::real(r)) && std::isfinite(std::imag(r)); }

// Density from the exact boundary value on the real axis. Coefficients are
// real there, so inside the support the cubic has one conjugate pair.
double density_from_pair(double x, const CompositeSpectrumParams& p) {
  const CubicForm f = cubic_form(lcplx(x, 0.0L), p);
  const auto r = solve_cubic(f.coeffs[0], f.coeffs[1], f.coeffs[2], f.coeffs[3]);
  long double best = 0.0L;
  for (const auto& v : r) {
    if (!valid_root(v)) continue;
    const long double im = std::abs(std::imag(v));
    if (im > kPairTol * std::abs(v)) best = std::max(best, im);
  }
  if (best == 0.0L) return 0.0;
  const long double scale = f.y_form ? static_cast<long double>(f.c) : 1.0L;
  return static_cast<double>(best / (scale * kPi * x));
}

void to_chars_append(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------- eta

double k_inv_eta_d(double d, CompositeSpectrumParams p) {
  check(p);
  return (1.0 + tilt(p.zeta) * d) * m_inv_eta_d(d, first_hop(p));
}

double k_inv_eta(double h, CompositeSpectrumParams p) {
  if (!(h > 0.0 && h <= 1.0)) throw ConfigError("k_inv_eta: h must lie in (0, 1]");
  check(p);
  return tsl_sigma(h - 1.0, {p.zeta}) * m_inv_eta(h, first_hop(p));
}

namespace {

// Solves eta_K(gamma) and returns {h, 1-h}, each computed in the variable
// that carries it to full relative precision.
std::pair<double, double> k_eta_pair(double gamma, const CompositeSpectrumParams& p) {
  check(p);
  if (!(gamma >= 0.0)) throw ConfigError("k_eta: gamma must be >= 0");
  if (gamma == 0.0) return {1.0, 0.0};
  if (std::isinf(gamma)) return {0.0, 1.0};
  const double g_half = k_inv_eta_d(0.5, p);
  if (gamma <= g_half) {
    const double d = find_root([&](double dd) { return k_inv_eta_d(dd, p) - gamma; }, 0.0, 0.5);
    return {1.0 - d, d};
  }
  double lo = 0.25;
  while (k_inv_eta(lo, p) < gamma) {
    lo *= 0.5;
    if (lo < 1e-300) throw NumericError("k_eta: failed to bracket eta");
  }
  const double h = find_root([&](double hh) { return k_inv_eta(hh, p) - gamma; }, lo, 0.5);
  return {h, 1.0 - h};
}

}  // namespace

double k_eta_real(double gamma, CompositeSpectrumParams p) { return k_eta_pair(gamma, p).first; }
double k_one_minus_eta(double gamma, CompositeSpectrumParams p) { return k_eta_pair(gamma, p).second; }

// ---------------------------------------------------------------- Stieltjes

Interval k_support_bounds(CompositeSpectrumParams p) {
  check(p);
  const double sb = std::sqrt(p.beta);
  return {(1.0 + p.mu_bar * (1.0 - sb) * (1.0 - sb)) / p.zeta,
          p.zeta * (1.0 + p.mu_bar * (1.0 + sb) * (1.0 + sb))};
}

double k_density_at(double x, CompositeSpectrumParams p) {
  check(p);
  if (x <= 0.0) return 0.0;
  if (p.mu_bar == 0.0) return p.zeta == 1.0 ? 0.0 : tsl_density(x, {p.zeta});
  return density_from_pair(x, p);
}

cplx k_stieltjes(cplx z, CompositeSpectrumParams p) {
  check(p);
  if (z.imag() < 0.0) throw ConfigError("k_stieltjes: Im z must be >= 0");
  if (p.mu_bar == 0.0) {
    if (p.zeta == 1.0) return 1.0 / (1.0 - z);
    return tsl_stieltjes(z, {p.zeta});
  }
  if (z.imag() == 0.0) {
    const double x = z.real();
    if (x < 0.0) return k_eta_real(-1.0 / x, p) / (-x);
  }
  const CubicForm f = cubic_form(lcplx(z), p);
  const auto hs = h_roots(f);
  int best = -1;
  double best_res = kInf;
  // Nevanlinna conditions for a measure on [0, inf): Im S > 0 and Im(z S) > 0,
  // i.e. Im h < 0. The subordination residual breaks remaining ties.
  for (int pass = 0; pass < 2 && best < 0; ++pass) {
    for (int i = 0; i < 3; ++i) {
      if (!valid_root(hs[i])) continue;
      const cplx h(static_cast<double>(std::real(hs[i])), static_cast<double>(std::imag(hs[i])));
      const cplx s = -h / z;
      const double tol = pass == 0 ? 0.0 : 1e-12 * std::abs(h);
      if (z.imag() > 0.0 && !(s.imag() > -tol && h.imag() < tol)) continue;
      if (z.imag() == 0.0 && pass == 0 && std::abs(h.imag()) > kPairTol * std::abs(h) &&
          h.imag() > 0.0)
        continue;
      const double res = subordination_residual(h, z, p);
      if (res < best_res) {
        best_res = res;
        best = i;
      }
    }
  }
  if (best < 0) throw NumericError("k_stieltjes: no admissible root");
  const cplx h(static_cast<double>(std::real(hs[best])), static_cast<double>(std::imag(hs[best])));
  return -h / z;
}

// ---------------------------------------------------------------- density curve

double DensityCurve::mass() const { return moment(0); }

double DensityCurve::moment(int k) const {
  CompensatedSum s;
  for (std::size_t i = 0; i < grid.size(); ++i) s.add(weights[i] * values[i] * std::pow(grid[i], k));
  for (const auto& a : atoms) s.add(a.weight * std::pow(a.location, k));
  return s.value();
}

double DensityCurve::integrate(const RealFn& g) const {
  CompensatedSum s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (weights[i] * values[i] != 0.0) s.add(weights[i] * values[i] * g(grid[i]));
  }
  for (const auto& a : atoms) s.add(a.weight * g(a.location));
  return s.value();
}

double DensityCurve::at(double x) const {
  if (grid.empty() || x <= grid.front() || x >= grid.back()) return 0.0;
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - grid.begin());
  const double t = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
  return values[j - 1] + t * (values[j] - values[j - 1]);
}

namespace {

struct ThetaGrid {
  std::vector<double> theta;
};

ThetaGrid theta_grid(const DensityGridSpec& spec) {
  const int n = std::max(spec.points_per_interval, 8);
  const int edge = std::max(1, static_cast<int>(std::ceil(spec.edge_fraction * n)));
  const int refine = std::max(spec.edge_refinement, 1);
  const double h = (kPi / 2) / n;
  ThetaGrid g;
  g.theta.push_back(0.0);
  for (int i = 0; i < n; ++i) {
    const int sub = (i < edge || i >= n - edge) ? refine : 1;
    for (int k = 1; k <= sub; ++k) g.theta.push_back(h * (i + static_cast<double>(k) / sub));
  }
  g.theta.back() = kPi / 2;
  return g;
}

// Samples f on [lo, hi] with x = lo (hi/lo)^w or lo + (hi-lo) w, w = sin^2(theta).
void sample_interval(const RealFn& f, Interval iv, const DensityGridSpec& spec, DensityCurve& out) {
  const ThetaGrid tg = theta_grid(spec);
  const std::size_t n = tg.theta.size();
  const bool log_map = iv.lo > 0.0 && iv.hi / iv.lo > 10.0;
  const double L = log_map ? std::log(iv.hi / iv.lo) : iv.hi - iv.lo;
  std::vector<double> x(n), dx(n), fx(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::sin(tg.theta[j]), c = std::cos(tg.theta[j]);
    const double w = s * s;
    x[j] = log_map ? iv.lo * std::exp(w * L) : iv.lo + L * w;
    dx[j] = (log_map ? x[j] * L : L) * 2.0 * s * c;
  }
  x.front() = iv.lo;
  x.back() = iv.hi;
  detail::parallel_for(n - 2, spec.workers, [&](std::size_t k) { fx[k + 1] = f(x[k + 1]); });
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(fx[j]) || fx[j] < 0.0) {
      std::ostringstream msg;
      msg << "density evaluation failed at x = " << x[j];
      throw NumericError(msg.str());
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!out.grid.empty() && j == 0 && x[j] <= out.grid.back()) continue;
    double left = j > 0 ? tg.theta[j] - tg.theta[j - 1] : 0.0;
    double right = j + 1 < n ? tg.theta[j + 1] - tg.theta[j] : 0.0;
    // The end nodes carry no weight (dx = 0 there). Their half cells go to
    // the neighbours, which keeps inverse square-root edges (hard edge of
    // the MP law) integrable to O(h^2).
    if (j == 1) left *= 2.0;
    if (j + 2 == n) right *= 2.0;
    out.grid.push_back(x[j]);
    out.values.push_back(fx[j]);
    out.weights.push_back(0.5 * (left + right) * dx[j]);
  }
}

// Support detection on a log scan with hysteresis, then edge bisection.
std::vector<Interval> detect_support(const CompositeSpectrumParams& p, const DensityGridSpec& spec) {
  const Interval b = k_support_bounds(p);
  const double lo = b.lo * (1.0 - 1e-9), hi = b.hi * (1.0 + 1e-9);
  const int n = std::max(spec.scan_points, 16);
  std::vector<double> xs(n);
  std::vector<char> in(n, 0);
  const double L = std::log(hi / lo);
  for (int i = 0; i < n; ++i) xs[i] = lo * std::exp(L * (i + 0.5) / n);
  detail::parallel_for(n, spec.workers,
                       [&](std::size_t i) { in[i] = density_from_pair(xs[i], p) > 0.0; });
  // suppress short inside runs and fill short gaps
  auto runs = [&](char target) {
    std::vector<std::pair<int, int>> r;
    for (int i = 0; i < n;) {
      if (in[i] != target) {
        ++i;
        continue;
      }
      int j = i;
      while (j < n && in[j] == target) ++j;
      r.emplace_back(i, j);
      i = j;
    }
    return r;
  };
  const int hyst = std::max(spec.hysteresis, 1);
  for (auto [i, j] : runs(1))
    if (j - i < hyst)
      for (int k = i; k < j; ++k) in[k] = 0;
  for (auto [i, j] : runs(0))
    if (i > 0 && j < n && j - i < hyst)
      for (int k = i; k < j; ++k) in[k] = 1;
  std::vector<Interval> out;
  auto inside = [&](double x) { return density_from_pair(x, p) > 0.0; };
  auto edge = [&](double a, double c, bool a_inside) {
    // a and c bracket an edge; bisection in log space
    for (int it = 0; it < 100; ++it) {
      const double m = std::sqrt(a * c);
      if (m <= std::min(a, c) || m >= std::max(a, c)) break;
      if (inside(m) == a_inside)
        a = m;
      else
        c = m;
    }
    return a_inside ? c : a;
  };
  for (auto [i, j] : runs(1)) {
    const double left = i == 0 ? lo : edge(xs[i], xs[i - 1], true);
    const double right = j == n ? hi : edge(xs[j - 1], xs[j], true);
    out.push_back({left, right});
  }
  return out;
}

}  // namespace

DensityCurve k_density(CompositeSpectrumParams p, const DensityGridSpec& spec) {
  check(p);
  DensityCurve curve;
  if (p.mu_bar == 0.0 && p.zeta == 1.0) {
    curve.atoms.push_back({1.0, 1.0});
    curve.support = {1.0, 1.0};
    return curve;
  }
  if (p.mu_bar == 0.0) {
    const Interval iv{1.0 / p.zeta, p.zeta};
    sample_interval([&](double x) { return tsl_density(x, {p.zeta}); }, iv, spec, curve);
    curve.intervals.push_back(iv);
    curve.support = iv;
    return curve;
  }
  if (p.zeta == 1.0)
    if (auto a = m_atom(first_hop(p))) curve.atoms.push_back(*a);
  const auto intervals = detect_support(p, spec);
  if (intervals.empty()) throw NumericError("k_density: no support detected");
  for (const auto& iv : intervals) {
    sample_interval([&](double x) { return density_from_pair(x, p); }, iv, spec, curve);
    curve.intervals.push_back(iv);
  }
  curve.support = {intervals.front().lo, intervals.back().hi};
  return curve;
}

// ---------------------------------------------------------------- quantiles

struct QuantileTable::Impl {
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  std::unique_ptr<Pchip> q;    // u -> x
  std::unique_ptr<Pchip> cdf;  // x -> u
  double x_lo = 0.0, x_hi = 0.0;
};

QuantileTable::QuantileTable(std::vector<double> u, std::vector<double> x)
    : u_(std::move(u)), x_(std::move(x)) {
  if (u_.size() != x_.size() || u_.size() < 2) throw ConfigError("QuantileTable: bad node arrays");
  auto impl = std::make_shared<Impl>();
  impl->x_lo = x_.front();
  impl->x_hi = x_.back();
  if (u_.size() >= 4) {
    impl->q = std::make_unique<Impl::Pchip>(std::vector<double>(u_), std::vector<double>(x_));
    if (x_.back() > x_.front()) {
      // x -> u needs strictly increasing abscissae
      std::vector<double> xs, us;
      for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!xs.empty() && x_[i] <= xs.back()) continue;
        xs.push_back(x_[i]);
        us.push_back(u_[i]);
      }
      if (xs.size() >= 4) impl->cdf = std::make_unique<Impl::Pchip>(std::move(xs), std::move(us));
    }
  }
  impl_ = impl;
}

double QuantileTable::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (impl_->q) return std::clamp((*impl_->q)(u), impl_->x_lo, impl_->x_hi);
  // point mass or two-node table
  const double t = (u - u_.front()) / (u_.back() - u_.front());
  return x_.front() + t * (x_.back() - x_.front());
}

double QuantileTable::cdf(double x) const {
  if (x < impl_->x_lo) return 0.0;
  if (x >= impl_->x_hi) return 1.0;
  if (impl_->cdf) return std::clamp((*impl_->cdf)(x), 0.0, 1.0);
  return 0.0;
}

QuantileTable quantile_table_from(const DensityCurve& curve) {
  if (curve.grid.empty()) {
    if (curve.atoms.size() == 1) {
      const double a = curve.atoms.front().location;
      return QuantileTable({0.0, 1.0}, {a, a});
    }
    throw ConfigError("quantile table needs a continuous density");
  }
  if (!curve.atoms.empty()) throw ConfigError("quantile table does not support mixed laws");
  // cumulative trapezoid consistent with the stored weights
  const std::size_t n = curve.grid.size();
  std::vector<double> cum(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    // each node weight is split evenly between its neighbouring cells
    cum[j] = cum[j - 1] + 0.5 * (curve.weights[j - 1] * curve.values[j - 1]) +
             0.5 * (curve.weights[j] * curve.values[j]);
  }
  // first and last weights only have one neighbouring cell
  const double total = cum.back() + 0.5 * (curve.weights.front() * curve.values.front()) +
                       0.5 * (curve.weights.back() * curve.values.back());
  std::vector<double> u, x;
  for (std::size_t j = 0; j < n; ++j) {
    const double uj = j + 1 == n ? 1.0 : cum[j] / total;
    if (!u.empty() && uj <= u.back()) continue;
    u.push_back(uj);
    x.push_back(curve.grid[j]);
  }
  if (u.back() < 1.0) {
    u.back() = 1.0;
    x.back() = curve.grid.back();
  }
  return QuantileTable(std::move(u), std::move(x));
}

QuantileTable k_quantile_table(CompositeSpectrumParams p, const DensityGridSpec& spec) {
  if (p.beta != 1.0) throw ConfigError("k_quantile_table requires beta = 1");
  return quantile_table_from(k_density(p, spec));
}

// ---------------------------------------------------------------- rank model

double rank_k_density(double x, double alpha, double beta, double mu_bar) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (mu_bar <= 0.0) return 0.0;
  return alpha / mu_bar * mp_density((alpha * x - 1.0) / (alpha * mu_bar), {beta / alpha});
}

std::vector<Atom> rank_k_atoms(double alpha, double beta, double mu_bar) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  std::vector<Atom> out;
  if (alpha < 1.0) out.push_back({0.0, 1.0 - alpha});
  if (mu_bar <= 0.0)
    out.push_back({1.0 / alpha, alpha});
  else if (beta < alpha)
    out.push_back({1.0 / alpha, alpha - beta});
  return out;
}

// ---------------------------------------------------------------- polynomials

std::array<cplx, 4> derived_s_polynomial(cplx z, CompositeSpectrumParams p) {
  const double t = p.zeta, mb = p.mu_bar, b = p.beta;
  const double t1 = (t - 1.0) * (t - 1.0), tp = (t + 1.0) * (t + 1.0);
  // common factor z^2 / (4 zeta) removed
  return {
      z * z * t1 * (4.0 * mb * t + z * t1),
      z * z * t1 * (3.0 * t * t + 2.0 * t + 3.0) - 4.0 * z * t * t1 - 4.0 * b * mb * z * t * t1 +
          8.0 * mb * z * t * (t * t + 1.0) - 16.0 * mb * t * t,
      tp * (-4.0 * b * mb * t + 4.0 * mb * t + z * (3.0 * t * t - 2.0 * t + 3.0) - 4.0 * t),
      cplx(tp * tp, 0.0),
  };
}

std::array<cplx, 4> printed_s_polynomial(cplx z, CompositeSpectrumParams p) {
  const double t = p.zeta, mb = p.mu_bar, b = p.beta;
  const double t1 = (t - 1.0) * (t - 1.0), tp = (t + 1.0) * (t + 1.0);
  return {
      t1 * t1 * mb * z * z * z + 4.0 * t * t1 * mb * mb * z * z,
      t1 * (3.0 * t * t + 3.0 + 2.0 * t) * mb * z * z -
          (t * t1 * b - 2.0 * t * (1.0 - t * t)) * 4.0 * mb * mb - 4.0 * t * t1 * mb * z -
          (4.0 * mb * t) * (4.0 * mb * t),
      tp * (3.0 * t * t + 3.0 - 2.0 * t) * mb * z - 4.0 * tp * t * ((b - 1.0) * mb * mb + mb),
      cplx(tp * tp * mb, 0.0),
  };
}

// ---------------------------------------------------------------- CSV

void write_csv(std::ostream& os, const DensityCurve& curve) {
  std::string out = "x,f\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    to_chars_append(out, curve.grid[i]);
    out += ',';
    to_chars_append(out, curve.values[i]);
    out += '\n';
  }
  os << out;
}

void write_atoms_csv(std::ostream& os, const DensityCurve& curve) {
  std::string out = "location,weight\n";
  for (const auto& a : curve.atoms) {
    to_chars_append(out, a.location);
    out += ',';
    to_chars_append(out, a.weight);
    out += '\n';
  }
  os << out;
}

void write_csv(std::ostream& os, const QuantileTable& table) {
  std::string out = "u,x\n";
  for (std::size_t i = 0; i < table.u_grid().size(); ++i) {
    to_chars_append(out, table.u_grid()[i]);
    out += ',';
    to_chars_append(out, table.x_grid()[i]);
    out += '\n';
  }
  os << out;
}

}  // namespace afrelay
