#include "afrelay/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "afrelay/errors.hpp"
#include "parallel.hpp"

namespace afrelay {

void SystemParams::validate() const {
  if (K < 1 || M < 1) throw ConfigError("K and M must be >= 1");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be finite and >= 0");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be finite and >= 0");
}

namespace {

CompositeSpectrumParams composite(const SystemParams& p, double zeta) {
  return {p.beta(), p.mu_bar(), zeta};
}

}  // namespace

double capacity_c2(double nu, double zeta) { return tsl_shannon(nu, {zeta}); }

double capacity_c1(const SystemParams& p, double zeta) {
  p.validate();
  const auto cp = composite(p, zeta);
  return integrate_over_t([&](double t) { return k_one_minus_eta(t, cp); }, p.nu, 1e-11);
}

double capacity_c1_density(const SystemParams& p, double zeta, const DensityGridSpec& spec) {
  p.validate();
  const DensityCurve curve = k_density(composite(p, zeta), spec);
  return curve.integrate([&](double x) { return std::log1p(p.nu * x); });
}

CapacityBreakdown capacity_rank(double alpha, const SystemParams& p) {
  p.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  const double nu = p.nu;
  CapacityBreakdown out;
  out.c2 = alpha * std::log1p(nu / alpha);
  out.c1 = out.c2 + alpha * mp_shannon(alpha * p.mu_bar() * nu / (nu + alpha), {p.beta() / alpha});
  out.c = out.c1 - out.c2;
  return out;
}

CapacityBreakdown capacity(const SystemParams& p, const SecondHopModel& model) {
  p.validate();
  struct Visitor {
    const SystemParams& p;
    CapacityBreakdown operator()(const TslParams& t) const {
      CapacityBreakdown out;
      out.c1 = capacity_c1(p, t.zeta);
      out.c2 = capacity_c2(p.nu, t.zeta);
      out.c = std::max(out.c1 - out.c2, 0.0);
      return out;
    }
    CapacityBreakdown operator()(const UniformSpreadParams&) const {
      throw ConfigError("capacity: no composed law is available for the uniform model");
    }
    CapacityBreakdown operator()(const RankParams& r) const { return capacity_rank(r.alpha, p); }
    CapacityBreakdown operator()(const IdentityModel&) const {
      CapacityBreakdown out;
      out.c2 = std::log1p(p.nu);
      out.c1 = out.c2 + mp_shannon(p.mu_bar() * p.nu / (1.0 + p.nu), {p.beta()});
      out.c = out.c1 - out.c2;
      return out;
    }
  };
  return std::visit(Visitor{p}, model);
}

MmseReport mmse_bound(const SystemParams& p, double zeta, MmseOrdering ordering,
                      const DensityGridSpec& spec) {
  p.validate();
  if (p.K != p.M) throw ConfigError("mmse_bound requires beta = 1 (K = M)");
  const QuantileTable qk = k_quantile_table(composite(p, zeta), spec);
  const TslParams tp{zeta};
  const double nu = p.nu;
  auto integrand = [&](double u) {
    const double un = ordering == MmseOrdering::kLower ? u : 1.0 - u;
    const double m = 1.0 + nu * tsl_quantile(un, tp);
    return m / (1.0 + nu * qk.quantile(u));
  };
  // The table is piecewise cubic between its nodes, so integrate panel by
  // panel with 4-point Gauss-Legendre instead of letting an adaptive rule
  // chase the knots.
  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                   0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                   0.3478548451374538};
  const auto& nodes = qk.u_grid();
  CompensatedSum acc;
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    const double a = nodes[j - 1], b = nodes[j], half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int k = 0; k < 4; ++k) acc.add(half * gw[k] * integrand(mid + half * gx[k]));
  }
  const double v = acc.value();
  MmseReport r;
  r.mmse_bound = v;
  r.cmmse_bound = -std::log(v);
  return r;
}

double eta_tilted_mp(double x, double zeta, double beta) {
  if (x <= 0.0) return 1.0;
  const double c = (zeta - 1.0) * (zeta - 1.0) / (4.0 * zeta);
  const double a = x - c, b = x * (beta - 1.0) + 1.0 + 2.0 * c, k = -(1.0 + c);
  if (a == 0.0) return -k / b;
  const double disc = std::sqrt(b * b - 4.0 * a * k);
  const double q = -0.5 * (b + std::copysign(disc, b));
  const double r1 = q / a, r2 = k / q;
  auto ok = [](double h) { return h > 0.0 && h <= 1.0 + 1e-12; };
  if (ok(r1) && ok(r2)) return std::min(r1, r2);
  if (ok(r2)) return std::min(r2, 1.0);
  if (ok(r1)) return std::min(r1, 1.0);
  throw NumericError("eta_tilted_mp: no root in (0, 1]");
}

std::complex<double> mestre_eta_as_printed(double x, double zeta, double b) {
  const std::complex<double> rad(1.0 + 2.0 * x + 2.0 * b * x + x * x + 2.0 * b * x * x + b * b * x * x -
                                     b * x * (4.0 * x * zeta - (zeta - 1.0) * (zeta - 1.0)),
                                 0.0);
  const double f = 4.0 * x * zeta;
  return (-zeta * zeta - 1.0 + 2.0 * x * zeta - 2.0 * b * x * zeta + 2.0 * std::sqrt(rad)) *
         (((zeta - 1.0) * (zeta - 1.0) - f) / (f * f));
}

LimitReport limit_high_mu_low_nu(double beta, double zeta, double gamma) {
  LimitReport r;
  r.mmse = eta_tilted_mp(gamma, zeta, beta);
  r.capacity = integrate_over_t([&](double t) { return 1.0 - eta_tilted_mp(t, zeta, beta); }, gamma);
  return r;
}

LimitReport limit_high_nu(const SystemParams& p) {
  p.validate();
  return {mp_shannon(p.mu_bar(), {p.beta()}), mp_eta(p.mu_bar(), {p.beta()})};
}

double conventional_capacity(int K, double mu, double nu) {
  if (K < 1 || mu < 0.0 || nu < 0.0) throw ConfigError("conventional_capacity: invalid parameters");
  const double c = static_cast<double>(K) * K * nu * mu / (1.0 + K * nu);
  if (c == 0.0) return 0.0;
  return integrate([&](double t) { return std::log1p(c * t) * std::exp(-t); }, 0.0,
                   std::numeric_limits<double>::infinity(), 1e-12);
}

double conventional_per_antenna(int K, double mu, double nu) {
  return conventional_capacity(K, mu, nu) / K;
}

namespace {

CrossingPoint refine_crossing(const std::vector<double>& db, const std::vector<double>& v,
                              double target, const std::function<double(double)>& f) {
  CrossingPoint cp;
  for (std::size_t i = 1; i < db.size(); ++i) {
    if (v[i - 1] >= target && v[i] < target) {
      double a = db[i - 1], b = db[i];
      for (int it = 0; it < 40 && b - a > 1e-4; ++it) {
        const double m = 0.5 * (a + b);
        if (f(m) >= target)
          a = m;
        else
          b = m;
      }
      cp.found = true;
      cp.db = 0.5 * (a + b);
      return cp;
    }
  }
  return cp;
}

}  // namespace

CrossingReport crossing_finder(const CrossingSpec& s) {
  s.system.validate();
  if (!(s.step_db > 0.0) || !(s.stop_db >= s.start_db)) throw ConfigError("crossing_finder: bad range");
  CrossingReport r;
  r.conventional = conventional_per_antenna(s.system.K, s.system.mu, s.system.nu);
  const int n = static_cast<int>(std::floor((s.stop_db - s.start_db) / s.step_db + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) r.db.push_back(s.start_db + i * s.step_db);
  r.capacity.resize(n);
  r.cmmse.resize(n);
  auto cap = [&](double db) { return capacity(s.system, TslParams{zeta_from_db(db, s.scale)}).c; };
  auto cm = [&](double db) { return mmse_bound(s.system, zeta_from_db(db, s.scale)).cmmse_bound; };
  detail::parallel_for(n, s.workers, [&](std::size_t i) {
    r.capacity[i] = cap(r.db[i]);
    r.cmmse[i] = cm(r.db[i]);
  });
  for (int i = 1; i < n; ++i) {
    if (r.capacity[i] > r.capacity[i - 1] * (1.0 + 1e-9) + 1e-12) {
      std::ostringstream msg;
      msg << "crossing_finder: capacity increases between " << r.db[i - 1] << " and " << r.db[i]
          << " dB";
      throw NumericError(msg.str());
    }
  }
  r.capacity_crossing = refine_crossing(r.db, r.capacity, r.conventional, cap);
  r.mmse_crossing = refine_crossing(r.db, r.cmmse, r.conventional, cm);
  r.capacity_gain_boundary = refine_crossing(r.db, r.capacity, s.gain_factor * r.conventional, cap);
  r.mmse_gain_boundary = refine_crossing(r.db, r.cmmse, s.gain_factor * r.conventional, cm);
  return r;
}

}  // namespace afrelay
