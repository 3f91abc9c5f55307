#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>

#include "afrelay/composite_spectrum.hpp"
#include "afrelay/montecarlo.hpp"
#include "afrelay/reporting.hpp"

namespace afrelay {

using nlohmann::json;

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> ValidationReport::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name);
  return out;
}

json to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"observed", std::isfinite(c.observed) ? json(c.observed) : json(fmt(c.observed))},
                      {"expected", c.expected},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  return {{"passed", r.all_passed()}, {"failed", r.failed()}, {"checks", checks}};
}

namespace {

class Suite {
 public:
  explicit Suite(ValidationReport& r) : r_(r) {}

  // |observed - expected| <= tol
  void abs(std::string name, double observed, double expected, double tol, std::string detail = {}) {
    const bool ok = std::abs(observed - expected) <= tol;
    r_.checks.push_back({std::move(name), ok, observed, expected, tol, std::move(detail)});
  }
  // |observed / expected - 1| <= tol, reported as the relative error
  void rel(std::string name, double observed, double expected, double tol, std::string detail = {}) {
    const double e = std::abs(observed / expected - 1.0);
    const bool ok = e <= tol;
    r_.checks.push_back({std::move(name), ok, observed, expected, tol,
                         detail.empty() ? "relative error " + fmt(e) : detail + "; relative error " + fmt(e)});
  }
  // observed <= bound
  void at_most(std::string name, double observed, double bound, std::string detail = {}) {
    r_.checks.push_back({std::move(name), observed <= bound, observed, bound, 0.0, std::move(detail)});
  }
  // runs f, turns exceptions into failed checks
  template <class F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      r_.checks.push_back({name, false, NAN, 0.0, 0.0, std::string("exception: ") + e.what()});
    }
  }

 private:
  ValidationReport& r_;
};

double max_abs_xv_identity(const std::function<double(double)>& v, const std::function<double(double)>& eta) {
  double worst = 0.0;
  for (int i = 0; i <= 24; ++i) {
    const double x = std::pow(10.0, -3.0 + 0.25 * i);
    const double h = 1e-4 * x;
    const double d = (v(x + h) - v(x - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(x * d - (1.0 - eta(x))));
  }
  return worst;
}

std::string zeta_tag(double z) {
  std::ostringstream os;
  os << "zeta=" << z;
  return os.str();
}

}  // namespace

ValidationReport run_validation(const ValidationOptions& opt) {
  ValidationReport rep;
  Suite s(rep);
  const TransformForm form = opt.as_printed_transforms ? TransformForm::kAsPrinted : TransformForm::kCorrected;

  // printed-form regressions: the only checks that see the transform variant
  s.guarded("tsl.eta_at_zero", [&] { s.abs("tsl.eta_at_zero", tsl_eta(0.0, {2.0}, form), 1.0, 1e-12, "zeta=2"); });
  s.guarded("tsl.r_at_zero", [&] { s.abs("tsl.r_at_zero", tsl_r(0.0, {2.0}, form), 1.0, 1e-12, "zeta=2"); });

  // moments of the tilted semicircle by quadrature of the density
  for (double z : {1.5, 2.0, 10.0, 1000.0}) {
    s.guarded("tsl.moments", [&] {
      const TslParams p{z};
      auto f = [&](double x) { return tsl_density(x, p); };
      const double m0 = integrate_sqrt_ends(f, 1.0 / z, z, 1e-13);
      const double m1 = integrate_sqrt_ends([&](double x) { return x * f(x); }, 1.0 / z, z, 1e-13);
      const double m2 = integrate_sqrt_ends([&](double x) { return x * x * f(x); }, 1.0 / z, z, 1e-13);
      s.abs("tsl.mass", m0, 1.0, 1e-8, zeta_tag(z));
      s.abs("tsl.mean", m1, 1.0, 1e-8, zeta_tag(z));
      s.abs("tsl.second_moment", m2, (z + 1) * (z + 1) / (4 * z), 1e-8 * m2, zeta_tag(z));
      s.abs("tsl.second_moment_closed_form", tsl_second_moment(p), m2, 1e-8 * m2, zeta_tag(z));
      s.abs("tsl.cdf_at_top", tsl_cdf(z, p), 1.0, 1e-12, zeta_tag(z));
      s.abs("tsl.eta_vs_quadrature",
            tsl_eta(3.0, p),
            integrate_sqrt_ends([&](double x) { return f(x) / (1.0 + 3.0 * x); }, 1.0 / z, z, 1e-13), 1e-10,
            zeta_tag(z) + " x=3");
    });
  }

  // transform identities x V'(x) = 1 - eta(x)
  for (double b : {0.5, 1.0, 2.0}) {
    s.guarded("mp.shannon_eta_identity", [&] {
      const MpParams p{b};
      s.at_most("mp.shannon_eta_identity",
                max_abs_xv_identity([&](double x) { return mp_shannon(x, p); }, [&](double x) { return mp_eta(x, p); }),
                1e-6, "beta=" + fmt(b) + " x in [1e-3, 1e3]");
    });
  }
  for (double z : {1.5, 10.0, 1000.0}) {
    s.guarded("tsl.shannon_eta_identity", [&] {
      const TslParams p{z};
      s.at_most("tsl.shannon_eta_identity",
                max_abs_xv_identity([&](double x) { return tsl_shannon(x, p); }, [&](double x) { return tsl_eta(x, p); }),
                1e-6, zeta_tag(z) + " x in [1e-3, 1e3]");
    });
  }

  // eta inverse round trips
  s.guarded("m.inv_eta_round_trip", [&] {
    double worst = 0.0;
    for (double b : {0.5, 1.0, 2.0})
      for (double g : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
        const FirstHopShiftedParams p{b, 100.0};
        worst = std::max(worst, std::abs(m_inv_eta(m_eta(g, p), p) / g - 1.0));
      }
    s.at_most("m.inv_eta_round_trip", worst, 1e-9, "max relative error");
  });
  s.guarded("k.inv_eta_round_trip", [&] {
    double worst = 0.0;
    for (double z : {1.0, 2.0, 100.0})
      for (double g : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
        const CompositeSpectrumParams p{1.0, 100.0, z};
        worst = std::max(worst, std::abs(k_inv_eta(k_eta_real(g, p), p) / g - 1.0));
      }
    s.at_most("k.inv_eta_round_trip", worst, 1e-9, "max relative error");
  });

  // composite law: mass, mean, identity-hop degeneracy
  for (double z : {1.0, 3.1622776601683795, 10.0, 1e3}) {
    s.guarded("k.moments", [&] {
      const CompositeSpectrumParams p{1.0, 100.0, z};
      DensityGridSpec spec;
      spec.workers = opt.workers;
      const DensityCurve c = k_density(p, spec);
      s.abs("k.mass", c.mass(), 1.0, 1e-4, zeta_tag(z));
      s.rel("k.mean", c.moment(1), 1.0 + p.mu_bar * p.beta, 5e-3, zeta_tag(z));
    });
  }
  s.guarded("k.identity_hop_is_m_law", [&] {
    const CompositeSpectrumParams p{1.0, 100.0, 1.0};
    const FirstHopShiftedParams m{1.0, 100.0};
    double worst = 0.0;
    for (double x : {5.0, 50.0, 150.0, 300.0}) worst = std::max(worst, std::abs(k_density_at(x, p) - m_density(x, m)));
    s.at_most("k.identity_hop_is_m_law", worst, 1e-10, "max |f_K - f_M| at zeta=1");
  });

  // degeneracy chain and dual capacity routes
  s.guarded("capacity.degeneracy", [&] {
    const SystemParams p{10, 10, 10.0, 10.0};
    const double vmp = mp_shannon(p.mu_bar() * p.nu / (1.0 + p.nu), {p.beta()});
    s.abs("capacity.zeta_to_one", capacity(p, TslParams{1.0 + 1e-6}).c, vmp, 1e-4);
    s.abs("capacity.rank_alpha_one", capacity_rank(1.0, p).c, vmp, 1e-6);
    s.abs("capacity.identity_model", capacity(p, IdentityModel{}).c, vmp, 1e-12);
  });
  s.guarded("capacity.dual_route", [&] {
    const SystemParams p{10, 10, 10.0, 10.0};
    DensityGridSpec spec;
    spec.workers = opt.workers;
    s.rel("capacity.dual_route", capacity_c1_density(p, 10.0, spec), capacity_c1(p, 10.0), 1e-4, "zeta=10");
  });
  s.guarded("capacity.monotone_in_zeta", [&] {
    const SystemParams p{10, 10, 10.0, 10.0};
    double prev = INFINITY, worst = -INFINITY;
    for (double db = 0; db <= 120; db += 20) {
      const double c = capacity(p, TslParams{zeta_from_db(db)}).c;
      worst = std::max(worst, c - prev);
      prev = c;
    }
    s.at_most("capacity.monotone_in_zeta", worst, 0.0, "largest increase over 0..120 dB");
  });
  s.guarded("limit.high_nu_capacity", [&] {
    const SystemParams p{10, 10, 10.0, 1e6};
    s.abs("limit.high_nu_capacity", capacity(p, TslParams{10.0}).c, limit_high_nu(p).capacity, 0.02);
  });
  s.guarded("limit.low_nu_quadratic_zeta1", [&] {
    // zeta = 1 collapses the product law to MP
    s.abs("limit.low_nu_quadratic_zeta1", eta_tilted_mp(3.0, 1.0, 1.0), mp_eta(3.0, {1.0}), 1e-12);
  });
  s.guarded("mmse.bound_in_unit_interval", [&] {
    const SystemParams p{10, 10, 10.0, 10.0};
    const double b = mmse_bound(p, 10.0).mmse_bound;
    s.at_most("mmse.bound_in_unit_interval", std::abs(b - 0.5), 0.5, "bound " + fmt(b));
  });
  s.guarded("mmse.bound_zeta1_exact", [&] {
    // identity hop: the bound is the exact asymptotic mmse (1 + nu) eta_M(nu)
    const SystemParams p{10, 10, 10.0, 10.0};
    s.rel("mmse.bound_zeta1_exact", mmse_bound(p, 1.0).mmse_bound,
          (1.0 + p.nu) * m_eta(p.nu, {1.0, p.mu_bar()}), 1e-5);
  });
  s.guarded("conventional.closed_form", [&] {
    // E[ln(1 + c X)], X ~ Exp(1), equals e^{1/c} E1(1/c)
    const double c = 100.0 * 10 * 10 / (1.0 + 100.0);
    const double e1 = std::exp(1.0 / c) * boost::math::expint(1, 1.0 / c);
    s.rel("conventional.closed_form", conventional_capacity(10, 10.0, 10.0), e1, 1e-9);
  });
  s.guarded("db.round_trip", [&] {
    double worst = 0.0;
    for (double v : {1e-6, 0.3, 1.0, 10.0, 12345.0, 1e12}) worst = std::max(worst, std::abs(db_to_linear(linear_to_db(v)) / v - 1.0));
    s.at_most("db.round_trip", worst, 1e-12);
  });

  // finite-dimensional oracles
  s.guarded("mc.determinism", [&] {
    const SystemParams p{16, 16, 10.0, 10.0};
    EnsembleOptions o;
    o.workers = 1;
    auto run = [&](unsigned w) {
      o.workers = w;
      std::ostringstream os;
      write_trials_csv(os, run_ensemble(p, TslParams{10.0}, 24, opt.seed, o));
      return os.str();
    };
    const std::string a = run(1);
    const bool same = a == run(4) && a == run(16);
    s.abs("mc.determinism", same ? 0.0 : 1.0, 0.0, 0.0, "trials csv identical across 1/4/16 workers");
  });
  s.guarded("mc.capacity_forms", [&] {
    const SystemParams p{16, 16, 10.0, 10.0};
    const auto r = run_ensemble(p, TslParams{100.0}, 16, opt.seed, {});
    double worst = 0.0;
    for (const auto& t : r.records) worst = std::max(worst, std::abs(t.capacity_direct - t.capacity_split));
    s.at_most("mc.capacity_forms", worst, 1e-9, "max |direct - split| per trial");
  });
  s.guarded("mc.conventional", [&] {
    const auto m = conventional_mc(10, 10.0, 10.0, 20000, opt.seed);
    const double a = conventional_capacity(10, 10.0, 10.0);
    s.abs("mc.conventional", m.mean, a, 3.0 * m.stderr_mean, "3 standard errors");
  });
  if (!opt.quick) {
    s.guarded("mc.identity_capacity", [&] {
      const SystemParams p{64, 64, 10.0, 10.0};
      EnsembleOptions o;
      o.workers = opt.workers;
      o.eigenvalues = false;
      const auto r = run_ensemble(p, IdentityModel{}, 50, opt.seed, o);
      s.rel("mc.identity_capacity", r.capacity.mean, capacity(p, IdentityModel{}).c, 0.02, "K=64");
    });
    s.guarded("mc.k_mean_k512", [&] {
      const SystemParams p{512, 512, 10.0 / 512, 10.0};
      EnsembleOptions o;
      o.workers = opt.workers;
      o.metrics = false;
      o.eigenvalues = false;
      const auto r = run_ensemble(p, TslParams{10.0}, 4, opt.seed, o);
      s.rel("mc.k_mean_k512", r.trace_k.mean, 1.0 + p.mu_bar() * p.beta(), 5e-3, "K=512 zeta=10");
    });
    s.guarded("mc.h2_ks_k512", [&] {
      const auto ev = h2_eigenvalues(TslParams{2.0}, 512);
      double d = 0.0;
      for (std::size_t i = 0; i < ev.size(); ++i) {
        const double f = tsl_cdf(ev[i], {2.0});
        d = std::max({d, std::abs(f - double(i) / ev.size()), std::abs(f - double(i + 1) / ev.size())});
      }
      s.at_most("mc.h2_ks_k512", d, 0.02, "KS distance, zeta=2");
    });
  }
  return rep;
}

}  // namespace afrelay
