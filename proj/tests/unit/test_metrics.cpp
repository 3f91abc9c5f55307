#include <doctest.h>

#include <boost/math/special_functions/expint.hpp>
#include <cmath>

#include "../common/oracles.hpp"
#include "afrelay/errors.hpp"
#include "afrelay/metrics.hpp"

using namespace afrelay;
using doctest::Approx;

namespace {
const SystemParams kRef{10, 10, 10.0, 10.0};  // mu = nu = 10 dB
}

TEST_CASE("system parameters") {
  CHECK(kRef.beta() == 1.0);
  CHECK(kRef.mu_bar() == 100.0);
  CHECK_THROWS_AS((SystemParams{0, 10, 1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((SystemParams{10, 10, -1.0, 1.0}.validate()), ConfigError);
}

TEST_CASE("degeneracy chain: near-identity TSL, full-rank rank model and identity agree") {
  const double vmp = oracle::tanh_sinh(
      [&](double t) { return oracle::mp_pdf(t, 1.0) * std::log1p(100.0 * 10.0 / 11.0 * t); }, 0.0, 4.0);
  CHECK(capacity(kRef, IdentityModel{}).c == Approx(vmp).epsilon(1e-10));
  CHECK(std::abs(capacity(kRef, TslParams{1.0 + 1e-6}).c - vmp) <= 1e-4);
  CHECK(std::abs(capacity(kRef, TslParams{1.0}).c - vmp) <= 1e-8);
  CHECK(std::abs(capacity_rank(1.0, kRef).c - vmp) <= 1e-6);
}

TEST_CASE("C2 is the TSL Shannon transform") {
  const double z = 10.0;
  const double v =
      oracle::tanh_sinh([&](double t) { return oracle::tsl_pdf(t, z) * std::log1p(10.0 * t); }, 1 / z, z);
  CHECK(capacity_c2(10.0, z) == Approx(v).epsilon(1e-10));
}

TEST_CASE("C1 by two routes") {
  for (double z : {2.0, 10.0, 1e3}) {
    CHECK(capacity_c1_density(kRef, z) == Approx(capacity_c1(kRef, z)).epsilon(1e-4));
  }
}

TEST_CASE("capacity decreases with conditioning and stays non-negative") {
  double prev = INFINITY;
  for (double db = 0; db <= 160; db += 20) {
    const auto c = capacity(kRef, TslParams{zeta_from_db(db)});
    CHECK(c.c >= 0.0);
    CHECK(c.c <= prev);
    CHECK(c.c == Approx(c.c1 - c.c2).epsilon(1e-12));
    prev = c.c;
  }
}

TEST_CASE("rank model: closed form against direct quadrature") {
  for (double a : {0.25, 0.5, 1.0}) {
    const double nu = kRef.nu, mb = kRef.mu_bar();
    // the active block sees an (alpha K) x M Wishart: MP law with ratio 1/alpha >= 1, no atom
    const double b = 1.0 / a;
    const double c1_full =
        a * oracle::tanh_sinh([&](double t) { return oracle::mp_pdf(t, b) * std::log1p(nu * (1 + a * mb * t) / a); },
                              std::pow(1 - std::sqrt(b), 2), std::pow(1 + std::sqrt(b), 2));
    const auto r = capacity_rank(a, kRef);
    CHECK(r.c2 == Approx(a * std::log1p(nu / a)));
    CHECK(r.c1 == Approx(c1_full).epsilon(1e-8));
  }
  CHECK_THROWS_AS(capacity_rank(0.0, kRef), ConfigError);
}

TEST_CASE("uniform model has no composed capacity") {
  CHECK_THROWS_AS(capacity(kRef, UniformSpreadParams{2.0}), ConfigError);
}

TEST_CASE("mmse bound: exact at zeta = 1, ordered against the printed pairing") {
  const double exact = (1 + kRef.nu) * m_eta(kRef.nu, {1.0, kRef.mu_bar()});
  CHECK(mmse_bound(kRef, 1.0).mmse_bound == Approx(exact).epsilon(1e-5));
  for (double z : {2.0, 10.0, 100.0}) {
    const double lo = mmse_bound(kRef, z).mmse_bound;
    const double hi = mmse_bound(kRef, z, MmseOrdering::kAsPrinted).mmse_bound;
    CHECK(lo > 0.0);
    CHECK(lo < 1.0);
    CHECK(hi > lo);
    CHECK(mmse_bound(kRef, z).cmmse_bound == Approx(-std::log(lo)));
  }
  CHECK_THROWS_AS(mmse_bound(SystemParams{10, 20, 10.0, 10.0}, 2.0), ConfigError);
}

TEST_CASE("high-nu limit") {
  SystemParams p = kRef;
  p.nu = 1e6;
  const auto lim = limit_high_nu(p);
  CHECK(lim.capacity == Approx(mp_shannon(100.0, {1.0})));
  CHECK(lim.mmse == Approx(mp_eta(100.0, {1.0})));
  CHECK(std::abs(capacity(p, TslParams{10.0}).c - lim.capacity) <= 0.02);
}

TEST_CASE("high-mu low-nu quadratic") {
  CHECK(eta_tilted_mp(3.0, 1.0, 1.0) == Approx(mp_eta(3.0, {1.0})).epsilon(1e-13));
  // against quadrature of 1/(1 + x t) over the product law via its own fixed point:
  // eta solves (x - c) h^2 + (x (beta - 1) + 1 + 2c) h - (1 + c) = 0 on (0, 1]
  for (double z : {2.0, 10.0})
    for (double x : {0.1, 1.0, 10.0}) {
      const double c = (z - 1) * (z - 1) / (4 * z);
      const double h = eta_tilted_mp(x, z, 1.0);
      CHECK(h > 0.0);
      CHECK(h <= 1.0);
      CHECK(std::abs((x - c) * h * h + (1 + 2 * c) * h - (1 + c)) < 1e-12);
    }
  // the printed closed form equals -eta_MP at zeta = 1
  CHECK(mestre_eta_as_printed(3.0, 1.0, 1.0).real() == Approx(-mp_eta(3.0, {1.0})).epsilon(1e-12));
}

TEST_CASE("conventional baseline: e^{1/c} E1(1/c)") {
  for (auto [K, mu, nu] : {std::tuple{10, 10.0, 10.0}, {4, 1.0, 0.5}, {64, 100.0, 3.0}}) {
    const double c = double(K) * K * nu * mu / (1 + K * nu);
    const double want = std::exp(1 / c) * boost::math::expint(1, 1 / c);
    CHECK(conventional_capacity(K, mu, nu) == Approx(want).epsilon(1e-10));
    CHECK(conventional_per_antenna(K, mu, nu) == Approx(want / K).epsilon(1e-10));
  }
  CHECK(conventional_capacity(10, 0.0, 1.0) == 0.0);
}

TEST_CASE("crossing finder on a coarse grid") {
  CrossingSpec s;
  s.system = kRef;
  s.start_db = 160;
  s.stop_db = 220;
  s.step_db = 20;
  s.scale = Zeta2DbScale::kAmplitude;
  const auto r = crossing_finder(s);
  REQUIRE(r.capacity_crossing.found);
  CHECK(r.capacity_crossing.db > 180);
  CHECK(r.capacity_crossing.db < 200);
  CHECK(capacity(kRef, TslParams{zeta_from_db(r.capacity_crossing.db, s.scale)}).c ==
        Approx(r.conventional).epsilon(1e-3));
  CHECK_FALSE(r.mmse_gain_boundary.found);  // already below 2x at 160 dB
}
