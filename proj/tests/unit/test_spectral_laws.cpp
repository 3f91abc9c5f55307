#include <doctest.h>

#include <cmath>

#include "../common/oracles.hpp"
#include "afrelay/spectral_laws.hpp"

using namespace afrelay;
using doctest::Approx;

TEST_CASE("Marcenko-Pastur: density matches the oracle and carries mass 1 - atom") {
  for (double b : {0.25, 1.0, 2.0}) {
    const MpParams p{b};
    CHECK(mp_density(1.3, p) == Approx(oracle::mp_pdf(1.3, b)).epsilon(1e-13));
    const double lo = mp_support_lo(p), hi = mp_support_hi(p);
    const double mass = oracle::tanh_sinh([&](double x) { return mp_density(x, p); }, lo, hi);
    CHECK(mass + mp_atom_weight(p) == Approx(1.0).epsilon(1e-9));
    // mean of (1/K) H H^H with M/K = beta is beta
    const double mean = oracle::tanh_sinh([&](double x) { return x * mp_density(x, p); }, lo, hi);
    CHECK(mean == Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("Marcenko-Pastur: eta and Shannon against quadrature") {
  for (double b : {0.5, 1.0, 3.0})
    for (double x : {1e-3, 0.4, 10.0, 1e4}) {
      const MpParams p{b};
      const double lo = mp_support_lo(p), hi = mp_support_hi(p);
      const double eta = mp_atom_weight(p) +
                         oracle::tanh_sinh([&](double t) { return mp_density(t, p) / (1 + x * t); }, lo, hi);
      const double v = oracle::tanh_sinh([&](double t) { return mp_density(t, p) * std::log1p(x * t); }, lo, hi);
      CHECK(mp_eta(x, p) == Approx(eta).epsilon(1e-10));
      CHECK(mp_shannon(x, p) == Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("Marcenko-Pastur: beta = 1 c.d.f.") {
  for (double x : {0.01, 0.5, 2.0, 3.9}) {
    const double f = oracle::tanh_sinh([](double t) { return oracle::mp_pdf(t, 1.0); }, 0.0, x);
    CHECK(mp_cdf_beta1(x) == Approx(f).epsilon(1e-10));
  }
  CHECK(mp_cdf_beta1(4.0) == Approx(1.0));
}

TEST_CASE("M = I + mu W: shift of MP") {
  const FirstHopShiftedParams p{1.0, 100.0};
  CHECK(m_support_lo(p) == Approx(1.0));
  CHECK(m_support_hi(p) == Approx(401.0));
  CHECK(m_density(50.0, p) == Approx(oracle::mp_pdf(49.0 / 100.0, 1.0) / 100.0).epsilon(1e-13));
  // c.d.f. uses the normalized power mu_bar inside the arcsin
  for (double x : {2.0, 77.0, 390.0})
    CHECK(m_cdf_beta1(x, 100.0) == Approx(mp_cdf_beta1((x - 1) / 100.0)).epsilon(1e-12));
  for (double g : {1e-3, 1.0, 30.0}) {
    // integrate in the MP variable: x = 1 + 100 t keeps resolution at the hard edge
    const double eta =
        oracle::tanh_sinh([&](double t) { return oracle::mp_pdf(t, 1.0) / (1 + g * (1 + 100.0 * t)); }, 0.0, 4.0);
    CHECK(m_eta(g, p) == Approx(eta).epsilon(1e-10));
    CHECK(m_inv_eta(m_eta(g, p), p) == Approx(g).epsilon(1e-9));
    CHECK(m_inv_eta_d(1.0 - m_eta(g, p), p) == Approx(g).epsilon(1e-9));
  }
}

TEST_CASE("M law with beta < 1 has an atom at 1") {
  const FirstHopShiftedParams p{0.5, 10.0};
  const auto a = m_atom(p);
  REQUIRE(a.has_value());
  CHECK(a->location == 1.0);
  CHECK(a->weight == Approx(0.5));
}

TEST_CASE("tilted semicircle: moments") {
  for (double z : {1.5, 2.0, 10.0, 1000.0}) {
    const TslParams p{z};
    auto mom = [&](int k) {
      return oracle::tanh_sinh([&](double x) { return std::pow(x, k) * oracle::tsl_pdf(x, z); }, 1 / z, z);
    };
    CHECK(mom(0) == Approx(1.0).epsilon(1e-10));
    CHECK(mom(1) == Approx(1.0).epsilon(1e-10));
    CHECK(mom(2) == Approx((z + 1) * (z + 1) / (4 * z)).epsilon(1e-10));
    CHECK(tsl_second_moment(p) == Approx((z + 1) * (z + 1) / (4 * z)).epsilon(1e-14));
    CHECK(tsl_density(std::sqrt(z), p) == Approx(oracle::tsl_pdf(std::sqrt(z), z)).epsilon(1e-13));
  }
}

TEST_CASE("tilted semicircle: c.d.f., partial mean and quantile") {
  for (double z : {1.5, 10.0, 1e4}) {
    const TslParams p{z};
    for (double x : {1.0 / z * 1.001, 0.9, std::sqrt(z), 0.9 * z}) {
      if (x <= 1 / z || x >= z) continue;
      const double f = oracle::tanh_sinh([&](double t) { return oracle::tsl_pdf(t, z); }, 1 / z, x);
      const double m = oracle::tanh_sinh([&](double t) { return t * oracle::tsl_pdf(t, z); }, 1 / z, x);
      CHECK(tsl_cdf(x, p) == Approx(f).epsilon(1e-9));
      CHECK(tsl_partial_mean(x, p) == Approx(m).epsilon(1e-9));
    }
    for (double u : {1e-6, 0.1, 0.5, 0.99, 1 - 1e-9}) CHECK(tsl_cdf(tsl_quantile(u, p), p) == Approx(u).epsilon(1e-9));
  }
}

TEST_CASE("tilted semicircle: eta, Stieltjes and R against quadrature") {
  for (double z : {1.5, 10.0, 300.0}) {
    const TslParams p{z};
    for (double x : {1e-3, 1.0, 100.0}) {
      const double eta = oracle::tanh_sinh([&](double t) { return oracle::tsl_pdf(t, z) / (1 + x * t); }, 1 / z, z);
      const double v = oracle::tanh_sinh([&](double t) { return oracle::tsl_pdf(t, z) * std::log1p(x * t); }, 1 / z, z);
      CHECK(tsl_eta(x, p) == Approx(eta).epsilon(1e-10));
      CHECK(tsl_shannon(x, p) == Approx(v).epsilon(1e-9));
    }
    // S(z) = int f(t)/(t - z) dt at a point off the axis
    const cplx w(0.7, 0.3);
    const double re = oracle::tanh_sinh([&](double t) { return (oracle::tsl_pdf(t, z) / (t - w)).real(); }, 1 / z, z);
    const double im = oracle::tanh_sinh([&](double t) { return (oracle::tsl_pdf(t, z) / (t - w)).imag(); }, 1 / z, z);
    const cplx s = tsl_stieltjes(w, p);
    CHECK(s.real() == Approx(re).epsilon(1e-9));
    CHECK(s.imag() == Approx(im).epsilon(1e-9));
    CHECK(tsl_r(0.0, p) == Approx(1.0));  // R(0) = mean
  }
}

TEST_CASE("tilted semicircle: printed transform variant is scaled by 1/(zeta+1)^2") {
  for (double z : {2.0, 5.0}) {
    const TslParams p{z};
    const double k = 1.0 / ((z + 1) * (z + 1));
    CHECK(tsl_eta(0.0, p, TransformForm::kAsPrinted) == Approx(k));
    CHECK(tsl_r(0.0, p, TransformForm::kAsPrinted) == Approx(k));
    CHECK(tsl_eta(0.0, p) == Approx(1.0));
  }
}

TEST_CASE("tilted semicircle at zeta = 1 is a unit atom") {
  const auto a = tsl_atom({1.0});
  REQUIRE(a.has_value());
  CHECK(a->location == 1.0);
  CHECK(a->weight == 1.0);
  CHECK(tsl_eta(3.0, {1.0}) == Approx(0.25));
  CHECK_THROWS(tsl_density(1.0, {1.0}));
}

TEST_CASE("uniform spread: density, moments, transforms") {
  for (double z : {2.0, 10.0}) {
    const UniformSpreadParams p{z};
    const double lo = oracle::tanh_sinh([&](double x) { return uniform_density(x, p); }, 1 / z, z);
    CHECK(lo == Approx(1.0).epsilon(1e-12));
    CHECK(uniform_mean(p) == Approx((z * z + 1) / (2 * z)));
    const double x = 0.8;
    const double eta = oracle::tanh_sinh([&](double t) { return uniform_density(t, p) / (1 + x * t); }, 1 / z, z);
    const auto tr = uniform_transforms(x, p);
    CHECK(tr.eta == Approx(eta).epsilon(1e-12));
    CHECK(uniform_eta(x, p) == Approx(eta).epsilon(1e-12));
    CHECK(uniform_cdf(uniform_quantile(0.3, p), p) == Approx(0.3));
    const cplx w(0.5, 0.5);
    const double im = oracle::tanh_sinh([&](double t) { return (uniform_density(t, p) / (t - w)).imag(); }, 1 / z, z);
    CHECK(uniform_stieltjes(w, p).imag() == Approx(im).epsilon(1e-10));
  }
}

TEST_CASE("Shannon-eta identity x V'(x) = 1 - eta(x)") {
  for (int i = 0; i <= 12; ++i) {
    const double x = std::pow(10.0, -3.0 + 0.5 * i), h = 1e-4 * x;
    for (double b : {0.5, 1.0, 2.0}) {
      const MpParams p{b};
      const double d = (mp_shannon(x + h, p) - mp_shannon(x - h, p)) / (2 * h);
      CHECK(std::abs(x * d - (1 - mp_eta(x, p))) <= 1e-6);
    }
    for (double z : {1.5, 10.0, 1000.0}) {
      const TslParams p{z};
      const double d = (tsl_shannon(x + h, p) - tsl_shannon(x - h, p)) / (2 * h);
      CHECK(std::abs(x * d - (1 - tsl_eta(x, p))) <= 1e-6);
    }
  }
}

TEST_CASE("model names") {
  CHECK(std::string(model_name(TslParams{2.0})) == "tsl");
  CHECK(std::string(model_name(IdentityModel{})) == "identity");
}
