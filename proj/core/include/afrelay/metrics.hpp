#pragma once

#include <complex>
#include <string>
#include <vector>

#include "afrelay/composite_spectrum.hpp"
#include "afrelay/spectral_laws.hpp"

namespace afrelay {

struct SystemParams {
  int K = 10;
  int M = 10;
  double mu = 10.0;  // per-user SNR, linear
  double nu = 10.0;  // relay amplification, linear

  double beta() const { return static_cast<double>(M) / K; }
  double mu_bar() const { return K * mu; }
  void validate() const;
};

struct CapacityBreakdown {
  double c1 = 0.0;
  double c2 = 0.0;
  double c = 0.0;
};

struct MmseReport {
  double mmse_bound = 1.0;
  double cmmse_bound = 0.0;  // -ln(mmse_bound)
};

struct LimitReport {
  double capacity = 0.0;
  double mmse = 1.0;
};

// How the two inverse c.d.f.s are paired in the ordered-eigenvalue bound.
//   kLower:     both ascending, the rearrangement lower bound of tr{AB}
//   kAsPrinted: one of them reversed, which yields the upper rearrangement
enum class MmseOrdering { kLower, kAsPrinted };

double capacity_c2(double nu, double zeta);
// Shannon transform of K through its eta transform.
double capacity_c1(const SystemParams& p, double zeta);
// Same quantity by quadrature of ln(1 + nu x) against the sampled density.
double capacity_c1_density(const SystemParams& p, double zeta, const DensityGridSpec& spec = {});
CapacityBreakdown capacity(const SystemParams& p, const SecondHopModel& model);
CapacityBreakdown capacity_rank(double alpha, const SystemParams& p);

MmseReport mmse_bound(const SystemParams& p, double zeta, MmseOrdering ordering = MmseOrdering::kLower,
                      const DensityGridSpec& spec = {});

// eta of the product law N~ (1/K) H1 H1^H, root in (0, 1] of
// (x - c) h^2 + (x (beta - 1) + 1 + 2c) h - (1 + c) = 0, c = (zeta-1)^2/(4 zeta).
double eta_tilted_mp(double x, double zeta, double beta);
// The closed form as originally printed, kept for regression only.
std::complex<double> mestre_eta_as_printed(double x, double zeta, double beta);
// gamma = K nu mu held fixed while mu -> inf, nu -> 0.
LimitReport limit_high_mu_low_nu(double beta, double zeta, double gamma);
LimitReport limit_high_nu(const SystemParams& p);

// E[ln(1 + c X)], X ~ Exp(1), c = K^2 nu mu / (1 + K nu).
double conventional_capacity(int K, double mu, double nu);
// Share of one receive antenna: conventional_capacity / K.
double conventional_per_antenna(int K, double mu, double nu);

struct CrossingSpec {
  SystemParams system;
  double start_db = 0.0;
  double stop_db = 220.0;
  double step_db = 10.0;
  Zeta2DbScale scale = Zeta2DbScale::kPower;
  double gain_factor = 2.0;
  unsigned workers = 0;
};

struct CrossingPoint {
  bool found = false;
  double db = 0.0;
};

struct CrossingReport {
  double conventional = 0.0;  // per receive antenna
  std::vector<double> db;
  std::vector<double> capacity;
  std::vector<double> cmmse;
  CrossingPoint capacity_crossing;
  CrossingPoint mmse_crossing;
  CrossingPoint capacity_gain_boundary;
  CrossingPoint mmse_gain_boundary;
};

CrossingReport crossing_finder(const CrossingSpec& spec);

}  // namespace afrelay
