#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

#include "afrelay/spectral_laws.hpp"

namespace afrelay {

// Law of K = N~ (I + mu H1 H1^H): tilted semicircle N~ times shifted MP.
struct CompositeSpectrumParams {
  double beta = 1.0;
  double mu_bar = 0.0;
  double zeta = 1.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DensityCurve {
  std::vector<double> grid;     // ascending abscissae
  std::vector<double> values;   // density ordinates
  std::vector<double> weights;  // quadrature weights: int g ~ sum w_i g(x_i)
  std::vector<Atom> atoms;
  std::vector<Interval> intervals;
  Interval support;

  double mass() const;
  double moment(int k) const;  // includes atoms
  double integrate(const RealFn& g) const;
  // Density by monotone interpolation on the stored samples (0 off support).
  double at(double x) const;
};

struct DensityGridSpec {
  int points_per_interval = 2000;
  int edge_refinement = 4;        // subdivision factor in the edge zones
  double edge_fraction = 0.025;   // share of each interval treated as edge zone
  int scan_points = 4000;         // support detection scan
  int hysteresis = 5;
  unsigned workers = 0;           // 0: hardware concurrency
};

class QuantileTable {
 public:
  QuantileTable(std::vector<double> u, std::vector<double> x);

  double quantile(double u) const;
  double cdf(double x) const;
  const std::vector<double>& u_grid() const { return u_; }
  const std::vector<double>& x_grid() const { return x_; }

 private:
  struct Impl;
  std::vector<double> u_, x_;
  std::shared_ptr<const Impl> impl_;
};

double k_inv_eta(double h, CompositeSpectrumParams p);
double k_inv_eta_d(double d, CompositeSpectrumParams p);  // d = 1 - h
double k_eta_real(double gamma, CompositeSpectrumParams p);
double k_one_minus_eta(double gamma, CompositeSpectrumParams p);

// S_K(z) for Im z > 0 (Im z == 0 gives the limit from above).
cplx k_stieltjes(cplx z, CompositeSpectrumParams p);
// exact boundary value -Im(S(x + i0))/pi
double k_density_at(double x, CompositeSpectrumParams p);
Interval k_support_bounds(CompositeSpectrumParams p);

DensityCurve k_density(CompositeSpectrumParams p, const DensityGridSpec& spec = {});
QuantileTable quantile_table_from(const DensityCurve& curve);
QuantileTable k_quantile_table(CompositeSpectrumParams p, const DensityGridSpec& spec = {});

double rank_k_density(double x, double alpha, double beta, double mu_bar);
std::vector<Atom> rank_k_atoms(double alpha, double beta, double mu_bar);

// Coefficients of the cubic in S (highest degree first). The derived set comes
// from x eta_K^{-1}(-x S) + 1 = 0; the printed set is kept for comparison and
// differs in the S^2 coefficient.
std::array<cplx, 4> derived_s_polynomial(cplx z, CompositeSpectrumParams p);
std::array<cplx, 4> printed_s_polynomial(cplx z, CompositeSpectrumParams p);

void write_csv(std::ostream& os, const DensityCurve& curve);
void write_atoms_csv(std::ostream& os, const DensityCurve& curve);
void write_csv(std::ostream& os, const QuantileTable& table);

}  // namespace afrelay
