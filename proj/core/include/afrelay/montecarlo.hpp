#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "afrelay/composite_spectrum.hpp"
#include "afrelay/metrics.hpp"

namespace afrelay {

// How a finite H2 spectrum is taken from an asymptotic law.
//   kBinMean:     eigenvalue i is K times the mean of the law over the i-th
//                 probability bin [(i-1)/K, i/K]; the trace is preserved
//   kMidQuantile: eigenvalue i is the quantile at (i - 1/2)/K
enum class H2Discretization { kBinMean, kMidQuantile };

struct H2Options {
  H2Discretization discretization = H2Discretization::kBinMean;
  bool random_unitary = false;
};

// Eigenvalues of H2^H H2 in ascending order, trace renormalized to K.
std::vector<double> h2_eigenvalues(const SecondHopModel& model, int K,
                                   H2Discretization d = H2Discretization::kBinMean);
// D^{1/2}, or U D^{1/2} U^H with a Haar unitary drawn from rng.
Eigen::MatrixXcd build_h2(const SecondHopModel& model, int K, const H2Options& opt = {},
                          std::mt19937_64* rng = nullptr);

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double capacity_direct = 0.0;  // (1/K) log det(I + mu nu G G^H B^{-1})
  double capacity_split = 0.0;   // c1 - c2
  double c1 = 0.0;
  double c2 = 0.0;
  double mmse_avg = 1.0;      // trace form
  double mmse_diag = 1.0;     // mean of the per-user inverse diagonal
  double sinr_avg = 0.0;
  double trace_k = 0.0;       // (1/K) tr K
  double trace_m = 0.0;       // (1/K) tr M
};

struct Aggregate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  int count = 0;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t below = 0;
  std::uint64_t above = 0;
  std::uint64_t total = 0;

  double density(std::size_t i) const;
  double mass(std::size_t i) const;
};

std::vector<double> linear_edges(double lo, double hi, int bins);
std::vector<double> log_edges(double lo, double hi, int bins);
Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges);

struct EnsembleOptions {
  unsigned workers = 0;
  bool metrics = true;       // capacity, mmse, sinr
  bool eigenvalues = true;   // keep spectra of K and M for histograms
  int histogram_bins = 40;
  std::optional<std::vector<double>> k_edges;
  std::optional<std::vector<double>> m_edges;
  H2Options h2;
  double cond_warning = 1e12;
};

struct EnsembleResult {
  SystemParams params;
  std::string model;
  std::uint64_t master_seed = 0;
  int trials = 0;
  std::vector<TrialRecord> records;
  std::vector<std::string> failures;
  Aggregate capacity;
  Aggregate capacity_split;
  Aggregate mmse;
  Aggregate sinr;
  Aggregate cmmse;  // ln(1 + SINR_avg) per trial
  Aggregate trace_k;
  Aggregate trace_m;
  std::vector<double> eig_k;  // trial-major, ascending within a trial
  std::vector<double> eig_m;
  Histogram hist_k;
  Histogram hist_m;
};

EnsembleResult run_ensemble(const SystemParams& p, const SecondHopModel& model, int trials,
                            std::uint64_t master_seed, const EnsembleOptions& opt = {});

struct ConventionalMc {
  double mean = 0.0;
  double stderr_mean = 0.0;
};
ConventionalMc conventional_mc(int K, double mu, double nu, int trials, std::uint64_t seed);

void write_trials_csv(std::ostream& os, const EnsembleResult& r);
void write_histogram_csv(std::ostream& os, const Histogram& h);

}  // namespace afrelay
