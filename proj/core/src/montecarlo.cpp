#include "afrelay/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <numeric>
#include <cmath>
#include <iostream>
#include <sstream>

#include "afrelay/errors.hpp"
#include "parallel.hpp"

namespace afrelay {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Bin-conditional means K * int_{q_{i-1}}^{q_i} x dF for a law given by its
// quantile and partial-mean functions.
template <class Quantile, class PartialMean>
std::vector<double> bin_means(int K, Quantile q, PartialMean pm) {
  std::vector<double> edges(K + 1);
  for (int i = 0; i <= K; ++i) edges[i] = q(static_cast<double>(i) / K);
  std::vector<double> out(K);
  double prev = pm(edges[0]);
  for (int i = 0; i < K; ++i) {
    const double cur = pm(edges[i + 1]);
    out[i] = K * (cur - prev);
    prev = cur;
  }
  return out;
}

void renormalize_trace(std::vector<double>& v, int K) {
  const double tr = compensated_sum(v);
  if (!(tr > 0.0)) throw NumericError("h2 spectrum has non-positive trace");
  for (auto& x : v) x *= K / tr;
}

MatrixXcd haar_unitary(int K, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXcd z(K, K);
  for (int j = 0; j < K; ++j)
    for (int i = 0; i < K; ++i) z(i, j) = {n(rng), n(rng)};
  Eigen::HouseholderQR<MatrixXcd> qr(z);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < K; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

Aggregate aggregate(const std::vector<TrialRecord>& recs, double TrialRecord::*field) {
  Aggregate a;
  CompensatedSum s;
  for (const auto& r : recs) {
    if (!r.ok) continue;
    s.add(r.*field);
    ++a.count;
  }
  if (a.count == 0) return a;
  a.mean = s.value() / a.count;
  if (a.count > 1) {
    CompensatedSum v;
    for (const auto& r : recs)
      if (r.ok) v.add((r.*field - a.mean) * (r.*field - a.mean));
    a.stderr_mean = std::sqrt(v.value() / (a.count - 1) / a.count);
  }
  return a;
}

double log_abs_det_lu(const MatrixXcd& a) {
  Eigen::PartialPivLU<MatrixXcd> lu(a);
  const auto d = lu.matrixLU().diagonal();
  CompensatedSum s;
  for (Eigen::Index i = 0; i < d.size(); ++i) s.add(std::log(std::abs(d(i))));
  return s.value();
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
  return splitmix64(splitmix64(master_seed) ^ (0xD1B54A32D192ED03ull * (trial + 1)));
}

std::vector<double> h2_eigenvalues(const SecondHopModel& model, int K, H2Discretization d) {
  if (K < 1) throw ConfigError("K must be >= 1");
  std::vector<double> ev;
  if (const auto* t = std::get_if<TslParams>(&model)) {
    if (t->zeta < 1.0) throw ConfigError("zeta must be >= 1");
    if (t->zeta == 1.0) return std::vector<double>(K, 1.0);
    if (d == H2Discretization::kBinMean)
      ev = bin_means(
          K, [&](double u) { return tsl_quantile(u, *t); },
          [&](double x) { return tsl_partial_mean(x, *t); });
    else
      for (int i = 0; i < K; ++i) ev.push_back(tsl_quantile((i + 0.5) / K, *t));
  } else if (const auto* u = std::get_if<UniformSpreadParams>(&model)) {
    if (d == H2Discretization::kBinMean)
      ev = bin_means(
          K, [&](double v) { return uniform_quantile(v, *u); },
          [&](double x) { return uniform_partial_mean(x, *u); });
    else
      for (int i = 0; i < K; ++i) ev.push_back(uniform_quantile((i + 0.5) / K, *u));
  } else if (const auto* r = std::get_if<RankParams>(&model)) {
    if (!(r->alpha > 0.0 && r->alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    const int rank = static_cast<int>(std::lround(r->alpha * K));
    if (rank < 1) throw ConfigError("rank model needs round(alpha K) >= 1");
    ev.assign(K - rank, 0.0);
    ev.resize(K, static_cast<double>(K) / rank);
    return ev;
  } else {
    return std::vector<double>(K, 1.0);
  }
  renormalize_trace(ev, K);
  std::sort(ev.begin(), ev.end());
  return ev;
}

MatrixXcd build_h2(const SecondHopModel& model, int K, const H2Options& opt, std::mt19937_64* rng) {
  const auto ev = h2_eigenvalues(model, K, opt.discretization);
  MatrixXcd d = MatrixXcd::Zero(K, K);
  for (int i = 0; i < K; ++i) d(i, i) = std::sqrt(ev[i]);
  if (!opt.random_unitary) return d;
  if (!rng) throw ConfigError("build_h2: random unitary requested without a generator");
  const MatrixXcd u = haar_unitary(K, *rng);
  return u * d * u.adjoint();
}

// ---------------------------------------------------------------- histograms

double Histogram::mass(std::size_t i) const {
  return total ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
}

double Histogram::density(std::size_t i) const { return mass(i) / (edges[i + 1] - edges[i]); }

std::vector<double> linear_edges(double lo, double hi, int bins) {
  std::vector<double> e(bins + 1);
  for (int i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * i / bins;
  return e;
}

std::vector<double> log_edges(double lo, double hi, int bins) {
  std::vector<double> e(bins + 1);
  const double L = std::log(hi / lo);
  for (int i = 0; i <= bins; ++i) e[i] = lo * std::exp(L * i / bins);
  e.back() = hi;
  return e;
}

Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges) {
  if (edges.size() < 2) throw ConfigError("histogram needs at least one bin");
  Histogram h;
  h.edges = std::move(edges);
  h.counts.assign(h.edges.size() - 1, 0);
  for (double v : values) {
    ++h.total;
    if (v < h.edges.front()) {
      ++h.below;
      continue;
    }
    if (v > h.edges.back()) {
      ++h.above;
      continue;
    }
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    std::size_t i = static_cast<std::size_t>(it - h.edges.begin());
    i = std::min(std::max<std::size_t>(i, 1), h.counts.size());
    ++h.counts[i - 1];
  }
  return h;
}

// ---------------------------------------------------------------- ensemble

namespace {

struct TrialOutput {
  TrialRecord rec;
  std::vector<double> eig_k, eig_m;
  bool ill_conditioned = false;
};

TrialOutput run_trial(const SystemParams& p, const SecondHopModel& model, const std::vector<double>& ev,
                      std::uint64_t trial, std::uint64_t master, const EnsembleOptions& opt) {
  TrialOutput out;
  TrialRecord& rec = out.rec;
  rec.trial = trial;
  rec.seed = trial_seed(master, trial);
  std::mt19937_64 rng(rec.seed);
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const int K = p.K, M = p.M;
  const double mu = p.mu, nu = p.nu;
  MatrixXcd h1(K, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < K; ++i) h1(i, j) = {n(rng), n(rng)};
  (void)model;

  // G = H2 H1 and N~ = H2^H H2
  MatrixXcd h2, g, ntil;
  const bool diagonal = !opt.h2.random_unitary;
  if (diagonal) {
    g = h1;
    for (int i = 0; i < K; ++i) g.row(i) *= std::sqrt(ev[i]);
  } else {
    MatrixXcd d = MatrixXcd::Zero(K, K);
    for (int i = 0; i < K; ++i) d(i, i) = std::sqrt(ev[i]);
    const MatrixXcd u = haar_unitary(K, rng);
    h2 = u * d * u.adjoint();
    g.noalias() = h2 * h1;
  }

  rec.trace_m = 1.0 + mu * h1.squaredNorm() / K;
  rec.trace_k = (std::accumulate(ev.begin(), ev.end(), 0.0) + mu * g.squaredNorm()) / K;

  const bool need_k = opt.metrics || opt.eigenvalues;
  MatrixXcd ktil;  // H2 M H2^H = H2 H2^H + mu G G^H
  if (need_k) {
    MatrixXcd hh;
    if (diagonal) {
      hh = MatrixXcd::Zero(K, K);
      for (int i = 0; i < K; ++i) hh(i, i) = ev[i];
    } else {
      hh.noalias() = h2 * h2.adjoint();
    }
    ktil = hh;
    ktil.noalias() += mu * g * g.adjoint();
    ntil = hh;  // H2 H2^H has the spectrum of H2^H H2
  }

  if (opt.eigenvalues) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> ek(ktil, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> em(h1 * h1.adjoint(), Eigen::EigenvaluesOnly);
    out.eig_k.resize(K);
    out.eig_m.resize(K);
    for (int i = 0; i < K; ++i) {
      out.eig_k[i] = ek.eigenvalues()(i);
      out.eig_m[i] = 1.0 + mu * em.eigenvalues()(i);
    }
  }

  if (opt.metrics) {
    const MatrixXcd I = MatrixXcd::Identity(K, K);
    const MatrixXcd B = I + nu * ntil;
    Eigen::LLT<MatrixXcd> llt_b(B);
    if (llt_b.info() != Eigen::Success) throw NumericError("I + nu H2 H2^H is not positive definite");
    if (1.0 / llt_b.rcond() > opt.cond_warning) out.ill_conditioned = true;

    // direct form through the non-Hermitian product
    const MatrixXcd binv_gh = llt_b.solve(g * g.adjoint());
    const MatrixXcd x2 = I + mu * nu * binv_gh.adjoint();  // G G^H B^{-1}
    rec.capacity_direct = log_abs_det_lu(x2) / K;

    // split form: log det(I + nu N~ M) - log det(I + nu N~)
    MatrixXcd mm = MatrixXcd::Identity(K, K);
    mm.noalias() += mu * h1 * h1.adjoint();
    MatrixXcd prod = I;
    if (diagonal) {
      MatrixXcd nm = mm;
      for (int i = 0; i < K; ++i) nm.row(i) *= ev[i];
      prod += nu * nm;
    } else {
      prod.noalias() += nu * (h2.adjoint() * h2) * mm;
    }
    rec.c1 = log_abs_det_lu(prod) / K;
    const auto lb = llt_b.matrixLLT().diagonal();
    double ld = 0.0;
    for (Eigen::Index i = 0; i < lb.size(); ++i) ld += 2.0 * std::log(std::real(lb(i)));
    rec.c2 = ld / K;
    rec.capacity_split = rec.c1 - rec.c2;

    // Per-user MMSE: diag of (I_M + mu nu G^H B^{-1} G)^{-1}
    const MatrixXcd w = llt_b.matrixL().solve(g);
    MatrixXcd t = MatrixXcd::Identity(M, M);
    t.noalias() += mu * nu * w.adjoint() * w;
    Eigen::LLT<MatrixXcd> llt_t(t);
    if (llt_t.info() != Eigen::Success) throw NumericError("MMSE matrix is not positive definite");
    if (1.0 / llt_t.rcond() > opt.cond_warning) out.ill_conditioned = true;
    const MatrixXcd tinv = llt_t.solve(MatrixXcd::Identity(M, M));
    CompensatedSum ms, inv;
    for (int m = 0; m < M; ++m) {
      const double e = std::real(tinv(m, m));
      if (!(e > 0.0 && e <= 1.0 + 1e-12)) throw NumericError("per-user mmse outside (0, 1]");
      ms.add(e);
      inv.add(1.0 / e);
    }
    rec.mmse_diag = ms.value() / M;
    rec.sinr_avg = inv.value() / M - 1.0;

    // trace form: (M-K)/M + (1/M) tr((I + nu K~)^{-1} B)
    MatrixXcd a = I + nu * ktil;
    Eigen::LLT<MatrixXcd> llt_a(a);
    if (llt_a.info() != Eigen::Success) throw NumericError("I + nu K~ is not positive definite");
    rec.mmse_avg = (static_cast<double>(M - K) + std::real(llt_a.solve(B).trace())) / M;
  }

  const double vals[] = {rec.capacity_direct, rec.capacity_split, rec.c1, rec.c2, rec.mmse_avg,
                         rec.mmse_diag, rec.sinr_avg, rec.trace_k, rec.trace_m};
  for (double v : vals)
    if (!std::isfinite(v)) throw NumericError("non-finite trial metric");
  return out;
}

}  // namespace

EnsembleResult run_ensemble(const SystemParams& p, const SecondHopModel& model, int trials,
                            std::uint64_t master_seed, const EnsembleOptions& opt) {
  p.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const auto ev = h2_eigenvalues(model, p.K, opt.h2.discretization);
  std::vector<TrialOutput> outs(trials);
  detail::parallel_for(static_cast<std::size_t>(trials), opt.workers, [&](std::size_t t) {
    try {
      outs[t] = run_trial(p, model, ev, t, master_seed, opt);
    } catch (const std::exception& e) {
      outs[t].rec.trial = t;
      outs[t].rec.seed = trial_seed(master_seed, t);
      outs[t].rec.ok = false;
      outs[t].rec.error = e.what();
    }
  });

  EnsembleResult r;
  r.params = p;
  r.model = model_name(model);
  r.master_seed = master_seed;
  r.trials = trials;
  bool warned = false;
  for (auto& o : outs) {
    if (!o.rec.ok) {
      std::ostringstream msg;
      msg << "trial " << o.rec.trial << " (seed " << o.rec.seed << "): " << o.rec.error;
      r.failures.push_back(msg.str());
    }
    if (o.ill_conditioned && !warned) {
      std::clog << "warning: condition number above " << opt.cond_warning << " in trial "
                << o.rec.trial << "\n";
      warned = true;
    }
    r.records.push_back(o.rec);
    r.eig_k.insert(r.eig_k.end(), o.eig_k.begin(), o.eig_k.end());
    r.eig_m.insert(r.eig_m.end(), o.eig_m.begin(), o.eig_m.end());
  }
  r.capacity = aggregate(r.records, &TrialRecord::capacity_direct);
  r.capacity_split = aggregate(r.records, &TrialRecord::capacity_split);
  r.mmse = aggregate(r.records, &TrialRecord::mmse_avg);
  r.sinr = aggregate(r.records, &TrialRecord::sinr_avg);
  r.trace_k = aggregate(r.records, &TrialRecord::trace_k);
  r.trace_m = aggregate(r.records, &TrialRecord::trace_m);
  {
    std::vector<TrialRecord> tmp = r.records;
    for (auto& t : tmp) t.sinr_avg = std::log1p(t.sinr_avg);
    r.cmmse = aggregate(tmp, &TrialRecord::sinr_avg);
  }
  if (opt.eigenvalues && !r.eig_k.empty()) {
    auto span_edges = [&](const std::vector<double>& v) {
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      const double hi = *mx > *mn ? *mx : *mn + 1.0;
      return linear_edges(*mn, hi, opt.histogram_bins);
    };
    r.hist_k = make_histogram(r.eig_k, opt.k_edges ? *opt.k_edges : span_edges(r.eig_k));
    r.hist_m = make_histogram(r.eig_m, opt.m_edges ? *opt.m_edges : span_edges(r.eig_m));
  }
  return r;
}

ConventionalMc conventional_mc(int K, double mu, double nu, int trials, std::uint64_t seed) {
  if (K < 1 || trials < 1 || mu < 0.0 || nu < 0.0) throw ConfigError("conventional_mc: invalid parameters");
  const double c = static_cast<double>(K) * K * nu * mu / (1.0 + K * nu);
  std::mt19937_64 rng(trial_seed(seed, 0));
  std::exponential_distribution<double> ex(1.0);
  CompensatedSum s, s2;
  for (int i = 0; i < trials; ++i) {
    const double v = std::log1p(c * ex(rng));
    s.add(v);
    s2.add(v * v);
  }
  ConventionalMc out;
  out.mean = s.value() / trials;
  if (trials > 1) {
    const double var = std::max(s2.value() / trials - out.mean * out.mean, 0.0) * trials / (trials - 1);
    out.stderr_mean = std::sqrt(var / trials);
  }
  return out;
}

void write_trials_csv(std::ostream& os, const EnsembleResult& r) {
  std::string out =
      "trial,seed,ok,capacity_direct,capacity_split,c1,c2,mmse_avg,mmse_diag,sinr_avg,trace_k,trace_m,error\n";
  for (const auto& t : r.records) {
    out += std::to_string(t.trial) + ',' + std::to_string(t.seed) + ',' + (t.ok ? "1" : "0");
    for (double v : {t.capacity_direct, t.capacity_split, t.c1, t.c2, t.mmse_avg, t.mmse_diag, t.sinr_avg,
                     t.trace_k, t.trace_m}) {
      out += ',';
      append_double(out, v);
    }
    out += ',';
    for (char ch : t.error) out += (ch == ',' || ch == '\n') ? ';' : ch;
    out += '\n';
  }
  os << out;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  std::string out = "lo,hi,count,density\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    append_double(out, h.edges[i]);
    out += ',';
    append_double(out, h.edges[i + 1]);
    out += ',' + std::to_string(h.counts[i]) + ',';
    append_double(out, h.density(i));
    out += '\n';
  }
  os << out;
}

}  // namespace afrelay
