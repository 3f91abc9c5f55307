#include "afrelay/reporting.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <numbers>
#include <sstream>

#include "afrelay/composite_spectrum.hpp"
#include "afrelay/errors.hpp"
#include "afrelay/montecarlo.hpp"
#include "parallel.hpp"

#ifndef AFRELAY_VERSION
#define AFRELAY_VERSION "0.0.0"
#endif

namespace afrelay {

namespace fs = std::filesystem;
using nlohmann::json;

const char* tool_version() { return AFRELAY_VERSION; }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------- config

namespace {

const std::vector<std::string> kModels = {"tsl", "uniform", "rank", "identity"};
const std::vector<std::string> kAxes = {"zeta2_db", "alpha", "nu_db", "mu_db"};
const std::vector<std::string> kCommands = {"aepdf", "sweep", "compare", "validate"};

bool one_of(const std::string& s, const std::vector<std::string>& set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

}  // namespace

SystemParams Config::system() const {
  SystemParams p;
  p.K = K;
  p.M = resolved_M();
  p.mu = db_to_linear(mu_db);
  p.nu = db_to_linear(nu_db);
  return p;
}

Zeta2DbScale Config::scale() const {
  return zeta2_scale == "amplitude" ? Zeta2DbScale::kAmplitude : Zeta2DbScale::kPower;
}

SecondHopModel Config::second_hop() const {
  const double zeta = zeta_from_db(zeta2_db, scale());
  if (model == "tsl") return TslParams{zeta};
  if (model == "uniform") return UniformSpreadParams{zeta};
  if (model == "rank") return RankParams{alpha};
  if (model == "identity") return IdentityModel{};
  throw ConfigError("unknown model '" + model + "'");
}

void Config::validate() const {
  if (!command.empty() && !one_of(command, kCommands)) throw ConfigError("unknown command '" + command + "'");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (M < 0) throw ConfigError("M must be >= 0 (0 means M = K)");
  for (double v : {mu_db, nu_db, zeta2_db})
    if (!std::isfinite(v)) throw ConfigError("dB values must be finite");
  if (zeta2_db < 0.0) throw ConfigError("zeta2_db must be >= 0 (condition number >= 1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!one_of(model, kModels)) throw ConfigError("model must be one of tsl|uniform|rank|identity");
  if (trials < -1) throw ConfigError("trials must be >= 0");
  if (!one_of(axis, kAxes)) throw ConfigError("axis must be one of zeta2_db|alpha|nu_db|mu_db");
  if (step && !(*step > 0.0)) throw ConfigError("step must be > 0");
  if (start && stop && *stop < *start) throw ConfigError("stop must be >= start");
  if (zeta2_scale != "power" && zeta2_scale != "amplitude")
    throw ConfigError("zeta2_scale must be power or amplitude");
  if (bins < 1) throw ConfigError("bins must be >= 1");
}

json to_json(const Config& c) {
  json j;
  j["command"] = c.command;
  j["K"] = c.K;
  j["M"] = c.M;
  j["mu_db"] = c.mu_db;
  j["nu_db"] = c.nu_db;
  j["zeta2_db"] = c.zeta2_db;
  j["alpha"] = c.alpha;
  j["model"] = c.model;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["bits"] = c.bits;
  j["quick"] = c.quick;
  j["as_printed_transforms"] = c.as_printed_transforms;
  j["axis"] = c.axis;
  j["start"] = c.start ? json(*c.start) : json(nullptr);
  j["stop"] = c.stop ? json(*c.stop) : json(nullptr);
  j["step"] = c.step ? json(*c.step) : json(nullptr);
  j["zeta2_scale"] = c.zeta2_scale;
  j["bins"] = c.bins;
  j["workers"] = c.workers;
  return j;
}

void merge_json(Config& c, const json& in) {
  if (!in.is_object()) throw ConfigError("config must be a JSON object");
  const json& j = (in.contains("config") && in["config"].is_object()) ? in["config"] : in;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") c.command = v.get<std::string>();
      else if (key == "K") c.K = v.get<int>();
      else if (key == "M") c.M = v.get<int>();
      else if (key == "mu_db") c.mu_db = v.get<double>();
      else if (key == "nu_db") c.nu_db = v.get<double>();
      else if (key == "zeta2_db") c.zeta2_db = v.get<double>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "trials") c.trials = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "bits") c.bits = v.get<bool>();
      else if (key == "quick") c.quick = v.get<bool>();
      else if (key == "as_printed_transforms") c.as_printed_transforms = v.get<bool>();
      else if (key == "axis") c.axis = v.get<std::string>();
      else if (key == "start") c.start = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "stop") c.stop = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "step") c.step = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "zeta2_scale") c.zeta2_scale = v.get<std::string>();
      else if (key == "bins") c.bins = v.get<int>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Config load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  Config c;
  merge_json(c, j);
  return c;
}

// ---------------------------------------------------------------- manifest

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("sha256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

json to_json(const RunManifest& m) {
  json j;
  j["tool"] = m.tool;
  j["version"] = m.version;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["started_utc"] = m.started_utc;
  j["wall_clock_s"] = m.wall_clock_s;
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"file", o.name}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["outputs"] = outs;
  j["summary"] = m.summary;
  return j;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects outputs of one command run and writes the manifest last.
class Run {
 public:
  Run(const Config& resolved, std::string command) : dir_(resolved.out_dir) {
    m_.version = tool_version();
    m_.command = std::move(command);
    m_.config = to_json(resolved);
    m_.config["command"] = m_.command;
    m_.seed = resolved.seed;
    m_.started_utc = utc_now();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw ConfigError("cannot write " + p.string());
    m_.outputs.push_back({name, sha256_hex(content), content.size()});
  }

  json& summary() { return m_.summary; }

  RunManifest finish() {
    m_.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::ofstream out(dir_ / (m_.command + ".manifest.json"));
    out << to_json(m_).dump(2) << '\n';
    if (!out) throw ConfigError("cannot write manifest in " + dir_.string());
    return m_;
  }

 private:
  fs::path dir_;
  RunManifest m_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string clean(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

constexpr double kLn2 = std::numbers::ln2;

}  // namespace

// ---------------------------------------------------------------- aepdf

namespace {

// Analytic mass per bin for a law given by a c.d.f. plus atoms.
std::vector<double> bin_masses(const std::vector<double>& edges, const std::function<double(double)>& cdf) {
  std::vector<double> out(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) out[i] = cdf(edges[i + 1]) - cdf(edges[i]);
  return out;
}

void add_atoms(std::vector<double>& masses, const std::vector<double>& edges, const std::vector<Atom>& atoms) {
  for (const auto& a : atoms) {
    auto it = std::upper_bound(edges.begin(), edges.end(), a.location);
    std::size_t i = it == edges.begin() ? 0 : std::size_t(it - edges.begin()) - 1;
    if (i >= masses.size()) i = masses.size() - 1;
    masses[i] += a.weight;
  }
}

struct LawPanel {
  std::vector<double> edges;
  std::vector<double> analytic;  // masses
  std::optional<Histogram> hist;
  double l1 = 0.0;
};

std::string panel_csv(const LawPanel& p) {
  std::string out = p.hist ? "x,f_analytic,f_empirical,bin_lo,bin_hi\n" : "x,f_analytic,bin_lo,bin_hi\n";
  for (std::size_t i = 0; i < p.analytic.size(); ++i) {
    const double lo = p.edges[i], hi = p.edges[i + 1], w = hi - lo;
    out += fmt(0.5 * (lo + hi)) + ',' + fmt(p.analytic[i] / w);
    if (p.hist) out += ',' + fmt(p.hist->density(i));
    out += ',' + fmt(lo) + ',' + fmt(hi) + '\n';
  }
  return out;
}

double l1_distance(const std::vector<double>& analytic, const Histogram& h) {
  double s = 0.0, covered = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    s += std::abs(analytic[i] - h.mass(i));
    covered += analytic[i];
  }
  const double outside = h.total ? double(h.below + h.above) / double(h.total) : 0.0;
  return s + outside + std::max(1.0 - covered, 0.0);
}

}  // namespace

CommandResult cmd_aepdf(const Config& in) {
  Config c = in;
  if (c.trials < 0) c.trials = 2000;
  c.validate();
  const SystemParams p = c.system();
  p.validate();
  const SecondHopModel model = c.second_hop();
  if (std::holds_alternative<UniformSpreadParams>(model))
    throw ConfigError("aepdf: no composed law is available for the uniform model");

  const double beta = p.beta(), mu_bar = p.mu_bar();
  DensityGridSpec spec;
  spec.workers = c.workers;

  // analytic K law
  std::function<double(double)> k_cdf;
  std::vector<Atom> k_atoms;
  Interval k_support;
  std::optional<DensityCurve> k_curve;
  if (const auto* r = std::get_if<RankParams>(&model)) {
    const double a = r->alpha;
    k_atoms = rank_k_atoms(a, beta, mu_bar);
    // continuous part sits on the support of a scaled shifted MP law
    const double b = beta / a, s = a * mu_bar;
    const double lo = (1.0 + s * std::pow(1.0 - std::sqrt(b), 2)) / a;
    const double hi = (1.0 + s * std::pow(1.0 + std::sqrt(b), 2)) / a;
    k_support = {lo, hi};
    k_cdf = [=](double x) {
      const double xl = std::clamp(x, lo, hi);
      if (!(xl > lo)) return 0.0;
      return integrate([&](double t) { return rank_k_density(t, a, beta, mu_bar); }, lo, xl, 1e-10);
    };
  } else {
    const double zeta = std::holds_alternative<TslParams>(model) ? std::get<TslParams>(model).zeta : 1.0;
    k_curve = k_density({beta, mu_bar, zeta}, spec);
    k_atoms = k_curve->atoms;
    k_support = k_curve->support;
    auto qt = std::make_shared<QuantileTable>(quantile_table_from(*k_curve));
    const double cont = 1.0 - std::accumulate(k_atoms.begin(), k_atoms.end(), 0.0,
                                              [](double s, const Atom& a) { return s + a.weight; });
    k_cdf = [qt, cont](double x) { return cont * qt->cdf(x); };
  }

  // analytic M law
  const FirstHopShiftedParams mp{beta, mu_bar};
  std::vector<Atom> m_atoms;
  if (auto a = m_atom(mp)) m_atoms.push_back(*a);
  const double m_lo = m_support_lo(mp), m_hi = m_support_hi(mp);
  std::function<double(double)> m_cdf;
  if (mu_bar == 0.0) {
    m_cdf = [](double) { return 0.0; };
  } else if (beta == 1.0) {
    m_cdf = [mu_bar](double x) { return m_cdf_beta1(x, mu_bar); };
  } else {
    m_cdf = [=](double x) {
      const double xl = std::clamp(x, m_lo, m_hi);
      if (xl <= m_lo) return 0.0;
      return integrate([&](double t) { return m_density(t, mp); }, m_lo, xl, 1e-10);
    };
  }

  std::optional<EnsembleResult> ens;
  if (c.trials > 0) {
    EnsembleOptions opt;
    opt.workers = c.workers;
    opt.metrics = false;
    opt.eigenvalues = true;
    ens = run_ensemble(p, model, c.trials, c.seed, opt);
    if (!ens->failures.empty()) throw NumericError("aepdf: " + ens->failures.front());
  }

  auto make_panel = [&](Interval support, const std::vector<double>* samples,
                        const std::function<double(double)>& cdf, const std::vector<Atom>& atoms) {
    double lo = support.lo, hi = support.hi;
    for (const auto& a : atoms) {
      lo = std::min(lo, a.location);
      hi = std::max(hi, a.location);
    }
    if (samples && !samples->empty()) {
      const auto [mn, mx] = std::minmax_element(samples->begin(), samples->end());
      lo = std::min(lo, *mn);
      hi = std::max(hi, *mx);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    // keep the top edge closed for the largest sample
    hi = std::nextafter(hi, INFINITY);
    LawPanel panel;
    panel.edges = linear_edges(lo, hi, c.bins);
    panel.analytic = bin_masses(panel.edges, cdf);
    add_atoms(panel.analytic, panel.edges, atoms);
    if (samples) {
      panel.hist = make_histogram(*samples, panel.edges);
      panel.l1 = l1_distance(panel.analytic, *panel.hist);
    }
    return panel;
  };

  const LawPanel pk = make_panel(k_support, ens ? &ens->eig_k : nullptr, k_cdf, k_atoms);
  const LawPanel pm = make_panel({m_lo, m_hi}, ens ? &ens->eig_m : nullptr, m_cdf, m_atoms);

  Run run(c, "aepdf");
  run.write("aepdf_K.csv", panel_csv(pk));
  run.write("aepdf_M.csv", panel_csv(pm));
  if (k_curve) {
    std::ostringstream os;
    write_csv(os, *k_curve);
    run.write("aepdf_K_curve.csv", os.str());
  }
  auto& s = run.summary();
  s["model"] = model_name(model);
  s["trials"] = c.trials;
  s["bins"] = c.bins;
  if (ens) {
    s["l1_K"] = pk.l1;
    s["l1_M"] = pm.l1;
  }
  return {kExitOk, run.finish()};
}

// ---------------------------------------------------------------- sweep

namespace {

struct SweepRange {
  double start, stop, step;
};

SweepRange default_range(const std::string& axis) {
  if (axis == "zeta2_db") return {0.0, 120.0, 10.0};
  if (axis == "alpha") return {0.1, 1.0, 0.1};
  if (axis == "nu_db") return {-10.0, 60.0, 5.0};
  return {-10.0, 40.0, 5.0};  // mu_db
}

std::vector<double> axis_values(double start, double stop, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  if (n > 100000) throw ConfigError("sweep range has too many points");
  for (long i = 0; i <= n; ++i) v.push_back(start + i * step);
  return v;
}

void set_axis(Config& c, const std::string& axis, double v) {
  if (axis == "zeta2_db") c.zeta2_db = v;
  else if (axis == "alpha") c.alpha = v;
  else if (axis == "nu_db") c.nu_db = v;
  else c.mu_db = v;
}

struct SweepPoint {
  double x = 0.0;
  std::optional<CapacityBreakdown> cap;
  std::optional<double> c_rank, mmse, cmmse;
  double c_co = 0.0;
  std::optional<Aggregate> mc_c, mc_mmse, mc_cmmse;
  std::vector<std::string> errors;
};

std::string opt_cell(const std::optional<double>& v, double scale = 1.0) {
  return v ? fmt(*v * scale) : std::string();
}

}  // namespace

CommandResult cmd_sweep(const Config& in) {
  Config c = in;
  if (c.trials < 0) c.trials = 200;
  if (c.axis == "alpha") c.model = "rank";
  const SweepRange dr = default_range(c.axis);
  if (!c.start) c.start = dr.start;
  if (!c.stop) c.stop = dr.stop;
  if (!c.step) c.step = dr.step;
  c.validate();
  c.system().validate();
  if (c.axis == "zeta2_db" && *c.start < 0.0) throw ConfigError("zeta2_db sweep must start at >= 0");
  if (c.axis == "alpha" && !(*c.start > 0.0 && *c.stop <= 1.0)) throw ConfigError("alpha sweep must lie in (0, 1]");

  const std::vector<double> xs = axis_values(*c.start, *c.stop, *c.step);
  std::vector<SweepPoint> pts(xs.size());
  const unsigned workers = detail::resolve_workers(c.workers);

  // analytic columns, one point per work item
  detail::parallel_for(xs.size(), workers, [&](std::size_t i) {
    SweepPoint& pt = pts[i];
    pt.x = xs[i];
    Config ci = c;
    set_axis(ci, c.axis, xs[i]);
    const SystemParams p = ci.system();
    try {
      p.validate();
      pt.c_co = conventional_per_antenna(p.K, p.mu, p.nu);
    } catch (const std::exception& e) {
      pt.errors.push_back(e.what());
      return;
    }
    const SecondHopModel model = ci.second_hop();
    try {
      pt.cap = capacity(p, model);
    } catch (const std::exception& e) {
      pt.errors.push_back(e.what());
    }
    try {
      pt.c_rank = capacity_rank(ci.alpha, p).c;
    } catch (const std::exception& e) {
      pt.errors.push_back(e.what());
    }
    std::optional<double> zeta;
    if (const auto* t = std::get_if<TslParams>(&model)) zeta = t->zeta;
    if (std::holds_alternative<IdentityModel>(model)) zeta = 1.0;
    if (zeta && p.K == p.M) {
      try {
        DensityGridSpec spec;
        spec.workers = 1;
        const MmseReport m = mmse_bound(p, *zeta, MmseOrdering::kLower, spec);
        pt.mmse = m.mmse_bound;
        pt.cmmse = m.cmmse_bound;
      } catch (const std::exception& e) {
        pt.errors.push_back(e.what());
      }
    }
  });

  // Monte Carlo columns, parallel inside each ensemble
  if (c.trials > 0) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Config ci = c;
      set_axis(ci, c.axis, xs[i]);
      try {
        EnsembleOptions opt;
        opt.workers = c.workers;
        opt.eigenvalues = false;
        const EnsembleResult r = run_ensemble(ci.system(), ci.second_hop(), c.trials, trial_seed(c.seed, i), opt);
        pts[i].mc_c = r.capacity;
        pts[i].mc_mmse = r.mmse;
        pts[i].mc_cmmse = r.cmmse;
        for (const auto& f : r.failures) pts[i].errors.push_back(f);
      } catch (const std::exception& e) {
        pts[i].errors.push_back(e.what());
      }
    }
  }

  const double rs = c.bits ? 1.0 / kLn2 : 1.0;
  std::string out = c.axis + ",C1,C2,C,C_rank,mmse_bound,cmmse_bound,C_co";
  if (c.trials > 0) out += ",mc_C,mc_C_stderr,mc_mmse,mc_mmse_stderr,mc_cmmse,mc_cmmse_stderr";
  out += ",errors\n";
  int failed_points = 0;
  for (const auto& pt : pts) {
    out += fmt(pt.x);
    out += ',' + (pt.cap ? fmt(pt.cap->c1 * rs) : "");
    out += ',' + (pt.cap ? fmt(pt.cap->c2 * rs) : "");
    out += ',' + (pt.cap ? fmt(pt.cap->c * rs) : "");
    out += ',' + opt_cell(pt.c_rank, rs);
    out += ',' + opt_cell(pt.mmse);
    out += ',' + opt_cell(pt.cmmse, rs);
    out += ',' + fmt(pt.c_co * rs);
    if (c.trials > 0) {
      auto agg = [&](const std::optional<Aggregate>& a, double s) {
        return a ? ',' + fmt(a->mean * s) + ',' + fmt(a->stderr_mean * s) : std::string(",,");
      };
      out += agg(pt.mc_c, rs) + agg(pt.mc_mmse, 1.0) + agg(pt.mc_cmmse, rs);
    }
    std::string err;
    for (const auto& e : pt.errors) err += (err.empty() ? "" : " | ") + e;
    out += ',' + clean(err) + '\n';
    if (!pt.errors.empty()) ++failed_points;
  }

  Run run(c, "sweep");
  run.write("sweep.csv", out);
  auto& s = run.summary();
  s["axis"] = c.axis;
  s["points"] = xs.size();
  s["points_with_errors"] = failed_points;
  s["trials"] = c.trials;
  s["rate_unit"] = c.bits ? "bits" : "nats";
  return {kExitOk, run.finish()};
}

// ---------------------------------------------------------------- compare

CommandResult cmd_compare(const Config& in) {
  Config c = in;
  if (c.trials < 0) c.trials = 0;
  if (!c.start) c.start = 0.0;
  if (!c.stop) c.stop = 220.0;
  if (!c.step) c.step = 10.0;
  c.axis = "zeta2_db";
  c.model = "tsl";
  c.validate();
  const SystemParams p = c.system();
  p.validate();
  if (p.K != p.M) throw ConfigError("compare requires K = M");

  CrossingSpec spec;
  spec.system = p;
  spec.start_db = *c.start;
  spec.stop_db = *c.stop;
  spec.step_db = *c.step;
  spec.scale = c.scale();
  spec.workers = c.workers;
  const CrossingReport r = crossing_finder(spec);

  std::optional<ConventionalMc> co_mc;
  if (c.trials > 0) co_mc = conventional_mc(p.K, p.mu, p.nu, c.trials, c.seed);

  const double rs = c.bits ? 1.0 / kLn2 : 1.0;
  // power dB = amplitude dB / 2
  const double to_power = c.scale() == Zeta2DbScale::kPower ? 1.0 : 0.5;
  std::string out = "zeta2_db_power,zeta2_db_amplitude,zeta,C,cmmse_bound,C_co,gain_C,gain_cmmse\n";
  for (std::size_t i = 0; i < r.db.size(); ++i) {
    const double pdb = r.db[i] * to_power;
    out += csv_row({fmt(pdb), fmt(2.0 * pdb), fmt(zeta_from_db(r.db[i], c.scale())), fmt(r.capacity[i] * rs),
                    fmt(r.cmmse[i] * rs), fmt(r.conventional * rs), fmt(r.capacity[i] / r.conventional),
                    fmt(r.cmmse[i] / r.conventional)});
  }
  std::string cx = "kind,found,zeta2_db_power,zeta2_db_amplitude\n";
  json sj = json::object();
  auto emit = [&](const char* kind, const CrossingPoint& cp) {
    const double pdb = cp.db * to_power;
    cx += csv_row({kind, cp.found ? "1" : "0", cp.found ? fmt(pdb) : "", cp.found ? fmt(2.0 * pdb) : ""});
    sj[kind] = cp.found ? json{{"found", true}, {"zeta2_db_power", pdb}, {"zeta2_db_amplitude", 2.0 * pdb}}
                        : json{{"found", false}};
  };
  emit("capacity_crossing", r.capacity_crossing);
  emit("mmse_crossing", r.mmse_crossing);
  emit("capacity_2x_boundary", r.capacity_gain_boundary);
  emit("mmse_2x_boundary", r.mmse_gain_boundary);

  Run run(c, "compare");
  run.write("compare.csv", out);
  run.write("crossings.csv", cx);
  auto& s = run.summary();
  s["crossings"] = sj;
  s["conventional_per_antenna"] = r.conventional * rs;
  s["conventional_total"] = r.conventional * p.K * rs;
  if (co_mc) s["conventional_mc_total"] = {{"mean", co_mc->mean * rs}, {"stderr", co_mc->stderr_mean * rs}};
  s["rate_unit"] = c.bits ? "bits" : "nats";
  return {kExitOk, run.finish()};
}

// ---------------------------------------------------------------- validate

CommandResult cmd_validate(const Config& in) {
  Config c = in;
  if (c.trials < 0) c.trials = 0;
  c.validate();
  ValidationOptions opt;
  opt.quick = c.quick;
  opt.as_printed_transforms = c.as_printed_transforms;
  opt.seed = c.seed;
  opt.workers = c.workers;
  const ValidationReport rep = run_validation(opt);
  Run run(c, "validate");
  run.write("validation.json", to_json(rep).dump(2) + "\n");
  auto& s = run.summary();
  s["checks"] = rep.checks.size();
  s["failed"] = rep.failed();
  return {rep.all_passed() ? kExitOk : kExitValidation, run.finish()};
}

// ---------------------------------------------------------------- dispatch

int run_command(const Config& c, std::ostream& log) {
  try {
    CommandResult r;
    if (c.command == "aepdf") r = cmd_aepdf(c);
    else if (c.command == "sweep") r = cmd_sweep(c);
    else if (c.command == "compare") r = cmd_compare(c);
    else if (c.command == "validate") r = cmd_validate(c);
    else throw ConfigError("unknown command '" + c.command + "'");
    for (const auto& o : r.manifest.outputs) log << "wrote " << (fs::path(c.out_dir) / o.name).string() << '\n';
    log << "summary " << r.manifest.summary.dump() << '\n';
    if (r.exit_code == kExitValidation) log << "validation failed\n";
    return r.exit_code;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::domain_error& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace afrelay
