#pragma once

#include <optional>
#include <variant>

#include "afrelay/numeric.hpp"

namespace afrelay {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

// Which closed form of the tilted semicircular eta/S/R family to evaluate.
// kAsPrinted keeps the (zeta^2-1)^2 denominator of the original printed
// formulas (equal to the corrected value divided by (zeta+1)^2) and exists to
// demonstrate that it violates eta(0) = 1 and R(0) = 1.
enum class TransformForm { kCorrected, kAsPrinted };

// ---------------------------------------------------------------- Marcenko-Pastur

struct MpParams {
  double beta = 1.0;
};

double mp_support_lo(MpParams p);
double mp_support_hi(MpParams p);
double mp_density(double x, MpParams p);        // continuous part only
double mp_atom_weight(MpParams p);              // (1-beta)^+ at x = 0
double mp_cdf_beta1(double x);
double mp_eta(double x, MpParams p);
double mp_sigma(double x, MpParams p);
double mp_shannon(double x, MpParams p);

// ---------------------------------------------------------------- M = I + mu W

struct FirstHopShiftedParams {
  double beta = 1.0;
  double mu_bar = 0.0;
};

double m_support_lo(FirstHopShiftedParams p);
double m_support_hi(FirstHopShiftedParams p);
double m_density(double x, FirstHopShiftedParams p);
std::optional<Atom> m_atom(FirstHopShiftedParams p);
double m_cdf_beta1(double x, double mu_bar);
double m_eta(double gamma, FirstHopShiftedParams p);
double m_inv_eta(double h, FirstHopShiftedParams p);
// Same inverse written in d = 1 - h, which keeps precision when h -> 1.
double m_inv_eta_d(double d, FirstHopShiftedParams p);

// ---------------------------------------------------------------- tilted semicircle

struct TslParams {
  double zeta = 1.0;
};

std::optional<Atom> tsl_atom(TslParams p);      // set only for zeta == 1
double tsl_density(double x, TslParams p);
double tsl_cdf(double x, TslParams p);
double tsl_partial_mean(double x, TslParams p);  // int_{1/zeta}^x t f(t) dt
double tsl_quantile(double u, TslParams p);
double tsl_eta(double x, TslParams p, TransformForm form = TransformForm::kCorrected);
cplx tsl_stieltjes(cplx z, TslParams p, TransformForm form = TransformForm::kCorrected);
double tsl_r(double x, TslParams p, TransformForm form = TransformForm::kCorrected);
double tsl_sigma(double x, TslParams p);
double tsl_shannon(double x, TslParams p);
double tsl_second_moment(TslParams p);

// ---------------------------------------------------------------- uniform spread

struct UniformSpreadParams {
  double zeta = 2.0;
};

struct UniformTransforms {
  double density = 0.0;
  double eta = 1.0;
  cplx stieltjes{};
};

double uniform_density(double x, UniformSpreadParams p);
double uniform_cdf(double x, UniformSpreadParams p);
double uniform_quantile(double u, UniformSpreadParams p);
double uniform_partial_mean(double x, UniformSpreadParams p);
double uniform_eta(double x, UniformSpreadParams p);
cplx uniform_stieltjes(cplx z, UniformSpreadParams p);
double uniform_mean(UniformSpreadParams p);
UniformTransforms uniform_transforms(double x, UniformSpreadParams p);

// ---------------------------------------------------------------- rank deficient

struct RankParams {
  double alpha = 1.0;
};

// ---------------------------------------------------------------- second hop model

struct IdentityModel {};
using SecondHopModel = std::variant<TslParams, UniformSpreadParams, RankParams, IdentityModel>;

const char* model_name(const SecondHopModel& m);

}  // namespace afrelay
