#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entsampler {

double binary_entropy(double x);

// f_d(α) = h(α) + α log(d²−1) − log d on [0, (d²−1)/d²].
double f_d(int d, double alpha);
double f_d_inv(int d, double x);
// c_d(α) = h(α) + α log(d−1) on [0, (d−1)/d].
double c_d(int d, double alpha);
double c_d_inv(int d, double x);
// g(α) = h(α) + α − 1 on [0, 1/2].
double g(double alpha);
double g_inv(double x);

double rate_qq(int d, double h2);
double rate_cq(int d, double h2);

double gamma_bb84(double h2);
// Branch point ((d−1)/d)·log(d+1), below which γ_d = f_d⁻¹(h2)·log(d+1).
double gamma_mub_threshold(int d);
double gamma_mub(int d, double h2);

// +∞ when the logarithm's argument is not positive.
double upper_rate_qq(int d, double h2);
double upper_rate_cq(int d, double h2);

// A value plus notes on violated hypotheses or clamped inputs.
struct BoundValue {
  double value = 0.0;
  std::vector<std::string> warnings;
};

// Collision-mass bound 2^{−kR_d(h2) + log(n²+1)}.
BoundValue sampling_bound_qq(int n, int k, int d, double h2);
BoundValue sampling_bound_cq(int n, int k, int d, double h2);
// Smooth min-entropy lower bound kR_d(hmin) − log(n²+1) − log(2/ε²), in bits.
BoundValue sampling_hmin_bound_qq(int n, int k, int d, double hmin, double epsilon);
BoundValue sampling_hmin_bound_cq(int n, int k, int d, double hmin, double epsilon);

BoundValue wse_lambda_nsm(double n, double eta);
BoundValue wse_lambda_bqsm(double n, double q);

// Bound on F² for quantum random access codes, clipped to 1.
BoundValue rac_quantum_bound(int n, int m, int k, int d);
// Bound on the success probability of classical random access codes, clipped to 1.
BoundValue rac_classical_bound(int n, int m, int k);

enum class CurveFunction { R, C, Gamma, GammaD, UpperQQ, UpperCQ };

CurveFunction parse_curve_function(const std::string& id);
std::string curve_function_id(CurveFunction f);

struct Domain {
  double lo = 0.0;
  double hi = 0.0;
};

Domain curve_domain(CurveFunction f, int d);
double evaluate_curve(CurveFunction f, int d, double x);

struct RateCurve {
  CurveFunction function = CurveFunction::R;
  int d = 2;
  std::vector<double> x;
  std::vector<double> y;
  bool monotone = true;
};

// N points spanning the domain, endpoints exactly at its boundaries.
RateCurve sample_curve(CurveFunction f, int d, int points);

// Header x,y,function,d; 12 significant digits; +∞ written as inf.
void write_curve_csv(std::ostream& out, const RateCurve& curve);
std::string format_csv_number(double v);

}  // namespace entsampler
