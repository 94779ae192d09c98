#include "entsampler/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "entsampler/error.hpp"

namespace entsampler {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr int kBisectionCap = 200;

// Clamps roundoff-sized excursions, rejects anything larger.
double in_domain(double x, double lo, double hi, const char* what) {
  if (!(x >= lo - kDomainSlack && x <= hi + kDomainSlack)) {
    throw Error(ErrorCode::OutOfDomain, std::string(what) + " argument " + std::to_string(x) + " outside [" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return std::min(hi, std::max(lo, x));
}

void check_d(int d) {
  if (d < 2) throw Error(ErrorCode::OutOfDomain, "local dimension must be at least 2");
}

// Inverse of a nondecreasing function on [lo, hi] by bisection.
template <class F>
double bisect_inverse(F f, double lo, double hi, double y) {
  if (y <= f(lo)) return lo;
  if (y >= f(hi)) return hi;
  double a = lo, b = hi;
  for (int i = 0; i < kBisectionCap && b - a > 0.0; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (f(mid) < y) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return std::abs(f(a) - y) <= std::abs(f(b) - y) ? a : b;
}

double fd_max(int d) { return (d * d - 1.0) / (d * d); }
double cd_max(int d) { return (d - 1.0) / d; }

}  // namespace

double binary_entropy(double x) {
  x = in_domain(x, 0.0, 1.0, "binary entropy");
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double f_d(int d, double alpha) {
  check_d(d);
  alpha = in_domain(alpha, 0.0, fd_max(d), "f_d");
  return binary_entropy(alpha) + alpha * std::log2(d * d - 1.0) - std::log2(d);
}

double f_d_inv(int d, double x) {
  check_d(d);
  x = in_domain(x, -std::log2(d), std::log2(d), "f_d inverse");
  return bisect_inverse([d](double a) { return f_d(d, a); }, 0.0, fd_max(d), x);
}

double c_d(int d, double alpha) {
  check_d(d);
  alpha = in_domain(alpha, 0.0, cd_max(d), "c_d");
  const double lin = d == 2 ? 0.0 : alpha * std::log2(d - 1.0);
  return binary_entropy(alpha) + lin;
}

double c_d_inv(int d, double x) {
  check_d(d);
  x = in_domain(x, 0.0, std::log2(d), "c_d inverse");
  return bisect_inverse([d](double a) { return c_d(d, a); }, 0.0, cd_max(d), x);
}

double g(double alpha) {
  alpha = in_domain(alpha, 0.0, 0.5, "g");
  return binary_entropy(alpha) + alpha - 1.0;
}

double g_inv(double x) {
  x = in_domain(x, -1.0, 0.5, "g inverse");
  return bisect_inverse([](double a) { return g(a); }, 0.0, 0.5, x);
}

double rate_qq(int d, double h2) { return -std::log2(d - d * f_d_inv(d, h2)); }

double rate_cq(int d, double h2) { return -std::log2(1.0 - c_d_inv(d, h2)); }

double gamma_bb84(double h2) {
  h2 = in_domain(h2, -1.0, 1.0, "gamma");
  return h2 >= 0.5 ? h2 : g_inv(h2);
}

double gamma_mub_threshold(int d) {
  check_d(d);
  return (d - 1.0) / d * std::log2(d + 1.0);
}

double gamma_mub(int d, double h2) {
  check_d(d);
  h2 = in_domain(h2, -std::log2(d), std::log2(d), "gamma_d");
  if (h2 >= gamma_mub_threshold(d)) return h2;
  return f_d_inv(d, h2) * std::log2(d + 1.0);
}

double upper_rate_qq(int d, double h2) {
  const double arg = d - 2.0 * d * f_d_inv(d, h2);
  return arg > 0.0 ? -std::log2(arg) : std::numeric_limits<double>::infinity();
}

double upper_rate_cq(int d, double h2) {
  const double arg = 1.0 - 2.0 * c_d_inv(d, h2);
  return arg > 0.0 ? -std::log2(arg) : std::numeric_limits<double>::infinity();
}

namespace {

void check_nk(int n, int k) {
  if (n < 1 || k < 0 || k > n) throw Error(ErrorCode::OutOfDomain, "need n >= 1 and 0 <= k <= n");
}

void hypothesis_notes(BoundValue& b, int n, int k, int threshold, const char* name) {
  if (n <= threshold) {
    b.warnings.push_back(std::string("n <= ") + name + ": outside the theorem's hypothesis");
  }
  if (k == 0) b.warnings.push_back("k = 0: degenerate bound");
}

double log_poly(int n) { return std::log2(static_cast<double>(n) * n + 1.0); }

double smoothing_loss(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::OutOfDomain, "epsilon must lie in (0, 1]");
  return std::log2(2.0 / (epsilon * epsilon));
}

}  // namespace

BoundValue sampling_bound_qq(int n, int k, int d, double h2) {
  check_nk(n, k);
  BoundValue b;
  hypothesis_notes(b, n, k, d * d, "d^2");
  b.value = std::exp2(-k * rate_qq(d, h2) + log_poly(n));
  return b;
}

BoundValue sampling_bound_cq(int n, int k, int d, double h2) {
  check_nk(n, k);
  BoundValue b;
  hypothesis_notes(b, n, k, d, "d");
  b.value = std::exp2(-k * rate_cq(d, h2) + log_poly(n));
  return b;
}

BoundValue sampling_hmin_bound_qq(int n, int k, int d, double hmin, double epsilon) {
  check_nk(n, k);
  BoundValue b;
  hypothesis_notes(b, n, k, d * d, "d^2");
  b.value = k * rate_qq(d, hmin) - log_poly(n) - smoothing_loss(epsilon);
  return b;
}

BoundValue sampling_hmin_bound_cq(int n, int k, int d, double hmin, double epsilon) {
  check_nk(n, k);
  BoundValue b;
  hypothesis_notes(b, n, k, d, "d");
  b.value = k * rate_cq(d, hmin) - log_poly(n) - smoothing_loss(epsilon);
  return b;
}

BoundValue wse_lambda_nsm(double n, double eta) {
  if (!(n >= 1.0)) throw Error(ErrorCode::OutOfDomain, "n must be at least 1");
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::OutOfDomain, "eta must lie in (0, 1)");
  BoundValue b;
  double h = -1.0 + std::log2(1.0 / eta) / n;
  if (h > 1.0) {
    b.warnings.push_back("gamma argument " + std::to_string(h) + " clamped to 1");
    h = 1.0;
  }
  b.value = 0.5 * (gamma_bb84(h) - 1.0 / n);
  return b;
}

BoundValue wse_lambda_bqsm(double n, double q) {
  if (!(n >= 1.0)) throw Error(ErrorCode::OutOfDomain, "n must be at least 1");
  if (!(q >= 0.0 && q <= n)) throw Error(ErrorCode::OutOfDomain, "q must lie in [0, n]");
  BoundValue b;
  b.value = 0.5 * (gamma_bb84(-q / n) - 1.0 / n);
  return b;
}

BoundValue rac_quantum_bound(int n, int m, int k, int d) {
  check_nk(n, k);
  if (m < 0 || m > n) throw Error(ErrorCode::OutOfDomain, "need 0 <= m <= n");
  BoundValue b;
  if (n <= d * d) b.warnings.push_back("n <= d^2: outside the theorem's hypothesis");
  const double h = -(static_cast<double>(m) / n) * std::log2(d);
  const double expo = -0.5 * k * (rate_qq(d, h) + std::log2(d)) + 0.5 * log_poly(n);
  b.value = std::min(1.0, std::exp2(expo));
  if (std::exp2(expo) > 1.0) b.warnings.push_back("clipped to 1");
  return b;
}

BoundValue rac_classical_bound(int n, int m, int k) {
  check_nk(n, k);
  if (m < 0 || m > n) throw Error(ErrorCode::OutOfDomain, "need 0 <= m <= n");
  BoundValue b;
  if (n <= 2) b.warnings.push_back("n <= d: outside the theorem's hypothesis");
  const double expo = -k * rate_cq(2, 1.0 - static_cast<double>(m) / n) + log_poly(n);
  const double raw = std::sqrt(std::exp2(expo));
  b.value = std::min(1.0, raw);
  if (raw > 1.0) b.warnings.push_back("clipped to 1");
  return b;
}

CurveFunction parse_curve_function(const std::string& id) {
  if (id == "R") return CurveFunction::R;
  if (id == "C") return CurveFunction::C;
  if (id == "gamma") return CurveFunction::Gamma;
  if (id == "gamma_d") return CurveFunction::GammaD;
  if (id == "upper_qq") return CurveFunction::UpperQQ;
  if (id == "upper_cq") return CurveFunction::UpperCQ;
  throw Error(ErrorCode::InvalidArgument, "unknown curve function '" + id + "'");
}

std::string curve_function_id(CurveFunction f) {
  switch (f) {
    case CurveFunction::R: return "R";
    case CurveFunction::C: return "C";
    case CurveFunction::Gamma: return "gamma";
    case CurveFunction::GammaD: return "gamma_d";
    case CurveFunction::UpperQQ: return "upper_qq";
    case CurveFunction::UpperCQ: return "upper_cq";
  }
  return "";
}

Domain curve_domain(CurveFunction f, int d) {
  check_d(d);
  const double ld = std::log2(d);
  switch (f) {
    case CurveFunction::R:
    case CurveFunction::GammaD:
    case CurveFunction::UpperQQ:
      return {-ld, ld};
    case CurveFunction::C:
    case CurveFunction::UpperCQ:
      return {0.0, ld};
    case CurveFunction::Gamma:
      return {-1.0, 1.0};
  }
  return {};
}

double evaluate_curve(CurveFunction f, int d, double x) {
  switch (f) {
    case CurveFunction::R: return rate_qq(d, x);
    case CurveFunction::C: return rate_cq(d, x);
    case CurveFunction::Gamma: return gamma_bb84(x);
    case CurveFunction::GammaD: return gamma_mub(d, x);
    case CurveFunction::UpperQQ: return upper_rate_qq(d, x);
    case CurveFunction::UpperCQ: return upper_rate_cq(d, x);
  }
  return 0.0;
}

RateCurve sample_curve(CurveFunction f, int d, int points) {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "a curve needs at least 2 grid points");
  const Domain dom = curve_domain(f, d);
  RateCurve c{f, d, {}, {}, true};
  for (int i = 0; i < points; ++i) {
    double x = dom.lo + (dom.hi - dom.lo) * i / (points - 1);
    if (i == points - 1) x = dom.hi;
    c.x.push_back(x);
    c.y.push_back(evaluate_curve(f, d, x));
    if (i > 0 && c.y[i] < c.y[i - 1]) c.monotone = false;
  }
  return c;
}

std::string format_csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

void write_curve_csv(std::ostream& out, const RateCurve& curve) {
  out << "x,y,function,d\n";
  const std::string id = curve_function_id(curve.function);
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    out << format_csv_number(curve.x[i]) << ',' << format_csv_number(curve.y[i]) << ',' << id << ','
        << curve.d << '\n';
  }
}

}  // namespace entsampler
