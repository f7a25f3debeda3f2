#include "ctnet/stats.hpp"

#include <cmath>
#include <limits>

#include "ctnet/errors.hpp"

namespace ctnet {

namespace {

// Continued fraction for I_x(a,b), evaluated by the modified Lentz method.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    f *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) return f;
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInputError("incomplete beta: a, b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInputError("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw InvalidInputError("t test: degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

double t_test_zero_mean(const Eigen::VectorXd& samples, double* t_out) {
  const Eigen::Index n = samples.size();
  if (n < 2) throw InvalidInputError("t test: need at least two samples");
  const double mean = samples.mean();
  const double ss = (samples.array() - mean).square().sum();
  const double var = ss / static_cast<double>(n - 1);
  double t;
  if (var == 0.0) {
    t = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    t = mean / std::sqrt(var / static_cast<double>(n));
  }
  if (t_out) *t_out = t;
  return student_t_two_sided_p(t, static_cast<double>(n - 1));
}

}  // namespace ctnet
