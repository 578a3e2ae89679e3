#pragma once

namespace fse {

// Shape parameters of a beta distribution; both must be positive.
struct BetaParams {
  double a;
  double b;
};

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
double log_beta(const BetaParams& p);
double log_beta(double a, double b);

// Regularized incomplete beta function I(x; a, b) evaluated by the standard
// continued-fraction expansion (modified Lentz) with the symmetry switch at
// x = (a+1)/(a+b+2). Converges to ~1e-14 over the parameter range used here
// (a down to 1/2, b up to several hundred).
double reg_inc_beta(double x, const BetaParams& p);
double reg_inc_beta(double x, double a, double b);

// dI/dx = x^(a-1) (1-x)^(b-1) / B(a, b). Throws at x in {0,1} when the
// corresponding shape parameter is < 1 (the density is singular there).
double reg_inc_beta_dx(double x, const BetaParams& p);
double reg_inc_beta_dx(double x, double a, double b);

// CDF of the F distribution with (d1, d2) degrees of freedom:
//   Pr(S < s) = I( d1 s / (d1 s + d2); d1/2, d2/2 ).
double f_cdf(double s, int d1, double d2);

}  // namespace fse
