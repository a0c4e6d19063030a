#pragma once

namespace gtsel {

// N(mu, sigma2) truncated to [a, b]. a may be -inf and b may be +inf;
// a < b and sigma2 > 0 are required.
struct TruncatedGaussianSpec {
  double mu = 0.0;
  double sigma2 = 1.0;
  double a = 0.0;
  double b = 0.0;

  void validate() const;
};

// Scaled complementary error function exp(u^2) erfc(u) for u >= 0. Uses
// exp * erfc while erfc is representable and the asymptotic series beyond.
double erfcx_positive(double u);

double std_normal_cdf(double t);
// Upper tail P(N(0,1) > t).
double std_normal_sf(double t);

// CDF of the truncated Gaussian at x (x is clamped into [a, b]). Relative
// accuracy is kept in regimes where both truncation limits sit far in one
// tail by factoring the untruncated tail mass out of the ratio. Throws
// tail_degeneracy_error when the truncated mass underflows entirely.
double truncated_normal_cdf(const TruncatedGaussianSpec& spec, double x);

}  // namespace gtsel
