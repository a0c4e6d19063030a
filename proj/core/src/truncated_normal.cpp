#include "gtsel/truncated_normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gtsel/errors.hpp"

namespace gtsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2 = 0.70710678118654752440;
const double kSqrtPi = 1.7724538509055160273;

// Ratio of right-tail masses shifted to a common scale: with u = t / sqrt(2),
//   sf(t) = 0.5 * erfcx(u) * exp(-t^2 / 2),
// so for t >= base >= 0,
//   sf(t) / exp(-base^2 / 2) = 0.5 * erfcx(u) * exp((base - t)(base + t) / 2).
// The exponent is <= 0, which avoids overflow for any tail location.
double scaled_sf(double t, double base) {
  if (t == kInf) {
    return 0.0;
  }
  const double log_shift = 0.5 * (base - t) * (base + t);
  return 0.5 * erfcx_positive(t * kInvSqrt2) * std::exp(log_shift);
}

}  // namespace

void TruncatedGaussianSpec::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be positive and finite");
  }
  if (!std::isfinite(mu)) {
    throw std::invalid_argument("mu must be finite");
  }
  if (std::isnan(a) || std::isnan(b) || !(a < b)) {
    throw std::invalid_argument("truncation limits must satisfy a < b");
  }
}

double erfcx_positive(double u) {
  if (u < 0.0 || std::isnan(u)) {
    throw std::invalid_argument("erfcx_positive requires u >= 0");
  }
  if (u < 20.0) {
    return std::exp(u * u) * std::erfc(u);
  }
  // Asymptotic series 1/(u sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2u^2)^k;
  // for u >= 20 the terms decay below 1e-18 within a dozen terms.
  const double inv2u2 = 1.0 / (2.0 * u * u);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 16; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv2u2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) {
      break;
    }
  }
  return sum / (u * kSqrtPi);
}

double std_normal_cdf(double t) {
  return 0.5 * std::erfc(-t * kInvSqrt2);
}

double std_normal_sf(double t) {
  return 0.5 * std::erfc(t * kInvSqrt2);
}

double truncated_normal_cdf(const TruncatedGaussianSpec& spec, double x) {
  spec.validate();
  if (std::isnan(x)) {
    throw std::invalid_argument("x must not be NaN");
  }
  const double sigma = std::sqrt(spec.sigma2);
  const double alpha = spec.a == -kInf ? -kInf : (spec.a - spec.mu) / sigma;
  const double beta = spec.b == kInf ? kInf : (spec.b - spec.mu) / sigma;
  double t = (x - spec.mu) / sigma;
  t = std::min(beta, std::max(alpha, t));

  if (alpha == -kInf && beta == kInf) {
    return std_normal_cdf(t);
  }

  double num;
  double den;
  double noise_scale;  // magnitude of the terms cancelled to obtain den
  if (alpha >= 0.0) {
    // Whole interval in the right tail: factor exp(-alpha^2/2) out of the
    // survival-function differences so the ratio keeps relative precision
    // arbitrarily far out.
    const double sf_a = 0.5 * erfcx_positive(alpha * kInvSqrt2);
    num = sf_a - scaled_sf(t, alpha);
    den = sf_a - scaled_sf(beta, alpha);
    noise_scale = sf_a;
  } else if (beta <= 0.0) {
    // Mirror the left-tail case onto the right tail.
    TruncatedGaussianSpec mirrored;
    mirrored.mu = 0.0;
    mirrored.sigma2 = 1.0;
    mirrored.a = -beta;
    mirrored.b = alpha == -kInf ? kInf : -alpha;
    return 1.0 - truncated_normal_cdf(mirrored, -t);
  } else {
    // Truncation straddles the mode; plain CDF differences are stable here.
    const double cdf_a = alpha == -kInf ? 0.0 : std_normal_cdf(alpha);
    num = std_normal_cdf(t) - cdf_a;
    den = (beta == kInf ? 1.0 : std_normal_cdf(beta)) - cdf_a;
    noise_scale = 1.0;
  }

  // den below the cancellation noise of its own subtraction carries no
  // significant digits: the window holds no resolvable probability mass.
  const double mass_floor =
      8.0 * std::numeric_limits<double>::epsilon() * noise_scale;
  if (!(den > mass_floor) || !std::isfinite(den)) {
    throw tail_degeneracy_error(
        "truncated normal mass underflowed on [" + std::to_string(spec.a) + ", " +
        std::to_string(spec.b) + "] for mu=" + std::to_string(spec.mu) +
        ", sigma2=" + std::to_string(spec.sigma2));
  }
  const double f = num / den;
  return std::min(1.0, std::max(0.0, f));
}

}  // namespace gtsel
