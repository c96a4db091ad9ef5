#pragma once

// Second moments of the APL basis functions
//   B0(x) = max(0, x),   Bb(x) = max(0, -x + b)
// under a single Gaussian N(mu, sigma^2), in closed form, together with an
// adaptive-quadrature oracle used to verify them.

namespace taan::moments {

struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;
};

/// Throws InvalidArgument unless mu is finite and sigma is finite and positive.
void validate(const GaussianParams& g);

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
double std_normal_cdf(double x);

/// E[B0(X)^2].
double moment_b0_sq(const GaussianParams& g);

/// E[B_bi(X) B_bj(X)]; symmetric in (bi, bj).
double moment_bb(double bi, double bj, const GaussianParams& g);

/// E[B0(X) B_b(X)]; exactly zero for b <= 0 since the supports are disjoint.
double moment_b0b(double b, const GaussianParams& g);

enum class BasisPair {
    ReluRelu,   // B0 * B0
    ReluHinge,  // B0 * B_{b1}
    HingeHinge, // B_{b1} * B_{b2}
};

struct BasisPairSpec {
    BasisPair pair = BasisPair::ReluRelu;
    double b1 = 0.0;
    double b2 = 0.0;
};

/// Numerical value of the moment described by `spec`, integrating the
/// integrand times the Gaussian density over [mu - 12 sigma, mu + 12 sigma]
/// with the interval split at every hinge. Throws NumericError if the
/// estimated absolute error exceeds 1e-10.
double oracle_moment(const BasisPairSpec& spec, const GaussianParams& g);

} // namespace taan::moments
