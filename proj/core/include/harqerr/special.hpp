#pragma once

// Scalar special functions shared by the PEP and fading modules.

namespace harqerr {

/// Standard Gaussian tail probability Q(x) = P(N(0,1) > x).
double q_function(double x);

/// log Q(x), finite for arbitrarily large x (asymptotic series past x = 30).
double log_q_function(double x);

/// Standard Gaussian density.
double normal_pdf(double x);

/// Regularized upper incomplete gamma Q(k, x) = Gamma(k, x) / Gamma(k) for an
/// integer shape k >= 1, via the finite sum e^{-x} sum_{j<k} x^j / j!.
double gamma_q_int(int k, double x);

/// Regularized lower incomplete gamma P(k, x) = 1 - Q(k, x), evaluated
/// without cancellation when Q(k, x) is close to one.
double gamma_p_int(int k, double x);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace harqerr
