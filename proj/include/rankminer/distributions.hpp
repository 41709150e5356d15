#pragma once

// Scalar distribution functions shared by the hypothesis tests.
namespace rankminer::dist {

double normal_cdf(double x);
// Upper tail, 1 - normal_cdf(x), without cancellation for large x.
double normal_sf(double x);
// Inverse standard normal CDF (Wichura's AS 241, about 1e-16 relative).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
// P(|T| >= |t|) for T ~ Student-t(df).
double student_t_two_sided(double t, double df);

} // namespace rankminer::dist
