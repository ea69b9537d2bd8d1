#ifndef N400_SPECIAL_HPP
#define N400_SPECIAL_HPP

namespace n400::special {

// Regularized lower incomplete gamma P(a,x) and upper Q(a,x) = 1 - P(a,x).
// Series for x < a+1, Lentz continued fraction otherwise. Absolute error
// below 1e-12 over the ranges used by the survival functions.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a,b) via the standard continued fraction
// with the symmetry swap at x = (a+1)/(a+b+2).
double incbeta(double a, double b, double x);

} // namespace n400::special

#endif
