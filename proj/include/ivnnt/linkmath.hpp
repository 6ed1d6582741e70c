#ifndef IVNNT_LINKMATH_HPP
#define IVNNT_LINKMATH_HPP

namespace ivnnt {

// Link function shared by the structural and association models: both stages
// of a double-xi model use the same link, either logit or probit.
enum class LinkKind { logit, probit };

enum class LinkDirection { forward, inverse, inverse_derivative };

// expit(x) = 1/(1+exp(-x)), evaluated in the branch-stable form so that
// extreme arguments saturate instead of overflowing.
double expit(double x);

// logit(p) = ln(p/(1-p)); throws std::domain_error for p outside (0,1).
double logit(double p);

// standard normal cdf, |error| <= 1e-15 via erfc
double norm_cdf(double x);

// standard normal density
double norm_pdf(double x);

// inverse standard normal cdf (Wichura's AS241 rational approximation,
// relative error well below 1e-9); throws std::domain_error outside (0,1).
double norm_quantile(double p);

// index transform: 1/p_b for p_b > 0, +infinity for p_b <= 0.
// Infinity is a legal value here, not an error.
double g_transform(double p_b);

double link_forward(LinkKind kind, double p);          // logit or norm_quantile
double link_inverse(LinkKind kind, double x);          // expit or norm_cdf
double link_inverse_deriv(LinkKind kind, double x);    // derivative of the inverse link

// dispatch over link kind and direction
double link_eval(LinkKind kind, LinkDirection direction, double x);

}  // namespace ivnnt

#endif
