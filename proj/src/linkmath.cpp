#include "ivnnt/linkmath.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ivnnt {

double expit(double x) {
  // two-branch form: never evaluates exp of a large positive argument
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("logit: argument must lie in (0,1)");
  }
  return std::log(p / (1.0 - p));
}

double norm_cdf(double x) {
  static const double inv_sqrt2 = 0.7071067811865475244008443621048490;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}

double norm_pdf(double x) {
  static const double inv_sqrt2pi = 0.3989422804014326779399460599343819;
  return inv_sqrt2pi * std::exp(-0.5 * x * x);
}

// AS241 algorithm PPND16 (Wichura 1988)
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: argument must lie in (0,1)");
  }
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double g_transform(double p_b) {
  if (p_b > 0.0) return 1.0 / p_b;
  return std::numeric_limits<double>::infinity();
}

double link_forward(LinkKind kind, double p) {
  return kind == LinkKind::logit ? logit(p) : norm_quantile(p);
}

double link_inverse(LinkKind kind, double x) {
  return kind == LinkKind::logit ? expit(x) : norm_cdf(x);
}

double link_inverse_deriv(LinkKind kind, double x) {
  if (kind == LinkKind::logit) {
    const double e = expit(x);
    return e * (1.0 - e);
  }
  return norm_pdf(x);
}

double link_eval(LinkKind kind, LinkDirection direction, double x) {
  switch (direction) {
    case LinkDirection::forward: return link_forward(kind, x);
    case LinkDirection::inverse: return link_inverse(kind, x);
    case LinkDirection::inverse_derivative: return link_inverse_deriv(kind, x);
  }
  throw std::logic_error("link_eval: bad direction");
}

}  // namespace ivnnt
