#include "ivnnt/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ivnnt {

namespace {

constexpr double kPsiLo = -20.0, kPsiHi = 20.0;
constexpr int kPsiScanPoints = 4000;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double linear_predictor(const std::array<double, 4>& beta, int a, int z) {
  return beta[0] + beta[1] * a + beta[2] * z + beta[3] * a * z;
}

// mean estimating function for psi_a over the four (z,a) cells;
// the outcome indicator does not enter the Dh block
double dh_mean(int a, const CellCounts& cells, const std::array<double, 4>& beta,
               double pi_z, double psi_a, ModelSpec spec) {
  double s = 0.0;
  for (int z = 0; z < 2; ++z) {
    for (int ao = 0; ao < 2; ++ao) {
      const auto cnt = cells.count(z, ao);
      if (cnt == 0) continue;
      const double eta = linear_predictor(beta, ao, z);
      const double shifted =
          a == 0 ? eta + psi_a * (1 - ao) : eta - psi_a * ao;
      s += static_cast<double>(cnt) * (z - pi_z) * link_inverse(spec.link, shifted);
    }
  }
  return s / static_cast<double>(cells.total);
}

// hybrid bisection/secant refinement of a bracketed root
template <typename F>
std::pair<double, double> refine_root(F&& f, double lo, double hi, double flo, double fhi) {
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-12; ++iter) {
    double mid;
    // secant proposal, fall back to bisection when it leaves the bracket
    const double denom = fhi - flo;
    if (denom != 0.0) {
      mid = lo - flo * (hi - lo) / denom;
      const double margin = 0.01 * (hi - lo);
      if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double fm = f(mid);
    if (fm == 0.0) return {mid, mid};
    if ((flo < 0.0) != (fm < 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return {lo, hi};
}

}  // namespace

AssociationFit fit_association(const ObservationSet& data, ModelSpec spec) {
  const auto& cells = data.cells();
  SeparationError sep("association model separation: degenerate outcome cell mean");
  for (int z = 0; z < 2; ++z)
    for (int a = 0; a < 2; ++a) {
      if (cells.count(z, a) == 0) {
        throw GroupEmptyError("fit_association: empty (z,a) cell");
      }
      const double m = cells.outcome_mean(z, a);
      if (m <= 0.0 || m >= 1.0) sep.cells.emplace_back(z, a);
    }
  if (!sep.cells.empty()) throw sep;

  // saturated model: link of each cell mean reproduced exactly, which zeroes
  // the four score components of the stacked estimating function
  const double x00 = link_forward(spec.link, cells.outcome_mean(0, 0));
  const double x01 = link_forward(spec.link, cells.outcome_mean(0, 1));
  const double x10 = link_forward(spec.link, cells.outcome_mean(1, 0));
  const double x11 = link_forward(spec.link, cells.outcome_mean(1, 1));

  AssociationFit fit;
  fit.beta = {x00, x01 - x00, x10 - x00, x11 - x10 - x01 + x00};
  fit.pi_z = static_cast<double>(cells.count_z(1)) / static_cast<double>(cells.total);
  return fit;
}

double counterfactual_mean_h(int a, int z, int a_obs, const std::array<double, 4>& beta,
                             std::pair<double, double> psi, ModelSpec spec) {
  const double eta = linear_predictor(beta, a_obs, z);
  const double shift = -a * psi.second * a_obs + (1 - a) * psi.first * (1 - a_obs);
  return link_inverse(spec.link, eta + shift);
}

PsiSolve solve_psi(int a, const ObservationSet& data, const std::array<double, 4>& beta,
                   double pi_z, ModelSpec spec) {
  const auto& cells = data.cells();
  auto f = [&](double psi) { return dh_mean(a, cells, beta, pi_z, psi, spec); };

  PsiSolve out;
  const double step = (kPsiHi - kPsiLo) / kPsiScanPoints;
  double prev_x = kPsiLo;
  double prev_f = f(prev_x);
  std::vector<std::pair<double, double>> brackets;
  for (int k = 1; k <= kPsiScanPoints; ++k) {
    const double x = kPsiLo + k * step;
    const double fx = f(x);
    if (prev_f == 0.0) {
      brackets.emplace_back(prev_x, prev_x);
    } else if ((prev_f < 0.0) != (fx < 0.0)) {
      brackets.emplace_back(prev_x, x);
    }
    prev_x = x;
    prev_f = fx;
  }
  if (prev_f == 0.0) brackets.emplace_back(prev_x, prev_x);

  if (brackets.empty()) {
    out.status = SolveStatus::no_solution;
    out.bracket = {kPsiLo, kPsiHi};
    return out;
  }

  struct Root {
    double x;
    std::pair<double, double> bracket;
  };
  std::vector<Root> roots;
  for (const auto& [lo, hi] : brackets) {
    if (lo == hi) {
      roots.push_back({lo, {lo, lo}});
      continue;
    }
    const auto refined = refine_root(f, lo, hi, f(lo), f(hi));
    roots.push_back({0.5 * (refined.first + refined.second), refined});
  }
  std::sort(roots.begin(), roots.end(), [](const Root& x, const Root& y) { return x.x < y.x; });
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](const Root& x, const Root& y) { return std::fabs(x.x - y.x) < 1e-9; }),
              roots.end());
  out.multiple_roots = roots.size() > 1;
  for (const auto& r : roots) out.all_roots.push_back(r.x);

  // conservative choice: smallest causal effect in magnitude
  std::size_t best = 0;
  for (std::size_t k = 1; k < roots.size(); ++k)
    if (std::fabs(roots[k].x) < std::fabs(roots[best].x)) best = k;
  out.root = roots[best].x;
  out.bracket = roots[best].bracket;
  out.status = SolveStatus::solved;
  return out;
}

Benefits plugin_benefits(const ObservationSet& data, const std::array<double, 4>& beta,
                         std::pair<double, double> psi, ModelSpec spec) {
  const auto& cells = data.cells();
  const auto n_a0 = cells.count_a(0);
  const auto n_a1 = cells.count_a(1);
  if (n_a0 == 0 || n_a1 == 0) throw GroupEmptyError("plugin_benefits: empty exposure group");

  Benefits b;
  double acc0 = 0, acc1 = 0, acc = 0;
  for (int z = 0; z < 2; ++z) {
    // p_b(0; z): benefit among the unexposed at instrument level z
    const double base0 = beta[0] + beta[2] * z;
    const double pb0z = link_inverse(spec.link, base0 + psi.first) - link_inverse(spec.link, base0);
    acc0 += static_cast<double>(cells.count(z, 0)) * pb0z;
    // p_b(1; z): benefit among the exposed
    const double base1 = beta[0] + beta[1] + (beta[2] + beta[3]) * z;
    const double pb1z = link_inverse(spec.link, base1) - link_inverse(spec.link, base1 - psi.second);
    acc1 += static_cast<double>(cells.count(z, 1)) * pb1z;
    // general benefit p_b(z, a) averaged over everyone
    acc += static_cast<double>(cells.count(z, 0)) * pb0z;  // a=0 reduces to p_b(0; z)
    acc += static_cast<double>(cells.count(z, 1)) * pb1z;  // a=1 reduces to p_b(1; z)
  }
  b.pb0 = acc0 / static_cast<double>(n_a0);
  b.pb1 = acc1 / static_cast<double>(n_a1);
  b.pb = acc / static_cast<double>(cells.total);
  return b;
}

GEstimationResult g_estimate(const ObservationSet& data, ModelSpec spec) {
  const AssociationFit assoc = fit_association(data, spec);

  GEstimationResult res;
  res.theta_hat.beta = assoc.beta;
  res.theta_hat.pi_z = assoc.pi_z;
  res.theta_hat.psi0 = res.theta_hat.psi1 = kNan;
  res.theta_hat.pb0 = res.theta_hat.pb1 = res.theta_hat.pb = kNan;
  res.theta_hat.nne = res.theta_hat.ein = res.theta_hat.nnt = kNan;

  const PsiSolve s0 = solve_psi(0, data, assoc.beta, assoc.pi_z, spec);
  const PsiSolve s1 = solve_psi(1, data, assoc.beta, assoc.pi_z, spec);
  res.psi0_status = s0.status;
  res.psi1_status = s1.status;
  res.psi0_multiple_roots = s0.multiple_roots;
  res.psi1_multiple_roots = s1.multiple_roots;
  res.psi0_bracket = s0.bracket;
  res.psi1_bracket = s1.bracket;

  const bool ok0 = s0.status == SolveStatus::solved;
  const bool ok1 = s1.status == SolveStatus::solved;
  if (ok0) res.theta_hat.psi0 = s0.root;
  if (ok1) res.theta_hat.psi1 = s1.root;

  if (ok0 || ok1) {
    const Benefits b = plugin_benefits(data, assoc.beta,
                                       {ok0 ? s0.root : 0.0, ok1 ? s1.root : 0.0}, spec);
    if (ok0) {
      res.theta_hat.pb0 = b.pb0;
      res.theta_hat.nne = g_transform(b.pb0);
    }
    if (ok1) {
      res.theta_hat.pb1 = b.pb1;
      res.theta_hat.ein = g_transform(b.pb1);
    }
    if (ok0 && ok1) {
      res.theta_hat.pb = b.pb;
      res.theta_hat.nnt = g_transform(b.pb);
    }
  }

  const auto active = active_components(res);
  res.q_residual_norm =
      mean_estimating_function(data, res.theta_hat, spec, active).norm();
  return res;
}

namespace {

// Q for a (z, a, i) combination; components switched off by the mask are 0.
// The g-block must only be evaluated at finite index values.
Eigen::Matrix<double, 13, 1> q_components(int z, int a, int i, const ThetaVector& t,
                                          ModelSpec spec, const std::array<bool, 13>& mask) {
  Eigen::Matrix<double, 13, 1> q = Eigen::Matrix<double, 13, 1>::Zero();
  const double eta = linear_predictor(t.beta, a, z);
  const double mu = link_inverse(spec.link, eta);
  const double resid = i - mu;
  if (mask[kBeta0]) q[kBeta0] = resid;
  if (mask[kBeta1]) q[kBeta1] = resid * a;
  if (mask[kBeta2]) q[kBeta2] = resid * z;
  if (mask[kBeta3]) q[kBeta3] = resid * a * z;
  if (mask[kPiZ]) q[kPiZ] = z - t.pi_z;
  const double zc = z - t.pi_z;
  if (mask[kPsi0]) q[kPsi0] = zc * link_inverse(spec.link, eta + t.psi0 * (1 - a));
  if (mask[kPsi1]) q[kPsi1] = zc * link_inverse(spec.link, eta - t.psi1 * a);
  if (mask[kPb0]) {
    const double base = t.beta[0] + t.beta[2] * z;
    q[kPb0] = (link_inverse(spec.link, base + t.psi0) - link_inverse(spec.link, base) - t.pb0) *
              (1 - a);
  }
  if (mask[kPb1]) {
    const double base = t.beta[0] + t.beta[1] + (t.beta[2] + t.beta[3]) * z;
    q[kPb1] = (link_inverse(spec.link, base) - link_inverse(spec.link, base - t.psi1) - t.pb1) * a;
  }
  if (mask[kPb]) {
    q[kPb] = link_inverse(spec.link, eta + t.psi0 * (1 - a)) -
             link_inverse(spec.link, eta - t.psi1 * a) - t.pb;
  }
  if (mask[kNne]) {
    if (!std::isfinite(t.nne)) throw NonFiniteThetaError("evaluate_Q: NNE is not finite");
    q[kNne] = g_transform(t.pb0) - t.nne;
  }
  if (mask[kEin]) {
    if (!std::isfinite(t.ein)) throw NonFiniteThetaError("evaluate_Q: EIN is not finite");
    q[kEin] = g_transform(t.pb1) - t.ein;
  }
  if (mask[kNnt]) {
    if (!std::isfinite(t.nnt)) throw NonFiniteThetaError("evaluate_Q: NNT is not finite");
    q[kNnt] = g_transform(t.pb) - t.nnt;
  }
  return q;
}

constexpr std::array<bool, 13> kAllComponents = {true, true, true, true, true, true, true,
                                                 true, true, true, true, true, true};

}  // namespace

Eigen::Matrix<double, 13, 1> evaluate_Q(const ObservationRecord& record,
                                        const ThetaVector& theta, ModelSpec spec) {
  return q_components(record.z, record.a, record.i, theta, spec, kAllComponents);
}

Eigen::Matrix<double, 13, 1> evaluate_Q_masked(const ObservationRecord& record,
                                               const ThetaVector& theta, ModelSpec spec,
                                               const std::array<bool, 13>& active) {
  return q_components(record.z, record.a, record.i, theta, spec, active);
}

std::array<bool, 13> active_components(const GEstimationResult& fit) {
  std::array<bool, 13> m{};
  for (int k = kBeta0; k <= kPiZ; ++k) m[k] = true;
  const bool ok0 = fit.psi0_status == SolveStatus::solved;
  const bool ok1 = fit.psi1_status == SolveStatus::solved;
  m[kPsi0] = ok0;
  m[kPsi1] = ok1;
  m[kPb0] = ok0;
  m[kPb1] = ok1;
  m[kPb] = ok0 && ok1;
  m[kNne] = ok0 && std::isfinite(fit.theta_hat.nne);
  m[kEin] = ok1 && std::isfinite(fit.theta_hat.ein);
  m[kNnt] = ok0 && ok1 && std::isfinite(fit.theta_hat.nnt);
  return m;
}

Eigen::Matrix<double, 13, 1> mean_estimating_function(const ObservationSet& data,
                                                      const ThetaVector& theta,
                                                      ModelSpec spec,
                                                      const std::array<bool, 13>& active) {
  const auto& cells = data.cells();
  Eigen::Matrix<double, 13, 1> acc = Eigen::Matrix<double, 13, 1>::Zero();
  for (int z = 0; z < 2; ++z)
    for (int a = 0; a < 2; ++a) {
      const std::int64_t n_one = cells.ones[z][a];
      const std::int64_t n_zero = cells.n[z][a] - n_one;
      if (n_one > 0)
        acc += static_cast<double>(n_one) * q_components(z, a, 1, theta, spec, active);
      if (n_zero > 0)
        acc += static_cast<double>(n_zero) * q_components(z, a, 0, theta, spec, active);
    }
  return acc / static_cast<double>(cells.total);
}

NaiveEstimates naive_estimates(const ObservationSet& data, BaselineMode mode) {
  const auto& cells = data.cells();
  const auto n_a0 = cells.count_a(0);
  const auto n_a1 = cells.count_a(1);
  if (n_a0 == 0 || n_a1 == 0) throw GroupEmptyError("naive_estimates: empty exposure group");

  NaiveEstimates out;
  if (mode == BaselineMode::crude) {
    const double m1 =
        static_cast<double>(cells.ones[0][1] + cells.ones[1][1]) / static_cast<double>(n_a1);
    const double m0 =
        static_cast<double>(cells.ones[0][0] + cells.ones[1][0]) / static_cast<double>(n_a0);
    const double d = m1 - m0;
    out.ein = out.nne = out.nnt = g_transform(d);
    return out;
  }

  // instrument-standardized contrasts: within-Z effect averaged over the
  // empirical Z distribution of each target group
  for (int z = 0; z < 2; ++z) {
    if (cells.count(z, 0) == 0 || cells.count(z, 1) == 0)
      throw GroupEmptyError("naive_estimates: empty (z,a) cell");
  }
  const double d0 = cells.outcome_mean(0, 1) - cells.outcome_mean(0, 0);
  const double d1 = cells.outcome_mean(1, 1) - cells.outcome_mean(1, 0);
  const double n = static_cast<double>(cells.total);
  const double ein_benefit =
      (cells.count(0, 1) * d0 + cells.count(1, 1) * d1) / static_cast<double>(n_a1);
  const double nne_benefit =
      (cells.count(0, 0) * d0 + cells.count(1, 0) * d1) / static_cast<double>(n_a0);
  const double nnt_benefit = (cells.count_z(0) * d0 + cells.count_z(1) * d1) / n;
  out.ein = g_transform(ein_benefit);
  out.nne = g_transform(nne_benefit);
  out.nnt = g_transform(nnt_benefit);
  return out;
}

}  // namespace ivnnt
