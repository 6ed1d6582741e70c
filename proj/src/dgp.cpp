#include "ivnnt/dgp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ivnnt/rng.hpp"

namespace ivnnt {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kRootSeparation = 1e-6;

double clamp01(double q) { return std::min(1.0 - 1e-14, std::max(1e-14, q)); }

// link-scale shift of a probability: xi^{-1}(xi(q) + delta)
double shift(LinkKind link, double q, double delta) {
  return link_inverse(link, link_forward(link, clamp01(q)) + delta);
}

// The compatibility system in cell-probability coordinates
//   q_za = xi^{-1}(beta' x_za),  q in (0,1)^4.
// Equations: valid-IV for I0 and I1 (E[I_a|Z=1] = E[I_a|Z=0]), the marginal
// outcome, and the marginal benefit. Two of them are linear in (q00, q10)
// given (q01, q11), which reduces root finding to the (q01, q11) unit square.
struct CellSystem {
  LinkKind link;
  double psi0, psi1;
  double pA0, pA1;  // P(A=1 | Z=0), P(A=1 | Z=1)
  double pi_z;
  double t_out, t_pb;

  explicit CellSystem(const DgpConfig& c)
      : link(c.spec.link),
        psi0(c.psi0),
        psi1(c.psi1),
        pA0(c.p_exposure_given_z(0)),
        pA1(c.p_exposure_given_z(1)),
        pi_z(c.pi_z),
        t_out(c.target_outcome),
        t_pb(c.target_pb) {}

  // full residual at cell probabilities (q00, q01, q10, q11)
  Eigen::Vector4d residual(const std::array<double, 4>& q) const {
    const double q00 = q[0], q01 = q[1], q10 = q[2], q11 = q[3];
    const double d01 = shift(link, q01, -psi1), d11 = shift(link, q11, -psi1);
    const double u00 = shift(link, q00, psi0), u10 = shift(link, q10, psi0);
    Eigen::Vector4d f;
    f[0] = (q10 * (1 - pA1) + d11 * pA1) - (q00 * (1 - pA0) + d01 * pA0);
    f[1] = (u10 * (1 - pA1) + q11 * pA1) - (u00 * (1 - pA0) + q01 * pA0);
    f[2] = pi_z * ((1 - pA1) * q10 + pA1 * q11) + (1 - pi_z) * ((1 - pA0) * q00 + pA0 * q01) -
           t_out;
    f[3] = pi_z * ((1 - pA1) * (u10 - q10) + pA1 * (q11 - d11)) +
           (1 - pi_z) * ((1 - pA0) * (u00 - q00) + pA0 * (q01 - d01)) - t_pb;
    return f;
  }

  // (q00, q10) solved from the valid-IV-for-I0 and marginal-outcome equations,
  // which are linear in them for fixed (q01, q11); may leave (0,1)
  void complete(double q01, double q11, double& q00, double& q10) const {
    const double d01 = shift(link, q01, -psi1), d11 = shift(link, q11, -psi1);
    const double c1 = d01 * pA0 - d11 * pA1;
    const double c3 = t_out - pi_z * pA1 * q11 - (1 - pi_z) * pA0 * q01;
    q10 = (c3 + (1 - pi_z) * c1) / (1 - pA1);
    q00 = (c3 - pi_z * c1) / (1 - pA0);
  }

  // remaining two residuals on the reduced (q01, q11) square, with the
  // completed coordinates clamped so the scan extends continuously across
  // the validity boundary
  Eigen::Vector2d reduced(double q01, double q11) const {
    double q00, q10;
    complete(q01, q11, q00, q10);
    q00 = clamp01(q00);
    q10 = clamp01(q10);
    const double d01 = shift(link, q01, -psi1), d11 = shift(link, q11, -psi1);
    const double u00 = shift(link, q00, psi0), u10 = shift(link, q10, psi0);
    Eigen::Vector2d f;
    f[0] = (u10 * (1 - pA1) + q11 * pA1) - (u00 * (1 - pA0) + q01 * pA0);
    f[1] = pi_z * ((1 - pA1) * (u10 - q10) + pA1 * (q11 - d11)) +
           (1 - pi_z) * ((1 - pA0) * (u00 - q00) + pA0 * (q01 - d01)) - t_pb;
    return f;
  }
};

std::array<double, 4> beta_from_cells(LinkKind link, const std::array<double, 4>& q) {
  const double x00 = link_forward(link, q[0]);
  const double x01 = link_forward(link, q[1]);
  const double x10 = link_forward(link, q[2]);
  const double x11 = link_forward(link, q[3]);
  return {x00, x01 - x00, x10 - x00, x11 - x10 - x01 + x00};
}

std::array<double, 4> cells_from_beta(LinkKind link, const std::array<double, 4>& b) {
  return {link_inverse(link, b[0]), link_inverse(link, b[0] + b[1]),
          link_inverse(link, b[0] + b[2]), link_inverse(link, b[0] + b[1] + b[2] + b[3])};
}

// damped Newton on the reduced 2-D system with a numeric Jacobian;
// least-squares step handles the rank-deficient zero-effect configurations
bool polish2d(const CellSystem& sys, double& q01, double& q11) {
  double x0 = q01, x1 = q11;
  Eigen::Vector2d f = sys.reduced(x0, x1);
  for (int iter = 0; iter < 120; ++iter) {
    if (f.norm() < kResidualTol) break;
    const double h0 = std::max(1e-8, 1e-8 * std::fabs(x0));
    const double h1 = std::max(1e-8, 1e-8 * std::fabs(x1));
    Eigen::Matrix2d J;
    J.col(0) = (sys.reduced(x0 + h0, x1) - sys.reduced(x0 - h0, x1)) / (2 * h0);
    J.col(1) = (sys.reduced(x0, x1 + h1) - sys.reduced(x0, x1 - h1)) / (2 * h1);
    Eigen::Vector2d step = J.completeOrthogonalDecomposition().solve(-f);
    if (!step.allFinite()) return false;
    double lambda = 1.0;
    bool moved = false;
    for (int half = 0; half < 40; ++half, lambda *= 0.5) {
      const double y0 = std::min(1.0 - 1e-12, std::max(1e-12, x0 + lambda * step[0]));
      const double y1 = std::min(1.0 - 1e-12, std::max(1e-12, x1 + lambda * step[1]));
      const Eigen::Vector2d fy = sys.reduced(y0, y1);
      if (fy.norm() < f.norm()) {
        x0 = y0;
        x1 = y1;
        f = fy;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (f.norm() >= kResidualTol) return false;
  q01 = x0;
  q11 = x1;
  return true;
}

// damped Newton on the full 4-D system in beta coordinates (the multi-start
// grid over [-2,2]^4); numeric Jacobian, least-squares step
bool polish4d(const CellSystem& sys, LinkKind link, std::array<double, 4>& beta) {
  Eigen::Vector4d x(beta[0], beta[1], beta[2], beta[3]);
  auto eval = [&](const Eigen::Vector4d& b) {
    return sys.residual(cells_from_beta(link, {b[0], b[1], b[2], b[3]}));
  };
  Eigen::Vector4d f = eval(x);
  for (int iter = 0; iter < 150; ++iter) {
    if (f.norm() < kResidualTol) break;
    Eigen::Matrix4d J;
    for (int k = 0; k < 4; ++k) {
      const double h = std::max(1e-7, 1e-7 * std::fabs(x[k]));
      Eigen::Vector4d xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      J.col(k) = (eval(xp) - eval(xm)) / (2 * h);
    }
    Eigen::Vector4d step = J.completeOrthogonalDecomposition().solve(-f);
    if (!step.allFinite()) return false;
    double lambda = 1.0;
    bool moved = false;
    for (int half = 0; half < 40; ++half, lambda *= 0.5) {
      const Eigen::Vector4d y = x + lambda * step;
      if (y.cwiseAbs().maxCoeff() > 60.0) continue;  // beyond link resolution
      const Eigen::Vector4d fy = eval(y);
      if (fy.norm() < f.norm()) {
        x = y;
        f = fy;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (f.norm() >= kResidualTol) return false;
  beta = {x[0], x[1], x[2], x[3]};
  return true;
}

double max_norm_diff(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double m = 0;
  for (int k = 0; k < 4; ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

double max_norm(const std::array<double, 4>& a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

double derive_gamma0(double gamma1, double pi_z, double target_exposure) {
  auto f = [&](double g0) {
    return pi_z * expit(g0 + gamma1) + (1 - pi_z) * expit(g0) - target_exposure;
  };
  double lo = -60, hi = 60;
  double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw NoSolutionError("derive_gamma0: target exposure unattainable");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

DgpConfig DgpConfig::with_derived_gamma0(ModelSpec spec, double psi0, double psi1, double pi_z,
                                         double gamma1, double target_exposure,
                                         double target_outcome, double target_pb) {
  DgpConfig c;
  c.spec = spec;
  c.psi0 = psi0;
  c.psi1 = psi1;
  c.pi_z = pi_z;
  c.gamma1 = gamma1;
  c.gamma0 = derive_gamma0(gamma1, pi_z, target_exposure);
  c.target_exposure = target_exposure;
  c.target_outcome = target_outcome;
  c.target_pb = target_pb;
  c.check();
  return c;
}

double DgpConfig::p_exposure_given_z(int z) const { return expit(gamma0 + gamma1 * z); }

void DgpConfig::check() const {
  auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in01(pi_z)) throw ConfigError("dgp: pi_z must lie in (0,1)");
  if (!in01(target_exposure)) throw ConfigError("dgp: target_exposure must lie in (0,1)");
  if (!in01(target_outcome)) throw ConfigError("dgp: target_outcome must lie in (0,1)");
  if (!(target_pb > -1.0 && target_pb < 1.0))
    throw ConfigError("dgp: target_pb must lie in (-1,1)");
  const double implied =
      pi_z * expit(gamma0 + gamma1) + (1 - pi_z) * expit(gamma0);
  if (std::fabs(implied - target_exposure) > 1e-6)
    throw ConfigError("dgp: gamma inconsistent with target_exposure");
}

DgpTruth truth_from_beta(const DgpConfig& config, const std::array<double, 4>& beta) {
  const LinkKind link = config.spec.link;
  const double pA0 = config.p_exposure_given_z(0), pA1 = config.p_exposure_given_z(1);
  const double piz = config.pi_z;

  // Bayes inversion of the exposure model: P(Z=1 | A=a)
  const double pz1_a1 = pA1 * piz / (pA1 * piz + pA0 * (1 - piz));
  const double pz1_a0 = (1 - pA1) * piz / ((1 - pA1) * piz + (1 - pA0) * (1 - piz));

  DgpTruth t;
  t.beta = beta;
  double pb = 0;
  for (int z = 0; z < 2; ++z) {
    const double base0 = beta[0] + beta[2] * z;
    const double base1 = beta[0] + beta[1] + (beta[2] + beta[3]) * z;
    const double pb0z = link_inverse(link, base0 + config.psi0) - link_inverse(link, base0);
    const double pb1z = link_inverse(link, base1) - link_inverse(link, base1 - config.psi1);
    const double wz0 = z == 1 ? pz1_a0 : 1 - pz1_a0;
    const double wz1 = z == 1 ? pz1_a1 : 1 - pz1_a1;
    t.pb0_true += wz0 * pb0z;
    t.pb1_true += wz1 * pb1z;
    const double paz = z == 1 ? pA1 : pA0;
    pb += config.p_z(z) * ((1 - paz) * pb0z + paz * pb1z);
  }
  t.pb_true = pb;
  t.nne_true = g_transform(t.pb0_true);
  t.ein_true = g_transform(t.pb1_true);
  t.nnt_true = g_transform(t.pb_true);
  return t;
}

double constraint_residual(const DgpConfig& config, const std::array<double, 4>& beta) {
  const CellSystem sys(config);
  return sys.residual(cells_from_beta(config.spec.link, beta)).cwiseAbs().maxCoeff();
}

std::vector<DgpTruth> solve_beta_all(const DgpConfig& config) {
  config.check();
  const CellSystem sys(config);
  const LinkKind link = config.spec.link;

  std::vector<std::array<double, 4>> betas;
  auto keep = [&](const std::array<double, 4>& q) {
    for (double v : q)
      if (!(v > 0.0 && v < 1.0)) return;
    const auto beta = beta_from_cells(link, q);
    if (sys.residual(q).cwiseAbs().maxCoeff() > 10 * kResidualTol) return;
    for (const auto& b : betas)
      if (max_norm_diff(b, beta) < kRootSeparation) return;
    betas.push_back(beta);
  };

  // exhaustive scan of the reduced unit square: candidate cells are those
  // where both residual components change sign over the cell corners
  const int n = 600;
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = (k + 0.5) / n;
  std::vector<std::array<float, 2>> vals(static_cast<std::size_t>(n) * n);
  const bool pb_degenerate_possible = config.psi0 == 0.0 && config.psi1 == 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d f = sys.reduced(g[i], g[j]);
      vals[static_cast<std::size_t>(i) * n + j] = {static_cast<float>(f[0]),
                                                   static_cast<float>(f[1])};
    }
  auto sign_change = [&](int comp, int i, int j) {
    const float v = vals[static_cast<std::size_t>(i) * n + j][comp];
    const float r = vals[static_cast<std::size_t>(i + 1) * n + j][comp];
    const float u = vals[static_cast<std::size_t>(i) * n + j + 1][comp];
    const float d = vals[static_cast<std::size_t>(i + 1) * n + j + 1][comp];
    const bool sv = std::signbit(v);
    return std::signbit(r) != sv || std::signbit(u) != sv || std::signbit(d) != sv;
  };
  auto near_zero = [&](int comp, int i, int j) {
    // identically-zero residual component (e.g. the benefit equation when
    // psi = 0 and target_pb = 0) never flips sign; treat it as crossing
    return std::fabs(vals[static_cast<std::size_t>(i) * n + j][comp]) < 1e-13;
  };
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j) {
      const bool c0 = sign_change(0, i, j) || near_zero(0, i, j);
      const bool c1 = sign_change(1, i, j) || (pb_degenerate_possible && near_zero(1, i, j));
      if (!(c0 && c1)) continue;
      double q01 = 0.5 * (g[i] + g[i + 1]);
      double q11 = 0.5 * (g[j] + g[j + 1]);
      if (!polish2d(sys, q01, q11)) continue;
      double q00, q10;
      sys.complete(q01, q11, q00, q10);
      keep({q00, q01, q10, q11});
    }

  // multi-start damped Newton over the [-2,2]^4 beta grid
  for (double b0 : {-2.0, 0.0, 2.0})
    for (double b1 : {-2.0, 0.0, 2.0})
      for (double b2 : {-2.0, 0.0, 2.0})
        for (double b3 : {-2.0, 0.0, 2.0}) {
          std::array<double, 4> beta{b0, b1, b2, b3};
          if (!polish4d(sys, link, beta)) continue;
          keep(cells_from_beta(link, beta));
        }

  std::sort(betas.begin(), betas.end(),
            [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
              return max_norm(a) < max_norm(b);
            });

  std::vector<DgpTruth> roots;
  roots.reserve(betas.size());
  for (const auto& b : betas) roots.push_back(truth_from_beta(config, b));
  for (auto& r : roots) r.root_multiplicity = static_cast<int>(roots.size());
  return roots;
}

DgpTruth solve_beta(const DgpConfig& config) {
  auto roots = solve_beta_all(config);
  if (roots.empty())
    throw NoSolutionError("solve_beta: no association coefficients satisfy the constraints");
  if (roots.size() > 1) throw MultipleSolutionsError(std::move(roots));
  return roots.front();
}

ObservationSet generate(const DgpTruth& truth, const DgpConfig& config, std::size_t n,
                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ObservationRecord> records;
  records.reserve(n);
  const LinkKind link = config.spec.link;
  // outcome probabilities per (z,a) cell
  std::array<std::array<double, 2>, 2> p_i{};
  for (int z = 0; z < 2; ++z)
    for (int a = 0; a < 2; ++a)
      p_i[z][a] = link_inverse(
          link, truth.beta[0] + truth.beta[1] * a + truth.beta[2] * z + truth.beta[3] * a * z);
  for (std::size_t k = 0; k < n; ++k) {
    const int z = rng.bernoulli(config.pi_z);
    const int a = rng.bernoulli(config.p_exposure_given_z(z));
    const int i = rng.bernoulli(p_i[z][a]);
    records.push_back({static_cast<std::uint8_t>(z), static_cast<std::uint8_t>(a),
                       static_cast<std::uint8_t>(i)});
  }
  return ObservationSet::from_records_unchecked(std::move(records));
}

ThetaVector true_theta(const DgpTruth& truth, const DgpConfig& config) {
  ThetaVector t;
  t.beta = truth.beta;
  t.pi_z = config.pi_z;
  t.psi0 = config.psi0;
  t.psi1 = config.psi1;
  t.pb0 = truth.pb0_true;
  t.pb1 = truth.pb1_true;
  t.pb = truth.pb_true;
  t.nne = truth.nne_true;
  t.ein = truth.ein_true;
  t.nnt = truth.nnt_true;
  return t;
}

}  // namespace ivnnt
