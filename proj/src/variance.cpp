#include "ivnnt/variance.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "ivnnt/linkmath.hpp"

namespace ivnnt {

namespace {

constexpr std::array<bool, 13> kAll = {true, true, true, true, true, true, true,
                                       true, true, true, true, true, true};
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<int> active_indices(const std::array<bool, 13>& active) {
  std::vector<int> idx;
  for (int k = 0; k < 13; ++k)
    if (active[k]) idx.push_back(k);
  return idx;
}

ThetaVector perturbed(const ThetaVector& t, int k, double delta) {
  auto v = theta_pack(t);
  v[static_cast<std::size_t>(k)] += delta;
  return theta_unpack(v);
}

}  // namespace

Eigen::MatrixXd bread_matrix(const ObservationSet& data, const ThetaVector& theta,
                             ModelSpec spec) {
  return bread_matrix(data, theta, spec, kAll);
}

Eigen::MatrixXd bread_matrix(const ObservationSet& data, const ThetaVector& theta,
                             ModelSpec spec, const std::array<bool, 13>& active) {
  const auto v = theta_pack(theta);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(13, 13);
  for (int k = 0; k < 13; ++k) {
    if (!active[k]) continue;
    const double h = std::max(1e-6, 1e-6 * std::fabs(v[static_cast<std::size_t>(k)]));
    Eigen::Matrix<double, 13, 1> plus, minus;
    try {
      plus = mean_estimating_function(data, perturbed(theta, k, +h), spec, active);
      minus = mean_estimating_function(data, perturbed(theta, k, -h), spec, active);
    } catch (const NonFiniteThetaError&) {
      throw NonFiniteEntryError("bread_matrix: perturbed evaluation left the domain", k);
    }
    const Eigen::Matrix<double, 13, 1> col = (plus - minus) / (2.0 * h);
    for (int r = 0; r < 13; ++r) {
      if (!active[r]) continue;
      if (!std::isfinite(col[r]))
        throw NonFiniteEntryError("bread_matrix: non-finite derivative entry", r);
      jac(r, k) = col[r];
    }
  }
  return -jac;
}

Eigen::MatrixXd meat_matrix(const ObservationSet& data, const ThetaVector& theta,
                            ModelSpec spec) {
  return meat_matrix(data, theta, spec, kAll);
}

Eigen::MatrixXd meat_matrix(const ObservationSet& data, const ThetaVector& theta,
                            ModelSpec spec, const std::array<bool, 13>& active) {
  const auto& cells = data.cells();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(13, 13);
  // all records sharing (z, a, i) have identical Q; aggregate exactly
  for (int z = 0; z < 2; ++z)
    for (int a = 0; a < 2; ++a) {
      const std::int64_t n_one = cells.ones[z][a];
      const std::int64_t n_zero = cells.n[z][a] - n_one;
      for (int i = 0; i < 2; ++i) {
        const std::int64_t cnt = i == 1 ? n_one : n_zero;
        if (cnt == 0) continue;
        const ObservationRecord rec{static_cast<std::uint8_t>(z), static_cast<std::uint8_t>(a),
                                    static_cast<std::uint8_t>(i)};
        const Eigen::Matrix<double, 13, 1> q = evaluate_Q_masked(rec, theta, spec, active);
        acc += static_cast<double>(cnt) * (q * q.transpose());
      }
    }
  return acc / static_cast<double>(cells.total);
}

SandwichResult sandwich(const ObservationSet& data, const ThetaVector& theta, ModelSpec spec,
                        double level) {
  return sandwich(data, theta, spec, level, kAll);
}

SandwichResult sandwich(const ObservationSet& data, const ThetaVector& theta, ModelSpec spec,
                        double level, const std::array<bool, 13>& active) {
  const auto idx = active_indices(active);
  const int m = static_cast<int>(idx.size());

  const Eigen::MatrixXd bread_full = bread_matrix(data, theta, spec, active);
  const Eigen::MatrixXd meat_full = meat_matrix(data, theta, spec, active);

  Eigen::MatrixXd A(m, m), B(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      A(r, c) = bread_full(idx[r], idx[c]);
      B(r, c) = meat_full(idx[r], idx[c]);
    }

  // condition number from the extreme singular values; no silent pseudo-inverse
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(m - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < kExclusionConditionNumber)) throw ExcludedError(cond);

  const Eigen::MatrixXd Ainv = A.fullPivLu().inverse();
  const Eigen::MatrixXd cov_active =
      (Ainv * B * Ainv.transpose()) / static_cast<double>(data.size());

  SandwichResult out;
  out.bread_condition_number = cond;
  out.covariance = Eigen::MatrixXd::Constant(13, 13, kNan);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) out.covariance(idx[r], idx[c]) = cov_active(r, c);

  const double z = norm_quantile(0.5 * (1.0 + level));
  const auto v = theta_pack(theta);
  out.se.fill(kNan);
  for (auto& interval : out.ci) interval = IndexInterval{};
  for (int r = 0; r < m; ++r) {
    const int k = idx[r];
    const double var = cov_active(r, r);
    out.se[static_cast<std::size_t>(k)] = var >= 0.0 ? std::sqrt(var) : kNan;
    const double se = out.se[static_cast<std::size_t>(k)];
    out.ci[static_cast<std::size_t>(k)] =
        IndexInterval{v[static_cast<std::size_t>(k)] - z * se,
                      v[static_cast<std::size_t>(k)] + z * se};
  }
  return out;
}

}  // namespace ivnnt
