#include <doctest.h>

#include <cmath>
#include <random>

#include "ivnnt/estimator.hpp"
#include "ivnnt/rng.hpp"
#include "testutil.hpp"

using namespace ivnnt;
using namespace ivnnt::testutil;

namespace {

// cell means (0.2, 0.4, 0.3, 0.6) over (z,a) in {(0,0),(0,1),(1,0),(1,1)}
ObservationSet cell_mean_dataset() {
  return dataset_from_counts({{{10, 10}, {10, 10}}}, {{{2, 4}, {3, 6}}});
}

}  // namespace

TEST_CASE("fit_association reproduces cell means on the link scale") {
  const auto data = cell_mean_dataset();
  for (auto kind : {LinkKind::logit, LinkKind::probit}) {
    const auto fit = fit_association(data, {kind});
    auto fwd = [&](double p) { return link_forward(kind, p); };
    CHECK(fit.beta[0] == doctest::Approx(fwd(0.2)).epsilon(1e-9));
    CHECK(fit.beta[1] == doctest::Approx(fwd(0.4) - fwd(0.2)).epsilon(1e-9));
    CHECK(fit.beta[2] == doctest::Approx(fwd(0.3) - fwd(0.2)).epsilon(1e-9));
    CHECK(fit.beta[3] ==
          doctest::Approx(fwd(0.6) - fwd(0.3) - fwd(0.4) + fwd(0.2)).epsilon(1e-9));
    CHECK(fit.pi_z == doctest::Approx(0.5));
    // fitted cell probabilities equal empirical means
    for (int z = 0; z < 2; ++z)
      for (int a = 0; a < 2; ++a) {
        const double eta = fit.beta[0] + fit.beta[1] * a + fit.beta[2] * z + fit.beta[3] * a * z;
        CHECK(link_inverse(kind, eta) ==
              doctest::Approx(data.cells().outcome_mean(z, a)).epsilon(1e-9));
      }
  }
}

TEST_CASE("fit_association score equations are zeroed") {
  const auto data = cell_mean_dataset();
  const auto fit = fit_association(data, {LinkKind::logit});
  ThetaVector t;
  t.beta = fit.beta;
  t.pi_z = fit.pi_z;
  std::array<bool, 13> score_only{};
  for (int k = kBeta0; k <= kPiZ; ++k) score_only[static_cast<std::size_t>(k)] = true;
  const auto q = mean_estimating_function(data, t, {LinkKind::logit}, score_only);
  CHECK(q.norm() < 1e-10);
}

TEST_CASE("fit_association detects separation") {
  const auto data = dataset_from_counts({{{10, 10}, {10, 10}}}, {{{2, 4}, {3, 10}}});
  try {
    (void)fit_association(data, {LinkKind::logit});
    FAIL("expected SeparationError");
  } catch (const SeparationError& e) {
    REQUIRE(e.cells.size() == 1);
    CHECK(e.cells[0] == std::pair<int, int>(1, 1));
  }
}

TEST_CASE("counterfactual_mean_h") {
  const std::array<double, 4> beta{-0.4, 0.8, 0.3, -0.2};
  SUBCASE("zero causal effect returns the fitted mean") {
    for (auto kind : {LinkKind::logit, LinkKind::probit})
      for (int a = 0; a < 2; ++a)
        for (int z = 0; z < 2; ++z)
          for (int ao = 0; ao < 2; ++ao) {
            const double eta = beta[0] + beta[1] * ao + beta[2] * z + beta[3] * ao * z;
            CHECK(counterfactual_mean_h(a, z, ao, beta, {0.0, 0.0}, {kind}) ==
                  doctest::Approx(link_inverse(kind, eta)).epsilon(1e-14));
          }
  }
  SUBCASE("logit exposed counterfactual") {
    const std::array<double, 4> b{-0.4, 0.8, 0.0, 0.0};
    const double psi1 = 1.1;
    CHECK(counterfactual_mean_h(1, 0, 1, b, {0.0, psi1}, {LinkKind::logit}) ==
          doctest::Approx(expit(b[0] + b[1] - psi1)).epsilon(1e-14));
  }
  SUBCASE("probit unexposed counterfactual") {
    const double psi0 = 0.7;
    CHECK(counterfactual_mean_h(0, 1, 0, beta, {psi0, 0.0}, {LinkKind::probit}) ==
          doctest::Approx(norm_cdf(beta[0] + beta[2] + psi0)).epsilon(1e-14));
  }
}

TEST_CASE("solve_psi recovers the causal parameters on large DGP samples") {
  SUBCASE("logit") {
    const auto cfg = reference_logit_config();
    const auto truth = solve_first_root(cfg);
    const auto data = generate(truth, cfg, 1000000, 20240817u);
    const auto fit = fit_association(data, cfg.spec);
    const auto s1 = solve_psi(1, data, fit.beta, fit.pi_z, cfg.spec);
    REQUIRE(s1.status == SolveStatus::solved);
    CHECK(s1.root == doctest::Approx(1.5).epsilon(0.02 / 1.5));
    // the returned root zeroes the mean estimating function
    ThetaVector t;
    t.beta = fit.beta;
    t.pi_z = fit.pi_z;
    t.psi1 = s1.root;
    std::array<bool, 13> only_dh1{};
    only_dh1[kPsi1] = true;
    CHECK(std::fabs(mean_estimating_function(data, t, cfg.spec, only_dh1)[kPsi1]) < 1e-10);
  }
  SUBCASE("probit") {
    const auto cfg = reference_probit_config();
    const auto truth = solve_first_root(cfg);
    const auto data = generate(truth, cfg, 1000000, 99u);
    const auto fit = fit_association(data, cfg.spec);
    const auto s0 = solve_psi(0, data, fit.beta, fit.pi_z, cfg.spec);
    REQUIRE(s0.status == SolveStatus::solved);
    CHECK(std::fabs(s0.root - 1.0) < 0.03);
  }
}

TEST_CASE("plugin_benefits zero effect reduction") {
  const auto data = cell_mean_dataset();
  for (auto kind : {LinkKind::logit, LinkKind::probit}) {
    const auto fit = fit_association(data, {kind});
    const auto b = plugin_benefits(data, fit.beta, {0.0, 0.0}, {kind});
    CHECK(b.pb0 == 0.0);
    CHECK(b.pb1 == 0.0);
    CHECK(b.pb == 0.0);
  }
}

TEST_CASE("plugin_benefits approaches the reference truths on large samples") {
  SUBCASE("logit") {
    const auto cfg = reference_logit_config();
    const auto truth = solve_first_root(cfg);
    const auto data = generate(truth, cfg, 1000000, 4242u);
    const auto fit = fit_association(data, cfg.spec);
    const auto s0 = solve_psi(0, data, fit.beta, fit.pi_z, cfg.spec);
    const auto s1 = solve_psi(1, data, fit.beta, fit.pi_z, cfg.spec);
    REQUIRE(s0.status == SolveStatus::solved);
    REQUIRE(s1.status == SolveStatus::solved);
    const auto b = plugin_benefits(data, fit.beta, {s0.root, s1.root}, cfg.spec);
    CHECK(std::fabs(b.pb0 - 1.0 / 5.60) < 0.01);
    CHECK(std::fabs(b.pb1 - 1.0 / 4.18) < 0.01);
    CHECK(std::fabs(b.pb - 1.0 / 4.65) < 0.01);
  }
  SUBCASE("probit") {
    const auto cfg = reference_probit_config();
    const auto truth = solve_first_root(cfg);
    const auto data = generate(truth, cfg, 1000000, 513u);
    const auto fit = fit_association(data, cfg.spec);
    const auto s0 = solve_psi(0, data, fit.beta, fit.pi_z, cfg.spec);
    const auto s1 = solve_psi(1, data, fit.beta, fit.pi_z, cfg.spec);
    REQUIRE(s0.status == SolveStatus::solved);
    REQUIRE(s1.status == SolveStatus::solved);
    const auto b = plugin_benefits(data, fit.beta, {s0.root, s1.root}, cfg.spec);
    CHECK(std::fabs(b.pb0 - 1.0 / 3.41) < 0.01);
    CHECK(std::fabs(b.pb1 - 1.0 / 2.81) < 0.01);
    CHECK(std::fabs(b.pb - 1.0 / 3.02) < 0.01);
  }
}

TEST_CASE("g_estimate on a moderate sample") {
  const auto cfg = reference_logit_config();
  const auto truth = solve_first_root(cfg);
  const auto data = generate(truth, cfg, 4000, 7u);
  const auto res = g_estimate(data, cfg.spec);
  REQUIRE(res.psi0_status == SolveStatus::solved);
  REQUIRE(res.psi1_status == SolveStatus::solved);
  CHECK(std::isfinite(res.theta_hat.nnt));
  // within 3 Monte Carlo SEs (replication SD 0.552 at n=4000)
  CHECK(std::fabs(res.theta_hat.nnt - 4.65) < 3 * 0.552);
  CHECK(res.q_residual_norm < 1e-8);
}

TEST_CASE("evaluate_Q mean is zero at the estimate") {
  const auto cfg = reference_logit_config();
  const auto truth = solve_first_root(cfg);
  const auto data = generate(truth, cfg, 2000, 11u);
  const auto res = g_estimate(data, cfg.spec);
  REQUIRE(res.psi0_status == SolveStatus::solved);
  REQUIRE(res.psi1_status == SolveStatus::solved);

  // record-level accumulation of the public evaluate_Q
  Eigen::Matrix<double, 13, 1> acc = Eigen::Matrix<double, 13, 1>::Zero();
  for (const auto& r : data.records()) acc += evaluate_Q(r, res.theta_hat, cfg.spec);
  acc /= static_cast<double>(data.size());
  CHECK(acc.norm() < 1e-8);
}

TEST_CASE("evaluate_Q throws on infinite index entries") {
  ThetaVector t;
  t.beta = {0.1, 0.2, 0.3, 0.4};
  t.pi_z = 0.5;
  t.pb0 = -0.1;
  t.nne = std::numeric_limits<double>::infinity();
  t.ein = 2.0;
  t.nnt = 3.0;
  CHECK_THROWS_AS((void)evaluate_Q({0, 0, 1}, t, {LinkKind::logit}), NonFiniteThetaError);
}

TEST_CASE("evaluate_Q unbiasedness at the true theta") {
  const auto cfg = reference_logit_config();
  const auto truth = solve_first_root(cfg);
  const auto theta = true_theta(truth, cfg);
  const std::size_t n = 1000000;
  const auto data = generate(truth, cfg, n, 31337u);

  std::array<bool, 13> all{};
  all.fill(true);
  const auto mean_q = mean_estimating_function(data, theta, cfg.spec, all);
  // component-wise SE from the meat diagonal
  Eigen::Matrix<double, 13, 1> acc2 = Eigen::Matrix<double, 13, 1>::Zero();
  for (const auto& r : data.records()) {
    const auto q = evaluate_Q(r, theta, cfg.spec);
    acc2 += q.cwiseProduct(q);
  }
  for (int k = 0; k < 13; ++k) {
    const double var = acc2[k] / static_cast<double>(n) - mean_q[k] * mean_q[k];
    const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    if (se > 0) CHECK(std::fabs(mean_q[k]) < 4 * se);
  }
}

TEST_CASE("solve_psi finds every sign change and reports multiple roots") {
  // randomized search for configurations whose Dh function has several roots;
  // a very fine oracle scan provides the reference root count
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> ub(-3.0, 3.0);
  std::uniform_int_distribution<int> un(5, 60);
  int multi_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::array<std::array<int, 2>, 2> n{};
    std::array<std::array<int, 2>, 2> ones{};
    for (int z = 0; z < 2; ++z)
      for (int a = 0; a < 2; ++a) {
        n[z][a] = un(gen);
        ones[z][a] = std::uniform_int_distribution<int>(1, n[z][a] - 1)(gen);
      }
    const auto data = dataset_from_counts(n, ones);
    std::array<double, 4> beta{ub(gen), ub(gen), ub(gen), ub(gen)};
    const double pi_z =
        static_cast<double>(data.cells().count_z(1)) / static_cast<double>(data.cells().total);

    const auto sol = solve_psi(1, data, beta, pi_z, {LinkKind::logit});

    // oracle: dense scan of the mean estimating function
    auto f = [&](double psi) {
      double s = 0;
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a) {
          const double eta = beta[0] + beta[1] * a + beta[2] * z + beta[3] * a * z;
          s += n[z][a] * (z - pi_z) * expit(eta - psi * a);
        }
      return s / data.cells().total;
    };
    int oracle_roots = 0;
    double prev = f(-20.0);
    for (int k = 1; k <= 100000; ++k) {
      const double x = -20.0 + 40.0 * k / 100000.0;
      const double fx = f(x);
      if ((prev < 0) != (fx < 0)) ++oracle_roots;
      prev = fx;
    }
    if (oracle_roots == 0) {
      CHECK(sol.status == SolveStatus::no_solution);
      continue;
    }
    REQUIRE(sol.status == SolveStatus::solved);
    CHECK(static_cast<int>(sol.all_roots.size()) == oracle_roots);
    CHECK(sol.multiple_roots == (oracle_roots > 1));
    if (sol.multiple_roots) {
      ++multi_seen;
      // smallest-magnitude root selected
      for (double r : sol.all_roots) CHECK(std::fabs(sol.root) <= std::fabs(r) + 1e-12);
    }
    CHECK(std::fabs(f(sol.root)) < 1e-10);
  }
  CHECK(multi_seen > 0);  // the property was actually exercised
}

TEST_CASE("naive estimates: crude") {
  // mean(I|A=1)=0.5, mean(I|A=0)=0.3 -> crude nnt = g(0.2) = 5
  const auto data = dataset_from_counts({{{10, 10}, {10, 10}}}, {{{3, 5}, {3, 5}}});
  const auto b = naive_estimates(data, BaselineMode::crude);
  CHECK(b.nnt == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(b.ein == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(b.nne == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("naive estimates: Z-standardized equals crude when Z carries nothing") {
  // Z independent of A and of I: identical cells across z
  const auto data = dataset_from_counts({{{40, 60}, {40, 60}}}, {{{12, 30}, {12, 30}}});
  const auto crude = naive_estimates(data, BaselineMode::crude);
  const auto adj = naive_estimates(data, BaselineMode::adjust_for_instrument);
  CHECK(adj.nnt == doctest::Approx(crude.nnt).epsilon(1e-12));
  CHECK(adj.ein == doctest::Approx(crude.ein).epsilon(1e-12));
  CHECK(adj.nne == doctest::Approx(crude.nne).epsilon(1e-12));
}

TEST_CASE("naive EIN under the reference DGP is infinite") {
  const auto cfg = reference_logit_config();
  const auto truth = solve_first_root(cfg);
  const auto data = generate(truth, cfg, 4000, 5u);
  const auto b = naive_estimates(data, BaselineMode::adjust_for_instrument);
  CHECK(std::isinf(b.ein));  // benefit estimate is negative
}

TEST_CASE("zero-effect reduction: indices infinite") {
  // unconfounded null DGP: beta1=0, psi=0
  DgpConfig cfg = DgpConfig::with_derived_gamma0({LinkKind::logit}, 0.0, 0.0, 0.5, 2.0, 0.5,
                                                 0.4, 0.0);
  DgpTruth truth = truth_from_beta(cfg, {logit(0.4), 0.0, 0.0, 0.0});
  const auto data = generate(truth, cfg, 5000, 99u);
  const auto fit = fit_association(data, cfg.spec);
  const auto b = plugin_benefits(data, fit.beta, {0.0, 0.0}, cfg.spec);
  CHECK(b.pb0 == 0.0);
  CHECK(b.pb1 == 0.0);
  CHECK(b.pb == 0.0);
  CHECK(std::isinf(g_transform(b.pb0)));
  CHECK(std::isinf(g_transform(b.pb1)));
  CHECK(std::isinf(g_transform(b.pb)));
}

TEST_CASE("group decomposition identity for the marginal benefit") {
  const auto cfg = reference_logit_config();
  const auto truth = solve_first_root(cfg);
  const auto data = generate(truth, cfg, 3000, 13u);
  const auto fit = fit_association(data, cfg.spec);
  const auto s0 = solve_psi(0, data, fit.beta, fit.pi_z, cfg.spec);
  const auto s1 = solve_psi(1, data, fit.beta, fit.pi_z, cfg.spec);
  const auto b = plugin_benefits(data, fit.beta, {s0.root, s1.root}, cfg.spec);
  // exposure-share-weighted mean of within-group averages
  const auto& cells = data.cells();
  const double w1 = static_cast<double>(cells.count_a(1)) / static_cast<double>(cells.total);
  const double recomposed = (1 - w1) * b.pb0 + w1 * b.pb1;
  CHECK(std::fabs(recomposed - b.pb) < 1e-12);
}

TEST_CASE("psi0 without a root yields a partial result, EIN still reported") {
  // hand-found cell configuration whose psi0 estimating function has no sign
  // change on [-20, 20] while the psi1 equation solves normally
  const auto data = dataset_from_counts({{{21, 24}, {3, 24}}}, {{{10, 12}, {2, 7}}});
  const auto res = g_estimate(data, {LinkKind::logit});
  CHECK(res.psi0_status == SolveStatus::no_solution);
  REQUIRE(res.psi1_status == SolveStatus::solved);
  CHECK(std::isnan(res.theta_hat.psi0));
  CHECK(std::isnan(res.theta_hat.pb0));
  CHECK(std::isnan(res.theta_hat.nne));
  CHECK(std::isnan(res.theta_hat.pb));   // marginal benefit needs both psi
  CHECK(std::isnan(res.theta_hat.nnt));
  CHECK_FALSE(std::isnan(res.theta_hat.pb1));
  CHECK(res.psi0_bracket.first == -20.0);
  CHECK(res.psi0_bracket.second == 20.0);

  const auto active = active_components(res);
  CHECK_FALSE(active[kPsi0]);
  CHECK_FALSE(active[kNne]);
  CHECK(active[kPsi1]);
  CHECK((active[kEin] || !std::isfinite(res.theta_hat.ein)));
}

TEST_CASE("weak instrument data still yields diagnostics") {
  // Z nearly independent of (A, I): empirically near-degenerate Dh equations
  std::array<std::array<int, 2>, 2> n{{{500, 500}, {500, 501}}};
  std::array<std::array<int, 2>, 2> ones{{{150, 250}, {150, 251}}};
  const auto data = dataset_from_counts(n, ones);
  const auto fit = fit_association(data, {LinkKind::logit});
  const auto s1 = solve_psi(1, data, fit.beta, fit.pi_z, {LinkKind::logit});
  // the operation reports whatever the data support; it must not throw
  CHECK((s1.status == SolveStatus::solved || s1.status == SolveStatus::no_solution));
}
