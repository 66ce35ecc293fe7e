#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "minnorm/errors.hpp"
#include "minnorm/estimators.hpp"
#include "minnorm/model_shift.hpp"

using namespace minnorm;

TEST_CASE("interpolator risk at the reference point") {
  // V = 300/300, B1 = 5 * 300/600, B2 = 1 * 200*400/(600*300).
  const auto s = ShiftSummary::from_ratios(200, 100, 600, 5, 0.2);
  const RiskBreakdown r = theory_min_norm_model_shift(s);
  CHECK(r.variance == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.b1 == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(r.b2 == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(r.b3 == 0.0);
  CHECK(r.total() == doctest::Approx(3.94444444444).epsilon(1e-10));
}

TEST_CASE("interpolator risk degenerate cases") {
  const auto no_source = ShiftSummary::from_ratios(0, 100, 600, 5, 0.2);
  const RiskBreakdown r = theory_min_norm_model_shift(no_source);
  CHECK(r.b2 == 0.0);
  CHECK(r.total() == doctest::Approx(theory_target_only_isotropic(100, 600, 1, 5)));
  CHECK(theory_min_norm_model_shift(ShiftSummary::from_ratios(200, 100, 600, 5, 0)).b2 == 0.0);
  CHECK_THROWS_AS(theory_min_norm_model_shift(ShiftSummary::from_ratios(400, 200, 600, 5, 0.2)),
                  DomainError);
  CHECK_THROWS_AS(theory_min_norm_model_shift(ShiftSummary::from_ratios(500, 200, 600, 5, 0.2)),
                  DomainError);
}

TEST_CASE("variance increases with n at fixed p") {
  double prev = -1;
  for (Index n1 = 0; n1 < 500; n1 += 25) {
    const double v = theory_min_norm_model_shift(ShiftSummary::from_ratios(n1, 100, 600, 5, 0.2))
                         .variance;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("target-only isotropic risk") {
  CHECK(theory_target_only_isotropic(100, 600, 1, 5) ==
        doctest::Approx(500.0 / 600.0 * 5 + 100.0 / 500.0).epsilon(1e-14));
  CHECK(theory_target_only_isotropic(100, 600, 1, 5) == doctest::Approx(4.3667).epsilon(1e-4));
  CHECK(theory_target_only_isotropic(100, 600, 2, 0) == doctest::Approx(200.0 / 500.0));
  CHECK(theory_target_only_isotropic(0, 600, 1, 5) == doctest::Approx(5.0));
  CHECK(theory_target_only_isotropic(1, 100000, 1, 5) == doctest::Approx(5.0).epsilon(1e-4));
  CHECK_THROWS_AS(theory_target_only_isotropic(600, 600, 1, 5), DomainError);
}

TEST_CASE("multiple sources") {
  const auto one = theory_multi_source({{200, 1.0}}, 100, 600, 1, 5);
  const auto ref = theory_min_norm_model_shift(ShiftSummary::from_ratios(200, 100, 600, 5, 0.2));
  CHECK(one.variance == doctest::Approx(ref.variance));
  CHECK(one.b1 == doctest::Approx(ref.b1));
  CHECK(one.b2 == doctest::Approx(ref.b2));

  // Two blocks of 100 with squared shift 0.5: each contributes 100*500/(600*400) * 0.5.
  const auto two = theory_multi_source({{100, 0.5}, {100, 0.5}}, 100, 600, 1, 5);
  CHECK(two.variance == doctest::Approx(1.0));
  CHECK(two.b1 == doctest::Approx(2.5));
  CHECK(two.b2 == doctest::Approx(0.2083333333333).epsilon(1e-12));

  CHECK(theory_multi_source({{100, 0}, {150, 0}}, 100, 600, 1, 5).b2 == 0.0);
  CHECK_THROWS_AS(theory_multi_source({{300, 1}, {200, 1}}, 100, 600, 1, 5), DomainError);
}

TEST_CASE("transfer decision at the reference point") {
  const TransferDecision d = decide_transfer(5, 0.2, 200, 100, 600);
  CHECK(d.snr_threshold == doctest::Approx(2.4).epsilon(1e-14));
  REQUIRE(d.rho.has_value());
  CHECK(*d.rho == doctest::Approx(0.39).epsilon(1e-14));
  CHECK(d.regime == SnrRegime::high_snr);
  CHECK(d.recommendation == Recommendation::pool);

  const TransferDecision low = decide_transfer(2, 0.0, 200, 100, 600);
  CHECK(low.regime == SnrRegime::low_snr);
  CHECK(low.recommendation == Recommendation::target_only);
  CHECK_FALSE(low.rho.has_value());

  // (1 - 1/gamma) / (1 - 1/gamma1) = 0.5 / (2/3) = 0.75 caps rho for every SNR.
  for (double snr : {3.0, 10.0, 1e3, 1e9})
    CHECK(decide_transfer(snr, 0.75, 200, 100, 600).recommendation ==
          Recommendation::target_only);
}

TEST_CASE("decision agrees with the direct risk comparison") {
  const Index p = 600, n1 = 200, n2 = 100;
  int checked = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double snr = 0.5 + 0.5 * i, ssr = 0.05 * j;
      const double pooled =
          theory_min_norm_model_shift(ShiftSummary::from_ratios(n1, n2, p, snr, ssr)).total();
      const double target = theory_target_only_isotropic(n2, p, 1, snr);
      if (std::abs(pooled - target) < 1e-9) continue;
      const bool pool = decide_transfer(snr, ssr, n1, n2, p).recommendation ==
                        Recommendation::pool;
      CHECK(pool == (pooled < target));
      ++checked;
    }
  CHECK(checked > 350);
}

TEST_CASE("decision is invariant to a common rescaling") {
  for (double c : {0.01, 3.0, 250.0}) {
    auto s = ShiftSummary::from_ratios(200, 100, 600, 5, 0.2, c);
    const auto d = decide_transfer(s.snr(), s.ssr(), 200, 100, 600);
    CHECK(*d.rho == doctest::Approx(0.39));
  }
}

TEST_CASE("optimal target size") {
  const auto o = optimal_target_size(5, 0.2, 200, 600);
  auto risk = [](Index n2) {
    return theory_min_norm_model_shift(ShiftSummary::from_ratios(200, n2, 600, 5, 0.2)).total();
  };
  CHECK(o.grid_risk == doctest::Approx(risk(o.n2_grid_opt)).epsilon(1e-12));
  CHECK(risk(o.n2_grid_opt) <= risk(o.n2_grid_opt + 1));
  if (o.n2_grid_opt > 0) CHECK(risk(o.n2_grid_opt) <= risk(o.n2_grid_opt - 1));
  CHECK(o.grid_risk <= o.printed_formula_risk);
  CHECK(o.grid_risk <= o.stationary_formula_risk);
  CHECK(o.n2_printed_formula == doctest::Approx(400 - std::sqrt(72000.0 + 40.0)));
  CHECK(o.n2_stationary_formula == doctest::Approx(400 - std::sqrt(72000.0 + 16000.0)));

  const auto zero_shift = optimal_target_size(5, 0, 200, 600);
  CHECK(zero_shift.n2_printed_formula == doctest::Approx(zero_shift.n2_stationary_formula));
  CHECK(zero_shift.n2_printed_formula == doctest::Approx(400 - 600 / std::sqrt(5.0)));
  CHECK(std::abs(static_cast<double>(zero_shift.n2_grid_opt) - zero_shift.n2_printed_formula) <=
        1.0);

  const auto tiny = optimal_target_size(1e-6, 0.2, 200, 600);
  CHECK(tiny.n2_grid_opt == 0);
  CHECK(tiny.n2_printed_formula == 0.0);
  CHECK(tiny.n2_stationary_formula == 0.0);

  const std::string rep = optimal_target_size_report(o, 5, 0.2, 200, 600);
  CHECK(rep.find("grid search") != std::string::npos);
  CHECK(rep.find("printed formula") != std::string::npos);
  CHECK(rep.find("stationary formula") != std::string::npos);
}

TEST_CASE("Stieltjes transform and its derivative") {
  for (double g : {0.5, 2.0, 6.0})
    for (double lam : {0.01, 0.1, 1.0, 10.0}) {
      CAPTURE(g);
      CAPTURE(lam);
      const double m = mp_stieltjes(g, lam);
      CHECK(m > 0);
      CHECK(g * lam * m * m + (1 - g + lam) * m - 1 == doctest::Approx(0).epsilon(1e-12));
      // m(z) at z = -lambda, so dm/dz = -dm/dlambda.
      const double h = 1e-6 * lam;
      const double fd = -(mp_stieltjes(g, lam + h) - mp_stieltjes(g, lam - h)) / (2 * h);
      CHECK(mp_stieltjes_derivative(g, lam) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("Stieltjes transform matches an empirical trace") {
  std::mt19937_64 rng(21);
  const Index p = 300, n = 150;
  const Matrix X = testing::gaussian(n, p, rng);
  const Matrix S = X.transpose() * X / static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  for (double lam : {0.1, 1.0}) {
    const double tr = (1.0 / (es.eigenvalues().array() + lam)).mean();
    CHECK(mp_stieltjes(2.0, lam) == doctest::Approx(tr).epsilon(0.03));
  }
}

TEST_CASE("ridge model shift") {
  SUBCASE("f1 at lambda = 1 is the positive root of 4.5 f^2 - 1 = 0") {
    // alpha = 0.5, s = 1.5, gamma1 = 3: linear coefficient 1 + 0.5 - 3 + 1.5 = 0.
    const auto [r, q] = theory_ridge_model_shift(ShiftSummary::from_ratios(200, 100, 600, 5, 0.2), 1.0);
    CHECK(q.alpha == doctest::Approx(0.5));
    CHECK(q.s == doctest::Approx(1.5));
    CHECK(q.f1 == doctest::Approx(1 / std::sqrt(4.5)).epsilon(1e-14));
    CHECK(q.m > 0);
  }
  SUBCASE("small-lambda limit of each component") {
    const auto s = ShiftSummary::from_ratios(200, 100, 600, 5, 0.2);
    const RiskBreakdown ref = theory_min_norm_model_shift(s);
    const RiskBreakdown r = theory_ridge_model_shift(s, 1e-6).first;
    CHECK(r.variance == doctest::Approx(ref.variance).epsilon(1e-3));
    CHECK(r.b1 == doctest::Approx(ref.b1).epsilon(1e-3));
    CHECK(r.b2 == doctest::Approx(ref.b2).epsilon(1e-3));
  }
  SUBCASE("zero cross term gives zero B3") {
    auto s = ShiftSummary::from_ratios(200, 100, 600, 5, 0.2);
    s.cross_term = 0;
    CHECK(theory_ridge_model_shift(s, 0.5).first.b3 == 0.0);
  }
  SUBCASE("printed and simplified variance forms agree") {
    const double g = 2, lam = 0.7;
    const double m = mp_stieltjes(g, lam), mp = mp_stieltjes_derivative(g, lam);
    const double printed = g * m * m * (1 - g + g * lam * lam * mp);
    const auto s = ShiftSummary::from_ratios(200, 100, 600, 5, 0);
    CHECK(theory_ridge_model_shift(s, lam).first.variance ==
          doctest::Approx(printed).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const auto s = ShiftSummary::from_ratios(200, 100, 600, 5, 0.2);
    CHECK_THROWS_AS(theory_ridge_model_shift(s, 0), InputError);
    CHECK_THROWS_AS(theory_ridge_model_shift(ShiftSummary::from_ratios(0, 100, 600, 5, 0), 1),
                    InputError);
  }
}

TEST_CASE("ridge model shift against conditional risk on random designs") {
  // Signals with a nonzero cross term so that B3 is exercised.
  std::mt19937_64 rng(22);
  const Index p = 240, n1 = 80, n2 = 40;
  const double lam = 0.5;
  CoefVector beta2 = testing::gaussian_vec(p, rng, std::sqrt(3.0 / p));
  CoefVector beta1 = 0.4 * beta2 + testing::gaussian_vec(p, rng, std::sqrt(0.5 / p));
  PopulationSpec pop = PopulationSpec::isotropic(beta1, beta2, 1.0);
  const auto s = ShiftSummary::from_population(n1, n2, beta1, beta2, 1.0);
  const RiskBreakdown th = theory_ridge_model_shift(s, lam).first;

  RiskBreakdown avg;
  const int designs = 6;
  for (int k = 0; k < designs; ++k) {
    DatasetPair d;
    d.X1 = testing::gaussian(n1, p, rng);
    d.X2 = testing::gaussian(n2, p, rng);
    d.y1 = Vector::Zero(n1);
    d.y2 = Vector::Zero(n2);
    const RiskBreakdown r = empirical_risk_conditional(d, pop, lam);
    avg.variance += r.variance / designs;
    avg.b1 += r.b1 / designs;
    avg.b2 += r.b2 / designs;
    avg.b3 += r.b3 / designs;
  }
  CHECK(std::abs(th.b3) > 0.05);
  CHECK(avg.variance == doctest::Approx(th.variance).epsilon(0.05));
  CHECK(avg.b1 == doctest::Approx(th.b1).epsilon(0.05));
  CHECK(avg.b2 == doctest::Approx(th.b2).epsilon(0.1));
  CHECK(avg.b3 == doctest::Approx(th.b3).epsilon(0.1));
}
