#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "minnorm/covariate_shift.hpp"
#include "minnorm/errors.hpp"
#include "minnorm/estimators.hpp"
#include "minnorm/model_shift.hpp"

using namespace minnorm;

namespace {

// Positive root of 2a^2(p-n)^2 + a(p-n)(p-2n1)(kappa + 1/kappa) - 2 n1 (p - n1) = 0.
double reciprocal_root(double kappa, double n1, double n2, double p) {
  const double n = n1 + n2;
  const double A = 2 * (p - n) * (p - n);
  const double B = (p - n) * (p - 2 * n1) * (kappa + 1 / kappa);
  const double C = -2 * n1 * (p - n1);
  return (-B + std::sqrt(B * B - 4 * A * C)) / (2 * A);
}

JointSpectrum random_spectrum(std::mt19937_64& rng, int atoms) {
  std::uniform_real_distribution<double> eig(0.2, 5), wt(0.1, 1);
  JointSpectrum H;
  double total = 0;
  for (int i = 0; i < atoms; ++i) {
    H.atoms.push_back({eig(rng), eig(rng), wt(rng)});
    total += H.atoms.back().weight;
  }
  for (auto& a : H.atoms) a.weight /= total;
  double again = 0;
  for (auto& a : H.atoms) again += a.weight;
  H.atoms.back().weight += 1 - again;
  return H;
}

double max_abs(const std::array<double, 8>& r) {
  double m = 0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("isotropic reduction of the interpolator system") {
  const JointSpectrum H = JointSpectrum::isotropic();
  const CovariateSolution sol = solve_covariate_interpolator(H, 200, 100, 600);
  CHECK(sol.a[0] == doctest::Approx(200.0 / 300.0).epsilon(1e-13));
  CHECK(sol.a[1] == doctest::Approx(100.0 / 300.0).epsilon(1e-13));
  CHECK(sol.residual_norm <= 1e-12);

  const RiskBreakdown r =
      risk_covariate_shift(H, SignalSpectrum::aligned_with(H), 200, 100, 600, 1.0, 5.0);
  CHECK(std::abs(r.variance - 1.0) < 1e-10);
  CHECK(std::abs(r.b1 - 2.5) < 1e-10);
  CHECK(r.b2 == 0.0);
  CHECK(r.b3 == 0.0);
}

TEST_CASE("reciprocal-pair first unknown matches the quadratic root") {
  const double p = 600, n2 = 100;
  for (double kappa : {1.5, 2.0, 4.0, 10.0})
    for (double frac : {0.1, 0.3, 0.45}) {
      const double n1 = frac * p;
      CAPTURE(kappa);
      CAPTURE(n1);
      const auto sol = solve_interpolator_system(JointSpectrum::reciprocal_pair(kappa),
                                                 static_cast<Index>(n1), 100, 600);
      CHECK(std::abs(sol.a[0] - reciprocal_root(kappa, n1, n2, p)) < 1e-8);
    }
}

TEST_CASE("kappa = 1 reciprocal pair is isotropic") {
  const auto a = solve_covariate_interpolator(JointSpectrum::reciprocal_pair(1), 150, 100, 600);
  const auto b = solve_covariate_interpolator(JointSpectrum::isotropic(), 150, 100, 600);
  for (int i = 0; i < 4; ++i) {
    CHECK(a.a[i] == doctest::Approx(b.a[i]).epsilon(1e-12));
    CHECK(a.b[i] == doctest::Approx(b.b[i]).epsilon(1e-12));
  }
}

TEST_CASE("bias and variance systems share their leading unknowns") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 5; ++t) {
    const JointSpectrum H = random_spectrum(rng, 20);
    const auto va = solve_interpolator_system(H, 150, 120, 600);
    const auto vb = solve_bias_system(H, 150, 120, 600);
    CHECK(std::abs(vb[0] - va.a[0]) + std::abs(vb[1] - va.a[1]) <= 10 * SolverSettings{}.tol);
    CHECK(va.a[0] > 0);
    CHECK(va.a[1] > 0);
  }
}

TEST_CASE("residual certification on random spectra, both systems") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 10; ++t) {
    const JointSpectrum H = random_spectrum(rng, 20);
    const auto sol = solve_covariate_interpolator(H, 180, 90, 500);
    CHECK(max_abs(covariate_residuals(H, 180, 90, 500, sol)) <= 1e-10);
    for (double lam : {1e-3, 0.5, 4.0}) {
      const auto [r, rs] =
          solve_ridge_covariate(H, SignalSpectrum::aligned_with(H), 180, 90, 500, 1, 1, lam);
      CHECK(max_abs(covariate_residuals(H, 180, 90, 500, rs)) <= 1e-10);
      CHECK(rs.a[0] > 0);
      CHECK(rs.a[1] > 0);
      CHECK(r.variance >= 0);
    }
  }
}

TEST_CASE("bias does not depend on kappa when Sigma2 = I") {
  const JointSpectrum base = JointSpectrum::reciprocal_pair(1);
  const double b0 =
      risk_covariate_shift(base, SignalSpectrum::aligned_with(base), 200, 100, 600, 1, 5).b1;
  for (double kappa : {1.5, 3.0, 8.0}) {
    const JointSpectrum H = JointSpectrum::reciprocal_pair(kappa);
    const double b = risk_covariate_shift(H, SignalSpectrum::aligned_with(H), 200, 100, 600, 1, 5).b1;
    CHECK(b == doctest::Approx(b0).epsilon(1e-10));
  }
}

TEST_CASE("heterogeneity profile") {
  const std::vector<double> grid{1, 2, 4, 8};
  const auto small = heterogeneity_profile(grid, 200, 100, 600, 1, 5);
  CHECK(small.observed == KappaTrend::decreasing);
  CHECK(small.predicted == KappaTrend::decreasing);
  CHECK(small.rows.front().diff_to_identity == 0.0);
  for (std::size_t i = 1; i < small.rows.size(); ++i)
    CHECK(small.rows[i].risk < small.rows[i - 1].risk);

  const auto large = heterogeneity_profile(grid, 350, 100, 600, 1, 5);
  CHECK(large.observed == KappaTrend::increasing);
  CHECK(large.predicted == KappaTrend::increasing);

  const auto cross = heterogeneity_profile(grid, 300, 100, 600, 1, 5);
  CHECK(cross.observed == KappaTrend::invariant);
  CHECK(cross.predicted == KappaTrend::invariant);
  for (const auto& row : cross.rows) CHECK(std::abs(row.diff_to_identity) < 1e-8);

  CHECK_THROWS_AS(heterogeneity_profile({0.5}, 200, 100, 600, 1, 5), InputError);
}

TEST_CASE("ridge covariate system") {
  const JointSpectrum H = JointSpectrum::isotropic();
  const SignalSpectrum G = SignalSpectrum::aligned_with(H);

  SUBCASE("isotropic variance equals the model-shift ridge variance") {
    for (double lam : {0.05, 1.0, 3.0}) {
      const double v = solve_ridge_covariate(H, G, 200, 100, 600, 1, 5, lam).first.variance;
      const double ref =
          theory_ridge_model_shift(ShiftSummary::from_ratios(200, 100, 600, 5, 0), lam)
              .first.variance;
      CHECK(std::abs(v - ref) < 1e-6);
    }
  }
  SUBCASE("small-lambda rescaling recovers the interpolator solution") {
    std::mt19937_64 rng(33);
    const JointSpectrum R = random_spectrum(rng, 8);
    const double lam = 1e-6;
    const auto rs = solve_ridge_covariate(R, SignalSpectrum::aligned_with(R), 200, 100, 600, 1,
                                          1, lam)
                        .second;
    const auto is = solve_covariate_interpolator(R, 200, 100, 600);
    CHECK(rs.a[0] / lam == doctest::Approx(is.a[0]).epsilon(1e-3));
    CHECK(rs.a[1] / lam == doctest::Approx(is.a[1]).epsilon(1e-3));
    const RiskBreakdown ri = risk_from_solution(R, SignalSpectrum::aligned_with(R), 200, 100,
                                                600, 1, 1, is);
    const RiskBreakdown rr =
        solve_ridge_covariate(R, SignalSpectrum::aligned_with(R), 200, 100, 600, 1, 1, lam).first;
    CHECK(rr.variance == doctest::Approx(ri.variance).epsilon(1e-3));
    CHECK(rr.b1 == doctest::Approx(ri.b1).epsilon(1e-3));
  }
  SUBCASE("variance vanishes for large penalties") {
    CHECK(solve_ridge_covariate(H, G, 200, 100, 600, 1, 5, 1e6).first.variance < 1e-6);
  }
  SUBCASE("works below the interpolation threshold") {
    const auto [r, s] = solve_ridge_covariate(H, G, 500, 300, 600, 1, 5, 0.5);
    CHECK(r.variance > 0);
    CHECK(s.residual_norm < 1e-10);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(solve_ridge_covariate(H, G, 200, 100, 600, 1, 5, 0), InputError);
  }
}

TEST_CASE("anisotropic covariate-shift risk against simulation") {
  std::mt19937_64 rng(34);
  const Index p = 300, n1 = 90, n2 = 60;
  std::uniform_real_distribution<double> eig(0.2, 5);
  Vector l1(p), l2(p);
  for (Index j = 0; j < p; ++j) {
    l1(j) = eig(rng);
    l2(j) = eig(rng);
  }
  const CoefVector beta = testing::gaussian_vec(p, rng, std::sqrt(5.0 / p));
  const JointSpectrum H = joint_spectrum_from_diagonals(l1, l2);
  const SignalSpectrum G = SignalSpectrum::from_coefficients(l1, l2, beta);
  PopulationSpec pop = PopulationSpec::isotropic(beta, beta, 1.0);
  pop.sigma2 = l2.asDiagonal();

  const RiskBreakdown th = risk_covariate_shift(H, G, n1, n2, p, 1.0, beta.squaredNorm());
  const RiskBreakdown thr = solve_ridge_covariate(H, G, n1, n2, p, 1.0, beta.squaredNorm(), 0.3).first;
  double v = 0, b = 0, vr = 0, br = 0;
  const int designs = 6;
  for (int k = 0; k < designs; ++k) {
    DatasetPair d;
    d.X1 = testing::gaussian(n1, p, rng) * l1.cwiseSqrt().asDiagonal();
    d.X2 = testing::gaussian(n2, p, rng) * l2.cwiseSqrt().asDiagonal();
    d.y1 = Vector::Zero(n1);
    d.y2 = Vector::Zero(n2);
    const RiskBreakdown r = empirical_risk_conditional(d, pop);
    const RiskBreakdown rr = empirical_risk_conditional(d, pop, 0.3);
    v += r.variance / designs;
    b += r.b1 / designs;
    vr += rr.variance / designs;
    br += rr.b1 / designs;
  }
  CHECK(v == doctest::Approx(th.variance).epsilon(0.05));
  CHECK(b == doctest::Approx(th.b1).epsilon(0.05));
  CHECK(vr == doctest::Approx(thr.variance).epsilon(0.05));
  CHECK(br == doctest::Approx(thr.b1).epsilon(0.05));
}

TEST_CASE("degenerate sample sizes") {
  const JointSpectrum H = JointSpectrum::reciprocal_pair(3);
  const SignalSpectrum G = SignalSpectrum::aligned_with(H);
  const auto no_source = solve_covariate_interpolator(H, 0, 100, 600);
  CHECK(no_source.a[0] == 0.0);
  CHECK(no_source.a[1] == doctest::Approx(100.0 / 500.0).epsilon(1e-12));
  CHECK(risk_covariate_shift(H, G, 0, 100, 600, 1, 5).total() ==
        doctest::Approx(theory_target_only_isotropic(100, 600, 1, 5)).epsilon(1e-10));
  const auto no_target = solve_covariate_interpolator(H, 100, 0, 600);
  CHECK(no_target.a[1] == 0.0);
  CHECK(no_target.residual_norm < 1e-10);

  CHECK_THROWS_AS(solve_interpolator_system(H, 300, 300, 600), DomainError);
  CHECK_THROWS_AS(solve_interpolator_system(H, 0, 0, 600), InputError);
}

TEST_CASE("spectrum validation") {
  JointSpectrum bad{{{1, 1, 0.5}, {2, 1, 0.4}}};
  CHECK_THROWS_AS(bad.validate(), InputError);
  JointSpectrum neg{{{-1, 1, 1}}};
  CHECK_THROWS_AS(neg.validate(), InputError);
  JointSpectrum tau{{{0.01, 1, 1}}};
  CHECK_NOTHROW(tau.validate());
  CHECK_THROWS_AS(tau.validate(0.1), InputError);
  SignalSpectrum g{{{1, 1, 0.0}, {1, 1, 1.0}}};
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("target-only anisotropic risk") {
  const JointSpectrum iso = JointSpectrum::isotropic();
  const auto r = theory_target_only_anisotropic(iso, SignalSpectrum::aligned_with(iso), 100, 600,
                                                1, 5);
  CHECK(r.risk == doctest::Approx(theory_target_only_isotropic(100, 600, 1, 5)).epsilon(1e-12));
  CHECK(r.gamma_star == doctest::Approx(6.0));

  const JointSpectrum two{{{1, 2.0, 0.5}, {1, 0.5, 0.5}}};
  const auto t = theory_target_only_anisotropic(two, SignalSpectrum::aligned_with(two), 100, 600,
                                                1, 5);
  const auto null_sig = theory_target_only_anisotropic(two, SignalSpectrum::aligned_with(two),
                                                       100, 600, 1, 0);
  CHECK(null_sig.risk > 0);
  CHECK(null_sig.c0 == t.c0);

  // Scan the residual on a 1e-6 grid and take the first sign change.
  double c = 0, prev = target_only_fixed_point_residual(two, 100, 600, 0), scan = -1;
  for (long k = 1; k < 10000000; ++k) {
    c = 1e-6 * static_cast<double>(k);
    const double cur = target_only_fixed_point_residual(two, 100, 600, c);
    if (std::signbit(cur) != std::signbit(prev)) {
      scan = c - 0.5e-6;
      break;
    }
    prev = cur;
  }
  REQUIRE(scan > 0);
  CHECK(std::abs(t.c0 - scan) <= 1e-6);
}

TEST_CASE("target-only anisotropic risk against simulation") {
  std::mt19937_64 rng(35);
  const Index p = 300, n2 = 60;
  Vector l2(p);
  l2.head(p / 2).setConstant(2.0);
  l2.tail(p / 2).setConstant(0.5);
  const CoefVector beta = testing::gaussian_vec(p, rng, std::sqrt(5.0 / p));
  const JointSpectrum H = joint_spectrum_from_diagonals(Vector::Ones(p), l2);
  const SignalSpectrum G = SignalSpectrum::from_coefficients(Vector::Ones(p), l2, beta);
  const double th =
      theory_target_only_anisotropic(H, G, n2, p, 1.0, beta.squaredNorm()).risk;
  PopulationSpec pop = PopulationSpec::isotropic(beta, beta, 1.0);
  pop.sigma2 = l2.asDiagonal();
  double emp = 0;
  const int designs = 8;
  for (int k = 0; k < designs; ++k) {
    DatasetPair d;
    d.X1.resize(0, p);
    d.y1.resize(0);
    d.X2 = testing::gaussian(n2, p, rng) * l2.cwiseSqrt().asDiagonal();
    d.y2 = Vector::Zero(n2);
    emp += empirical_risk_conditional(d, pop).total() / designs;
  }
  CHECK(emp == doctest::Approx(th).epsilon(0.05));
}
