#include "altmax/bounds.hpp"

#include <doctest.h>

#include <cmath>

using namespace altmax;
using namespace altmax::bounds;

namespace {

MatrixXd I(int n) { return MatrixXd::Identity(n, n); }

}  // namespace

TEST_CASE("quadratic form quantile") {
  QuadFormConstants c;
  const double z = quad_form_quantile(2.0, I(1), kInf, &c);
  CHECK(z * z == doctest::Approx(19.0).epsilon(1e-14));
  CHECK(z == doctest::Approx(4.358898943540674).epsilon(1e-14));
  CHECK(c.branch == 2);
  CHECK(c.p_B == 1.0);
  CHECK(c.lambda_star == 1.0);

  const double z4 = quad_form_quantile(0.1, I(4), kInf);
  CHECK(z4 * z4 == doctest::Approx(10.6).epsilon(1e-14));

  CHECK_THROWS_AS(quad_form_quantile(1.0, I(4), 2.0), DomainError);
  CHECK_THROWS_AS(quad_form_quantile(0.0, I(4), kInf), DomainError);
  CHECK(quad_form_quantile(1.0, MatrixXd::Zero(3, 3), kInf) == 0.0);
}

TEST_CASE("quadratic form quantile reaches the third branch for finite g") {
  QuadFormConstants c;
  const double g = 3.0;
  quad_form_quantile(1.0, I(2), g, &c);
  REQUIRE(std::isfinite(c.x_c));
  const double x = c.x_c + 5.0;
  quad_form_quantile(x, I(2), g, &c);
  CHECK(c.branch == 3);
  CHECK(c.y_c * c.y_c <= c.p_B + 6.0 * c.lambda_star * (c.x_c + 2.0) + 1e-12);
}

TEST_CASE("entropy quantiles") {
  CHECK(entropy_quantile_sq(1, 8, 10) == doctest::Approx(16.0));
  CHECK(entropy_quantile_sq(1, 8, 2) == doctest::Approx(122.0));
  CHECK(entropy_quantile_sq(1, 8, 4) == doctest::Approx(16.0));  // boundary takes the first branch
  CHECK(entropy_quantile(1, 7, 10) == doctest::Approx(4.0));
  CHECK(entropy_quantile(1, 7, 2) == doctest::Approx(5.0));
  CHECK(entropy_quantile(0, 0, 1) == 0.0);
  CHECK(entropy_quantile(1, 7, 4) == doctest::Approx(4.0));  // boundary
}

TEST_CASE("initial level and concentration radius") {
  ConditionConstants cc;
  CHECK(initial_level_K0(0, 1, cc, 0) == 0.0);
  cc.nu0 = 1;
  cc.omega = 0.05;
  cc.delta = ScalarMap::constant(0.1);
  CHECK(initial_level_K0(2, 1, cc, 3) == doctest::Approx(13.3).epsilon(1e-14));
  CHECK(initial_level_K0(2.1, 1, cc, 3) > initial_level_K0(2, 1, cc, 3));
  CHECK(initial_level_K0(2, 1, cc, 3.1) > initial_level_K0(2, 1, cc, 3));
  CHECK_THROWS_AS(initial_level_K0(-1, 1, cc, 3), DomainError);

  ConditionConstants c2;
  c2.nu0 = 1;
  c2.b = 1;
  CHECK(concentration_radius_R0(1, 0, 2, c2, 0.5, 1) == doctest::Approx(12.0 * std::sqrt(5.8)).epsilon(1e-14));
  CHECK(concentration_radius_R0(1, 10, 2, c2, 0.5, 1) > concentration_radius_R0(1, 0, 2, c2, 0.5, 1));
  CHECK(concentration_radius_R0(1, 0, 2, c2, 0.5, 1e3) == 1e3);
}

TEST_CASE("spreads") {
  ConditionConstants cc;
  CHECK(spread_parametric(3, 1, 2, cc) == 0.0);
  cc.delta = ScalarMap::linear(0.01);
  cc.nu1 = 1;
  cc.omega = 0.05;
  // z0(x, 4 p*)^2 = 16 for x = 1, p* = 2 (1 + sqrt(9) = 4).
  CHECK(spread_parametric(2, 1, 2, cc) == doctest::Approx(7.24).epsilon(1e-14));
  CHECK(spread_parametric(2.5, 1, 2, cc) > spread_parametric(2, 1, 2, cc));

  // 2 p* + 2 p = 8 with p* = 3, p = 1: z0^2 = (1 + 3)^2 = 16, z = sqrt(18).
  CHECK(spread_semiparametric(1, 1, 3, 1, cc, 0.0) == doctest::Approx(5.48).epsilon(1e-14));
  // z(x, 2p* + 2p) = 4 needs x + 2p* + 2p = 8.
  CHECK(spread_semiparametric_plain(1, 2, 2, 1, cc, 0.0) == doctest::Approx(1.28).epsilon(1e-14));
  ConditionConstants flat = cc;
  flat.delta = ScalarMap::constant(0.01);
  CHECK(spread_semiparametric_plain(2, 2, 2, 1, flat, 0.0) ==
        doctest::Approx(2 * spread_semiparametric_plain(1, 2, 2, 1, flat, 0.0)).epsilon(1e-14));
  CHECK(spread_semiparametric(1, 1, 3, 1, cc, 0.0) >= spread_semiparametric_plain(1, 1, 3, 1, cc, 0.0));

  ConditionConstants zero;
  CHECK(spread_semiparametric(2, 1, 3, 1, zero, 0.3) == 0.0);
  CHECK(spread_semiparametric_plain(2, 1, 3, 1, zero, 0.3) == 0.0);
}

TEST_CASE("converted constants") {
  ConditionConstants cc;
  cc.g = 7.0;
  cc.delta = ScalarMap::linear(0.3);
  cc.omega = 0.2;
  const auto a = convert_conditions(cc, 0.0);
  CHECK(a.g_breve == 7.0);
  CHECK(a.nu_breve == 0.0);
  CHECK(a.omega_breve == 0.2);
  CHECK(a.delta_breve(2.0) == doctest::Approx(0.6));

  cc.g = 1.0;
  const auto b = convert_conditions(cc, 0.5);
  // Frozen from tests/oracle/bounds_oracle.py.
  CHECK(b.g_breve == doctest::Approx(0.55549452437601678).epsilon(1e-14));
  CHECK(b.nu_breve == doctest::Approx(0.90009888137357717).epsilon(1e-14));
}

TEST_CASE("Fisher radius") {
  CHECK(fisher_radius(0, 1, 0.25, 20, 3, 1) == doctest::Approx(192.33304448274005).epsilon(1e-13));
  CHECK(fisher_radius(200, 1, 0.25, 20, 3, 1) == doctest::Approx(16.0 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(fisher_radius(200, 1, 0.25, 20, 3, 1) == doctest::Approx(22.627).epsilon(1e-4));
  for (int k = 0; k < 20; ++k) CHECK(fisher_radius(k + 1, 1, 0.25, 20, 3, 1) < fisher_radius(k, 1, 0.25, 20, 3, 1));
}

TEST_CASE("refined Fisher radius and (A3)") {
  const double C = C_nu(0.25);
  CHECK(fisher_radius_refined(5, 1, 0.25, 20, 3, 0.0) ==
        doctest::Approx(C * 3 + std::pow(0.25, 5) * C * 20).epsilon(1e-14));
  CHECK(fisher_radius_refined(5, 1, 0.25, 20, 3, 1e-4) > fisher_radius_refined(5, 1, 0.25, 20, 3, 0.0));

  const A3Check z = check_A3(0.0, 3, 20, 0.25);
  CHECK(z.c1 == 0.0);
  CHECK(z.c2 == 0.0);
  CHECK(z.pass);
  CHECK_FALSE(check_A3(1e-4, 3, 1e6, 0.25).pass);

  // Frozen from tests/oracle/bounds_oracle.py.
  const A3Check a = check_A3(0.01, 3, 20, 0.25);
  CHECK(a.c1 == doctest::Approx(2.4471551483304037).epsilon(1e-13));
  CHECK(a.c2 == doctest::Approx(15.839191898578665).epsilon(1e-13));
  CHECK_FALSE(a.pass);

  // At eps = 0.001, R0 = 20 the second constant is about 1.58, so (A3) fails
  // and the refined radius is refused.
  const A3Check b = check_A3(0.001, 3, 20, 0.25);
  CHECK(b.c1 < 1.0);
  CHECK_FALSE(b.pass);
  CHECK_THROWS_AS(fisher_radius_refined(5, 1, 0.25, 20, 3, 0.001), DomainError);
}

TEST_CASE("condition (B1)") {
  ConditionConstants cc;
  CHECK(check_B1(1, 2, cc));  // g(r) infinite
  cc.g_r = ScalarMap::constant(0.0);
  CHECK_FALSE(check_B1(1, 2, cc));
  // Equality: 1 + sqrt(1 + 8) = 4 = 3 nu_r^2 g / b with g = 4/6, b = 0.5.
  cc.b = 0.5;
  cc.nu_r = 1.0;
  cc.g_r = ScalarMap::constant(4.0 / 6.0);
  CHECK(check_B1(1, 2, cc));
  cc.g_r = ScalarMap::constant(4.0 / 6.0 - 1e-9);
  CHECK_FALSE(check_B1(1, 2, cc));
  // A table that dips below the threshold beyond r0 fails.
  cc.g_r = ScalarMap::table({{0.0, 10.0}, {1e3, 10.0}, {2e3, 0.1}});
  CHECK_FALSE(check_B1(1, 2, cc));
}

TEST_CASE("stopping rule") {
  CHECK(stopping_steps_K(1, 0.5, 50, 3) == 4);
  CHECK(stopping_steps_K(1, 0.5, 4, 3) == 0);
  CHECK(stopping_steps_K(1, 0.0, 50, 3) == 1);
  CHECK_THROWS_AS(stopping_steps_K(1, 1.0, 50, 3), DomainError);
}

TEST_CASE("kappa") {
  ConditionConstants cc;
  CHECK(kappa(1, 10, cc, 0.0, 0, 0, 0) == 0.0);
  cc.delta = ScalarMap::constant(0.1);
  CHECK(kappa(1, 10, cc, 0.0, 0, 0, 0) == doctest::Approx(0.28284271247461906).epsilon(1e-14));
  cc.delta = ScalarMap::constant(0.05);
  cc.omega2 = 0.01;
  cc.nu2 = 1.0;
  CHECK(kappa(1, 10, cc, 0.25, 0.1, 5, 2) ==
        doctest::Approx(2 * std::sqrt(2.0) * 1.5 / std::sqrt(0.75) * 0.7).epsilon(1e-14));
  CHECK(kappa(1, 10, cc, 0.25, 0.1, 5, 2) == doctest::Approx(3.429).epsilon(1e-3));
}

TEST_CASE("ME radius") {
  const double R = 10.0;
  CHECK(me_radius(0, 0.05, 0.5, R, 1).r == doctest::Approx(2 * std::sqrt(2.0) * R).epsilon(1e-15));
  CHECK(me_radius(10, 0.05, 0.5, R, 1).r == doctest::Approx(0.05524271728019903).epsilon(1e-13));
  const MeRadius second = me_radius(10, 0.2, 0.5, R, 1);
  CHECK(second.second_branch);
  // Frozen from tests/oracle/bounds_oracle.py.
  CHECK(second.L == 0.0);
  CHECK(second.r == doctest::Approx(50.0).epsilon(1e-14));
  CHECK_THROWS_AS(me_radius(3, 0.6, 0.5, R, 1), DomainError);

  // r_k* -> 0 as k grows when kappa < 1 - nu.
  double last = me_radius(400, 0.01, 0.3, R, 1).r;
  CHECK(last < 1e-6);
}

TEST_CASE("report invariants") {
  BoundInputs in;
  in.x = 2;
  in.p = 1;
  in.m = 2;
  in.nu = 0.3;
  in.R_K = 1.0;
  in.cc.delta = ScalarMap::linear(0.01);
  in.cc.omega = 0.01;
  in.cc.omega2 = 0.01;
  in.norm_Dinv = 0.1;
  const BoundReport r = make_report(in);
  CHECK(r.z_x == doctest::Approx(std::max(r.z_quad, std::sqrt(r.z0_sq))));
  for (size_t k = 1; k < r.r_k.size(); ++k) CHECK(r.r_k[k] <= r.r_k[k - 1]);
  CHECK(r.R0 >= r.z_x);
  CHECK(r.r_ups <= r.R0);
  CHECK(r.K_stop == stopping_steps_K(in.x, in.nu, r.R0, r.z_x));
  CHECK(r.mu_c == doctest::Approx(2.0 / 3.0));
  for (double v : {r.z_quad, r.z0_sq, r.z_entropy, r.K0, r.R0, r.spread_Q, r.spread_semi, r.kappa})
    CHECK(v >= 0.0);

  BoundInputs hi = in;
  hi.x = 3;
  const BoundReport r3 = make_report(hi);
  CHECK(r3.z_quad >= r.z_quad);
  CHECK(r3.z0_sq >= r.z0_sq);
  CHECK(r3.R0 >= r.R0);
  CHECK(r3.spread_Q >= r.spread_Q);
  CHECK(r3.kappa >= r.kappa);
}

TEST_CASE("quadratic tail validator") {
  for (int d : {1, 4, 16}) {
    const auto rep = validate_quad_tail(I(d), {1, 2, 3}, 100000, 2024 + d, 4);
    CHECK(rep.pass);
    for (const auto& row : rep.rows) CHECK(row.fraction <= row.bound + 3 * row.se);
  }
  const auto a = validate_quad_tail(I(4), {2}, 50000, 5, 1);
  const auto b = validate_quad_tail(I(4), {2}, 50000, 5, 7);
  CHECK(a.rows[0].fraction == b.rows[0].fraction);
  const auto zero = validate_quad_tail(MatrixXd::Zero(3, 3), {1, 2}, 1000, 5, 1);
  for (const auto& row : zero.rows) CHECK(row.fraction == 0.0);
}
