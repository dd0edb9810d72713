#include <doctest.h>

#include <cmath>

#include "nhtopo/error.hpp"
#include "nhtopo/model.hpp"
#include "oracles.hpp"

using namespace nhtopo;

TEST_CASE("ssh epsilon and omega follow the expanded band formula") {
  for (int i = 0; i < 200; ++i) {
    const double k = oracle::uniform(-oracle::pi, oracle::pi);
    const SshParams p{oracle::uniform(-2, 2), oracle::uniform(-2, 2), oracle::uniform(-2, 2)};
    const auto eo = ssh_epsilon_omega(k, p);
    const double eps = p.tp * p.tp + p.t * p.t - p.delta * p.delta + 2 * p.tp * p.t * std::cos(k);
    const double om = 2 * p.tp * p.delta * std::sin(k);
    CHECK(eo.epsilon == doctest::Approx(eps).epsilon(1e-12).scale(1.0));
    CHECK(eo.omega == doctest::Approx(om).epsilon(1e-12).scale(1.0));
    const auto q = ssh_off_diagonal(k, p);
    const cplx prod = q.q_plus * q.q_minus;
    CHECK(prod.real() == doctest::Approx(eps).scale(1.0));
    CHECK(prod.imag() == doctest::Approx(om).scale(1.0));
  }
}

TEST_CASE("chern epsilon and omega equal h . h") {
  for (int i = 0; i < 200; ++i) {
    const double kx = oracle::uniform(-oracle::pi, oracle::pi), ky = oracle::uniform(-oracle::pi, oracle::pi);
    const ChernParams p{oracle::uniform(0.2, 2), oracle::uniform(-4, 4), oracle::uniform(0, 4)};
    const auto eo = chern_epsilon_omega(kx, ky, p);
    const cplx e2 = oracle::chern_e2(kx, ky, p.t, p.m, p.gamma);
    CHECK(eo.epsilon == doctest::Approx(e2.real()).scale(1.0));
    CHECK(eo.omega == doctest::Approx(e2.imag()).scale(1.0));
    const cplx hh = chern_h(kx, ky, p).dot_self();
    CHECK(hh.real() == doctest::Approx(e2.real()).scale(1.0));
    CHECK(hh.imag() == doctest::Approx(e2.imag()).scale(1.0));
  }
}

TEST_CASE("band derivatives match central differences") {
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const double k = oracle::uniform(-3, 3);
    const SshParams p{oracle::uniform(-2, 2), oracle::uniform(-2, 2), oracle::uniform(-2, 2)};
    const auto d = ssh_epsilon_omega_dk(k, p);
    const auto a = ssh_epsilon_omega(k + h, p), b = ssh_epsilon_omega(k - h, p);
    CHECK(d.epsilon == doctest::Approx((a.epsilon - b.epsilon) / (2 * h)).epsilon(1e-6).scale(1.0));
    CHECK(d.omega == doctest::Approx((a.omega - b.omega) / (2 * h)).epsilon(1e-6).scale(1.0));

    const double kx = oracle::uniform(-3, 3), ky = oracle::uniform(-3, 3);
    const ChernParams c{oracle::uniform(0.2, 2), oracle::uniform(-4, 4), oracle::uniform(0, 4)};
    const auto dx = chern_epsilon_omega_dkx(kx, ky, c), dy = chern_epsilon_omega_dky(kx, ky, c);
    const auto xp = chern_epsilon_omega(kx + h, ky, c), xm = chern_epsilon_omega(kx - h, ky, c);
    const auto yp = chern_epsilon_omega(kx, ky + h, c), ym = chern_epsilon_omega(kx, ky - h, c);
    CHECK(dx.epsilon == doctest::Approx((xp.epsilon - xm.epsilon) / (2 * h)).epsilon(1e-6).scale(1.0));
    CHECK(dx.omega == doctest::Approx((xp.omega - xm.omega) / (2 * h)).epsilon(1e-6).scale(1.0));
    CHECK(dy.epsilon == doctest::Approx((yp.epsilon - ym.epsilon) / (2 * h)).epsilon(1e-6).scale(1.0));
    CHECK(dy.omega == doctest::Approx((yp.omega - ym.omega) / (2 * h)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("band_sample squares back to E^2 and respects the sign conventions") {
  for (int i = 0; i < 500; ++i) {
    const double e = oracle::uniform(-5, 5), w = oracle::uniform(-5, 5);
    for (int branch : {1, -1}) {
      const auto s = band_sample(e, w, branch);
      CHECK(s.eR >= 0.0);
      CHECK(s.eI >= 0.0);
      CHECK(s.branch == branch);
      const cplx v = s.value();
      CHECK((v * v).real() == doctest::Approx(e).scale(1.0));
      CHECK((v * v).imag() == doctest::Approx(w).scale(1.0));
      CHECK(s.re() == doctest::Approx(v.real()));
      CHECK(s.im() == doctest::Approx(v.imag()));
    }
  }
  CHECK(band_sample(0.0, 0.0).exceptional);
  CHECK_FALSE(band_sample(1e-6, 0.0).exceptional);
  const auto neg = band_sample(-4.0, 0.0);
  CHECK(neg.eR == doctest::Approx(0.0));
  CHECK(neg.eI == doctest::Approx(2.0));
}

TEST_CASE("band values agree with high-precision references") {
  struct SshCase {
    double k, t, tp, delta, eps, om, er, ei;
  };
  const SshCase ssh_cases[] = {
      {0.7, 0.8, 1.0, 0.3, 2.7737474996551816401, 0.38653061234261466904, 1.6694756127495249997,
       0.11576407866959560203},
      {2.1, 0.5, 1.2, -0.4, 0.92418467448017086413, -0.82868099198291879214, 1.0405494242862702636,
       0.39819396015298578083},
      {-1.3, 1.5, 0.7, 0.9, 2.4917475401116332397, -1.2140833136256630285, 1.6222722808699493888,
       0.37419221419927314929},
  };
  for (const auto& c : ssh_cases) {
    const auto eo = ssh_epsilon_omega(c.k, {c.t, c.tp, c.delta});
    CHECK(eo.epsilon == doctest::Approx(c.eps).epsilon(1e-14));
    CHECK(eo.omega == doctest::Approx(c.om).epsilon(1e-14));
    const auto s = band_sample(eo);
    CHECK(s.eR == doctest::Approx(c.er).epsilon(1e-14));
    CHECK(s.eI == doctest::Approx(c.ei).epsilon(1e-14));
  }
  struct ChernCase {
    double kx, ky, t, m, gamma, eps, om, er, ei;
  };
  const ChernCase chern_cases[] = {
      {0.4, 1.1, 1.0, 0.5, 1.0, 3.4602365043806535655, -1.7824147201228707605, 1.9173637219314975436,
       0.46480871097511874102},
      {-2.0, 0.3, 1.0, 3.0, 0.5, 13.190017399895432935, -0.2955202066613395645, 3.6320342045236656665,
       0.040682464704389598929},
      {1.7, -2.5, 1.3, -1.2, 2.0, 4.070456453439397363, 3.1120551493405738754, 2.1440934776751758079,
       0.72572748850366158468},
  };
  for (const auto& c : chern_cases) {
    const auto eo = chern_epsilon_omega(c.kx, c.ky, {c.t, c.m, c.gamma});
    CHECK(eo.epsilon == doctest::Approx(c.eps).epsilon(1e-14));
    CHECK(eo.omega == doctest::Approx(c.om).epsilon(1e-13));
    const auto s = band_sample(eo);
    CHECK(s.eR == doctest::Approx(c.er).epsilon(1e-14));
    CHECK(s.eI == doctest::Approx(c.ei).epsilon(1e-13));
  }
}

TEST_CASE("registry lookups and parameter validation") {
  CHECK(model_info("ssh").dimension == 1);
  CHECK(model_info("chern").dimension == 2);
  CHECK(model_ids().size() == 2);
  CHECK_THROWS_AS(model_info("haldane"), UnsupportedModel);
  CHECK_THROWS_AS(ssh_params({{"gamma", 1.0}}), UsageError);
  CHECK_THROWS_AS(chern_params({{"t", 0.0}}), UsageError);
  CHECK_THROWS_AS(chern_params({{"m", std::nan("")}}), UsageError);
  const auto p = chern_params({{"m", 2.0}});
  CHECK(p.t == 1.0);
  CHECK(p.m == 2.0);
  const double k[2] = {0.3, -0.7};
  const auto eo = epsilon_omega("chern", k, {{"m", 1.0}, {"gamma", 0.5}});
  const auto direct = chern_epsilon_omega(0.3, -0.7, {1.0, 1.0, 0.5});
  CHECK(eo.epsilon == direct.epsilon);
  CHECK(eo.omega == direct.omega);
  CHECK_THROWS_AS(epsilon_omega("ssh", k, {}), UsageError);
  const auto round = ssh_params(to_param_map(SshParams{0.3, 0.7, -0.2}));
  CHECK(round.t == 0.3);
  CHECK(round.tp == 0.7);
  CHECK(round.delta == -0.2);
}
