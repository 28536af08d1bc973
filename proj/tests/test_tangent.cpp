// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "npd/errors.hpp"
#include "npd/spectral.hpp"
#include "npd/tangent.hpp"
#include "support.hpp"

using namespace npd;
using npd::test::field;

namespace {

double rel_diff(const TangentVector& a, const TangentVector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, test::max_abs_diff(a[i], b[i]));
    for (std::size_t m = 0; m < a[i].size(); ++m) den = std::max(den, std::abs(b[i][m]));
  }
  return num / den;
}

TangentVector scaled(TangentVector v, double a) {
  for (auto& f : v) f *= a;
  return v;
}

TangentVector random_vector(const SpectralGrid& g, std::size_t species, std::uint64_t seed, int k_max) {
  std::mt19937_64 rng(seed);
  TangentVector xi;
  for (std::size_t i = 0; i < species; ++i) xi.push_back(random_band_limited_spectrum(g, k_max, rng));
  return xi;
}

// Sorted Laplacian eigenvalues |k|^2 of mean-free real modes with |k_j| <= band,
// each with the given multiplicity.
std::vector<double> lattice_spectrum(int dim, int band, int multiplicity) {
  std::vector<double> mu;
  const int b3 = dim == 3 ? band : 0;
  for (int k3 = -b3; k3 <= b3; ++k3) {
    for (int k2 = -band; k2 <= band; ++k2) {
      for (int k1 = -band; k1 <= band; ++k1) {
        if (k1 == 0 && k2 == 0 && k3 == 0) continue;
        for (int r = 0; r < multiplicity; ++r) mu.push_back(double(k1 * k1 + k2 * k2 + k3 * k3));
      }
    }
  }
  std::sort(mu.begin(), mu.end());
  return mu;
}

}  // namespace

TEST_SUITE("tangent") {
  TEST_CASE("equilibrium base") {
    const auto g = SpectralGrid::make(3, 16);
    const double d = 0.6;
    const std::vector<double> z{1.0, -1.0, 1.0}, cbar{1.0, 2.0, 1.0};
    const Model model(SpeciesParams::make(d, z), BodyCharge::none(g));
    const NpdState eq(0.0, {RealField(g, cbar[0]), RealField(g, cbar[1]), RealField(g, cbar[2])});

    TangentVector neutral = random_vector(g, 3, 3, 5);
    project_charge_free(neutral, z);
    const TangentVector heat = tangent_tendency(model, eq, neutral);
    for (std::size_t i = 0; i < 3; ++i) {
      SpectralField lap = spectral::laplacian(neutral[i]);
      lap *= d;
      CHECK(test::max_abs_diff(heat[i], lap) <= 1e-13);
    }

    const TangentVector xi = random_vector(g, 3, 4, 5);
    SpectralField r(g);
    for (std::size_t i = 0; i < 3; ++i) r += scaled({xi[i]}, z[i])[0];
    const TangentVector got = tangent_tendency(model, eq, xi);
    for (std::size_t i = 0; i < 3; ++i) {
      SpectralField expect = spectral::laplacian(xi[i]);
      expect *= d;
      SpectralField coupling = r;
      coupling *= -d * z[i] * cbar[i];
      expect += coupling;
      CHECK(test::max_abs_diff(got[i], expect) <= 1e-13);
    }
  }

  TEST_CASE("finite-difference linearization") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto sc = test::random_scenario(3, 16, 60 + seed, 4, {1.0, -1.0, 1.0}, {1.0, 2.0, 1.0}, 0.3, 0.3);
      const Model model(sc.params, sc.body);
      const TangentVector xi = random_vector(sc.state.grid(), 3, 90 + seed, 4);
      const double eps = 1e-6;
      auto shifted = [&](double s) {
        SpeciesFields c = sc.state.concentrations();
        for (std::size_t i = 0; i < 3; ++i) {
          RealField d = spectral::inverse(xi[i]);
          d *= s * eps;
          c[i] += d;
        }
        return model.tendency(NpdState(0.0, c));
      };
      const SpeciesFields fp = shifted(1.0), fm = shifted(-1.0);
      const TangentVector lin = tangent_tendency(model, sc.state, xi);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        const RealField li = spectral::inverse(lin[i]);
        for (std::size_t p = 0; p < li.size(); ++p) {
          const double fd = (fp[i][p] - fm[i][p]) / (2 * eps);
          num = std::max(num, std::abs(fd - li[p]));
          den = std::max(den, std::abs(fd));
        }
      }
      CHECK(num / den <= 1e-5);
    }
  }

  TEST_CASE("tangent steps") {
    const auto g = SpectralGrid::make(3, 16);
    const double d = 0.9, dt = 0.05;
    const Model model(SpeciesParams::make(d, {1.0, -1.0}), BodyCharge::none(g));
    const NpdState eq(0.0, {RealField(g, 1.0), RealField(g, 1.0)});
    NpdState eq_next = eq;
    eq_next.set_time(dt);

    CHECK(step_tangents(model, eq, eq_next, {}, dt).empty());

    const RealField c1 = field(g, [](double x, double, double) { return 0.3 * std::cos(x); });
    const TangentVector mode{spectral::forward(c1), spectral::forward(c1)};
    const auto out = step_tangents(model, eq, eq_next, {mode}, dt);
    CHECK(std::abs(out[0][0].at({1, 0, 0}).real() - 0.15 * std::exp(-d * dt)) <= 1e-10);
    CHECK(std::abs(out[0][1].at({1, 0, 0}).real() - 0.15 * std::exp(-d * dt)) <= 1e-10);

    auto sc = test::random_scenario(3, 16, 4, 4, {1.0, -1.0}, {1.0, 1.0}, 0.3, 0.3);
    const Model generic(sc.params, sc.body);
    Stepper stepper(generic, {});
    const NpdState next = stepper.step(sc.state, 0.01);
    const TangentVector xi = random_vector(g, 2, 8, 5);
    const auto a = step_tangents(generic, sc.state, next, {scaled(xi, 2.5)}, 0.01);
    const auto b = step_tangents(generic, sc.state, next, {xi}, 0.01);
    CHECK(rel_diff(a[0], scaled(b[0], 2.5)) <= 1e-12);
    const auto zero = step_tangents(generic, sc.state, next, {scaled(xi, 0.0)}, 0.01);
    for (const auto& f : zero[0]) CHECK(spectral::l2_norm(f) == 0.0);
  }

  TEST_CASE("gram volumes") {
    const auto g = SpectralGrid::make(3, 16);
    auto set = random_tangents(g, 2, 4, 5, 5, false, std::vector<double>{1.0, -1.0});
    CHECK(gram_volume(set) == doctest::Approx(1.0).epsilon(1e-12));
    const auto gm = gram_matrix(set, 4);
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t l = 0; l < 4; ++l) CHECK(std::abs(gm[j * 4 + l] - (j == l ? 1.0 : 0.0)) <= 1e-12);
    }

    auto scaled_set = set;
    scaled_set[2] = scaled(scaled_set[2], -3.0);
    CHECK(gram_volume(scaled_set) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(*log_gram_volume(scaled_set, 2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    auto dup = set;
    dup[3] = dup[1];
    CHECK(gram_volume(dup) == 0.0);
    CHECK(!log_gram_volume(dup, 4).has_value());
    CHECK(log_gram_volume(dup, 3).has_value());
    CHECK_THROWS_AS(orthonormalize(dup), Error);

    // Rotations inside the span leave the volume unchanged.
    auto rotated = set;
    const double th = 0.7;
    for (std::size_t i = 0; i < 2; ++i) {
      SpectralField u = set[0][i], v = set[1][i];
      u *= std::cos(th);
      SpectralField w = set[1][i];
      w *= std::sin(th);
      u += w;
      SpectralField x = set[0][i];
      x *= -std::sin(th);
      v *= std::cos(th);
      v += x;
      rotated[0][i] = u;
      rotated[1][i] = v;
    }
    CHECK(gram_volume(rotated) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("charge-free projection") {
    const auto g = SpectralGrid::make(3, 8);
    const std::vector<double> z{2.0, -2.0, 2.0};
    TangentVector xi = random_vector(g, 3, 2, 2);
    project_charge_free(xi, z);
    SpectralField r(g);
    for (std::size_t i = 0; i < 3; ++i) r += scaled({xi[i]}, z[i])[0];
    CHECK(spectral::l2_norm(r) <= 1e-15 * spectral::v_norm(xi));
    const TangentVector again = [&] {
      TangentVector c = xi;
      project_charge_free(c, z);
      return c;
    }();
    CHECK(rel_diff(again, xi) <= 1e-15);
  }

  TEST_CASE("equilibrium volume decay matches the lattice spectrum") {
    const auto g = SpectralGrid::make(3, 16);
    const Model model(SpeciesParams::make(1.0, {1.0, -1.0}), BodyCharge::none(g));
    const NpdState eq(0.0, {RealField(g, 1.0), RealField(g, 1.0)});
    StepperConfig cfg;
    cfg.output_every = 0.5;
    cfg.dt_max = 0.02;
    const Stepper stepper(model, cfg);
    VolumeDecayOptions opt;
    opt.n_list = {1, 2, 4, 8};
    opt.t0 = 4.0;
    opt.t1 = 6.0;
    opt.charge_free = true;
    opt.k_max = 3;
    const auto res = volume_decay_experiment(stepper, eq, opt);
    const auto mu = lattice_spectrum(3, 3, 1);
    for (const auto& r : res.rates) {
      double expect = 0.0;
      for (int j = 0; j < r.n; ++j) expect += mu[static_cast<std::size_t>(j)];
      MESSAGE("n=" << r.n << " rate=" << r.rate << " expect=" << expect);
      CHECK(r.rate == doctest::Approx(expect).epsilon(0.05));
    }
    CHECK(res.rates[0].rate == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("reorthonormalization interval does not change the volumes") {
    auto sc = test::random_scenario(3, 16, 14, 4, {1.0, -1.0}, {1.0, 1.0}, 0.3, 0.3);
    const Model model(sc.params, sc.body);
    StepperConfig cfg;
    cfg.output_every = 0.1;
    const Stepper stepper(model, cfg);
    VolumeDecayOptions opt;
    opt.n_list = {1, 2, 4};
    opt.t0 = 0.2;
    opt.t1 = 0.5;
    opt.reorth_every = 5;
    const auto a = volume_decay_experiment(stepper, sc.state, opt);
    opt.reorth_every = 20;
    const auto b = volume_decay_experiment(stepper, sc.state, opt);
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t q = 0; q < 3; ++q) {
      for (std::size_t j = 0; j < a.times.size(); ++j) {
        REQUIRE(std::abs(a.log_volumes[q][j] - b.log_volumes[q][j]) <= 1e-8 * (1.0 + std::abs(a.log_volumes[q][j])));
      }
      CHECK(a.rates[q].rate == doctest::Approx(b.rates[q].rate).epsilon(1e-8));
    }
    CHECK(a.rates[1].rate > a.rates[0].rate);
    CHECK(a.rates[2].rate > a.rates[1].rate);
  }

  TEST_CASE("option validation") {
    auto sc = test::random_scenario(3, 8, 1, 2, {1.0, -1.0}, {1.0, 1.0}, 0.1);
    const Model model(sc.params, sc.body);
    const Stepper stepper(model, {});
    VolumeDecayOptions opt;
    opt.n_list = {};
    CHECK_THROWS_AS(volume_decay_experiment(stepper, sc.state, opt), Error);
    opt.n_list = {1};
    opt.t0 = 1.0;
    opt.t1 = 0.5;
    CHECK_THROWS_AS(volume_decay_experiment(stepper, sc.state, opt), Error);
  }
}
