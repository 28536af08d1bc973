// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "npd/errors.hpp"
#include "npd/scenarios.hpp"
#include "npd/spectral.hpp"
#include "support.hpp"

using namespace npd;

namespace {

ScenarioSpec small_spec() {
  ScenarioSpec s;
  s.n = 16;
  return s;
}

}  // namespace

TEST_SUITE("scenarios") {
  TEST_CASE("zero amplitude gives the constant state") {
    ScenarioSpec s = small_spec();
    s.epsilon = 0.0;
    s.means = {1.5, 1.5};
    const NpdState st = random_state(s);
    for (const auto& c : st.concentrations()) {
      CHECK(c.min() == 1.5);
      CHECK(c.max_abs() == 1.5);
    }
  }

  TEST_CASE("seeded states are reproducible") {
    const ScenarioSpec s = small_spec();
    const NpdState a = random_state(s), b = random_state(s);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(test::max_abs_diff(a.concentration(i).values(), b.concentration(i).values()) == 0.0);
    }
    ScenarioSpec other = s;
    other.seed = 2;
    CHECK(test::max_abs_diff(a.concentration(0).values(), random_state(other).concentration(0).values()) > 0.0);
    CHECK(test::max_abs_diff(a.concentration(0).values(), a.concentration(1).values()) > 0.0);
  }

  TEST_CASE("positivity and exact means over many seeds") {
    ScenarioSpec s = small_spec();
    s.epsilon = 0.5;
    s.means = {1.0, 1.0};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      s.seed = seed;
      const NpdState st = random_state(s);
      for (const auto& c : st.concentrations()) {
        REQUIRE(c.min() >= 0.5 - 1e-15);
        REQUIRE(std::abs(c.mean() - 1.0) <= 1e-15);
        double dev = 0.0;
        for (double v : c.values()) dev = std::max(dev, std::abs(v - 1.0));
        REQUIRE(dev == doctest::Approx(0.5).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("noise is the same function on finer grids") {
    const auto g16 = SpectralGrid::make(3, 16);
    const auto g32 = SpectralGrid::make(3, 32);
    std::mt19937_64 r1(9), r2(9);
    const SpectralField a = random_band_limited_spectrum(g16, 4, r1);
    const SpectralField b = random_band_limited_spectrum(g32, 4, r2);
    CHECK(test::max_abs_diff(spectral::resample(a, g32), b) <= 1e-15);
    CHECK(std::abs(a[0]) == 0.0);
  }

  TEST_CASE("spec validation") {
    ScenarioSpec s = small_spec();
    s.epsilon = 1.0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_spec();
    s.means = {1.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_spec();
    s.means = {1.0, 2.0};
    CHECK_THROWS_AS(build_scenario(s), Error);
    s = small_spec();
    s.k_max = 9;
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_spec();
    s.n = 24;
    CHECK_THROWS_AS(s.validate(), Error);
    CHECK_NOTHROW(small_spec().validate());
  }

  TEST_CASE("body charge") {
    ScenarioSpec s = small_spec();
    const NpdState st = random_state(s);
    CHECK(neutral_body_charge(s, st).rho_tilde.max_abs() == 0.0);

    s.body = BodyRecipe::BandLimited;
    s.body_amplitude = 0.3;
    const BodyCharge b = neutral_body_charge(s, st);
    const RealField rho = charge_density(st.concentrations(), s.params());
    CHECK(std::abs(rho.mean() + b.rho_tilde.mean()) <= 1e-15);
    CHECK(b.rho_tilde.max_abs() > 0.1);

    // A charged background state gets the opposite net body charge.
    ScenarioSpec charged = small_spec();
    charged.means = {1.0, 1.0};
    NpdState shifted = random_state(charged);
    shifted.mutable_concentrations()[0] += RealField(shifted.grid(), 2.0 / std::pow(2 * std::numbers::pi, 3));
    charged.body = BodyRecipe::BandLimited;
    charged.body_amplitude = 0.2;
    const BodyCharge nb = neutral_body_charge(charged, shifted);
    const double vol = std::pow(2 * std::numbers::pi, 3);
    CHECK(nb.rho_tilde.mean() * vol == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK_NOTHROW(solve_potential(charge_density(shifted.concentrations(), charged.params()), nb));

    s.body_amplitude = 0.3;
    const Scenario sc = build_scenario(s);
    CHECK(sc.state.time() == 0.0);
    CHECK(Model(sc.params, sc.body).validate(sc.state).ok());
  }

  TEST_CASE("gaussian blobs") {
    ScenarioSpec s = small_spec();
    GaussianBlob none;
    none.amplitude = 0.0;
    const NpdState flat = gaussian_blob_state(s, {none});
    for (const auto& c : flat.concentrations()) CHECK(c.max_abs() == 1.0);

    GaussianBlob one;
    one.species = 0;
    one.center = {1.0, 2.0, 3.0};
    one.width = 0.6;
    one.amplitude = 2.0;
    const NpdState st = gaussian_blob_state(s, {one});
    const double mass = 2.0 * std::pow(2 * std::numbers::pi * 0.6 * 0.6, 1.5);
    CHECK(st.concentration(0).mean() == doctest::Approx(1.0 + mass / std::pow(2 * std::numbers::pi, 3)).epsilon(1e-10));
    CHECK(st.concentration(1).mean() == 1.0);
    CHECK(st.concentration(0).min() >= 1.0);

    GaussianBlob other = one;
    other.species = 1;
    other.center = {4.0, 4.0, 1.0};
    const NpdState pair = gaussian_blob_state(s, {one, other});
    const Model model(s.params(), BodyCharge::none(pair.grid()));
    double umax = 0.0;
    for (const auto& comp : model.derived(pair).velocity) umax = std::max(umax, comp.max_abs());
    CHECK(umax > 1e-3);

    GaussianBlob bad = one;
    bad.species = 5;
    CHECK_THROWS_AS(gaussian_blob_state(s, {bad}), Error);
  }
}
