#include <doctest.h>

#include <cmath>
#include <vector>

#include "bessopt/errors.hpp"
#include "bessopt/modal.hpp"

using namespace bessopt;
using namespace bessopt::modal;

namespace {

struct Component {
    double freq;
    double zeta;
    double amplitude;
    double phase = 0.0;
};

double sigma_of(const Component& c) {
    const double wd = 2.0 * M_PI * c.freq;
    return -c.zeta * wd / std::sqrt(1.0 - c.zeta * c.zeta);
}

std::vector<double> synth(const std::vector<Component>& parts, double dt, std::size_t n) {
    std::vector<double> y(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = dt * static_cast<double>(k);
        for (const auto& c : parts) {
            y[k] += c.amplitude * std::exp(sigma_of(c) * t) * std::cos(2.0 * M_PI * c.freq * t + c.phase);
        }
    }
    return y;
}

EspritConfig whole_window() {
    EspritConfig cfg;
    cfg.window_start = 0.0;
    return cfg;
}

Mode m(double f, double e) {
    Mode x;
    x.freq = f;
    x.energy = e;
    return x;
}

} // namespace

TEST_SUITE("modal") {

TEST_CASE("damping ratio formula") {
    CHECK(damping_ratio(-0.1, 3.7699) == doctest::Approx(0.026516).epsilon(1e-4));
    CHECK(damping_ratio(0.0, 2.0 * M_PI) == 0.0);
    CHECK(damping_ratio(-1.0, 0.0) == 1.0);
    CHECK_THROWS_AS(damping_ratio(0.0, 0.0), DomainError);
}

TEST_CASE("single damped cosine") {
    const double dt = 0.01;
    std::vector<double> y;
    for (int k = 0; k < 1000; ++k) {
        const double t = dt * k;
        y.push_back(std::exp(-0.1 * t) * std::cos(2.0 * M_PI * 0.6 * t));
    }
    const auto modes = estimate_modes(y, dt, whole_window());
    REQUIRE(modes.size() >= 1);
    const double zeta = 0.1 / std::sqrt(0.01 + std::pow(2.0 * M_PI * 0.6, 2));
    CHECK(modes[0].freq == doctest::Approx(0.6).epsilon(1e-4));
    CHECK(modes[0].zeta == doctest::Approx(zeta).epsilon(1e-4));
    CHECK(modes[0].amplitude == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(modes[0].energy > 0.99);
}

TEST_CASE("two damped cosines") {
    const double dt = 0.01;
    const auto y = synth({{0.5, 0.02, 1.0}, {1.2, 0.08, 0.5, 0.4}}, dt, 1000);
    const auto modes = estimate_modes(y, dt, whole_window());
    REQUIRE(modes.size() >= 2);
    CHECK(modes[0].freq == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(modes[0].zeta == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(modes[1].freq == doctest::Approx(1.2).epsilon(1e-3));
    CHECK(modes[1].zeta == doctest::Approx(0.08).epsilon(1e-3));
    CHECK(modes[1].amplitude == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(modes[1].phase == doctest::Approx(0.4).epsilon(1e-3));
}

TEST_CASE("undamped sinusoid") {
    const auto y = synth({{0.8, 0.0, 2.0}}, 0.02, 600);
    const auto modes = estimate_modes(y, 0.02, whole_window());
    REQUIRE_FALSE(modes.empty());
    CHECK(std::abs(modes[0].zeta) < 1e-6);
}

TEST_CASE("scaling the signal scales only the amplitudes") {
    const double dt = 0.01;
    const auto y = synth({{0.5, 0.02, 1.0}, {1.2, 0.08, 0.5}}, dt, 800);
    const auto base = estimate_modes(y, dt, whole_window());
    for (double a : {-3.0, 1e-3, 250.0}) {
        std::vector<double> s(y);
        for (auto& v : s) v *= a;
        const auto scaled = estimate_modes(s, dt, whole_window());
        REQUIRE(scaled.size() == base.size());
        for (std::size_t k = 0; k < base.size(); ++k) {
            CHECK(scaled[k].freq == doctest::Approx(base[k].freq).epsilon(1e-9));
            CHECK(scaled[k].zeta == doctest::Approx(base[k].zeta).epsilon(1e-7));
            CHECK(scaled[k].amplitude == doctest::Approx(std::abs(a) * base[k].amplitude).epsilon(1e-7));
        }
    }
}

TEST_CASE("shifting the window by whole samples") {
    const double dt = 0.01;
    const auto y = synth({{0.5, 0.02, 1.0}, {1.2, 0.08, 0.5}}, dt, 1000);
    EspritConfig a = whole_window();
    a.window_start = 1.0;
    EspritConfig b = a;
    b.window_start = 1.0 + 7 * dt;
    const auto ma = estimate_modes(y, dt, a);
    const auto mb = estimate_modes(y, dt, b);
    REQUIRE(ma.size() >= 2);
    REQUIRE(mb.size() >= 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(ma[k].freq - mb[k].freq) < 1e-6);
        CHECK(std::abs(ma[k].zeta - mb[k].zeta) < 1e-6);
    }
}

TEST_CASE("each oscillatory pole is reported once") {
    const double dt = 0.01;
    const auto y = synth({{0.5, 0.02, 1.0}, {1.2, 0.08, 0.5}}, dt, 1000);
    const auto modes = estimate_modes(y, dt, whole_window());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        CHECK(modes[i].freq > 0.0);
        CHECK(modes[i].amplitude >= 0.0);
        for (std::size_t j = i + 1; j < modes.size(); ++j) CHECK(std::abs(modes[i].freq - modes[j].freq) > 1e-6);
    }
    double total = 0.0;
    for (const auto& md : modes) total += md.energy;
    CHECK(total <= 1.0 + 1e-9);
}

TEST_CASE("fixed order and failure cases") {
    const double dt = 0.01;
    const auto y = synth({{0.5, 0.02, 1.0}}, dt, 400);
    EspritConfig cfg = whole_window();
    cfg.model_order = 2;
    const auto modes = estimate_modes(y, dt, cfg);
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].freq == doctest::Approx(0.5).epsilon(1e-6));

    cfg.model_order = 3;
    CHECK_THROWS_AS(estimate_modes(y, dt, cfg), OrderError);
    cfg.model_order = 6;
    CHECK_THROWS_AS(estimate_modes(y, dt, cfg), OrderError);
    CHECK_THROWS_AS(estimate_modes(std::vector<double>(5, 1.0), dt, whole_window()), OrderError);
    CHECK_THROWS_AS(estimate_modes(std::vector<double>(400, 0.0), dt, whole_window()), OrderError);
    std::vector<double> bad(y);
    bad[10] = std::nan("");
    CHECK_THROWS_AS(estimate_modes(bad, dt, whole_window()), NumericError);
}

TEST_CASE("target selection") {
    const std::vector<Mode> a = {m(0.60, 0.7), m(1.1, 0.3)};
    CHECK(select_target_mode(a, 0.5, 0.8).freq == 0.60);
    const std::vector<Mode> b = {m(0.55, 0.4), m(0.70, 0.5)};
    CHECK(select_target_mode(b, 0.5, 0.8).freq == 0.70);
    CHECK_THROWS_AS(select_target_mode(a, 1.5, 2.0), TargetMissingError);
    CHECK_THROWS_AS(select_target_mode(a, 0.8, 0.5), DomainError);
}

TEST_CASE("mode matching") {
    const std::vector<Mode> base = {m(0.60, 0.6), m(1.10, 0.4)};
    const auto same = match_modes(base, base);
    REQUIRE(same.size() == 2);
    for (const auto& p : same) {
        REQUIRE(p.candidate.has_value());
        CHECK(p.candidate->freq == p.baseline.freq);
    }

    const std::vector<Mode> cand = {m(1.09, 0.5), m(0.63, 0.5)};
    const auto pairs = match_modes(base, cand, 0.1);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].baseline.freq == 0.60);
    CHECK(pairs[0].candidate->freq == 0.63);
    CHECK(pairs[1].baseline.freq == 1.10);
    CHECK(pairs[1].candidate->freq == 1.09);

    const std::vector<Mode> one = {m(0.60, 1.0)};
    const std::vector<Mode> far = {m(0.90, 1.0)};
    const auto none = match_modes(one, far, 0.1);
    REQUIRE(none.size() == 1);
    CHECK_FALSE(none[0].candidate.has_value());

    // A candidate is used only once, by the more energetic baseline mode.
    const std::vector<Mode> crowded = {m(0.60, 0.3), m(0.64, 0.7)};
    const std::vector<Mode> single = {m(0.62, 1.0)};
    const auto greedy = match_modes(crowded, single, 0.1);
    CHECK(greedy[0].baseline.freq == 0.64);
    CHECK(greedy[0].candidate.has_value());
    CHECK_FALSE(greedy[1].candidate.has_value());
}

TEST_CASE("decimation") {
    const std::vector<double> x = {0, 1, 2, 3, 4, 5, 6};
    CHECK(decimate(x, 3) == std::vector<double>{0, 3, 6});
    CHECK(decimate(x, 1) == x);
}

}
