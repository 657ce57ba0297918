#include <doctest.h>

#include <cmath>

#include "bessopt/cases.hpp"
#include "bessopt/errors.hpp"
#include "bessopt/grid.hpp"

using namespace bessopt;
using namespace bessopt::grid;

namespace {

PowerSystemCase two_bus(double r, double x, double b, double load_p = 0.0, double load_q = 0.0) {
    PowerSystemCase c;
    c.name = "two_bus";
    c.buses = {{1, BusType::slack, 1.0, {0.0, 0.0}}, {2, BusType::pq, 1.0, {0.0, 0.0}}};
    c.branches = {{1, 2, r, x, b, true}};
    c.generators = {{1, 0.0, 3.0, 0.0, 0.2}};
    if (load_p != 0.0 || load_q != 0.0) c.loads = {{2, load_p, load_q}};
    return c;
}

} // namespace

TEST_SUITE("grid") {

TEST_CASE("ybus of a pure reactance") {
    const auto y = build_ybus(two_bus(0.0, 0.1, 0.0));
    CHECK(std::abs(y(0, 0) - Complex(0.0, -10.0)) < 1e-12);
    CHECK(std::abs(y(0, 1) - Complex(0.0, 10.0)) < 1e-12);
    CHECK(std::abs(y(1, 0) - Complex(0.0, 10.0)) < 1e-12);
    CHECK(std::abs(y(1, 1) - Complex(0.0, -10.0)) < 1e-12);
}

TEST_CASE("ybus with the branch out of service is empty") {
    auto c = two_bus(0.0, 0.1, 0.0);
    c.branches[0].in_service = false;
    CHECK(build_ybus(c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ybus with resistance and charging") {
    const auto y = build_ybus(two_bus(0.01, 0.1, 0.02));
    // 1/(0.01 + 0.1j) = (0.01 - 0.1j) / 0.0101
    const Complex ys(0.01 / 0.0101, -0.1 / 0.0101);
    CHECK(std::abs(y(0, 1) + ys) < 1e-12);
    CHECK(std::abs(y(0, 1) - Complex(-0.9901, 9.9010)) < 1e-4);
    CHECK(std::abs(y(0, 0) - (ys + Complex(0.0, 0.01))) < 1e-12);
    CHECK(std::abs(y(1, 1) - (ys + Complex(0.0, 0.01))) < 1e-12);
}

TEST_CASE("ybus rejects a branch to a missing bus") {
    auto c = two_bus(0.0, 0.1, 0.0);
    c.branches.push_back({1, 7, 0.0, 0.1, 0.0, true});
    CHECK_THROWS_AS(build_ybus(c), StructuralError);
}

TEST_CASE("ybus of the bundled 39-bus case is symmetric") {
    const auto y = build_ybus(cases::load_bundled_case("ne39_weak"));
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("no-load two-bus power flow") {
    const auto op = solve_power_flow(two_bus(0.0, 0.1, 0.0));
    CHECK(std::abs(op.v(1) - Complex(1.0, 0.0)) < 1e-12);
    CHECK(op.mismatch < 1e-12);
}

TEST_CASE("loaded two-bus power flow against a bisection oracle") {
    // Q2 = 0 forces |V2| = cos(theta2); P balance gives cos(t) sin(t) / x = -P.
    const double x = 0.1;
    const double p = 0.5;
    auto f = [&](double t) { return std::cos(t) * std::sin(t) / x + p; };
    double lo = -M_PI / 4.0;
    double hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    const double theta = 0.5 * (lo + hi);
    const auto op = solve_power_flow(two_bus(0.0, x, 0.0, p, 0.0));
    CHECK(std::arg(op.v(1)) == doctest::Approx(theta).epsilon(1e-9));
    CHECK(std::abs(op.v(1)) == doctest::Approx(std::cos(theta)).epsilon(1e-9));
    CHECK(op.mismatch < 1e-8);
}

TEST_CASE("power flow reports divergence with the final mismatch") {
    // Far beyond the transfer limit of the line.
    const auto c = two_bus(0.0, 0.1, 0.0, 50.0, 0.0);
    try {
        solve_power_flow(c);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.mismatch() > 1e-8);
    }
}

TEST_CASE("power flow rejects disconnected networks") {
    auto c = two_bus(0.0, 0.1, 0.0);
    c.buses.push_back({3, BusType::pq, 1.0, {0.0, 0.0}});
    CHECK_THROWS_AS(solve_power_flow(c), StructuralError);
}

TEST_CASE("bundled cases solve and balance") {
    for (const auto& name : cases::bundled_case_names()) {
        CAPTURE(name);
        const auto c = cases::load_bundled_case(name);
        const auto op = solve_power_flow(c);
        CHECK(op.mismatch < 1e-8);
        CHECK(power_balance_residual(c, op).maxCoeff() < 1e-8);
    }
    const auto ne = cases::load_bundled_case("ne39_weak");
    CHECK(ne.buses.size() == 39);
    CHECK(ne.generators.size() == 10);
    const auto smib = cases::load_bundled_case("smib");
    CHECK(smib.buses.size() == 2);
    CHECK(smib.generators.size() == 1);
    CHECK_THROWS_AS(cases::load_bundled_case("nordic"), LookupError);
}

TEST_CASE("identity scenario reproduces the solution") {
    const auto c = cases::load_bundled_case("ne39_weak");
    const auto a = solve_power_flow(c);
    const auto b = solve_power_flow(apply_scenario(c, Scenario::identity()));
    CHECK((a.v - b.v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scenario scaling") {
    const auto c = cases::load_bundled_case("ne39_weak");
    const auto down = apply_scenario(c, c.scenario("LoadDown"));
    for (std::size_t i = 0; i < c.loads.size(); ++i) {
        CHECK(down.loads[i].p == doctest::Approx(0.975 * c.loads[i].p));
        CHECK(down.loads[i].q == doctest::Approx(0.975 * c.loads[i].q));
    }
    PowerSystemCase unit_load = two_bus(0.0, 0.1, 0.0, 1.0, 0.0);
    Scenario s;
    s.load_scale = 0.975;
    CHECK(apply_scenario(unit_load, s).loads[0].p == doctest::Approx(0.975));

    const auto split = c.scenario("GenDownUp");
    const auto moved = apply_scenario(c, split);
    int up = 0;
    int dn = 0;
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const double ratio = moved.generators[g].p_set / c.generators[g].p_set;
        if (std::abs(ratio - 1.025) < 1e-12) ++up;
        if (std::abs(ratio - 0.975) < 1e-12) ++dn;
        CHECK(moved.generators[g].bus == c.generators[g].bus);
    }
    CHECK(up == 5);
    CHECK(dn == 5);
    // Lowest five bus ids go up.
    CHECK(moved.generators.front().p_set == doctest::Approx(1.025 * c.generators.front().p_set));
}

TEST_CASE("scenario composition is multiplicative") {
    const auto c = cases::load_bundled_case("two_area");
    Scenario a;
    a.load_scale = 0.9;
    Scenario b;
    b.load_scale = 1.05;
    Scenario ab;
    ab.load_scale = 0.9 * 1.05;
    const auto twice = apply_scenario(apply_scenario(c, a), b);
    const auto once = apply_scenario(c, ab);
    for (std::size_t i = 0; i < c.loads.size(); ++i) {
        CHECK(twice.loads[i].p == doctest::Approx(once.loads[i].p).epsilon(1e-14));
        CHECK(twice.loads[i].q == doctest::Approx(once.loads[i].q).epsilon(1e-14));
    }
}

TEST_CASE("scenario multipliers must be positive") {
    Scenario s;
    s.load_scale = 0.0;
    CHECK_THROWS(s.validate());
    Scenario t;
    t.per_generator_scale[30] = -1.0;
    CHECK_THROWS(t.validate());
}

TEST_CASE("case validation") {
    auto c = two_bus(0.0, 0.1, 0.0);
    SUBCASE("duplicate bus") {
        c.buses.push_back({2, BusType::pq, 1.0, {}});
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
    SUBCASE("two slacks") {
        c.buses[1].type = BusType::slack;
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
    SUBCASE("zero reactance") {
        c.branches[0].x = 0.0;
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
    SUBCASE("self loop") {
        c.branches[0].to_bus = 1;
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
    SUBCASE("frequency") {
        c.system_freq = 55.0;
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
    SUBCASE("generator inertia") {
        c.generators[0].h = 0.0;
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
    SUBCASE("load on a missing bus") {
        c.loads.push_back({9, 0.1, 0.0});
        CHECK_THROWS_AS(c.validate(), StructuralError);
    }
}

}
