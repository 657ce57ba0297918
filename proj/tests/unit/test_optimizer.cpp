#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "bessopt/cases.hpp"
#include "bessopt/errors.hpp"
#include "bessopt/problem.hpp"
#include "surrogate.hpp"

using namespace bessopt;
using namespace bessopt::optimizer;

namespace {

std::vector<int> range(int lo, int hi) {
    std::vector<int> v;
    for (int b = lo; b <= hi; ++b) v.push_back(b);
    return v;
}

grid::PowerSystemCase chain_case(double z_a, double z_b, bool star) {
    grid::PowerSystemCase c;
    c.buses = {{1, grid::BusType::slack, 1.0, {}}, {2, grid::BusType::pq, 1.0, {}}, {3, grid::BusType::pq, 1.0, {}},
               {4, grid::BusType::pq, 1.0, {}}};
    c.branches.push_back({1, 2, 0.0, z_a, 0.0, true});
    c.branches.push_back({star ? 1 : 2, 3, 0.0, z_b, 0.0, true});
    c.generators.push_back({1, 0.0, 3.0, 0.0, 0.2});
    return c;
}

Fitness infeasible_everywhere(const Placement& p) {
    Fitness f;
    for (double g : p.gains) f.objective += g;
    double reach = 0.0;
    for (double g : p.gains) reach += g;
    f.violation = 1.0 - 0.001 * reach;
    f.feasible = false;
    return f;
}

} // namespace

TEST_SUITE("optimizer") {

TEST_CASE("repair examples") {
    const auto cand = range(1, 39);
    CHECK(repair_locations(std::vector<int>{35, 36, 38}, cand) == std::vector<int>{35, 36, 38});
    CHECK(repair_locations(std::vector<int>{35, 35, 38}, cand) == std::vector<int>{35, 34, 38});
    CHECK(repair_locations(std::vector<int>{10, 10, 10}, cand) == std::vector<int>{10, 9, 11});
}

TEST_CASE("repair errors") {
    const std::vector<int> cand = {3, 5, 7};
    CHECK_THROWS_AS(repair_locations(std::vector<int>{3, 3, 3, 3}, cand), CapacityError);
    CHECK_THROWS_AS(repair_locations(std::vector<int>{4}, cand), DomainError);
}

TEST_CASE("repair properties on random vectors") {
    std::mt19937_64 rng(3);
    const std::vector<int> cand = {2, 3, 5, 8, 13, 21, 34, 55, 89, 100};
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % cand.size());
        std::vector<int> x;
        for (int k = 0; k < n; ++k) x.push_back(cand[rng() % 4 + (rng() % 2) * 5]);
        const auto y = repair_locations(x, cand);
        REQUIRE(y.size() == x.size());
        CHECK(std::set<int>(y.begin(), y.end()).size() == y.size());
        CHECK(repair_locations(y, cand) == y);
        std::set<int> seen;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (seen.insert(x[k]).second) CHECK(y[k] == x[k]);
        }
        for (int v : x) CHECK(std::find(y.begin(), y.end(), v) != y.end());
    }
}

TEST_CASE("velocity rule") {
    CHECK(velocity_update(0.0, 1.0, 1.0, 1.0, 0.9, 2.0, 2.0, 0.3, 0.7) == 0.0);
    CHECK(velocity_update(0.0, 0.0, 1.0, 1.0, 0.9, 2.0, 2.0, 0.5, 0.5) == doctest::Approx(2.0));
    CHECK(velocity_update(1.0, 0.0, 0.0, 0.0, 0.9, 2.0, 2.0, 0.5, 0.5) == doctest::Approx(0.9));
}

TEST_CASE("consensus is a fixed point") {
    PsoConfig cfg;
    const auto cand = range(1, 39);
    Particle p;
    p.position = {{5, 10, 20}, {10.0, 20.0, 30.0}};
    p.vel_locs = {0.0, 0.0, 0.0};
    p.vel_gains = {0.0, 0.0, 0.0};
    p.pbest = p.position;
    std::vector<Particle> swarm = {p};
    pso_update(swarm, p.position, cand, cfg, 0);
    CHECK(swarm[0].position == p.position);
}

TEST_CASE("pure inertia follows the geometric series") {
    PsoConfig cfg;
    cfg.c1 = 0.0;
    cfg.c2 = 0.0;
    cfg.inertia = 0.9;
    const auto cand = range(1, 100);
    Particle p;
    p.position = {{50}, {20.0}};
    p.vel_locs = {0.0};
    p.vel_gains = {3.0};
    p.pbest = p.position;
    std::vector<Particle> swarm = {p};
    for (int n = 1; n <= 30; ++n) {
        pso_update(swarm, p.position, cand, cfg, n);
        const double expected = 20.0 + 3.0 * 0.9 * (1.0 - std::pow(0.9, n)) / 0.1;
        CHECK(swarm[0].position.gains[0] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(swarm[0].position.locs[0] == 50);
    }
}

TEST_CASE("particles stay valid through many updates") {
    PsoConfig cfg;
    cfg.inertia = 1.0;
    const std::vector<int> cand = {1, 4, 6, 9, 12, 30};
    std::vector<Particle> swarm;
    for (int i = 0; i < 8; ++i) swarm.push_back(random_particle(cand, 4, cfg, i));
    std::mt19937_64 rng(5);
    for (int it = 1; it <= 1000; ++it) {
        const auto& leader = swarm[rng() % swarm.size()].position;
        for (auto& p : swarm) p.pbest = swarm[rng() % swarm.size()].position;
        pso_update(swarm, leader, cand, cfg, it);
        for (const auto& p : swarm) {
            CHECK(std::set<int>(p.position.locs.begin(), p.position.locs.end()).size() == 4);
            for (int b : p.position.locs) CHECK(std::binary_search(cand.begin(), cand.end(), b));
            for (double g : p.position.gains) CHECK((g >= cfg.k_min && g <= cfg.k_max));
        }
    }
}

TEST_CASE("random streams are keyed and reproducible") {
    Stream a(1, 2, 3);
    Stream b(1, 2, 3);
    Stream c(1, 2, 4);
    for (int k = 0; k < 10; ++k) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x != c.uniform());
        CHECK((x >= 0.0 && x < 1.0));
    }
}

TEST_CASE("surrogate problem reaches the closed-form optimum") {
    const auto s = testing::ne39_surrogate();
    const double best = s.optimum(3);
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        PsoConfig cfg;
        cfg.seed = seed;
        cfg.population = 30;
        cfg.iterations = 60;
        cfg.inertia = 0.729;
        cfg.c1 = 1.49445;
        cfg.c2 = 1.49445;
        const auto r = optimize_with(s, s.candidates, 3, cfg);
        CHECK(r.feasible());
        CHECK(r.fitness.objective >= best - 1e-9);
        if (r.fitness.objective <= best * 1.01) ++hits;
        CHECK(r.evaluations == 30L * 60L);
        REQUIRE(r.history.size() == 60);
        for (std::size_t k = 1; k < r.history.size(); ++k) {
            CHECK(r.history[k].penalized <= r.history[k - 1].penalized);
            if (!std::isnan(r.history[k - 1].feasible_objective)) {
                CHECK(r.history[k].feasible_objective <= r.history[k - 1].feasible_objective);
            }
        }
        CHECK(r.history.back().feasible_objective == r.fitness.objective);
    }
    CHECK(hits >= 4);
}

TEST_CASE("results do not depend on the worker count") {
    const auto s = testing::ne39_surrogate();
    PsoConfig cfg;
    cfg.population = 12;
    cfg.iterations = 10;
    cfg.seed = 42;
    const auto serial = optimize_with(s, s.candidates, 3, cfg);
    cfg.workers = 4;
    const auto threaded = optimize_with(s, s.candidates, 3, cfg);
    CHECK(serial.best == threaded.best);
    CHECK(serial.fitness.objective == threaded.fitness.objective);
    cfg.seed = 43;
    CHECK_FALSE(optimize_with(s, s.candidates, 3, cfg).best == serial.best);
}

TEST_CASE("an unreachable constraint saturates every gain") {
    PsoConfig cfg;
    cfg.population = 10;
    cfg.iterations = 40;
    const auto r = optimize_with(infeasible_everywhere, range(1, 10), 3, cfg);
    CHECK_FALSE(r.feasible());
    CHECK(r.fitness.objective == 3 * cfg.k_max);
}

TEST_CASE("the cheapest feasible placement is returned") {
    // Feasible only with a gain sum of at least 40; slightly infeasible points are cheaper
    // under the penalty.
    const FitnessFn edge = [](const Placement& p) {
        Fitness f;
        for (double g : p.gains) f.objective += g;
        f.violation = std::max(0.0, 1e-6 * (40.0 - f.objective));
        f.feasible = f.violation == 0.0;
        return f;
    };
    PsoConfig cfg;
    cfg.population = 10;
    cfg.iterations = 20;
    const auto r = optimize_with(edge, range(1, 10), 2, cfg);
    CHECK(r.feasible());
    CHECK(r.fitness.objective >= 40.0);
}

TEST_CASE("failed evaluations never become best") {
    PsoConfig cfg;
    cfg.population = 6;
    cfg.iterations = 5;
    const auto s = testing::ne39_surrogate();
    const FitnessFn flaky = [&](const Placement& p) {
        if (p.locs[0] % 2 == 0) throw SimulationError("diverged", 3);
        return s(p);
    };
    const auto r = optimize_with(flaky, s.candidates, 2, cfg);
    CHECK_FALSE(r.fitness.failed);
    CHECK(r.best.locs[0] % 2 == 1);
}

TEST_CASE("comparison of fitness values") {
    Fitness feasible;
    feasible.objective = 10.0;
    Fitness infeasible;
    infeasible.objective = 10.0;
    infeasible.violation = 0.0;
    infeasible.feasible = false;
    CHECK(better(feasible, infeasible, 1e4));
    CHECK_FALSE(better(infeasible, feasible, 1e4));
    const auto failed = Fitness::failure(1.0, "boom");
    CHECK(better(infeasible, failed, 1e4));
    CHECK(std::isinf(failed.penalized(1e4)));
}

TEST_CASE("placement similarity") {
    CHECK(placement_similarity(std::vector<int>{38, 35, 36}, std::vector<int>{35, 36, 38}) == 1.0);
    CHECK(placement_similarity(std::vector<int>{34, 36, 35}, std::vector<int>{35, 36, 38}) ==
          doctest::Approx(0.67).epsilon(0.01));
    CHECK(placement_similarity(std::vector<int>{1, 2}, std::vector<int>{3, 4}) == 0.0);
}

TEST_CASE("candidate reduction") {
    const auto ne = cases::load_bundled_case("ne39_weak");
    const auto gens = reduce_candidates(ne, 0);
    CHECK(gens == range(30, 39));

    std::vector<std::string> warnings;
    const auto chain = reduce_candidates(chain_case(0.1, 0.1, false), 1, &warnings);
    CHECK(chain == std::vector<int>{1, 2});
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("bus 4") != std::string::npos);

    CHECK(reduce_candidates(chain_case(0.2, 0.2, true), 1) == std::vector<int>{1, 2});
    CHECK(reduce_candidates(chain_case(0.2, 0.1, true), 1) == std::vector<int>{1, 3});
    CHECK(reduce_candidates(chain_case(0.2, 0.2, true), 5) == std::vector<int>{1, 2, 3});
    CHECK(all_buses(ne).size() == 39);
}

TEST_CASE("configuration validation") {
    PsoConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.population = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = PsoConfig{};
    cfg.k_min = 60.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}
