#include <doctest.h>

#include <cmath>

#include "bessopt/cost.hpp"
#include "bessopt/errors.hpp"
#include "cost_rows.hpp"

using namespace bessopt;
using namespace bessopt::cost;

namespace {

void check_rows(const std::vector<testing::CostRow>& rows) {
    for (const auto& row : rows) {
        CAPTURE(row.n_es);
        CAPTURE(row.objective);
        const auto r = total_cost(row.objective, row.n_es);
        CHECK(r.conv_cost / 1e6 == doctest::Approx(row.conv).epsilon(1e-3));
        CHECK(r.cell_cost / 1e6 == doctest::Approx(row.cell).epsilon(1e-3));
        CHECK(r.total_cost / 1e6 == doctest::Approx(row.total).epsilon(1e-3));
        CHECK(r.total_cost == r.conv_cost + r.cell_cost);
    }
}

optimizer::OptimizationResult fake_run(int n, bool feasible, double objective) {
    optimizer::OptimizationResult r;
    r.best.locs.assign(static_cast<std::size_t>(n), 1);
    r.best.gains.assign(static_cast<std::size_t>(n), objective / n);
    r.fitness.objective = objective;
    r.fitness.feasible = feasible;
    return r;
}

} // namespace

TEST_SUITE("cost") {

TEST_CASE("39-bus sizing rows") { check_rows(testing::ne_rows()); }

TEST_CASE("Nordic sizing rows") { check_rows(testing::nordic_rows()); }

TEST_CASE("zero investment") {
    const auto r = total_cost(0.0, 0);
    CHECK(r.conv_cost == 0.0);
    CHECK(r.cell_cost == 0.0);
    CHECK(r.total_cost == 0.0);
}

TEST_CASE("cost grows with the gain sum and the unit count") {
    double last = -1.0;
    for (double obj = 0.0; obj < 300.0; obj += 7.5) {
        const double t = total_cost(obj, 3).total_cost;
        CHECK(t > last);
        last = t;
    }
    last = -1.0;
    for (int n = 0; n < 10; ++n) {
        const double t = total_cost(60.0, n).total_cost;
        CHECK(t > last);
        last = t;
    }
    CHECK_THROWS_AS(total_cost(-1.0, 2), DomainError);
}

TEST_CASE("sweep, recommendation and CSV") {
    const std::vector<int> range = {1, 2, 3, 4};
    const auto reports = nes_sweep(range, [](int n) -> optimizer::OptimizationResult {
        if (n == 4) throw SimulationError("diverged", 12);
        const auto& row = testing::ne_rows()[static_cast<std::size_t>(n - 1)];
        return fake_run(n, row.feasible, row.objective);
    });
    REQUIRE(reports.size() == 4);
    CHECK_FALSE(reports[0].feasible);
    CHECK(reports[1].feasible);
    CHECK_FALSE(reports[3].feasible);
    CHECK(reports[3].error.find("diverged") != std::string::npos);
    CHECK(recommended_nes(reports) == 2);

    const auto csv = sweep_csv(reports);
    CHECK(csv.rfind("n_es,obj,constraint,cost_conv_musd,cost_cell_musd,cost_total_musd\n", 0) == 0);
    CHECK(csv.find("\n1,50.0000,Unsatisfied,") != std::string::npos);
    CHECK(csv.find("\n2,59.7220,Satisfied,") != std::string::npos);
    CHECK(csv.find("Failed") != std::string::npos);

    const std::vector<int> single = {3};
    const auto one = nes_sweep(single, [](int n) { return fake_run(n, true, 60.386); });
    CHECK(recommended_nes(one) == 3);
    const auto none = nes_sweep(single, [](int n) { return fake_run(n, false, 150.0); });
    CHECK_FALSE(recommended_nes(none).has_value());
}

}
