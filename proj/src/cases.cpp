#include "bessopt/cases.hpp"

#include <algorithm>

#include "bessopt/errors.hpp"

namespace bessopt::cases {

namespace {

using grid::BusType;

struct GenRow {
    int bus;
    double p_mw;
    double v_set;
    double h;
    double xdp;
};

struct BranchRow {
    int from;
    int to;
    double r;
    double x;
    double b;
};

void add_standard_scenarios(grid::PowerSystemCase& c) {
    grid::Scenario load_down;
    load_down.name = "LoadDown";
    load_down.load_scale = 0.975;
    grid::Scenario gen_up;
    gen_up.name = "GenUp";
    gen_up.gen_scale = 1.025;
    grid::Scenario gen_load_down;
    gen_load_down.name = "GenLoadDown";
    gen_load_down.load_scale = 0.975;
    gen_load_down.gen_scale = 0.975;
    c.scenarios = {grid::Scenario::identity(), load_down, gen_up, gen_load_down,
                   grid::split_generation_scenario(c, "GenDownUp", 1.025, 0.975)};
}

// New England 39-bus system at one quarter of its power level: loads, dispatch, inertia and
// line charging scaled by 1/4 and series impedances by 4 on the unchanged 100 MVA base.
grid::PowerSystemCase ne39_weak() {
    constexpr double scale = 0.25;
    constexpr double damping_per_h = 0.226;
    const std::vector<std::pair<int, std::pair<double, double>>> loads = {
        {1, {97.6, 44.2}},   {3, {322.0, 2.4}},    {4, {500.0, 184.0}},  {7, {233.8, 84.0}},
        {8, {522.0, 176.6}}, {9, {6.5, -66.6}},    {12, {8.53, 88.0}},   {15, {320.0, 153.0}},
        {16, {329.0, 32.3}}, {18, {158.0, 30.0}},  {20, {680.0, 103.0}}, {21, {274.0, 115.0}},
        {23, {247.5, 84.6}}, {24, {308.6, -92.2}}, {25, {224.0, 47.2}},  {26, {139.0, 17.0}},
        {27, {281.0, 75.5}}, {28, {206.0, 27.6}},  {29, {283.5, 26.9}},  {31, {9.2, 4.6}},
        {39, {1104.0, 250.0}}};
    const std::vector<GenRow> gens = {
        {30, 250.0, 1.0499, 42.0, 0.031},  {31, 677.871, 0.982, 30.3, 0.0697}, {32, 650.0, 0.9841, 35.8, 0.0531},
        {33, 632.0, 0.9972, 28.6, 0.0436}, {34, 508.0, 1.0123, 26.0, 0.132},   {35, 650.0, 1.0494, 34.8, 0.05},
        {36, 560.0, 1.0636, 26.4, 0.049},  {37, 540.0, 1.0275, 24.3, 0.057},   {38, 830.0, 1.0265, 34.5, 0.057},
        {39, 1000.0, 1.03, 500.0, 0.006}};
    const std::vector<BranchRow> branches = {
        {1, 2, 0.0035, 0.0411, 0.6987},  {1, 39, 0.001, 0.025, 0.75},     {2, 3, 0.0013, 0.0151, 0.2572},
        {2, 25, 0.007, 0.0086, 0.146},   {2, 30, 0.0, 0.0181, 0.0},       {3, 4, 0.0013, 0.0213, 0.2214},
        {3, 18, 0.0011, 0.0133, 0.2138}, {4, 5, 0.0008, 0.0128, 0.1342},  {4, 14, 0.0008, 0.0129, 0.1382},
        {5, 6, 0.0002, 0.0026, 0.0434},  {5, 8, 0.0008, 0.0112, 0.1476},  {6, 7, 0.0006, 0.0092, 0.113},
        {6, 11, 0.0007, 0.0082, 0.1389}, {6, 31, 0.0, 0.025, 0.0},        {7, 8, 0.0004, 0.0046, 0.078},
        {8, 9, 0.0023, 0.0363, 0.3804},  {9, 39, 0.001, 0.025, 1.2},      {10, 11, 0.0004, 0.0043, 0.0729},
        {10, 13, 0.0004, 0.0043, 0.0729}, {10, 32, 0.0, 0.02, 0.0},       {12, 11, 0.0016, 0.0435, 0.0},
        {12, 13, 0.0016, 0.0435, 0.0},   {13, 14, 0.0009, 0.0101, 0.1723}, {14, 15, 0.0018, 0.0217, 0.366},
        {15, 16, 0.0009, 0.0094, 0.171}, {16, 17, 0.0007, 0.0089, 0.1342}, {16, 19, 0.0016, 0.0195, 0.304},
        {16, 21, 0.0008, 0.0135, 0.2548}, {16, 24, 0.0003, 0.0059, 0.068}, {17, 18, 0.0007, 0.0082, 0.1319},
        {17, 27, 0.0013, 0.0173, 0.3216}, {19, 20, 0.0007, 0.0138, 0.0},  {19, 33, 0.0007, 0.0142, 0.0},
        {20, 34, 0.0009, 0.018, 0.0},    {21, 22, 0.0008, 0.014, 0.2565}, {22, 23, 0.0006, 0.0096, 0.1846},
        {22, 35, 0.0, 0.0143, 0.0},      {23, 24, 0.0022, 0.035, 0.361},  {23, 36, 0.0005, 0.0272, 0.0},
        {25, 26, 0.0032, 0.0323, 0.513}, {25, 37, 0.0006, 0.0232, 0.0},   {26, 27, 0.0014, 0.0147, 0.2396},
        {26, 28, 0.0043, 0.0474, 0.7802}, {26, 29, 0.0057, 0.0625, 1.029}, {28, 29, 0.0014, 0.0151, 0.249},
        {29, 38, 0.0008, 0.0156, 0.0}};

    grid::PowerSystemCase c;
    c.name = "ne39_weak";
    c.system_mva_base = 100.0;
    c.system_freq = 60.0;
    for (int id = 1; id <= 39; ++id) {
        c.buses.push_back({id, BusType::pq, 1.0, {0.0, 0.0}});
    }
    for (const auto& g : gens) {
        auto& bus = c.buses[static_cast<std::size_t>(g.bus - 1)];
        bus.type = g.bus == 31 ? BusType::slack : BusType::pv;
        bus.v_set = g.v_set;
        const double h = g.h * scale;
        c.generators.push_back({g.bus, g.p_mw / 100.0 * scale, h, damping_per_h * h, g.xdp / scale});
    }
    for (const auto& br : branches) {
        c.branches.push_back({br.from, br.to, br.r / scale, br.x / scale, br.b * scale, true});
    }
    for (const auto& [bus, pq] : loads) {
        c.loads.push_back({bus, pq.first / 100.0 * scale, pq.second / 100.0 * scale});
    }
    add_standard_scenarios(c);
    return c;
}

// Four-machine, two-area system on a 100 MVA base.
grid::PowerSystemCase two_area() {
    constexpr double r_km = 0.0001;
    constexpr double x_km = 0.001;
    constexpr double b_km = 0.00175;
    constexpr double damping_per_h = 0.1;
    grid::PowerSystemCase c;
    c.name = "two_area";
    c.system_mva_base = 100.0;
    c.system_freq = 60.0;
    for (int id = 1; id <= 11; ++id) {
        c.buses.push_back({id, BusType::pq, 1.0, {0.0, 0.0}});
    }
    const std::vector<GenRow> gens = {
        {1, 700.0, 1.03, 58.5, 0.0333}, {2, 700.0, 1.01, 58.5, 0.0333},
        {3, 719.0, 1.03, 55.575, 0.0333}, {4, 700.0, 1.01, 55.575, 0.0333}};
    for (const auto& g : gens) {
        auto& bus = c.buses[static_cast<std::size_t>(g.bus - 1)];
        bus.type = g.bus == 3 ? BusType::slack : BusType::pv;
        bus.v_set = g.v_set;
        c.generators.push_back({g.bus, g.p_mw / 100.0, g.h, damping_per_h * g.h, g.xdp});
    }
    auto line = [&](int from, int to, double km) {
        c.branches.push_back({from, to, r_km * km, x_km * km, b_km * km, true});
    };
    const double xt = 0.15 / 9.0;
    c.branches.push_back({1, 5, 0.0, xt, 0.0, true});
    c.branches.push_back({2, 6, 0.0, xt, 0.0, true});
    c.branches.push_back({3, 11, 0.0, xt, 0.0, true});
    c.branches.push_back({4, 10, 0.0, xt, 0.0, true});
    line(5, 6, 25.0);
    line(6, 7, 10.0);
    line(7, 8, 110.0);
    line(7, 8, 110.0);
    line(8, 9, 110.0);
    line(8, 9, 110.0);
    line(9, 10, 10.0);
    line(10, 11, 25.0);
    c.loads.push_back({7, 9.67, 1.0});
    c.loads.push_back({9, 17.67, 1.0});
    c.buses[6].shunt = {0.0, 2.0};
    c.buses[8].shunt = {0.0, 3.5};
    add_standard_scenarios(c);
    return c;
}

// Machine at bus 2 feeding an infinite bus through x = 0.35 (0.65 including xdp).
grid::PowerSystemCase smib() {
    grid::PowerSystemCase c;
    c.name = "smib";
    c.system_mva_base = 100.0;
    c.system_freq = 60.0;
    c.buses.push_back({1, BusType::slack, 1.0, {0.0, 0.0}});
    c.buses.push_back({2, BusType::pv, 1.0, {0.0, 0.0}});
    c.branches.push_back({1, 2, 0.0, 0.35, 0.0, true});
    c.generators.push_back({2, 0.5, 3.5, 0.0, 0.3});
    c.scenarios = {grid::Scenario::identity()};
    return c;
}

} // namespace

std::vector<std::string> bundled_case_names() { return {"ne39_weak", "two_area", "smib"}; }

grid::PowerSystemCase load_bundled_case(const std::string& name) {
    grid::PowerSystemCase c;
    if (name == "ne39_weak") {
        c = ne39_weak();
    } else if (name == "two_area") {
        c = two_area();
    } else if (name == "smib") {
        c = smib();
    } else {
        throw LookupError("unknown bundled case '" + name + "' (expected ne39_weak, two_area or smib)");
    }
    c.validate();
    return c;
}

CaseDefaults bundled_defaults(const std::string& name) {
    CaseDefaults d;
    if (name == "ne39_weak") {
        d.disturbance = dynamics::Disturbance::bus_fault(16, 0.0, 0.05);
        d.f_lo = 0.5;
        d.f_hi = 0.8;
    } else if (name == "two_area") {
        d.disturbance = dynamics::Disturbance::bus_fault(8, 0.0, 0.1);
        d.f_lo = 0.4;
        d.f_hi = 0.8;
    } else if (name == "smib") {
        d.disturbance = dynamics::Disturbance::bus_fault(2, 0.0, 0.05, {0.0, -5.0});
        d.f_lo = 0.2;
        d.f_hi = 2.5;
    } else {
        throw LookupError("unknown bundled case '" + name + "'");
    }
    return d;
}

} // namespace bessopt::cases
