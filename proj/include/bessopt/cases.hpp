#pragma once

#include <string>
#include <vector>

#include "bessopt/dynamics.hpp"
#include "bessopt/grid.hpp"

namespace bessopt::cases {

/// ne39_weak, two_area or smib. Throws LookupError for anything else.
grid::PowerSystemCase load_bundled_case(const std::string& name);

std::vector<std::string> bundled_case_names();

/// Disturbance and target band that go with a bundled case.
struct CaseDefaults {
    dynamics::Disturbance disturbance;
    double f_lo = 0.5;
    double f_hi = 0.8;
};

CaseDefaults bundled_defaults(const std::string& name);

} // namespace bessopt::cases
