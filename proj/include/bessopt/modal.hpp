#pragma once

#include <optional>
#include <span>
#include <vector>

namespace bessopt::modal {

/// One oscillatory component a e^{sigma t} cos(2 pi f t + phase) at the window start.
struct Mode {
    double freq = 0.0;       // Hz
    double zeta = 0.0;       // damping ratio
    double amplitude = 0.0;  // channel units
    double phase = 0.0;      // rad
    double energy = 0.0;     // share of the windowed signal energy
};

struct EspritConfig {
    double window_start = 1.0;   // s, samples before this are discarded
    int model_order = 0;         // number of poles; 0 selects automatically
    int hankel_rows = 0;         // 0 selects floor(samples / 2)
    double sv_threshold = 1e-3;  // relative singular value cut for automatic order
    int max_order = 40;
};

/// TLS-ESPRIT on a single real channel. Non-oscillatory poles are fitted but not reported.
std::vector<Mode> estimate_modes(std::span<const double> signal, double dt, const EspritConfig& cfg = {});

/// -sigma / |sigma + j omega|
double damping_ratio(double sigma, double omega);

/// Highest-energy mode with freq in [f_lo, f_hi]; throws TargetMissingError if none.
Mode select_target_mode(std::span<const Mode> modes, double f_lo, double f_hi);

struct ModePair {
    Mode baseline;
    std::optional<Mode> candidate;
};

/// Greedy nearest-frequency matching in decreasing baseline energy; each candidate is used once.
std::vector<ModePair> match_modes(std::span<const Mode> baseline, std::span<const Mode> candidate, double f_tol = 0.1);

/// Every `factor`-th sample starting at the first.
std::vector<double> decimate(std::span<const double> signal, std::size_t factor);

} // namespace bessopt::modal
