#include "bessopt/modal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bessopt/errors.hpp"

namespace bessopt::modal {

using Complex = std::complex<double>;

double damping_ratio(double sigma, double omega) {
    const double mag = std::hypot(sigma, omega);
    if (mag == 0.0) {
        throw DomainError("damping ratio undefined for a pole at the origin");
    }
    return -sigma / mag;
}

namespace {

int significant_values(const Eigen::VectorXd& s, double relative) {
    if (s.size() == 0 || !(s(0) > 0.0)) {
        return 0;
    }
    int count = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) >= relative * s(0)) {
            ++count;
        }
    }
    return count;
}

} // namespace

std::vector<Mode> estimate_modes(std::span<const double> signal, double dt, const EspritConfig& cfg) {
    if (!(dt > 0.0)) {
        throw DomainError("sample interval must be positive");
    }
    const auto skip = static_cast<std::size_t>(std::max(0.0, std::round(cfg.window_start / dt)));
    if (skip >= signal.size()) {
        throw OrderError("window start lies beyond the end of the signal");
    }
    const auto n = static_cast<Eigen::Index>(signal.size() - skip);
    if (n < 8) {
        throw OrderError("too few samples after the window start");
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        x(k) = signal[skip + static_cast<std::size_t>(k)];
    }
    if (!x.allFinite()) {
        throw NumericError("signal contains non-finite samples");
    }
    x.array() -= x.mean();

    const Eigen::Index rows = cfg.hankel_rows > 0 ? cfg.hankel_rows : n / 2;
    const Eigen::Index cols = n - rows + 1;
    if (rows < 3 || cols < 2) {
        throw OrderError("Hankel dimensions too small for the window");
    }
    Eigen::MatrixXd hankel(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        hankel.row(i) = x.segment(i, cols).transpose();
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(hankel, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int limit = static_cast<int>(std::min<Eigen::Index>({static_cast<Eigen::Index>(cfg.max_order), rows - 2, cols - 1}));

    int order = 0;
    if (cfg.model_order > 0) {
        if (cfg.model_order % 2 != 0) {
            throw OrderError("fixed model order must be even");
        }
        if (cfg.model_order >= rows) {
            throw OrderError("Hankel rows must exceed the model order");
        }
        order = cfg.model_order;
        if (significant_values(sv, 1e-10) < order) {
            throw OrderError("signal subspace rank is below the requested model order");
        }
    } else {
        order = significant_values(sv, cfg.sv_threshold);
        if (order == 0) {
            throw OrderError("signal has no energy after detrending");
        }
        order += order % 2;
        order = std::min(order, limit - (limit % 2));
        if (order < 2) {
            throw OrderError("window too short for a single oscillatory mode");
        }
    }

    // Shift invariance between the top and bottom row blocks of the signal subspace, solved
    // in the total-least-squares sense through a second SVD.
    const Eigen::MatrixXd us = svd.matrixU().leftCols(order);
    Eigen::MatrixXd stacked(rows - 1, 2 * order);
    stacked.leftCols(order) = us.topRows(rows - 1);
    stacked.rightCols(order) = us.bottomRows(rows - 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> tls(stacked, Eigen::ComputeFullV);
    const Eigen::MatrixXd& v = tls.matrixV();
    const Eigen::MatrixXd v12 = v.block(0, order, order, order);
    const Eigen::MatrixXd v22 = v.block(order, order, order, order);
    const Eigen::MatrixXd psi = -v12 * v22.inverse();
    if (!psi.allFinite()) {
        throw NumericError("rotation matrix is not finite");
    }

    Eigen::EigenSolver<Eigen::MatrixXd> eig(psi, false);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eigen-decomposition of the rotation matrix failed");
    }
    const Eigen::VectorXcd z = eig.eigenvalues();
    if (!z.allFinite()) {
        throw NumericError("non-finite pole estimate");
    }

    // Amplitudes and phases: linear least squares on the Vandermonde basis.
    Eigen::MatrixXcd basis(n, order);
    for (Eigen::Index i = 0; i < order; ++i) {
        Complex p(1.0, 0.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            basis(k, i) = p;
            p *= z(i);
        }
    }
    const Eigen::VectorXcd coeff = basis.colPivHouseholderQr().solve(x.cast<Complex>());
    if (!coeff.allFinite()) {
        throw NumericError("amplitude fit failed");
    }

    struct Component {
        Eigen::Index index;
        bool oscillatory;
        double energy;
    };
    std::vector<Component> parts;
    double total_energy = 0.0;
    constexpr double real_tol = 1e-12;
    for (Eigen::Index i = 0; i < order; ++i) {
        const double im = z(i).imag();
        if (im < -real_tol) {
            continue;   // conjugate partner of a reported pole
        }
        const bool osc = im > real_tol;
        const double weight = osc ? 2.0 : 1.0;
        double e = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double yk = weight * (coeff(i) * basis(k, i)).real();
            e += yk * yk;
        }
        total_energy += e;
        parts.push_back({i, osc, e});
    }

    std::vector<Mode> modes;
    for (const auto& part : parts) {
        if (!part.oscillatory) {
            continue;
        }
        const Complex lambda = std::log(z(part.index)) / dt;
        Mode m;
        m.freq = std::abs(lambda.imag()) / (2.0 * M_PI);
        m.zeta = damping_ratio(lambda.real(), lambda.imag());
        m.amplitude = 2.0 * std::abs(coeff(part.index));
        m.phase = std::arg(coeff(part.index));
        m.energy = total_energy > 0.0 ? part.energy / total_energy : 0.0;
        modes.push_back(m);
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.energy > b.energy; });
    return modes;
}

Mode select_target_mode(std::span<const Mode> modes, double f_lo, double f_hi) {
    if (!(f_lo < f_hi)) {
        throw DomainError("target band needs f_lo < f_hi");
    }
    const Mode* best = nullptr;
    for (const auto& m : modes) {
        if (m.freq >= f_lo && m.freq <= f_hi && (best == nullptr || m.energy > best->energy)) {
            best = &m;
        }
    }
    if (best == nullptr) {
        throw TargetMissingError("no mode identified between " + std::to_string(f_lo) + " and " +
                                 std::to_string(f_hi) + " Hz");
    }
    return *best;
}

std::vector<ModePair> match_modes(std::span<const Mode> baseline, std::span<const Mode> candidate, double f_tol) {
    if (!(f_tol > 0.0)) {
        throw DomainError("mode matching tolerance must be positive");
    }
    std::vector<std::size_t> order(baseline.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return baseline[a].energy > baseline[b].energy; });
    std::vector<bool> used(candidate.size(), false);
    std::vector<ModePair> pairs;
    pairs.reserve(baseline.size());
    for (auto bi : order) {
        const Mode& b = baseline[bi];
        std::optional<std::size_t> pick;
        double best = f_tol;
        for (std::size_t ci = 0; ci < candidate.size(); ++ci) {
            if (used[ci]) {
                continue;
            }
            const double gap = std::abs(candidate[ci].freq - b.freq);
            if (gap <= best && (!pick || gap < best)) {
                best = gap;
                pick = ci;
            }
        }
        ModePair pair{b, std::nullopt};
        if (pick) {
            used[*pick] = true;
            pair.candidate = candidate[*pick];
        }
        pairs.push_back(pair);
    }
    return pairs;
}

std::vector<double> decimate(std::span<const double> signal, std::size_t factor) {
    if (factor == 0) {
        throw DomainError("decimation factor must be positive");
    }
    std::vector<double> out;
    out.reserve(signal.size() / factor + 1);
    for (std::size_t k = 0; k < signal.size(); k += factor) {
        out.push_back(signal[k]);
    }
    return out;
}

} // namespace bessopt::modal
