#ifndef PULSESIM_DEVICE_HPP
#define PULSESIM_DEVICE_HPP

// Two-transmon device model in the rotating frame of the idling
// frequencies: sum-of-Gaussians coupling control with analytic parameter
// derivatives and the logistic amplitude-saturation transfer function.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pulsesim/fockspace.hpp"

namespace pulsesim {
namespace device {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Device constants, all angular frequencies in rad/ns.
struct DeviceSpec {
    std::vector<double> omega;       // transmon frequencies
    std::vector<double> delta;       // anharmonicities
    std::vector<double> omega_idle;  // rotating-frame (idling) frequencies
    double omega_int = 0.0;          // common frequency during interaction
    double gamma_min = 0.0;          // coupling bounds, straddle zero
    double gamma_max = 0.0;

    void validate() const {
        if (omega.size() != delta.size() || omega.size() != omega_idle.size())
            throw std::invalid_argument("omega, delta and omega_idle lengths must agree");
        if (omega.empty()) throw std::invalid_argument("device needs at least one transmon");
        if (!(gamma_min < 0.0 && 0.0 < gamma_max))
            throw std::invalid_argument("coupling bounds must straddle zero");
    }
};

/// Hardware constants used throughout: frequencies 4.16 / 4.00 GHz,
/// anharmonicities -0.220 / -0.210 GHz, interaction at 4.16 GHz, coupling
/// within [-0.04, 0.002] GHz (all linear, stored as rad/ns).
inline DeviceSpec table1_device() {
    DeviceSpec spec;
    spec.omega = {two_pi * 4.16, two_pi * 4.00};
    spec.delta = {two_pi * -0.220, two_pi * -0.210};
    spec.omega_idle = spec.omega;
    spec.omega_int = two_pi * 4.16;
    spec.gamma_min = two_pi * -0.04;
    spec.gamma_max = two_pi * 0.002;
    return spec;
}

struct GaussianTerm {
    double amplitude = 0.0;  // rad/ns
    double center = 0.0;     // ns
    double width = 1.0;      // ns
};

/// Sum-of-Gaussians coupling waveform over [0, T_c]. Parameter vectors are
/// laid out as [a_0, mu_0, sigma_0, a_1, ...].
struct ControlAnsatz {
    double T_c = 0.0;
    std::vector<GaussianTerm> gaussians;

    int M() const { return static_cast<int>(gaussians.size()); }

    /// Builds from a flat parameter vector without validation; the optimizer
    /// roams freely and the waveform is even in each width.
    static ControlAnsatz from_params(double T_c, std::span<const double> params) {
        if (params.size() % 3 != 0)
            throw std::invalid_argument("parameter vector length must be a multiple of 3");
        ControlAnsatz ansatz;
        ansatz.T_c = T_c;
        ansatz.gaussians.reserve(params.size() / 3);
        for (std::size_t m = 0; m + 3 <= params.size(); m += 3)
            ansatz.gaussians.push_back({params[m], params[m + 1], params[m + 2]});
        return ansatz;
    }

    std::vector<double> params() const {
        std::vector<double> out;
        out.reserve(3 * gaussians.size());
        for (const auto& g : gaussians) {
            out.push_back(g.amplitude);
            out.push_back(g.center);
            out.push_back(g.width);
        }
        return out;
    }

    void validate() const {
        if (T_c <= 0) throw std::invalid_argument("control time must be positive");
        for (const auto& g : gaussians)
            if (g.width <= 0) throw std::invalid_argument("gaussian widths must be positive");
    }
};

/// gamma(t) = sum_m a_m exp(-(t - mu_m)^2 / (2 sigma_m^2)).
inline double raw_coupling(const ControlAnsatz& ansatz, double t) {
    double value = 0.0;
    for (const auto& g : ansatz.gaussians) {
        const double u = (t - g.center) / g.width;
        value += g.amplitude * std::exp(-0.5 * u * u);
    }
    return value;
}

/// Gradient of raw_coupling with respect to (a_m, mu_m, sigma_m), written
/// into `out` (length 3M) in parameter order.
inline void ansatz_partials(const ControlAnsatz& ansatz, double t, std::span<double> out) {
    if (out.size() != static_cast<std::size_t>(3 * ansatz.M()))
        throw std::invalid_argument("partials buffer has the wrong length");
    for (int m = 0; m < ansatz.M(); ++m) {
        const auto& g = ansatz.gaussians[m];
        const double d = t - g.center;
        const double s2 = g.width * g.width;
        const double e = std::exp(-0.5 * d * d / s2);
        out[3 * m] = e;
        out[3 * m + 1] = g.amplitude * d / s2 * e;
        out[3 * m + 2] = g.amplitude * d * d / (s2 * g.width) * e;
    }
}

/// Generalized logistic transfer confining the coupling amplitude to
/// (lower, upper) while staying smooth and strictly increasing, with
/// S(0) = 0 pinned by Q = -upper/lower.
struct Saturation {
    double lower = 0.0;  // rad/ns, < 0
    double upper = 0.0;  // rad/ns, > 0
    double gain = 4.0;

    double Q() const { return -upper / lower; }

    void validate() const {
        if (!(lower < 0.0 && 0.0 < upper))
            throw std::invalid_argument("saturation asymptotes must straddle zero");
        if (gain <= 0) throw std::invalid_argument("saturation gain must be positive");
    }
};

inline Saturation table1_saturation() {
    Saturation s;
    s.lower = two_pi * -0.04;
    s.upper = two_pi * 0.002;
    s.gain = 4.0;
    return s;
}

/// S(eps) = lower + (upper - lower) / (1 + Q exp(-2 g eps / (upper - lower))).
inline double saturate(const Saturation& s, double eps) {
    const double width = s.upper - s.lower;
    const double ex = std::exp(-2.0 * s.gain * eps / width);
    if (!std::isfinite(ex)) return s.lower;  // deep negative input
    return s.lower + width / (1.0 + s.Q() * ex);
}

/// Analytic derivative of saturate; strictly positive, vanishing in both
/// tails.
inline double saturate_derivative(const Saturation& s, double eps) {
    const double width = s.upper - s.lower;
    const double ex = std::exp(-2.0 * s.gain * eps / width);
    if (!std::isfinite(ex)) return 0.0;
    const double q = s.Q();
    const double denom = 1.0 + q * ex;
    const double d = 2.0 * s.gain * q * ex / (denom * denom);
    return std::isfinite(d) ? d : 0.0;
}

/// Rotating-frame two-transmon Hamiltonian assembler. The drift diagonal
/// and the coupling structure are precomputed once; per-evaluation work is
/// a diagonal write plus the phased coupling entries, into a caller-owned
/// scratch matrix.
class TransmonPairHamiltonian {
  public:
    TransmonPairHamiltonian(const DeviceSpec& spec, const fockspace::HilbertLayout& layout)
        : layout_(layout) {
        spec.validate();
        if (layout.site_count() != 2)
            throw std::invalid_argument("rotating-frame Hamiltonian needs a two-transmon layout");
        if (spec.omega.size() < 2)
            throw std::invalid_argument("device spec must describe two transmons");
        const long dim = layout.total_dim();
        drift_ = Eigen::VectorXd::Zero(dim);
        for (long idx = 0; idx < dim; ++idx) {
            const auto occ = layout.occupations_of(idx);
            for (int i = 0; i < 2; ++i) {
                const double n = occ[i];
                drift_(idx) += (spec.omega_int - spec.omega_idle[i]) * n +
                               0.5 * spec.delta[i] * n * (n - 1.0);
            }
        }
        const int d0 = layout.local_dims[0], d1 = layout.local_dims[1];
        for (int n0 = 0; n0 + 1 < d0; ++n0) {
            for (int n1 = 1; n1 < d1; ++n1) {
                // a_1^dag a_2 : |n0, n1> -> sqrt((n0+1) n1) |n0+1, n1-1>
                const long col = layout.index_of(std::array<int, 2>{n0, n1});
                const long row = layout.index_of(std::array<int, 2>{n0 + 1, n1 - 1});
                raising_entries_.push_back({row, col, std::sqrt((n0 + 1.0) * n1)});
            }
        }
        delta12_ = spec.omega_idle[0] - spec.omega_idle[1];
    }

    long dim() const { return layout_.total_dim(); }
    const fockspace::HilbertLayout& layout() const { return layout_; }
    double frame_beat() const { return delta12_; }

    /// H(t) for an already-saturated coupling value.
    void assemble(double coupling, double t, Matrix& h) const {
        h.setZero();
        for (long i = 0; i < drift_.size(); ++i) h(i, i) = drift_(i);
        const cxd phase = std::polar(1.0, delta12_ * t);
        for (const auto& entry : raising_entries_) {
            const cxd v = coupling * entry.value * phase;
            h(entry.row, entry.col) += v;
            h(entry.col, entry.row) += std::conj(v);
        }
    }

    /// The operator multiplying the coupling, e^{i d12 t} a1^dag a2 + h.c.
    void coupling_op(double t, Matrix& c) const {
        c.setZero();
        const cxd phase = std::polar(1.0, delta12_ * t);
        for (const auto& entry : raising_entries_) {
            c(entry.row, entry.col) += entry.value * phase;
            c(entry.col, entry.row) += entry.value * std::conj(phase);
        }
    }

  private:
    struct Entry {
        long row, col;
        double value;
    };
    fockspace::HilbertLayout layout_;
    Eigen::VectorXd drift_;
    std::vector<Entry> raising_entries_;
    double delta12_ = 0.0;
};

/// One-shot rotating-frame Hamiltonian on the default [3,3] layout.
inline fockspace::FockOperator rotating_frame_hamiltonian(const DeviceSpec& spec,
                                                          double coupling_value, double t) {
    fockspace::HilbertLayout layout{3, 3};
    TransmonPairHamiltonian assembler(spec, layout);
    Matrix h(layout.total_dim(), layout.total_dim());
    assembler.assemble(coupling_value, t, h);
    return fockspace::FockOperator(layout, std::move(h));
}

}  // namespace device
}  // namespace pulsesim

#endif  // PULSESIM_DEVICE_HPP
