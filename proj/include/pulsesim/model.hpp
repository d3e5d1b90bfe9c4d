#ifndef PULSESIM_MODEL_HPP
#define PULSESIM_MODEL_HPP

// Extended Bose-Hubbard chain in the hard-core (two-level-per-site) model
// space: the chain Hamiltonian, the two-site step unitaries, and the exact
// reference evolution.

#include <cmath>
#include <stdexcept>
#include <string>

#include "pulsesim/fockspace.hpp"
#include "pulsesim/propagation.hpp"

namespace pulsesim {
namespace model {

/// Chain parameters, all angular frequencies in rad/ns and times in ns.
/// The two-site potential follows the single-parameter family V = n_v * delta_V.
struct EbhParams {
    double J = -0.1;
    double V_min = 0.1;
    double delta_V = 0.1;
    int n_v = 1;
    int sites = 2;

    double V() const { return n_v * delta_V; }

    void validate() const {
        if (delta_V <= 0) throw std::invalid_argument("delta_V must be positive");
        if (n_v < 0) throw std::invalid_argument("n_v must be non-negative");
        if (sites < 2) throw std::invalid_argument("chain needs at least 2 sites");
    }
};

inline constexpr const char* kLabelBh = "BH_step";
inline constexpr const char* kLabelE = "E_step";
inline constexpr const char* kLabelExact = "exact_full";

/// Unitary on the model space together with the model time it represents.
struct ModelUnitary {
    Matrix matrix;
    double duration = 0.0;  // ns
    std::string label;

    ModelUnitary() = default;
    ModelUnitary(Matrix m, double dur, std::string lab)
        : matrix(std::move(m)), duration(dur), label(std::move(lab)) {
        if (label != kLabelBh && label != kLabelE && label != kLabelExact)
            throw std::invalid_argument("unknown model unitary label: " + label);
        const double defect = (matrix.adjoint() * matrix -
                               Matrix::Identity(matrix.rows(), matrix.cols()))
                                  .cwiseAbs()
                                  .maxCoeff();
        if (defect > 1e-12)
            throw std::invalid_argument("matrix is not unitary (defect " + std::to_string(defect) +
                                        ")");
    }
};

inline fockspace::HilbertLayout hardcore_layout(int sites) {
    return fockspace::HilbertLayout(std::vector<int>(sites, 2));
}

/// Open-boundary chain Hamiltonian
/// H = J sum_i (b_i^dag b_{i+1} + h.c.) + V sum_i n_i n_{i+1}, i = 0..sites-2.
inline fockspace::FockOperator ebh_hamiltonian(const EbhParams& p) {
    p.validate();
    const auto layout = hardcore_layout(p.sites);
    const long dim = layout.total_dim();
    Matrix h = Matrix::Zero(dim, dim);
    for (int i = 0; i + 1 < p.sites; ++i) {
        Matrix hop = fockspace::raising_op(layout, i).matrix *
                     fockspace::lowering_op(layout, i + 1).matrix;
        hop += hop.adjoint().eval();
        Matrix nn = fockspace::number_op(layout, i).matrix *
                    fockspace::number_op(layout, i + 1).matrix;
        h += p.J * hop + p.V() * nn;
    }
    return fockspace::FockOperator(layout, std::move(h));
}

/// Two-site hopping step exp[-i dt J (b0^dag b1 + b0 b1^dag)]; acts
/// nontrivially only on span{|01>, |10>}.
inline ModelUnitary bh_step_unitary(double J, double dt) {
    if (dt <= 0) throw std::invalid_argument("step duration must be positive");
    const auto layout = hardcore_layout(2);
    Matrix hop = fockspace::raising_op(layout, 0).matrix * fockspace::lowering_op(layout, 1).matrix;
    hop += hop.adjoint().eval();
    Matrix u = propagation::matrix_exp(fockspace::FockOperator(layout, J * hop), dt);
    return ModelUnitary(std::move(u), dt, kLabelBh);
}

/// Two-site potential step: diagonal phase e^{-i V dt} on |11>.
inline ModelUnitary e_step_unitary(double V, double dt) {
    if (dt <= 0) throw std::invalid_argument("step duration must be positive");
    Matrix u = Matrix::Identity(4, 4);
    u(3, 3) = std::exp(cxd(0.0, -V * dt));
    return ModelUnitary(std::move(u), dt, kLabelE);
}

/// Exact full-chain evolution exp[-i T_s (H_BH + n_v H_E)]; the reference
/// oracle for Trotter error and phase tracking.
inline ModelUnitary exact_evolution(const EbhParams& p, double T_s) {
    p.validate();
    if (T_s < 0) throw std::invalid_argument("evolution time must be non-negative");
    if (p.sites > 12)
        throw std::length_error("chain of " + std::to_string(p.sites) +
                                " sites exceeds the dense-exponential capacity (12)");
    Matrix u = propagation::matrix_exp(ebh_hamiltonian(p), T_s);
    return ModelUnitary(std::move(u), T_s, kLabelExact);
}

}  // namespace model
}  // namespace pulsesim

#endif  // PULSESIM_MODEL_HPP
