#ifndef PULSESIM_GOAT_HPP
#define PULSESIM_GOAT_HPP

// Projected-infidelity objective and its exact gradient, assembled from the
// jointly-integrated propagator and parameter derivatives.

#include <span>
#include <stdexcept>
#include <vector>

#include "pulsesim/device.hpp"
#include "pulsesim/fockspace.hpp"
#include "pulsesim/model.hpp"
#include "pulsesim/propagation.hpp"

namespace pulsesim {
namespace goat {

/// Everything needed to evaluate one control problem: the device, the
/// computational-subspace target, the projector defining that subspace,
/// the ansatz shape, the amplitude transfer, and integrator settings.
struct GoatProblem {
    device::DeviceSpec device;
    model::ModelUnitary target;              // rank x rank, subspace ordering
    fockspace::SubspaceProjector projector;  // subspace within the device space
    double T_c = 0.0;
    int gaussian_count = 0;  // M
    device::Saturation saturation;
    propagation::IntegratorConfig integrator;

    void validate() const {
        device.validate();
        saturation.validate();
        if (T_c <= 0) throw std::invalid_argument("control time must be positive");
        if (gaussian_count < 1) throw std::invalid_argument("ansatz needs at least one gaussian");
        if (target.matrix.rows() != projector.rank())
            throw std::invalid_argument("target dimension must equal the projector rank");
    }
};

/// Standard two-transmon problem: d = 3 per transmon, qubit-subspace
/// projector.
inline GoatProblem make_two_transmon_problem(const device::DeviceSpec& spec,
                                             model::ModelUnitary target, double T_c, int M,
                                             const device::Saturation& saturation,
                                             const propagation::IntegratorConfig& integrator) {
    GoatProblem problem;
    problem.device = spec;
    problem.target = std::move(target);
    problem.projector = fockspace::computational_projector(fockspace::HilbertLayout{3, 3});
    problem.T_c = T_c;
    problem.gaussian_count = M;
    problem.saturation = saturation;
    problem.integrator = integrator;
    problem.validate();
    return problem;
}

struct ObjectiveValue {
    double infidelity = 1.0;
    std::vector<double> gradient;  // length 3M, empty when not requested
    cxd overlap = 0.0;             // Tr(U_target^dag P U P)
};

/// Places a subspace unitary at the projector's basis indices, zero
/// elsewhere, so that Tr(embed(U)^dag V) contracts exactly the projected
/// block of V.
inline Matrix embed_target(const Matrix& u_sub, const fockspace::SubspaceProjector& projector) {
    const long r = projector.rank();
    if (u_sub.rows() != r || u_sub.cols() != r)
        throw std::invalid_argument("embedded block must match the projector rank");
    Matrix out = Matrix::Zero(projector.layout.total_dim(), projector.layout.total_dim());
    for (long j = 0; j < r; ++j)
        for (long k = 0; k < r; ++k)
            out(projector.basis_indices[j], projector.basis_indices[k]) = u_sub(j, k);
    return out;
}

/// Extracts the projected rank x rank block of a full-space matrix.
inline Matrix project_block(const Matrix& u_full, const fockspace::SubspaceProjector& projector) {
    const long r = projector.rank();
    Matrix out(r, r);
    for (long j = 0; j < r; ++j)
        for (long k = 0; k < r; ++k)
            out(j, k) = u_full(projector.basis_indices[j], projector.basis_indices[k]);
    return out;
}

namespace detail {

// Tr(M^dag P U P) over the projector's index set.
inline cxd projected_trace(const Matrix& m_sub, const Matrix& u_full,
                           const fockspace::SubspaceProjector& projector) {
    cxd tr = 0.0;
    const long r = projector.rank();
    for (long j = 0; j < r; ++j)
        for (long k = 0; k < r; ++k)
            tr += std::conj(m_sub(j, k)) *
                  u_full(projector.basis_indices[j], projector.basis_indices[k]);
    return tr;
}

struct Evaluation {
    device::ControlAnsatz ansatz;
    device::TransmonPairHamiltonian assembler;
    const GoatProblem& problem;

    Evaluation(const GoatProblem& prob, std::span<const double> params)
        : ansatz(device::ControlAnsatz::from_params(prob.T_c, params)),
          assembler(prob.device, prob.projector.layout),
          problem(prob) {
        if (params.size() != static_cast<std::size_t>(3 * prob.gaussian_count))
            throw std::invalid_argument("parameter vector must have length 3M");
    }

    propagation::HamiltonianFn hamiltonian() {
        return [this](double t, Matrix& h) {
            assembler.assemble(
                device::saturate(problem.saturation, device::raw_coupling(ansatz, t)), t, h);
        };
    }

    propagation::FactoredDerivative derivative() {
        propagation::FactoredDerivative fac;
        fac.param_count = 3 * problem.gaussian_count;
        fac.control_op = [this](double t, Matrix& c) { assembler.coupling_op(t, c); };
        fac.coefficients = [this](double t, std::vector<double>& c) {
            device::ansatz_partials(ansatz, t, c);
            const double sprime = device::saturate_derivative(
                problem.saturation, device::raw_coupling(ansatz, t));
            for (double& v : c) v *= sprime;
        };
        return fac;
    }
};

}  // namespace detail

/// Objective value only: builds the saturated control, propagates, projects.
inline ObjectiveValue infidelity(const GoatProblem& problem, std::span<const double> params) {
    detail::Evaluation eval(problem, params);
    auto result = propagation::propagate_unitary(eval.hamiltonian(), eval.assembler.dim(),
                                                 problem.T_c, problem.integrator);
    ObjectiveValue value;
    value.overlap = detail::projected_trace(problem.target.matrix, result.U_final,
                                            problem.projector);
    const double dim = static_cast<double>(problem.projector.rank());
    value.infidelity = 1.0 - std::norm(value.overlap) / (dim * dim);
    return value;
}

/// Objective with its exact gradient, via the coupled equations of motion
/// and the chain rule through the saturation and the ansatz partials.
inline ObjectiveValue infidelity_and_gradient(const GoatProblem& problem,
                                              std::span<const double> params) {
    detail::Evaluation eval(problem, params);
    auto result = propagation::propagate_goat(eval.hamiltonian(), eval.derivative(),
                                              eval.assembler.dim(), problem.T_c,
                                              problem.integrator);
    ObjectiveValue value;
    value.overlap = detail::projected_trace(problem.target.matrix, result.U_final,
                                            problem.projector);
    const double dim = static_cast<double>(problem.projector.rank());
    value.infidelity = 1.0 - std::norm(value.overlap) / (dim * dim);
    value.gradient.resize(params.size());
    const cxd overlap_conj = std::conj(value.overlap);
    for (std::size_t k = 0; k < params.size(); ++k) {
        const cxd partial_trace = detail::projected_trace(problem.target.matrix,
                                                          result.partials[k], problem.projector);
        value.gradient[k] = -2.0 / (dim * dim) * (partial_trace * overlap_conj).real();
    }
    return value;
}

/// Propagates a pulse and returns the full-space device unitary.
inline Matrix propagate_pulse(const GoatProblem& problem, std::span<const double> params) {
    detail::Evaluation eval(problem, params);
    return propagation::propagate_unitary(eval.hamiltonian(), eval.assembler.dim(), problem.T_c,
                                          problem.integrator)
        .U_final;
}

}  // namespace goat
}  // namespace pulsesim

#endif  // PULSESIM_GOAT_HPP
