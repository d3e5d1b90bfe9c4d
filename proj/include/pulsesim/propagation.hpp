#ifndef PULSESIM_PROPAGATION_HPP
#define PULSESIM_PROPAGATION_HPP

// Adaptive ODE propagation of the Schroedinger equation for unitaries and
// for the jointly-integrated parameter-derivative system, plus the dense
// Hermitian matrix exponential.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulsesim/fockspace.hpp"

namespace pulsesim {
namespace propagation {

struct IntegratorConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = 0.5;  // ns
    int method_order = 5;   // embedded 5(4) pair
};

struct PropagationResult {
    Matrix U_final;
    std::vector<Matrix> partials;  // one dU/dalpha per optimized parameter
    long steps_taken = 0;
    long rhs_evals = 0;
};

class PropagationError : public std::runtime_error {
  public:
    PropagationError(const std::string& msg, double t_reached)
        : std::runtime_error(msg + " (t reached: " + std::to_string(t_reached) + " ns)"),
          t_reached_(t_reached) {}
    double t_reached() const { return t_reached_; }

  private:
    double t_reached_;
};

/// Fills a preallocated dim x dim matrix with H(t) in rad/ns.
using HamiltonianFn = std::function<void(double, Matrix&)>;

namespace detail {

// Dormand-Prince 5(4) tableau. Stage 7 reuses the b-row (FSAL).
struct Dopri5 {
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a2[1] = {1.0 / 5};
    static constexpr double a3[2] = {3.0 / 40, 9.0 / 40};
    static constexpr double a4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
    static constexpr double a5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
    static constexpr double a6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                                     -5103.0 / 18656};
    static constexpr double b[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                    11.0 / 84};
    // b - bhat, with the 7th-stage weight -1/40
    static constexpr double e[7] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                    -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
};

// Integrates y' = rhs(t, y) over [0, t_end]. The embedded error estimate is
// measured on the top `err_rows` rows only; in the coupled-derivative system
// those rows hold U, so U and all partials share one step sequence keyed to
// the accuracy of U.
template <class Rhs>
void integrate(Rhs&& rhs, double t_end, Matrix& y, const IntegratorConfig& cfg, long err_rows,
               long& steps, long& evals) {
    if (cfg.abs_tol <= 0 || cfg.rel_tol <= 0)
        throw std::invalid_argument("integrator tolerances must be positive");
    if (t_end == 0.0) return;
    if (t_end < 0.0) throw std::invalid_argument("propagation time must be non-negative");

    using D = Dopri5;
    const long rows = y.rows(), cols = y.cols();
    Matrix k[7];
    for (auto& m : k) m.resize(rows, cols);
    Matrix ytmp(rows, cols), y5(rows, cols), errm(err_rows, cols);

    rhs(0.0, y, k[0]);
    ++evals;
    if (!k[0].allFinite()) throw PropagationError("non-finite right-hand side", 0.0);

    double t = 0.0;
    const double d0 = k[0].topRows(err_rows).cwiseAbs().maxCoeff();
    double h = std::min({cfg.max_step, t_end, d0 > 0 ? 1e-2 / d0 : t_end / 10});
    const double h_floor = 1e-13 * std::max(1.0, t_end);

    while (t < t_end) {
        h = std::min({h, cfg.max_step, t_end - t});
        if (h < h_floor) throw PropagationError("step size underflow", t);

        ytmp.noalias() = y + (h * D::a2[0]) * k[0];
        rhs(t + D::c[1] * h, ytmp, k[1]);
        ytmp.noalias() = y + (h * D::a3[0]) * k[0] + (h * D::a3[1]) * k[1];
        rhs(t + D::c[2] * h, ytmp, k[2]);
        ytmp.noalias() = y + (h * D::a4[0]) * k[0] + (h * D::a4[1]) * k[1] + (h * D::a4[2]) * k[2];
        rhs(t + D::c[3] * h, ytmp, k[3]);
        ytmp.noalias() = y + (h * D::a5[0]) * k[0] + (h * D::a5[1]) * k[1] + (h * D::a5[2]) * k[2] +
                         (h * D::a5[3]) * k[3];
        rhs(t + D::c[4] * h, ytmp, k[4]);
        ytmp.noalias() = y + (h * D::a6[0]) * k[0] + (h * D::a6[1]) * k[1] + (h * D::a6[2]) * k[2] +
                         (h * D::a6[3]) * k[3] + (h * D::a6[4]) * k[4];
        rhs(t + h, ytmp, k[5]);
        y5.noalias() = y + (h * D::b[0]) * k[0] + (h * D::b[2]) * k[2] + (h * D::b[3]) * k[3] +
                       (h * D::b[4]) * k[4] + (h * D::b[5]) * k[5];
        rhs(t + h, y5, k[6]);
        evals += 6;

        errm.noalias() = (h * D::e[0]) * k[0].topRows(err_rows) +
                         (h * D::e[2]) * k[2].topRows(err_rows) +
                         (h * D::e[3]) * k[3].topRows(err_rows) +
                         (h * D::e[4]) * k[4].topRows(err_rows) +
                         (h * D::e[5]) * k[5].topRows(err_rows) +
                         (h * D::e[6]) * k[6].topRows(err_rows);

        double acc = 0.0;
        for (long j = 0; j < cols; ++j) {
            for (long i = 0; i < err_rows; ++i) {
                const double sc =
                    cfg.abs_tol +
                    cfg.rel_tol * std::max(std::abs(y(i, j)), std::abs(y5(i, j)));
                const double q = std::abs(errm(i, j)) / sc;
                acc += q * q;
            }
        }
        const double err = std::sqrt(acc / static_cast<double>(err_rows * cols));

        if (!std::isfinite(err)) {
            // a stage blew up; shrink hard and retry
            h *= 0.1;
            if (h < h_floor) throw PropagationError("non-finite right-hand side", t);
            continue;
        }

        if (err <= 1.0) {
            t += h;
            y.swap(y5);
            k[0].swap(k[6]);  // FSAL
            ++steps;
            const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= factor;
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
}

}  // namespace detail

/// Solves dU/dt = -i H(t) U from U(0) = I over [0, T_c].
inline PropagationResult propagate_unitary(const HamiltonianFn& H_of_t, long dim, double T_c,
                                           const IntegratorConfig& cfg = {}) {
    Matrix H(dim, dim);
    auto rhs = [&](double t, const Matrix& y, Matrix& dy) {
        H_of_t(t, H);
        dy.noalias() = cxd(0.0, -1.0) * (H * y);
    };
    PropagationResult result;
    result.U_final = Matrix::Identity(dim, dim);
    detail::integrate(rhs, T_c, result.U_final, cfg, dim, result.steps_taken, result.rhs_evals);
    return result;
}

/// Jointly integrates U and every dU/dalpha_k from (I, 0). The system is
/// block lower-triangular: d/dt dU_k = -i (dH_k U + H dU_k).
inline PropagationResult propagate_goat(const HamiltonianFn& H_of_t,
                                        const std::vector<HamiltonianFn>& dH_dalpha_of_t, long dim,
                                        double T_c, const IntegratorConfig& cfg = {}) {
    const long p = static_cast<long>(dH_dalpha_of_t.size());
    Matrix H(dim, dim), dH(dim, dim);
    auto rhs = [&](double t, const Matrix& y, Matrix& dy) {
        H_of_t(t, H);
        H *= cxd(0.0, -1.0);
        const auto u = y.topRows(dim);
        dy.topRows(dim).noalias() = H * u;
        for (long k = 0; k < p; ++k) {
            dH_dalpha_of_t[k](t, dH);
            dy.middleRows((k + 1) * dim, dim).noalias() =
                cxd(0.0, -1.0) * (dH * u) + H * y.middleRows((k + 1) * dim, dim);
        }
    };
    Matrix y = Matrix::Zero((p + 1) * dim, dim);
    y.topRows(dim) = Matrix::Identity(dim, dim);
    PropagationResult result;
    detail::integrate(rhs, T_c, y, cfg, dim, result.steps_taken, result.rhs_evals);
    result.U_final = y.topRows(dim);
    result.partials.reserve(p);
    for (long k = 0; k < p; ++k) result.partials.push_back(y.middleRows((k + 1) * dim, dim));
    return result;
}

/// Single-channel derivative family dH_k(t) = coefficients[k](t) * C(t).
/// Shares the one C(t) * U product across all parameters, which keeps the
/// coupled system cheap for many-parameter ansatze.
struct FactoredDerivative {
    std::function<void(double, Matrix&)> control_op;                  // fills C(t)
    std::function<void(double, std::vector<double>&)> coefficients;   // fills c_k(t)
    int param_count = 0;
};

inline PropagationResult propagate_goat(const HamiltonianFn& H_of_t,
                                        const FactoredDerivative& deriv, long dim, double T_c,
                                        const IntegratorConfig& cfg = {}) {
    const long p = deriv.param_count;
    Matrix H(dim, dim), C(dim, dim), W(dim, dim);
    std::vector<double> coeffs(p);
    auto rhs = [&](double t, const Matrix& y, Matrix& dy) {
        H_of_t(t, H);
        H *= cxd(0.0, -1.0);
        const auto u = y.topRows(dim);
        dy.topRows(dim).noalias() = H * u;
        deriv.control_op(t, C);
        W.noalias() = cxd(0.0, -1.0) * (C * u);
        deriv.coefficients(t, coeffs);
        for (long k = 0; k < p; ++k) {
            dy.middleRows((k + 1) * dim, dim).noalias() =
                coeffs[k] * W + H * y.middleRows((k + 1) * dim, dim);
        }
    };
    Matrix y = Matrix::Zero((p + 1) * dim, dim);
    y.topRows(dim) = Matrix::Identity(dim, dim);
    PropagationResult result;
    detail::integrate(rhs, T_c, y, cfg, dim, result.steps_taken, result.rhs_evals);
    result.U_final = y.topRows(dim);
    result.partials.reserve(p);
    for (long k = 0; k < p; ++k) result.partials.push_back(y.middleRows((k + 1) * dim, dim));
    return result;
}

/// exp(-i H t) via eigendecomposition of the Hermitian matrix.
inline Matrix matrix_exp(const fockspace::FockOperator& H, double t) {
    const double herm_defect = (H.matrix - H.matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm_defect > 1e-10)
        throw std::invalid_argument("matrix_exp requires a Hermitian generator (defect " +
                                    std::to_string(herm_defect) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> solver((H.matrix + H.matrix.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed in matrix_exp");
    const auto& v = solver.eigenvectors();
    Eigen::VectorXcd phases(solver.eigenvalues().size());
    for (long i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(cxd(0.0, -solver.eigenvalues()(i) * t));
    return v * phases.asDiagonal() * v.adjoint();
}

}  // namespace propagation
}  // namespace pulsesim

#endif  // PULSESIM_PROPAGATION_HPP
