#ifndef PULSESIM_TEST_UTIL_HPP
#define PULSESIM_TEST_UTIL_HPP

// Shared independent oracles for the test suites. These deliberately avoid
// the library's own evaluation paths.

#include <random>

#include "pulsesim/fockspace.hpp"

namespace test_util {

inline double max_abs(const pulsesim::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline pulsesim::Matrix random_hermitian(long dim, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    pulsesim::Matrix a(dim, dim);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) a(i, j) = pulsesim::cxd(dist(gen), dist(gen));
    return (a + a.adjoint()).eval() / 2.0;
}

// Scaling-and-squaring Taylor sum of exp(-i H t).
inline pulsesim::Matrix taylor_expm(const pulsesim::Matrix& h, double t) {
    pulsesim::Matrix m = pulsesim::cxd(0.0, -t) * h;
    int s = 0;
    while (max_abs(m) > 0.25) {
        m /= 2.0;
        ++s;
    }
    pulsesim::Matrix sum = pulsesim::Matrix::Identity(h.rows(), h.cols());
    pulsesim::Matrix term = sum;
    for (int n = 1; n < 40; ++n) {
        term = (term * m).eval() / static_cast<double>(n);
        sum += term;
        if (max_abs(term) < 1e-20) break;
    }
    for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
    return sum;
}

inline double unitarity_defect(const pulsesim::Matrix& u) {
    return max_abs(u.adjoint() * u - pulsesim::Matrix::Identity(u.rows(), u.cols()));
}

}  // namespace test_util

#endif  // PULSESIM_TEST_UTIL_HPP
