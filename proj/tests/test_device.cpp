#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pulsesim/device.hpp"
#include "test_util.hpp"

using namespace pulsesim;
using namespace pulsesim::device;
using test_util::max_abs;

namespace {

ControlAnsatz single_gaussian(double T_c, double a, double mu, double sigma) {
    ControlAnsatz ansatz;
    ansatz.T_c = T_c;
    ansatz.gaussians.push_back({a, mu, sigma});
    return ansatz;
}

}  // namespace

TEST_CASE("raw_coupling") {
    SECTION("peak value and one-sigma points") {
        auto ansatz = single_gaussian(50.0, -0.002, 25.0, 6.36);
        REQUIRE(raw_coupling(ansatz, 25.0) == Catch::Approx(-0.002));
        REQUIRE(raw_coupling(ansatz, 25.0 + 6.36) == Catch::Approx(-0.002 * std::exp(-0.5)));
        REQUIRE(raw_coupling(ansatz, 25.0 - 6.36) == Catch::Approx(-0.002 * std::exp(-0.5)));
    }
    SECTION("20-component ansatz matches the naive summation oracle") {
        std::mt19937 gen(99);
        std::uniform_real_distribution<double> dist(0.1, 1.0);
        ControlAnsatz ansatz;
        ansatz.T_c = 100.0;
        for (int m = 0; m < 20; ++m)
            ansatz.gaussians.push_back({dist(gen) - 0.5, 100.0 * dist(gen), 10.0 * dist(gen)});
        for (double t : {0.0, 13.7, 50.0, 99.0}) {
            double oracle = 0.0;
            for (const auto& g : ansatz.gaussians)
                oracle += g.amplitude *
                          std::exp(-(t - g.center) * (t - g.center) / (2 * g.width * g.width));
            REQUIRE(std::abs(raw_coupling(ansatz, t) - oracle) < 1e-14);
        }
    }
}

TEST_CASE("saturation transfer function") {
    const Saturation s = table1_saturation();
    SECTION("zero input maps to zero exactly") {
        REQUIRE(std::abs(saturate(s, 0.0)) < 1e-15);
    }
    SECTION("asymptotes") {
        REQUIRE(saturate(s, 1e6) == Catch::Approx(s.upper));
        REQUIRE(saturate(s, -1e6) == Catch::Approx(s.lower));
        REQUIRE(saturate(s, -1e12) == s.lower);  // exp overflow path
    }
    SECTION("one bound-width input stays strictly inside the band") {
        const double v = saturate(s, s.upper);
        REQUIRE(v > 0.0);
        REQUIRE(v < s.upper);
        // direct formula evaluation oracle
        const double width = s.upper - s.lower;
        const double expected =
            s.lower + width / (1.0 + (-s.upper / s.lower) *
                                         std::exp(-2.0 * s.gain * s.upper / width));
        REQUIRE(v == Catch::Approx(expected).epsilon(1e-14));
    }
    SECTION("output bounded over random inputs") {
        // strict openness degrades to closure once the logistic tail
        // underflows, around five widths with this gain
        std::mt19937 gen(7);
        const double width = s.upper - s.lower;
        std::uniform_real_distribution<double> dist(-1e3 * width, 1e3 * width);
        for (int i = 0; i < 10000; ++i) {
            const double eps = dist(gen);
            const double v = saturate(s, eps);
            REQUIRE(v >= s.lower);
            REQUIRE(v <= s.upper);
            if (std::abs(eps) < 4 * width) {
                REQUIRE(v > s.lower);
                REQUIRE(v < s.upper);
            }
        }
    }
    SECTION("monotonicity on random pairs") {
        std::mt19937 gen(11);
        const double width = s.upper - s.lower;
        std::uniform_real_distribution<double> dist(-4 * width, 4 * width);
        for (int i = 0; i < 2000; ++i) {
            double e1 = dist(gen), e2 = dist(gen);
            if (e1 > e2) std::swap(e1, e2);
            if (e2 - e1 < 1e-9) continue;
            REQUIRE(saturate(s, e1) < saturate(s, e2));
        }
    }
}

TEST_CASE("saturation derivative") {
    const Saturation s = table1_saturation();
    SECTION("matches central finite differences") {
        for (double eps : {0.0, s.upper, -s.upper, 10 * s.upper, -10 * s.upper}) {
            const double h = 1e-7;
            const double fd = (saturate(s, eps + h) - saturate(s, eps - h)) / (2 * h);
            const double an = saturate_derivative(s, eps);
            REQUIRE(std::abs(an - fd) / std::abs(fd) < 1e-6);
        }
    }
    SECTION("grid-scan maximum sits at zero for symmetric bounds") {
        Saturation sym;
        sym.lower = -0.01;
        sym.upper = 0.01;
        sym.gain = 4.0;
        const double d0 = saturate_derivative(sym, 0.0);
        for (int i = -5000; i <= 5000; ++i) {
            const double eps = i * (50 * sym.upper) / 5000.0;
            REQUIRE(saturate_derivative(sym, eps) <= d0 + 1e-15);
        }
    }
    SECTION("asymmetric bounds put the maximum at the logistic inflection") {
        // with Q = -upper/lower < 1 the inflection sits at negative input;
        // scan confirms the peak location rather than assuming it
        double best_eps = 0.0, best = 0.0;
        for (int i = -5000; i <= 5000; ++i) {
            const double eps = i * (50 * s.upper) / 5000.0;
            const double d = saturate_derivative(s, eps);
            if (d > best) {
                best = d;
                best_eps = eps;
            }
        }
        REQUIRE(best_eps < 0.0);
        REQUIRE(best > saturate_derivative(s, 0.0));
    }
    SECTION("tails vanish") {
        const double peak = saturate_derivative(s, 0.0);
        const double width = s.upper - s.lower;
        REQUIRE(saturate_derivative(s, 100 * width) < 1e-12 * peak);
        REQUIRE(saturate_derivative(s, -100 * width) < 1e-12 * peak);
    }
    SECTION("strictly positive over the working range") {
        for (double eps = -10 * (s.upper - s.lower); eps < 10 * (s.upper - s.lower); eps += 0.01)
            REQUIRE(saturate_derivative(s, eps) > 0.0);
    }
}

TEST_CASE("ansatz partials") {
    auto ansatz = single_gaussian(50.0, -0.0021, 24.0, 6.0);
    ansatz.gaussians.push_back({0.0012, 31.0, 3.5});
    SECTION("match central finite differences") {
        const double t = 27.3;
        auto params = ansatz.params();
        std::vector<double> grad(params.size());
        ansatz_partials(ansatz, t, grad);
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(params[k]));
            auto up = params, dn = params;
            up[k] += h;
            dn[k] -= h;
            const double fd = (raw_coupling(ControlAnsatz::from_params(50.0, up), t) -
                               raw_coupling(ControlAnsatz::from_params(50.0, dn), t)) /
                              (2 * h);
            if (std::abs(fd) > 1e-12)
                REQUIRE(std::abs(grad[k] - fd) / std::abs(fd) < 1e-7);
            else
                REQUIRE(std::abs(grad[k] - fd) < 1e-10);
        }
    }
    SECTION("amplitude partial is one at the center, center partial is zero") {
        std::vector<double> grad(6);
        ansatz_partials(ansatz, 24.0, grad);
        REQUIRE(grad[0] == Catch::Approx(1.0));
        REQUIRE(grad[1] == 0.0);
    }
}

TEST_CASE("rotating frame Hamiltonian") {
    const DeviceSpec spec = table1_device();
    SECTION("zero coupling with idle frames at the interaction frequency") {
        DeviceSpec tuned = spec;
        tuned.omega_idle = {spec.omega_int, spec.omega_int};
        auto h = rotating_frame_hamiltonian(tuned, 0.0, 3.0);
        // purely anharmonic diagonal: delta_i/2 * n(n-1) per level
        Matrix offdiag = h.matrix - h.matrix.diagonal().asDiagonal().toDenseMatrix();
        REQUIRE(max_abs(offdiag) == 0.0);
        fockspace::HilbertLayout layout{3, 3};
        REQUIRE(std::abs(h.matrix(layout.index_of(std::array<int, 2>{2, 0}),
                                  layout.index_of(std::array<int, 2>{2, 0})) -
                         cxd(spec.delta[0])) < 1e-12);
        REQUIRE(std::abs(h.matrix(layout.index_of(std::array<int, 2>{0, 2}),
                                  layout.index_of(std::array<int, 2>{0, 2})) -
                         cxd(spec.delta[1])) < 1e-12);
        REQUIRE(std::abs(h.matrix(0, 0)) == 0.0);
    }
    SECTION("Hermitian at sampled times") {
        for (double t : {0.0, 13.7, 100.0}) {
            auto h = rotating_frame_hamiltonian(spec, -0.1, t);
            REQUIRE(max_abs(h.matrix - h.matrix.adjoint()) <= 1e-14);
        }
    }
    SECTION("coupling phase beats at the idle-frequency difference") {
        fockspace::HilbertLayout layout{3, 3};
        const long i01 = layout.index_of(std::array<int, 2>{0, 1});
        const long i10 = layout.index_of(std::array<int, 2>{1, 0});
        auto h0 = rotating_frame_hamiltonian(spec, 0.05, 0.0);
        auto h1 = rotating_frame_hamiltonian(spec, 0.05, 1.0);
        const double beat = std::arg(h1.matrix(i10, i01) / h0.matrix(i10, i01));
        REQUIRE(beat == Catch::Approx(two_pi * 0.16).epsilon(1e-10));
    }
    SECTION("conserves total excitation number at all times") {
        Matrix n = fockspace::total_number_op(fockspace::HilbertLayout{3, 3}).matrix;
        for (double t : {0.0, 4.2, 77.7}) {
            auto h = rotating_frame_hamiltonian(spec, -0.2, t);
            REQUIRE(max_abs(h.matrix * n - n * h.matrix) <= 1e-12);
        }
    }
    SECTION("rejects single-site layouts") {
        REQUIRE_THROWS_AS(
            TransmonPairHamiltonian(spec, fockspace::HilbertLayout{3}),
            std::invalid_argument);
    }
}

TEST_CASE("chain rule through saturation matches finite differences of H") {
    const DeviceSpec spec = table1_device();
    const Saturation sat = table1_saturation();
    fockspace::HilbertLayout layout{3, 3};
    TransmonPairHamiltonian assembler(spec, layout);

    auto ansatz = single_gaussian(50.0, -0.0021, 24.0, 6.0);
    ansatz.gaussians.push_back({0.0012, 31.0, 3.5});
    const double t = 22.4;

    auto params = ansatz.params();
    std::vector<double> partials(params.size());
    ansatz_partials(ansatz, t, partials);
    const double sprime = saturate_derivative(sat, raw_coupling(ansatz, t));

    Matrix c(9, 9), hp(9, 9), hm(9, 9);
    assembler.coupling_op(t, c);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix analytic = sprime * partials[k] * c;
        const double h = 1e-6 * std::max(1.0, std::abs(params[k]));
        auto up = params, dn = params;
        up[k] += h;
        dn[k] -= h;
        auto up_ansatz = ControlAnsatz::from_params(50.0, up);
        auto dn_ansatz = ControlAnsatz::from_params(50.0, dn);
        assembler.assemble(saturate(sat, raw_coupling(up_ansatz, t)), t, hp);
        assembler.assemble(saturate(sat, raw_coupling(dn_ansatz, t)), t, hm);
        Matrix fd = (hp - hm) / (2 * h);
        const double scale = std::max(max_abs(fd), 1e-12);
        REQUIRE(max_abs(analytic - fd) / scale < 1e-6);
    }
}
