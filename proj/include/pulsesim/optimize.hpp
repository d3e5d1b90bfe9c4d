#ifndef PULSESIM_OPTIMIZE_HPP
#define PULSESIM_OPTIMIZE_HPP

// Multistart quasi-Newton minimization: uniform guess sampling from a
// counter-based generator, infidelity ranking of the guess pool, and
// limited-memory BFGS with a backtracking line search.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pulsesim/goat.hpp"
#include "pulsesim/threading.hpp"

namespace pulsesim {
namespace optimize {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

/// Deterministic uniform draw keyed by (seed, stream, counter); streams
/// sample independently of evaluation order, so pools parallelize
/// reproducibly.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(mix_seed(mix_seed(seed, stream), counter) >> 11) * 0x1.0p-53;
}

/// Per-gaussian sampling ranges: amplitudes in rad/ns, centers as fractions
/// of the control time, widths in ns.
struct GuessRanges {
    std::pair<double, double> a_range{device::two_pi * -0.005, device::two_pi * 0.003};
    std::pair<double, double> mu_frac_range{1.0 / 3, 2.0 / 3};
    std::pair<double, double> sigma_range{1.0, 10.0};

    void validate() const {
        for (const auto& [lo, hi] :
             {a_range, mu_frac_range, sigma_range})
            if (!(lo < hi)) throw std::invalid_argument("guess range must have lo < hi");
    }
};

/// `count` parameter vectors of length 3M, coordinates uniform in their
/// ranges (centers scaled to [0, T_c]); deterministic under the seed.
inline std::vector<std::vector<double>> sample_guesses(const GuessRanges& ranges, int M,
                                                       double T_c, int count,
                                                       std::uint64_t seed) {
    ranges.validate();
    if (count < 1) throw std::invalid_argument("guess count must be at least 1");
    if (M < 1) throw std::invalid_argument("ansatz needs at least one gaussian");
    std::vector<std::vector<double>> guesses(count);
    for (int i = 0; i < count; ++i) {
        auto& g = guesses[i];
        g.reserve(3 * M);
        std::uint64_t coord = 0;
        for (int m = 0; m < M; ++m) {
            const double ua = uniform01(seed, i, coord++);
            const double um = uniform01(seed, i, coord++);
            const double us = uniform01(seed, i, coord++);
            g.push_back(ranges.a_range.first +
                        (ranges.a_range.second - ranges.a_range.first) * ua);
            g.push_back(T_c * (ranges.mu_frac_range.first +
                               (ranges.mu_frac_range.second - ranges.mu_frac_range.first) * um));
            g.push_back(ranges.sigma_range.first +
                        (ranges.sigma_range.second - ranges.sigma_range.first) * us);
        }
    }
    return guesses;
}

struct RankedGuess {
    double infidelity = 0.0;
    std::size_t pool_index = 0;
    std::vector<double> params;
};

/// Evaluates the objective (no gradient) for every guess and returns them
/// sorted ascending; ties keep pool order.
inline std::vector<RankedGuess> rank_guesses(const goat::GoatProblem& problem,
                                             const std::vector<std::vector<double>>& guesses,
                                             int threads = 1) {
    std::vector<RankedGuess> ranked(guesses.size());
    threading::parallel_for(static_cast<long>(guesses.size()), threads, [&](long i) {
        ranked[i].pool_index = static_cast<std::size_t>(i);
        ranked[i].params = guesses[i];
        try {
            ranked[i].infidelity = goat::infidelity(problem, guesses[i]).infidelity;
        } catch (const propagation::PropagationError&) {
            ranked[i].infidelity = std::numeric_limits<double>::infinity();
        }
    });
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedGuess& a, const RankedGuess& b) {
                         return a.infidelity < b.infidelity;
                     });
    return ranked;
}

enum class Termination { gradient_converged, max_iterations, line_search_failed };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::gradient_converged: return "gradient_converged";
        case Termination::max_iterations: return "max_iterations";
        case Termination::line_search_failed: return "line_search_failed";
    }
    return "unknown";
}

inline Termination termination_from_string(const std::string& s) {
    if (s == "gradient_converged") return Termination::gradient_converged;
    if (s == "max_iterations") return Termination::max_iterations;
    if (s == "line_search_failed") return Termination::line_search_failed;
    throw std::invalid_argument("unknown termination label: " + s);
}

struct OptimizationRecord {
    std::uint64_t seed = 0;
    std::vector<double> initial_params;
    std::vector<double> final_params;
    std::vector<double> infidelity_trace;  // value at the start plus each accepted iterate
    double final_gradient_norm = 0.0;      // infinity norm
    int iterations = 0;
    Termination termination = Termination::max_iterations;
    double wall_time_s = 0.0;

    double final_infidelity() const { return infidelity_trace.back(); }
};

/// Objective callbacks. `value` may signal an infeasible point by returning
/// a non-finite number or throwing PropagationError; the line search treats
/// both as a rejected step.
struct ObjectiveFns {
    std::function<double(std::span<const double>)> value;
    std::function<double(std::span<const double>, std::vector<double>&)> value_and_gradient;
};

struct MinimizeOptions {
    int max_iterations = 500;
    double grad_tol = 1e-5;       // infinity norm
    int memory = 10;              // L-BFGS history depth
    double sufficient_decrease = 1e-4;
    double contraction = 0.5;
    int max_backtracks = 60;
};

namespace detail {

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct LbfgsHistory {
    std::deque<std::vector<double>> s, y;
    std::deque<double> rho;
    int memory;

    explicit LbfgsHistory(int mem) : memory(mem) {}

    void push(std::vector<double> si, std::vector<double> yi, double sy) {
        s.push_back(std::move(si));
        y.push_back(std::move(yi));
        rho.push_back(1.0 / sy);
        if (static_cast<int>(s.size()) > memory) {
            s.pop_front();
            y.pop_front();
            rho.pop_front();
        }
    }

    // two-loop recursion for -H g
    std::vector<double> direction(const std::vector<double>& grad) const {
        std::vector<double> q = grad;
        const int k = static_cast<int>(s.size());
        std::vector<double> alpha(k);
        for (int i = k - 1; i >= 0; --i) {
            alpha[i] = rho[i] * dot(s[i], q);
            for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * y[i][j];
        }
        if (k > 0) {
            const double gamma = dot(s[k - 1], y[k - 1]) / dot(y[k - 1], y[k - 1]);
            for (double& x : q) x *= gamma;
        }
        for (int i = 0; i < k; ++i) {
            const double beta = rho[i] * dot(y[i], q);
            for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * s[i][j];
        }
        for (double& x : q) x = -x;
        return q;
    }
};

}  // namespace detail

/// L-BFGS with a backtracking (sufficient decrease) line search. The trace
/// holds the objective at the initial point and after each accepted step,
/// so it is non-increasing by construction.
inline OptimizationRecord minimize(const ObjectiveFns& objective, std::vector<double> initial,
                                   const MinimizeOptions& options = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    OptimizationRecord record;
    record.initial_params = initial;

    std::vector<double> x = std::move(initial);
    std::vector<double> grad;
    double f = objective.value_and_gradient(x, grad);
    record.infidelity_trace.push_back(f);

    detail::LbfgsHistory history(options.memory);
    record.termination = Termination::max_iterations;

    if (detail::inf_norm(grad) < options.grad_tol) {
        record.termination = Termination::gradient_converged;
    } else {
        for (int iter = 0; iter < options.max_iterations; ++iter) {
            std::vector<double> dir = history.direction(grad);
            double gd = detail::dot(grad, dir);
            if (gd >= 0.0) {  // not a descent direction; fall back to steepest descent
                for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = -grad[j];
                gd = detail::dot(grad, dir);
            }

            double step = 1.0;
            bool accepted = false;
            double f_new = f;
            std::vector<double> x_new(x.size());
            for (int bt = 0; bt < options.max_backtracks; ++bt) {
                for (std::size_t j = 0; j < x.size(); ++j) x_new[j] = x[j] + step * dir[j];
                if (x_new == x) break;  // step shrank below floating-point resolution
                double trial;
                try {
                    trial = objective.value(x_new);
                } catch (const propagation::PropagationError&) {
                    trial = std::numeric_limits<double>::quiet_NaN();
                }
                if (std::isfinite(trial) &&
                    trial <= f + options.sufficient_decrease * step * gd) {
                    f_new = trial;
                    accepted = true;
                    break;
                }
                step *= options.contraction;
            }
            if (!accepted) {
                record.termination = Termination::line_search_failed;
                break;
            }

            std::vector<double> grad_new;
            objective.value_and_gradient(x_new, grad_new);

            std::vector<double> s(x.size()), y(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) {
                s[j] = x_new[j] - x[j];
                y[j] = grad_new[j] - grad[j];
            }
            const double sy = detail::dot(s, y);
            if (sy > 1e-10 * std::sqrt(detail::dot(s, s)) * std::sqrt(detail::dot(y, y)))
                history.push(std::move(s), std::move(y), sy);

            x = std::move(x_new);
            f = f_new;
            grad = std::move(grad_new);
            ++record.iterations;
            record.infidelity_trace.push_back(f);

            if (detail::inf_norm(grad) < options.grad_tol) {
                record.termination = Termination::gradient_converged;
                break;
            }
        }
    }

    record.final_params = std::move(x);
    record.final_gradient_norm = detail::inf_norm(grad);
    record.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return record;
}

inline ObjectiveFns goat_objective(const goat::GoatProblem& problem) {
    ObjectiveFns fns;
    fns.value = [&problem](std::span<const double> params) {
        return goat::infidelity(problem, params).infidelity;
    };
    fns.value_and_gradient = [&problem](std::span<const double> params,
                                        std::vector<double>& grad) {
        auto value = goat::infidelity_and_gradient(problem, params);
        grad = std::move(value.gradient);
        return value.infidelity;
    };
    return fns;
}

inline OptimizationRecord minimize(const goat::GoatProblem& problem, std::vector<double> initial,
                                   int max_iterations = 500, double grad_tol = 1e-5) {
    MinimizeOptions options;
    options.max_iterations = max_iterations;
    options.grad_tol = grad_tol;
    return minimize(goat_objective(problem), std::move(initial), options);
}

/// Samples `pool` guesses, ranks them by infidelity, runs the minimizer from
/// the top n_starts distinct guesses, and returns the records sorted by
/// (final infidelity, seed).
inline std::vector<OptimizationRecord> multistart(const goat::GoatProblem& problem,
                                                  const GuessRanges& ranges, int M,
                                                  int n_starts = 10, int pool = 10000,
                                                  std::uint64_t seed = 0, int threads = 1,
                                                  const MinimizeOptions& options = {}) {
    if (n_starts < 1 || n_starts > pool)
        throw std::invalid_argument("need 1 <= n_starts <= pool");
    auto guesses = sample_guesses(ranges, M, problem.T_c, pool, seed);
    auto ranked = rank_guesses(problem, guesses, threads);

    std::vector<RankedGuess> starts;
    for (const auto& guess : ranked) {
        if (static_cast<int>(starts.size()) == n_starts) break;
        bool duplicate = false;
        for (const auto& taken : starts)
            if (taken.params == guess.params) { duplicate = true; break; }
        if (!duplicate) starts.push_back(guess);
    }

    std::vector<OptimizationRecord> records(starts.size());
    threading::parallel_for(static_cast<long>(starts.size()), threads, [&](long i) {
        records[i] = minimize(goat_objective(problem), starts[i].params, options);
        records[i].seed = mix_seed(seed, starts[i].pool_index);
    });
    std::stable_sort(records.begin(), records.end(),
                     [](const OptimizationRecord& a, const OptimizationRecord& b) {
                         if (a.final_infidelity() != b.final_infidelity())
                             return a.final_infidelity() < b.final_infidelity();
                         return a.seed < b.seed;
                     });
    return records;
}

}  // namespace optimize
}  // namespace pulsesim

#endif  // PULSESIM_OPTIMIZE_HPP
