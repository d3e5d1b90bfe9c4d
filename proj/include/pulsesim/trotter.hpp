#ifndef PULSESIM_TROTTER_HPP
#define PULSESIM_TROTTER_HPP

// Parameterized Trotter planning: baseline min+delta decomposition, the
// symmetric +/- grid variant, the local-disorder variant, plan realization,
// and the conservative leading-order error bound.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pulsesim/fockspace.hpp"
#include "pulsesim/model.hpp"

namespace pulsesim {
namespace trotter {

/// Discretized range of one Hamiltonian coefficient. The realized value is
/// lambda_min + n * delta_lambda (baseline) or (n_plus - n_minus) *
/// delta_lambda (symmetric variant).
struct ParamGrid {
    double lambda_min = 0.0;
    double delta_lambda = 0.0;  // > 0
    int n = 0;                  // >= 0
    std::optional<int> n_plus;
    std::optional<int> n_minus;
};

/// Local disorder counts for one term; realized perturbation is
/// (n_eps_plus - n_eps_minus) * delta_eps.
struct Perturbation {
    int n_eps_plus = 0;
    int n_eps_minus = 0;
    double delta_eps = 0.0;  // > 0
};

struct Primitive {
    std::string id;
    int term = 0;
    double coeff = 0.0;  // rad/ns
    double dt = 0.0;     // ns, = T_s / q
};

struct CycleEntry {
    std::string id;
    int reps = 0;
};

/// Ordered schedule of primitive applications. `cycle` lists one Trotter
/// cycle in application (time) order; the full schedule repeats it q times.
struct TrotterPlan {
    int q = 1;
    double T_s = 0.0;
    std::vector<Primitive> primitives;
    std::vector<CycleEntry> cycle;
    std::vector<std::string> notes;

    const Primitive& primitive(const std::string& id) const {
        for (const auto& p : primitives)
            if (p.id == id) return p;
        throw std::out_of_range("unknown primitive id: " + id);
    }

    /// Primitive ids of one cycle with repetitions expanded, in time order.
    std::vector<std::string> flattened_cycle() const {
        std::vector<std::string> out;
        for (const auto& entry : cycle)
            for (int r = 0; r < entry.reps; ++r) out.push_back(entry.id);
        return out;
    }

    long applications_per_cycle() const {
        long total = 0;
        for (const auto& entry : cycle) total += entry.reps;
        return total;
    }
};

namespace detail {

inline std::string term_name(const std::vector<std::string>& names, std::size_t l) {
    if (l < names.size()) return names[l];
    return "t" + std::to_string(l);
}

inline void check_common(const std::vector<ParamGrid>& grids, int q, double T_s) {
    if (grids.empty()) throw std::invalid_argument("at least one parameter grid is required");
    if (q < 1) throw std::invalid_argument("Trotter order q must be >= 1");
    if (T_s <= 0) throw std::invalid_argument("model time T_s must be positive");
    for (const auto& g : grids) {
        if (g.delta_lambda <= 0) throw std::invalid_argument("delta_lambda must be positive");
        if (g.n < 0) throw std::invalid_argument("grid count n must be non-negative");
    }
}

}  // namespace detail

/// Baseline decomposition: per cycle, each term emits its lambda_min
/// primitive once and its delta_lambda primitive n times (uncollapsed, so
/// the distinct-primitive count is exactly 2L).
inline TrotterPlan plan_baseline(const std::vector<ParamGrid>& grids, int q, double T_s,
                                 const std::vector<std::string>& term_names = {}) {
    detail::check_common(grids, q, T_s);
    TrotterPlan plan;
    plan.q = q;
    plan.T_s = T_s;
    const double dt = T_s / q;
    for (std::size_t l = 0; l < grids.size(); ++l) {
        const std::string name = detail::term_name(term_names, l);
        plan.primitives.push_back({name + "_min", static_cast<int>(l), grids[l].lambda_min, dt});
        plan.primitives.push_back({name + "_delta", static_cast<int>(l), grids[l].delta_lambda, dt});
        plan.cycle.push_back({name + "_min", 1});
        plan.cycle.push_back({name + "_delta", grids[l].n});
    }
    return plan;
}

/// Symmetric +/- grid: per cycle emits the -delta primitive n_minus times,
/// then the +delta primitive n_plus times, realizing (n_plus - n_minus) *
/// delta_lambda with at most n_plus + n_minus applications.
inline TrotterPlan plan_symmetric(const std::vector<ParamGrid>& grids, int q, double T_s,
                                  const std::vector<std::string>& term_names = {}) {
    detail::check_common(grids, q, T_s);
    TrotterPlan plan;
    plan.q = q;
    plan.T_s = T_s;
    const double dt = T_s / q;
    for (std::size_t l = 0; l < grids.size(); ++l) {
        if (!grids[l].n_plus || !grids[l].n_minus)
            throw std::invalid_argument("symmetric plan requires n_plus and n_minus for term " +
                                        std::to_string(l));
        if (*grids[l].n_plus < 0 || *grids[l].n_minus < 0)
            throw std::invalid_argument("n_plus and n_minus must be non-negative");
        const std::string name = detail::term_name(term_names, l);
        plan.primitives.push_back({name + "_minus", static_cast<int>(l), -grids[l].delta_lambda, dt});
        plan.primitives.push_back({name + "_plus", static_cast<int>(l), grids[l].delta_lambda, dt});
        plan.cycle.push_back({name + "_minus", *grids[l].n_minus});
        plan.cycle.push_back({name + "_plus", *grids[l].n_plus});
    }
    return plan;
}

/// Baseline plus local disorder. When delta_eps equals delta_lambda the
/// disorder repetitions merge into the delta exponent n + n_eps_plus -
/// n_eps_minus; a negative merged exponent maps to a -delta_lambda
/// primitive and is noted in the plan.
inline TrotterPlan plan_with_disorder(const std::vector<ParamGrid>& grids,
                                      const std::vector<Perturbation>& perturbations, int q,
                                      double T_s, const std::vector<std::string>& term_names = {}) {
    detail::check_common(grids, q, T_s);
    if (perturbations.size() != grids.size())
        throw std::invalid_argument("need one perturbation per grid term");
    TrotterPlan plan;
    plan.q = q;
    plan.T_s = T_s;
    const double dt = T_s / q;
    for (std::size_t l = 0; l < grids.size(); ++l) {
        const auto& grid = grids[l];
        const auto& pert = perturbations[l];
        const std::string name = detail::term_name(term_names, l);
        const bool has_disorder = pert.n_eps_plus != 0 || pert.n_eps_minus != 0;
        if (has_disorder && pert.delta_eps <= 0)
            throw std::invalid_argument("delta_eps must be positive for term " + std::to_string(l));

        plan.primitives.push_back({name + "_min", static_cast<int>(l), grid.lambda_min, dt});
        plan.primitives.push_back({name + "_delta", static_cast<int>(l), grid.delta_lambda, dt});
        plan.cycle.push_back({name + "_min", 1});

        if (has_disorder && pert.delta_eps == grid.delta_lambda) {
            const int merged = grid.n + pert.n_eps_plus - pert.n_eps_minus;
            if (merged >= 0) {
                plan.cycle.push_back({name + "_delta", merged});
            } else {
                plan.cycle.push_back({name + "_delta", 0});
                plan.primitives.push_back(
                    {name + "_delta_neg", static_cast<int>(l), -grid.delta_lambda, dt});
                plan.cycle.push_back({name + "_delta_neg", -merged});
                plan.notes.push_back("term " + std::to_string(l) +
                                     ": merged exponent negative; using -delta_lambda primitive " +
                                     std::to_string(-merged) + " times");
            }
        } else {
            plan.cycle.push_back({name + "_delta", grid.n});
            if (has_disorder) {
                plan.primitives.push_back(
                    {name + "_eps_minus", static_cast<int>(l), -pert.delta_eps, dt});
                plan.primitives.push_back(
                    {name + "_eps_plus", static_cast<int>(l), pert.delta_eps, dt});
                plan.cycle.push_back({name + "_eps_minus", pert.n_eps_minus});
                plan.cycle.push_back({name + "_eps_plus", pert.n_eps_plus});
            }
        }
    }
    return plan;
}

/// Multiplies out the flattened schedule. The cycle is listed in time order,
/// so each listed factor is applied on the left of the accumulated product.
inline model::ModelUnitary realize_plan(const TrotterPlan& plan,
                                        const std::map<std::string, Matrix>& primitive_unitaries) {
    long dim = -1;
    for (const auto& entry : plan.cycle) {
        if (entry.reps == 0) continue;
        auto it = primitive_unitaries.find(entry.id);
        if (it == primitive_unitaries.end())
            throw std::invalid_argument("no unitary supplied for primitive " + entry.id);
        if (dim < 0) dim = it->second.rows();
        if (it->second.rows() != dim || it->second.cols() != dim)
            throw std::invalid_argument("dimension mismatch for primitive " + entry.id);
    }
    if (dim < 0) {
        // all-zero cycle realizes the identity; take the dimension from any entry
        if (primitive_unitaries.empty())
            throw std::invalid_argument("no primitive unitaries supplied");
        dim = primitive_unitaries.begin()->second.rows();
    }
    Matrix u = Matrix::Identity(dim, dim);
    const auto flat = plan.flattened_cycle();
    for (int rep = 0; rep < plan.q; ++rep)
        for (const auto& id : flat) u = (primitive_unitaries.at(id) * u).eval();
    return model::ModelUnitary(std::move(u), plan.T_s, model::kLabelExact);
}

/// Conservative leading-order bound (T_s^2 / 2q) * || sum_{l>m} [c_l H_l,
/// c_m H_m] || in the spectral norm. Higher-order remainder terms are
/// ignored.
inline double trotter_error_bound(
    const std::vector<std::pair<double, fockspace::FockOperator>>& terms, int q, double T_s) {
    if (terms.size() < 2) throw std::invalid_argument("error bound needs at least two terms");
    if (q < 1) throw std::invalid_argument("Trotter order q must be >= 1");
    const long dim = terms.front().second.matrix.rows();
    Matrix acc = Matrix::Zero(dim, dim);
    for (std::size_t l = 1; l < terms.size(); ++l) {
        for (std::size_t m = 0; m < l; ++m) {
            const Matrix a = terms[l].first * terms[l].second.matrix;
            const Matrix b = terms[m].first * terms[m].second.matrix;
            acc += a * b - b * a;
        }
    }
    Eigen::JacobiSVD<Matrix> svd(acc);
    const double norm = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    return T_s * T_s / (2.0 * q) * norm;
}

/// Two-site EBH plan per the single-parameter family: the hopping term has
/// a fixed coefficient (n = 0) and the potential term realizes V = n_v *
/// delta_V as one V_min = delta_V application plus n_v - 1 repetitions.
/// n_v = 0 plans the bare hopping chain.
inline TrotterPlan ebh_two_site_plan(double J, double delta_V, int n_v, int q, double T_s) {
    if (n_v < 0) throw std::invalid_argument("n_v must be non-negative");
    std::vector<ParamGrid> grids;
    std::vector<std::string> names;
    ParamGrid bh;
    bh.lambda_min = J;
    // the hopping coefficient is fixed (n = 0); the spacing is never applied
    bh.delta_lambda = J != 0.0 ? std::abs(J) : 1.0;
    bh.n = 0;
    grids.push_back(bh);
    names.push_back(model::kLabelBh);
    if (n_v >= 1) {
        ParamGrid e;
        e.lambda_min = delta_V;  // V_min = delta_V
        e.delta_lambda = delta_V;
        e.n = n_v - 1;
        grids.push_back(e);
        names.push_back(model::kLabelE);
    }
    return plan_baseline(grids, q, T_s, names);
}

inline nlohmann::json to_json(const TrotterPlan& plan) {
    nlohmann::json j;
    j["q"] = plan.q;
    j["T_s_ns"] = plan.T_s;
    j["primitives"] = nlohmann::json::array();
    for (const auto& p : plan.primitives)
        j["primitives"].push_back(
            {{"id", p.id}, {"term", p.term}, {"coeff_rad_per_ns", p.coeff}, {"dt_ns", p.dt}});
    j["cycle"] = nlohmann::json::array();
    for (const auto& entry : plan.cycle)
        j["cycle"].push_back({{"id", entry.id}, {"reps", entry.reps}});
    if (!plan.notes.empty()) j["notes"] = plan.notes;
    return j;
}

inline TrotterPlan plan_from_json(const nlohmann::json& j) {
    TrotterPlan plan;
    plan.q = j.at("q").get<int>();
    plan.T_s = j.at("T_s_ns").get<double>();
    for (const auto& p : j.at("primitives"))
        plan.primitives.push_back({p.at("id").get<std::string>(), p.at("term").get<int>(),
                                   p.at("coeff_rad_per_ns").get<double>(),
                                   p.at("dt_ns").get<double>()});
    for (const auto& entry : j.at("cycle"))
        plan.cycle.push_back({entry.at("id").get<std::string>(), entry.at("reps").get<int>()});
    if (j.contains("notes"))
        for (const auto& n : j.at("notes")) plan.notes.push_back(n.get<std::string>());
    return plan;
}

}  // namespace trotter
}  // namespace pulsesim

#endif  // PULSESIM_TROTTER_HPP
