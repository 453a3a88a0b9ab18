#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coreshape/core_shape.hpp"
#include "coreshape/spectra.hpp"

namespace coreshape {

// An instance of the Tucker packing problem: maximize
//   f(r) = sum_n sum_{i <= R_n} values[n][i]
// over core shapes r with  prod_n R_n + sum_n I_n R_n <= budget.
struct PackingInstance {
    std::vector<std::int64_t> dims;           // I_1..I_N
    std::vector<std::vector<double>> values;  // values[n] has length I_n,
                                              // non-increasing, >= 0
    std::vector<std::vector<double>> prefix;  // prefix[n][k] = sum of top k
    std::int64_t budget = 0;

    // Validates and normalizes: rejects negative entries and monotonicity
    // violations beyond 1e-12 relative slack, clamps smaller wobble by
    // running minimum, then builds the prefix sums. budget must be >= 1
    // (full-cost solvers additionally need 1 + sum I_n <= budget).
    static PackingInstance create(std::vector<std::int64_t> dims,
                                  std::vector<std::vector<double>> values,
                                  std::int64_t budget);

    int order() const { return static_cast<int>(dims.size()); }
    std::int64_t min_cost() const; // cost of (1,...,1) = 1 + sum I_n
};

// Builds an instance from mode spectra: values[n][i] = (sigma_i^(n))^2.
// Throws infeasible_error when budget < 1 + sum I_n.
PackingInstance from_spectra(const ModeSpectra& s, std::int64_t budget);

double objective(const PackingInstance& inst, const CoreShape& r);
std::int64_t cost(const PackingInstance& inst, const CoreShape& r);
// Full storage constraint, evaluated with saturating integer arithmetic.
bool feasible(const PackingInstance& inst, const CoreShape& r);

struct Solution {
    CoreShape shape;
    double objective = 0.0;
    std::int64_t cost = 0;     // full Tucker cost of shape (the mck solver
                               // only bounds the core part, so this may
                               // exceed the budget there)
    std::string solver_id;
    double elapsed_ms = 0.0;
};

// Exact optimum by enumeration; refuses instances with more than 1e8
// candidate tuples. Ties broken toward the lexicographically smallest shape.
Solution solve_brute_force(const PackingInstance& inst);

// Hill climbing from (1,...,1): repeatedly increment the mode with the
// largest objective gain among feasible neighbors (ties: lowest mode);
// stops when no feasible neighbor remains or the best gain is zero.
Solution solve_greedy(const PackingInstance& inst);

// Like solve_greedy but picks the neighbor maximizing gain / cost increase.
Solution solve_bang_for_buck(const PackingInstance& inst);

// (1-eps)-approximation of the core-size-only relaxation (prod R_n <=
// budget, factor cost ignored) by profit-scaled multiple-choice-knapsack
// dynamic programming. 0 < eps < 1.
Solution solve_mck_core_only(const PackingInstance& inst, double eps);

// Enumerates the geometric grids S_n = {ceil((1+eps)^k)} cap [1, I_n] and
// keeps the best feasible tuple; objective >= f* / (1+eps). 0 < eps <= 1.
Solution solve_grid_search(const PackingInstance& inst, double eps);

// Budget-splitting solver (solver id "ip"): a small phase trying every
// factor-budget c_factor in [1, ceil(1/eps) * sum I_n] with ranks capped at
// ceil(1/eps), and a large phase trying core budgets ceil((1+eps)^k); each
// two-constraint subproblem is solved exactly. Objective >= (1-3eps) f*.
// Requires 0 < eps < 1/3.
Solution solve_budget_split(const PackingInstance& inst, double eps);

// Exact maximizer of f(r) subject to prod R_n <= c_core,
// sum I_n R_n <= c_factor and 1 <= R_n <= caps[n], by depth-first branch
// and bound. Returns nullopt when even (1,...,1) is infeasible. Ties go to
// the lexicographically smallest shape.
std::optional<CoreShape> solve_2dk_matroid(const PackingInstance& inst,
                                           std::int64_t c_core,
                                           std::int64_t c_factor,
                                           const std::vector<std::int64_t>& caps);

// {ceil((1+eps)^k) : k >= 0} intersected with [1, cap], deduplicated,
// ascending. Shared by the grid solvers and the budget-split large phase.
std::vector<std::int64_t> geometric_grid(std::int64_t cap, double eps);

// JSON: {"dims":[...], "budget":c, "values":[[...],...]}
PackingInstance packing_instance_from_json(const nlohmann::json& j);
nlohmann::json packing_instance_to_json(const PackingInstance& inst);
// JSON: {"shape":[...], "objective":x, "cost":n, "solver":id, "elapsed_ms":t}
nlohmann::json solution_to_json(const Solution& s);

} // namespace coreshape
