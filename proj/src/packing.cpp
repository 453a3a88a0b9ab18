#include "coreshape/packing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "coreshape/errors.hpp"

namespace coreshape {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_shape_range(const PackingInstance& inst, const CoreShape& r) {
    if (r.order() != inst.order())
        throw std::invalid_argument("shape order does not match instance");
    for (int n = 0; n < inst.order(); ++n) {
        const std::int64_t rn = r.ranks[static_cast<std::size_t>(n)];
        if (rn < 1 || rn > inst.dims[static_cast<std::size_t>(n)])
            throw std::invalid_argument("rank out of range [1, I_n]");
    }
}

void require_all_ones_feasible(const PackingInstance& inst) {
    if (inst.min_cost() > inst.budget)
        throw infeasible_error("budget " + std::to_string(inst.budget) +
                               " is below the minimum cost " +
                               std::to_string(inst.min_cost()) + " of shape (1,...,1)");
}

Solution finish(const PackingInstance& inst, CoreShape shape, std::string id,
                Clock::time_point t0) {
    Solution s;
    s.objective = objective(inst, shape);
    s.cost = cost(inst, shape);
    s.shape = std::move(shape);
    s.solver_id = std::move(id);
    s.elapsed_ms = ms_since(t0);
    return s;
}

} // namespace

PackingInstance PackingInstance::create(std::vector<std::int64_t> dims,
                                        std::vector<std::vector<double>> values,
                                        std::int64_t budget) {
    if (dims.empty())
        throw std::invalid_argument("instance needs at least one mode");
    for (std::int64_t d : dims)
        if (d < 1) throw std::invalid_argument("dims must be >= 1");
    if (values.size() != dims.size())
        throw std::invalid_argument("one values list per mode required");
    if (budget < 1)
        throw std::invalid_argument("budget must be >= 1");

    for (std::size_t n = 0; n < dims.size(); ++n) {
        auto& v = values[n];
        if (static_cast<std::int64_t>(v.size()) != dims[n])
            throw std::invalid_argument("values list " + std::to_string(n + 1) +
                                        " must have length I_n");
        double scale = 0.0;
        for (double a : v) {
            if (!std::isfinite(a))
                throw std::invalid_argument("values must be finite");
            scale = std::max(scale, std::abs(a));
        }
        const double tol = 1e-12 * scale;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < -tol)
                throw std::invalid_argument("values must be nonnegative");
            if (i > 0 && v[i] > v[i - 1] + tol)
                throw std::invalid_argument("values must be non-increasing");
        }
        // absorb roundoff-scale wobble: clamp to [0, inf) and running min
        double running = std::numeric_limits<double>::infinity();
        for (auto& a : v) {
            a = std::max(a, 0.0);
            running = std::min(running, a);
            a = running;
        }
    }

    PackingInstance inst;
    inst.dims = std::move(dims);
    inst.values = std::move(values);
    inst.budget = budget;
    inst.prefix.resize(inst.values.size());
    for (std::size_t n = 0; n < inst.values.size(); ++n) {
        auto& p = inst.prefix[n];
        p.resize(inst.values[n].size() + 1);
        p[0] = 0.0;
        for (std::size_t i = 0; i < inst.values[n].size(); ++i)
            p[i + 1] = p[i] + inst.values[n][i];
    }
    return inst;
}

std::int64_t PackingInstance::min_cost() const {
    std::int64_t c = 1;
    for (std::int64_t d : dims) c = sat_add(c, d);
    return c;
}

PackingInstance from_spectra(const ModeSpectra& s, std::int64_t budget) {
    std::vector<std::int64_t> dims;
    dims.reserve(s.sq_singular_values.size());
    std::int64_t sum_dims = 0;
    for (const auto& vals : s.sq_singular_values) {
        dims.push_back(static_cast<std::int64_t>(vals.size()));
        sum_dims = sat_add(sum_dims, dims.back());
    }
    if (budget < sat_add(1, sum_dims))
        throw infeasible_error("budget " + std::to_string(budget) +
                               " is below 1 + sum I_n = " +
                               std::to_string(sat_add(1, sum_dims)));
    return PackingInstance::create(std::move(dims), s.sq_singular_values, budget);
}

double objective(const PackingInstance& inst, const CoreShape& r) {
    check_shape_range(inst, r);
    double f = 0.0;
    for (int n = 0; n < inst.order(); ++n)
        f += inst.prefix[static_cast<std::size_t>(n)]
                        [static_cast<std::size_t>(r.ranks[static_cast<std::size_t>(n)])];
    return f;
}

std::int64_t cost(const PackingInstance& inst, const CoreShape& r) {
    check_shape_range(inst, r);
    return tucker_size(inst.dims, r);
}

bool feasible(const PackingInstance& inst, const CoreShape& r) {
    return cost(inst, r) <= inst.budget;
}

std::vector<std::int64_t> geometric_grid(std::int64_t cap, double eps) {
    if (cap < 1) throw std::invalid_argument("geometric_grid: cap must be >= 1");
    if (eps <= 0.0) throw std::invalid_argument("geometric_grid: eps must be > 0");
    std::vector<std::int64_t> pts;
    double pw = 1.0;
    while (true) {
        const auto v = static_cast<std::int64_t>(std::ceil(pw));
        if (v > cap) break;
        if (pts.empty() || pts.back() != v) pts.push_back(v);
        if (pw > 2e18) break;
        pw *= 1.0 + eps;
    }
    return pts;
}

Solution solve_brute_force(const PackingInstance& inst) {
    const auto t0 = Clock::now();
    require_all_ones_feasible(inst);
    double tuples = 1.0;
    for (std::int64_t d : inst.dims) tuples *= static_cast<double>(d);
    if (tuples > 1e8)
        throw std::invalid_argument("instance too large for brute-force enumeration");

    const int order = inst.order();
    CoreShape r(std::vector<std::int64_t>(static_cast<std::size_t>(order), 1));
    CoreShape best;
    double best_obj = -1.0;
    while (true) {
        if (tucker_size(inst.dims, r) <= inst.budget) {
            double f = 0.0;
            for (int n = 0; n < order; ++n)
                f += inst.prefix[static_cast<std::size_t>(n)]
                                [static_cast<std::size_t>(r.ranks[static_cast<std::size_t>(n)])];
            // lexicographic enumeration: strict improvement keeps the
            // lexicographically smallest maximizer
            if (f > best_obj) { best_obj = f; best = r; }
        }
        int n = order - 1;
        while (n >= 0 && r.ranks[static_cast<std::size_t>(n)] ==
                             inst.dims[static_cast<std::size_t>(n)]) {
            r.ranks[static_cast<std::size_t>(n)] = 1;
            --n;
        }
        if (n < 0) break;
        ++r.ranks[static_cast<std::size_t>(n)];
    }
    return finish(inst, std::move(best), "brute", t0);
}

namespace {

template <typename PickBetter>
Solution climb(const PackingInstance& inst, const char* id, PickBetter better) {
    const auto t0 = Clock::now();
    require_all_ones_feasible(inst);
    const int order = inst.order();
    CoreShape r(std::vector<std::int64_t>(static_cast<std::size_t>(order), 1));
    std::int64_t cur_cost = tucker_size(inst.dims, r);

    while (true) {
        int pick = -1;
        double pick_gain = 0.0;
        std::int64_t pick_dcost = 0;
        for (int n = 0; n < order; ++n) {
            const auto nu = static_cast<std::size_t>(n);
            if (r.ranks[nu] == inst.dims[nu]) continue;
            ++r.ranks[nu];
            const std::int64_t c = tucker_size(inst.dims, r);
            --r.ranks[nu];
            if (c > inst.budget) continue;
            const double gain = inst.values[nu][static_cast<std::size_t>(r.ranks[nu])];
            const std::int64_t dcost = c - cur_cost;
            if (pick < 0 || better(gain, dcost, pick_gain, pick_dcost)) {
                pick = n;
                pick_gain = gain;
                pick_dcost = dcost;
            }
        }
        // stop when stuck or when the best move adds nothing (keeps the
        // all-zero-values instance at (1,...,1))
        if (pick < 0 || pick_gain == 0.0) break;
        ++r.ranks[static_cast<std::size_t>(pick)];
        cur_cost += pick_dcost;
    }
    return finish(inst, std::move(r), id, t0);
}

} // namespace

Solution solve_greedy(const PackingInstance& inst) {
    return climb(inst, "greedy",
                 [](double gain, std::int64_t, double best, std::int64_t) {
                     return gain > best;
                 });
}

Solution solve_bang_for_buck(const PackingInstance& inst) {
    // ratio comparison by cross multiplication; dcost >= 1 always
    return climb(inst, "bang",
                 [](double gain, std::int64_t dcost, double best, std::int64_t best_dcost) {
                     return gain * static_cast<double>(best_dcost) >
                            best * static_cast<double>(dcost);
                 });
}

Solution solve_mck_core_only(const PackingInstance& inst, double eps) {
    const auto t0 = Clock::now();
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("solve_mck_core_only: need 0 < eps < 1");

    const int order = inst.order();
    const std::int64_t c = inst.budget;
    const auto all_ones =
        CoreShape(std::vector<std::int64_t>(static_cast<std::size_t>(order), 1));

    // Options per mode: ranks up to min(I_n, c); any rank beyond c cannot
    // satisfy prod R_n <= c even with all other modes at 1.
    std::vector<std::int64_t> max_rank(static_cast<std::size_t>(order));
    double p_max = 0.0;
    for (int n = 0; n < order; ++n) {
        const auto nu = static_cast<std::size_t>(n);
        max_rank[nu] = std::min(inst.dims[nu], c);
        p_max = std::max(p_max, inst.prefix[nu][static_cast<std::size_t>(max_rank[nu])]);
    }
    if (p_max == 0.0)
        return finish(inst, all_ones, "mck", t0);

    // Lawler profit scaling: picking the best single mode alone is always
    // feasible for the core-only constraint, so p_max lower-bounds the
    // optimum and the total rounding loss N*K stays below eps * optimum.
    const double k_scale = eps * p_max / order;
    std::vector<std::int64_t> q_cap(static_cast<std::size_t>(order));
    std::int64_t q_total = 0;
    for (int n = 0; n < order; ++n) {
        const auto nu = static_cast<std::size_t>(n);
        q_cap[nu] = static_cast<std::int64_t>(
            std::floor(inst.prefix[nu][static_cast<std::size_t>(max_rank[nu])] / k_scale));
        q_total += q_cap[nu];
    }

    // DP over (mode, scaled profit) minimizing the additive log weight; the
    // winning chain is re-checked with exact integer products below.
    const double inf = std::numeric_limits<double>::infinity();
    const auto q_size = static_cast<std::size_t>(q_total + 1);
    std::vector<double> weight(q_size, inf);
    weight[0] = 0.0;
    std::vector<std::vector<std::int32_t>> choice(
        static_cast<std::size_t>(order), std::vector<std::int32_t>(q_size, -1));

    for (int n = 0; n < order; ++n) {
        const auto nu = static_cast<std::size_t>(n);
        std::vector<double> next(q_size, inf);
        auto& pick = choice[nu];
        for (std::int64_t rank = 1; rank <= max_rank[nu]; ++rank) {
            const auto q = static_cast<std::int64_t>(std::floor(
                inst.prefix[nu][static_cast<std::size_t>(rank)] / k_scale));
            const double w = std::log(static_cast<double>(rank));
            for (std::int64_t base = 0; base + q <= q_total; ++base) {
                const auto b = static_cast<std::size_t>(base);
                if (weight[b] == inf) continue;
                const auto tgt = static_cast<std::size_t>(base + q);
                if (weight[b] + w < next[tgt]) {
                    next[tgt] = weight[b] + w;
                    pick[tgt] = static_cast<std::int32_t>(rank);
                }
            }
        }
        weight = std::move(next);
    }

    const double log_budget = std::log(static_cast<double>(c)) + 1e-9;
    for (std::int64_t q = q_total; q >= 0; --q) {
        const auto qu = static_cast<std::size_t>(q);
        if (weight[qu] > log_budget) continue;
        // walk the chain back and re-verify with exact integers
        CoreShape r = all_ones;
        std::int64_t rem = q;
        bool ok = true;
        for (int n = order - 1; n >= 0; --n) {
            const auto nu = static_cast<std::size_t>(n);
            const std::int32_t rank = choice[nu][static_cast<std::size_t>(rem)];
            if (rank < 1) { ok = false; break; }
            r.ranks[nu] = rank;
            rem -= static_cast<std::int64_t>(std::floor(
                inst.prefix[nu][static_cast<std::size_t>(rank)] / k_scale));
        }
        if (!ok || rem != 0) continue;
        std::int64_t prod = 1;
        for (std::int64_t rn : r.ranks) prod = sat_mul(prod, rn);
        if (prod <= c)
            return finish(inst, std::move(r), "mck", t0);
    }
    return finish(inst, all_ones, "mck", t0);
}

Solution solve_grid_search(const PackingInstance& inst, double eps) {
    const auto t0 = Clock::now();
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("solve_grid_search: need 0 < eps <= 1");
    require_all_ones_feasible(inst);

    const int order = inst.order();
    std::vector<std::vector<std::int64_t>> grids;
    grids.reserve(static_cast<std::size_t>(order));
    double tuples = 1.0;
    for (int n = 0; n < order; ++n) {
        grids.push_back(geometric_grid(inst.dims[static_cast<std::size_t>(n)], eps));
        tuples *= static_cast<double>(grids.back().size());
    }
    if (tuples > 1e8)
        throw std::invalid_argument("grid too large for enumeration");

    std::vector<std::size_t> at(static_cast<std::size_t>(order), 0);
    CoreShape r(std::vector<std::int64_t>(static_cast<std::size_t>(order), 1));
    CoreShape best;
    double best_obj = -1.0;
    while (true) {
        for (int n = 0; n < order; ++n)
            r.ranks[static_cast<std::size_t>(n)] =
                grids[static_cast<std::size_t>(n)][at[static_cast<std::size_t>(n)]];
        if (tucker_size(inst.dims, r) <= inst.budget) {
            const double f = objective(inst, r);
            if (f > best_obj) { best_obj = f; best = r; }
        }
        int n = order - 1;
        while (n >= 0 &&
               at[static_cast<std::size_t>(n)] + 1 == grids[static_cast<std::size_t>(n)].size()) {
            at[static_cast<std::size_t>(n)] = 0;
            --n;
        }
        if (n < 0) break;
        ++at[static_cast<std::size_t>(n)];
    }
    return finish(inst, std::move(best), "grid", t0);
}

namespace {

// Depth-first branch and bound for the exact two-constraint subproblem.
struct TwoDimKnapsack {
    const PackingInstance& inst;
    std::int64_t c_core;
    std::int64_t c_factor;
    const std::vector<std::int64_t>& caps;

    std::vector<int> mode_order;          // modes by decreasing I_n
    std::vector<std::int64_t> suffix_min; // sum of I_n over later depths
    std::vector<std::int64_t> shape;      // partial assignment, original order
    std::vector<std::int64_t> best_shape;
    double best_obj = -1.0;

    explicit TwoDimKnapsack(const PackingInstance& in, std::int64_t cc,
                            std::int64_t cf, const std::vector<std::int64_t>& cp)
        : inst(in), c_core(cc), c_factor(cf), caps(cp) {}

    // largest rank of mode n affordable when every other unassigned mode
    // sits at rank 1
    std::int64_t solo_cap(int n, std::int64_t prod, std::int64_t spent,
                          std::int64_t others_min) const {
        const auto nu = static_cast<std::size_t>(n);
        std::int64_t m = std::min(caps[nu], c_core / prod);
        const std::int64_t budget_left = c_factor - spent - others_min;
        m = std::min(m, budget_left / inst.dims[nu]);
        return m;
    }

    void dfs(std::size_t depth, std::int64_t prod, std::int64_t spent, double value) {
        if (depth == mode_order.size()) {
            if (value > best_obj || (value == best_obj && shape < best_shape)) {
                best_obj = value;
                best_shape = shape;
            }
            return;
        }

        // admissible upper bound: every unassigned mode at its solo cap
        double bound = value;
        for (std::size_t d = depth; d < mode_order.size(); ++d) {
            const int n = mode_order[d];
            const std::int64_t others =
                suffix_min[depth] - inst.dims[static_cast<std::size_t>(n)];
            const std::int64_t m = solo_cap(n, prod, spent, others);
            if (m < 1) return; // some mode cannot even take rank 1
            bound += inst.prefix[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
        }
        if (bound < best_obj) return;
        // on an exact objective tie, only a lexicographically smaller shape
        // can still matter; unassigned slots already sit at their minimum 1,
        // so `shape` is the smallest completion of this branch
        if (bound == best_obj && !best_shape.empty() && !(shape < best_shape))
            return;

        const int n = mode_order[depth];
        const auto nu = static_cast<std::size_t>(n);
        const std::int64_t others = suffix_min[depth] - inst.dims[nu];
        const std::int64_t rmax = solo_cap(n, prod, spent, others);
        for (std::int64_t rank = 1; rank <= rmax; ++rank) {
            shape[nu] = rank;
            dfs(depth + 1, prod * rank, spent + inst.dims[nu] * rank,
                value + inst.prefix[nu][static_cast<std::size_t>(rank)]);
        }
        shape[nu] = 1;
    }
};

} // namespace

std::optional<CoreShape> solve_2dk_matroid(const PackingInstance& inst,
                                           std::int64_t c_core,
                                           std::int64_t c_factor,
                                           const std::vector<std::int64_t>& caps) {
    const int order = inst.order();
    if (static_cast<int>(caps.size()) != order)
        throw std::invalid_argument("solve_2dk_matroid: one cap per mode required");
    for (int n = 0; n < order; ++n) {
        const auto nu = static_cast<std::size_t>(n);
        if (caps[nu] < 1 || caps[nu] > inst.dims[nu])
            throw std::invalid_argument("solve_2dk_matroid: caps must lie in [1, I_n]");
    }
    std::int64_t sum_dims = 0;
    for (std::int64_t d : inst.dims) sum_dims = sat_add(sum_dims, d);
    if (c_core < 1 || sum_dims > c_factor)
        return std::nullopt; // even (1,...,1) violates a constraint

    TwoDimKnapsack bb(inst, c_core, c_factor, caps);
    bb.mode_order.resize(static_cast<std::size_t>(order));
    for (int n = 0; n < order; ++n) bb.mode_order[static_cast<std::size_t>(n)] = n;
    std::stable_sort(bb.mode_order.begin(), bb.mode_order.end(),
                     [&](int a, int b) {
                         return inst.dims[static_cast<std::size_t>(a)] >
                                inst.dims[static_cast<std::size_t>(b)];
                     });
    bb.suffix_min.assign(static_cast<std::size_t>(order) + 1, 0);
    for (int d = order - 1; d >= 0; --d)
        bb.suffix_min[static_cast<std::size_t>(d)] =
            bb.suffix_min[static_cast<std::size_t>(d) + 1] +
            inst.dims[static_cast<std::size_t>(bb.mode_order[static_cast<std::size_t>(d)])];
    bb.shape.assign(static_cast<std::size_t>(order), 1);

    bb.dfs(0, 1, 0, 0.0);
    if (bb.best_obj < 0.0) return std::nullopt;
    return CoreShape(std::move(bb.best_shape));
}

Solution solve_budget_split(const PackingInstance& inst, double eps) {
    const auto t0 = Clock::now();
    if (!(eps > 0.0 && eps < 1.0 / 3.0))
        throw std::invalid_argument(
            "solve_budget_split: the guarantee requires 0 < eps < 1/3");
    require_all_ones_feasible(inst);

    const int order = inst.order();
    const std::int64_t c = inst.budget;
    const auto inv_eps = static_cast<std::int64_t>(std::ceil(1.0 / eps));

    std::int64_t sum_dims = 0;
    for (std::int64_t d : inst.dims) sum_dims += d;

    CoreShape best;
    double best_obj = -1.0;
    const auto consider = [&](const std::optional<CoreShape>& cand) {
        if (!cand) return;
        const double f = objective(inst, *cand);
        // ties keep the earliest split (strict improvement only)
        if (f > best_obj) { best_obj = f; best = *cand; }
    };

    // Small phase: all R_n <= ceil(1/eps); try every way of reserving
    // c_factor of the budget for the factor matrices.
    std::vector<std::int64_t> small_caps(static_cast<std::size_t>(order));
    for (int n = 0; n < order; ++n)
        small_caps[static_cast<std::size_t>(n)] =
            std::min(inv_eps, inst.dims[static_cast<std::size_t>(n)]);
    const std::int64_t small_max = sat_mul(inv_eps, sum_dims);
    for (std::int64_t c_factor = 1; c_factor <= small_max && c_factor < c; ++c_factor)
        consider(solve_2dk_matroid(inst, c - c_factor, c_factor, small_caps));

    // Large phase: geometric guesses of the core budget.
    std::vector<std::int64_t> full_caps = inst.dims;
    for (std::int64_t c_core : geometric_grid(c, eps))
        consider(solve_2dk_matroid(inst, c_core, c - c_core, full_caps));

    // c_core = 1 with c_factor = c - 1 >= sum I_n always yields a candidate
    return finish(inst, std::move(best), "ip", t0);
}

PackingInstance packing_instance_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("dims") || !j.contains("budget") ||
            !j.contains("values"))
            throw format_error("instance JSON needs keys dims, budget, values");
        std::vector<std::int64_t> dims = j.at("dims").get<std::vector<std::int64_t>>();
        const auto budget = j.at("budget").get<std::int64_t>();
        auto values = j.at("values").get<std::vector<std::vector<double>>>();
        return PackingInstance::create(std::move(dims), std::move(values), budget);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("instance JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw format_error(std::string("instance JSON: ") + e.what());
    }
}

nlohmann::json packing_instance_to_json(const PackingInstance& inst) {
    return nlohmann::json{
        {"dims", inst.dims}, {"budget", inst.budget}, {"values", inst.values}};
}

nlohmann::json solution_to_json(const Solution& s) {
    return nlohmann::json{{"shape", s.shape.ranks},
                          {"objective", s.objective},
                          {"cost", s.cost},
                          {"solver", s.solver_id},
                          {"elapsed_ms", s.elapsed_ms}};
}

} // namespace coreshape
