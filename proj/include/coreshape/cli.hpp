#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coreshape/core_shape.hpp"
#include "coreshape/tensor.hpp"

namespace coreshape::cli {

// One row of a budget sweep. elapsed time is split into the one-off
// spectra cost and the per-solve cost so the two can be compared.
struct SweepRecord {
    std::int64_t budget = 0;
    std::string algo;
    CoreShape shape;
    double objective = 0.0;
    double surrogate_rre = 0.0;
    std::optional<double> hooi_rre;
    double spectra_ms = 0.0;
    double solve_ms = 0.0;
};

// Budget specs: "448" or "100,200,300" (ascending list) or "lo:hi:count"
// for `count` geometrically spaced integers from lo to hi inclusive.
std::vector<std::int64_t> parse_budgets(const std::string& spec);

// Named shapes mirroring the usual benchmark datasets (synthetic content).
std::optional<std::vector<std::int64_t>> preset_shape(const std::string& name);
std::vector<std::string> preset_names();

struct RreGreedyResult {
    CoreShape shape;
    double rre = 0.0;
    // (shape, rre) after the start point and after every accepted step
    std::vector<std::pair<CoreShape, double>> trace;
};

// Hill climbing on the measured reconstruction error: from (1,...,1),
// evaluate hooi(X, r+e_n, hooi_iters) for every feasible neighbor, move to
// the smallest error (ties: lowest mode), stop when no neighbor fits the
// budget. The per-candidate HOSVD start is built by slicing one cached
// eigendecomposition per mode, which is exactly the factor set
// tucker_hosvd would compute. Errors use the projection identity
// ||X||^2 - ||core||^2, exact for HOOI iterates.
RreGreedyResult rre_greedy(const DenseTensor& x, std::int64_t budget, int hooi_iters);

// Number of parallel workers for per-(budget, algo) fan-out; the
// COREShape_THREADS environment variable caps it (default 1).
int worker_count();

// Full command-line entry point (subcommands gen, singvals, solve, sweep,
// pareto, rre). Returns the process exit code: 0 ok, 2 usage error,
// 3 input-format error, 4 infeasible budget.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace coreshape::cli
