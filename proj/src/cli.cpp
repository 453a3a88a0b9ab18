#include "coreshape/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "coreshape/decomp.hpp"
#include "coreshape/errors.hpp"
#include "coreshape/jacobi.hpp"
#include "coreshape/npy.hpp"
#include "coreshape/packing.hpp"
#include "coreshape/spectra.hpp"
#include "coreshape/synthetic.hpp"

namespace coreshape::cli {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const std::map<std::string, std::vector<std::int64_t>>& presets() {
    static const std::map<std::string, std::vector<std::int64_t>> table = {
        {"cardiac", {256, 256, 14, 20}},
        {"hyperspectral", {1024, 1344, 33}},
        {"hyperspectral-mini", {128, 128, 32}},
        {"vicroads", {1084, 2033, 96}},
        {"coil", {7200, 128, 128, 3}},
    };
    return table;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_ms(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

double fro_sq_of(const DenseTensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v * v;
    return s;
}

// loss via the projection identity ||X||^2 - ||core||^2, valid for
// orthonormal factors with the projected core (what HOSVD/HOOI produce);
// clamped against roundoff
double identity_rre(double fro_sq, const DenseTensor& core) {
    double core_sq = 0.0;
    for (double v : core.data()) core_sq += v * v;
    return std::max(0.0, fro_sq - core_sq) / fro_sq;
}

Solution dispatch_solver(const PackingInstance& inst, const std::string& algo,
                         double eps) {
    if (algo == "ip") return solve_budget_split(inst, eps);
    if (algo == "greedy") return solve_greedy(inst);
    if (algo == "bang") return solve_bang_for_buck(inst);
    if (algo == "brute") return solve_brute_force(inst);
    if (algo == "grid") return solve_grid_search(inst, eps);
    if (algo == "mck") return solve_mck_core_only(inst, eps);
    throw std::invalid_argument("unknown algo '" + algo + "'");
}

const std::set<std::string> kPackingAlgos = {"ip",    "greedy", "bang",
                                             "brute", "grid",   "mck"};

// surrogate loss over the instance's own value lists (complement of the
// objective); used when no spectra are at hand
double instance_surrogate_rre(const PackingInstance& inst, const CoreShape& r) {
    double total = 0.0;
    double kept = 0.0;
    for (std::size_t n = 0; n < inst.values.size(); ++n) {
        total += inst.prefix[n].back();
        kept += inst.prefix[n][static_cast<std::size_t>(r.ranks[n])];
    }
    if (total <= 0.0) return 0.0;
    const double fro_sq = total / static_cast<double>(inst.order());
    return std::max(0.0, total - kept) / fro_sq;
}

} // namespace

std::vector<std::int64_t> parse_budgets(const std::string& spec) {
    if (spec.empty()) throw std::invalid_argument("empty budget spec");
    std::vector<std::int64_t> budgets;

    const auto to_int = [](const std::string& tok) {
        std::size_t used = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad budget '" + tok + "'");
        }
        if (used != tok.size() || v < 1)
            throw std::invalid_argument("bad budget '" + tok + "'");
        return v;
    };

    if (spec.find(':') != std::string::npos) {
        // lo:hi:count, geometrically spaced, endpoints included
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ':')) parts.push_back(tok);
        if (parts.size() != 3)
            throw std::invalid_argument("geometric budget spec must be lo:hi:count");
        const std::int64_t lo = to_int(parts[0]);
        const std::int64_t hi = to_int(parts[1]);
        const std::int64_t count = to_int(parts[2]);
        if (hi < lo) throw std::invalid_argument("budget spec needs hi >= lo");
        if (count < 2) throw std::invalid_argument("budget spec needs count >= 2");
        const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
        for (std::int64_t k = 0; k < count; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(count - 1);
            auto b = static_cast<std::int64_t>(
                std::llround(static_cast<double>(lo) * std::pow(ratio, t)));
            b = std::clamp<std::int64_t>(b, lo, hi);
            if (budgets.empty() || budgets.back() != b) budgets.push_back(b);
        }
        return budgets;
    }

    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) budgets.push_back(to_int(tok));
    if (budgets.empty()) throw std::invalid_argument("empty budget spec");
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] <= budgets[i - 1])
            throw std::invalid_argument("budget list must be strictly ascending");
    return budgets;
}

std::optional<std::vector<std::int64_t>> preset_shape(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, shape] : presets()) names.push_back(name);
    return names;
}

int worker_count() {
    const char* env = std::getenv("COREShape_THREADS");
    if (!env) return 1;
    try {
        const std::string tok(env);
        std::size_t used = 0;
        const int n = std::stoi(tok, &used);
        if (used != tok.size()) return 1; // trailing junk: treat as unset
        return std::clamp(n, 1, 256);
    } catch (const std::exception&) {
        return 1;
    }
}

namespace {

// run fn(0..n-1) on up to worker_count() threads; fn writes results into
// index-addressed slots so the output order never depends on scheduling
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = std::min<int>(worker_count(), static_cast<int>(n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

RreGreedyResult rre_greedy(const DenseTensor& x, std::int64_t budget, int hooi_iters) {
    if (hooi_iters < 0) throw std::invalid_argument("rre_greedy: iters must be >= 0");
    const int order = x.order();
    const auto& dims = x.shape();
    std::int64_t floor_cost = 1;
    for (std::int64_t d : dims) floor_cost = sat_add(floor_cost, d);
    if (budget < floor_cost)
        throw infeasible_error("budget " + std::to_string(budget) +
                               " is below 1 + sum I_n = " + std::to_string(floor_cost));
    const double fro_sq = fro_sq_of(x);
    if (fro_sq == 0.0)
        throw std::invalid_argument("rre_greedy: undefined for the zero tensor");

    // one full eigenbasis per mode; slicing leading columns reproduces the
    // HOSVD factors at any rank
    std::vector<Eigen::MatrixXd> basis;
    basis.reserve(static_cast<std::size_t>(order));
    for (int n = 1; n <= order; ++n) {
        const UnfoldedMatrix m = unfold(x, n);
        const auto mat = m.matrix();
        Eigen::MatrixXd gram = mat * mat.transpose();
        Eigen::MatrixXd vecs = jacobi_eigen(gram).vectors;
        apply_sign_convention(vecs);
        basis.push_back(std::move(vecs));
    }

    const auto eval = [&](const CoreShape& r) {
        TuckerDecomposition init;
        init.factors.reserve(static_cast<std::size_t>(order));
        for (int n = 0; n < order; ++n)
            init.factors.push_back(basis[static_cast<std::size_t>(n)].leftCols(
                r.ranks[static_cast<std::size_t>(n)]));
        init.core = x;
        for (int n = 1; n <= order; ++n)
            init.core = mode_product(
                init.core, n,
                init.factors[static_cast<std::size_t>(n - 1)].transpose());
        const TuckerDecomposition d = hooi(x, r, hooi_iters, &init);
        return identity_rre(fro_sq, d.core);
    };

    RreGreedyResult res;
    CoreShape r(std::vector<std::int64_t>(static_cast<std::size_t>(order), 1));
    double cur = eval(r);
    res.trace.emplace_back(r, cur);

    while (true) {
        int pick = -1;
        double pick_rre = 0.0;
        for (int n = 0; n < order; ++n) {
            const auto nu = static_cast<std::size_t>(n);
            if (r.ranks[nu] == dims[nu]) continue;
            ++r.ranks[nu];
            const bool fits = tucker_size(dims, r) <= budget;
            double v = 0.0;
            if (fits) v = eval(r);
            --r.ranks[nu];
            if (!fits) continue;
            if (pick < 0 || v < pick_rre) {
                pick = n;
                pick_rre = v;
            }
        }
        if (pick < 0) break;
        ++r.ranks[static_cast<std::size_t>(pick)];
        cur = pick_rre;
        res.trace.emplace_back(r, cur);
    }
    res.shape = std::move(r);
    res.rre = cur;
    return res;
}

namespace {

// ----- shared sweep engine --------------------------------------------

struct SweepConfig {
    std::vector<std::int64_t> budgets;
    std::vector<std::string> algos;
    double epsilon = 0.25;
    bool with_rre = false;
    int hooi_iters = 20;
    std::vector<std::int64_t> max_rank; // empty = uncapped (pareto only)
};

std::vector<SweepRecord> run_sweep(const DenseTensor& x, const SweepConfig& cfg) {
    if (cfg.budgets.empty()) throw std::invalid_argument("empty budget list");
    for (const auto& algo : cfg.algos)
        if (algo != "rre-greedy" && !kPackingAlgos.contains(algo))
            throw std::invalid_argument("unknown algo '" + algo + "'");
    std::vector<std::string> algos = cfg.algos;
    std::sort(algos.begin(), algos.end());
    algos.erase(std::unique(algos.begin(), algos.end()), algos.end());

    const auto t0 = Clock::now();
    ModeSpectra spectra = mode_sq_singular_values(x);
    const double spectra_ms = ms_since(t0);

    if (!cfg.max_rank.empty()) {
        // rank caps are emulated by zeroing the spectrum past the cap: no
        // solver gains anything from exceeding the cap, and lexicographic
        // tie-breaking then keeps every reported rank at or below it
        std::vector<std::int64_t> caps = cfg.max_rank;
        if (caps.size() == 1) caps.assign(spectra.sq_singular_values.size(), caps[0]);
        if (caps.size() != spectra.sq_singular_values.size())
            throw std::invalid_argument("--max-rank needs one value, or one per mode");
        for (std::size_t n = 0; n < caps.size(); ++n) {
            if (caps[n] < 1) throw std::invalid_argument("--max-rank must be >= 1");
            auto& vals = spectra.sq_singular_values[n];
            for (std::size_t i = static_cast<std::size_t>(caps[n]); i < vals.size();
                 ++i)
                vals[i] = 0.0;
        }
    }

    struct Task {
        std::int64_t budget;
        std::string algo;
    };
    std::vector<Task> tasks;
    for (std::int64_t b : cfg.budgets)
        for (const auto& algo : algos) tasks.push_back({b, algo});

    std::vector<SweepRecord> records(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        const Task& task = tasks[i];
        SweepRecord rec;
        rec.budget = task.budget;
        rec.algo = task.algo;
        rec.spectra_ms = spectra_ms;
        if (task.algo == "rre-greedy") {
            const auto ts = Clock::now();
            const RreGreedyResult res = rre_greedy(x, task.budget, cfg.hooi_iters);
            rec.shape = res.shape;
            rec.objective = spectra.tensor_fro_sq * static_cast<double>(x.order()) -
                            surrogate_loss(spectra, res.shape);
            rec.hooi_rre = res.rre;
            rec.solve_ms = ms_since(ts);
        } else {
            const PackingInstance inst = from_spectra(spectra, task.budget);
            const Solution sol = dispatch_solver(inst, task.algo, cfg.epsilon);
            rec.shape = sol.shape;
            rec.objective = sol.objective;
            rec.solve_ms = sol.elapsed_ms;
            if (cfg.with_rre) {
                const TuckerDecomposition d = hooi(x, sol.shape, cfg.hooi_iters);
                rec.hooi_rre = identity_rre(spectra.tensor_fro_sq, d.core);
            }
        }
        rec.surrogate_rre = surrogate_loss(spectra, rec.shape) / spectra.tensor_fro_sq;
        records[i] = std::move(rec);
    });
    return records;
}

// ----- output plumbing --------------------------------------------------

json shape_json(const CoreShape& r) { return json(r.ranks); }

std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out = "budget,algo,shape,objective,surrogate_rre,hooi_rre,"
                      "spectra_ms,solve_ms\n";
    for (const auto& r : records) {
        out += std::to_string(r.budget) + ',' + r.algo + ',' + format_shape(r.shape) +
               ',' + fmt_double(r.objective) + ',' + fmt_double(r.surrogate_rre) + ',';
        if (r.hooi_rre) out += fmt_double(*r.hooi_rre);
        out += ',' + fmt_ms(r.spectra_ms) + ',' + fmt_ms(r.solve_ms) + '\n';
    }
    return out;
}

json sweep_json(const std::vector<SweepRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        json row{{"budget", r.budget},
                 {"algo", r.algo},
                 {"shape", shape_json(r.shape)},
                 {"objective", r.objective},
                 {"surrogate_rre", r.surrogate_rre},
                 {"hooi_rre", nullptr},
                 {"spectra_ms", r.spectra_ms},
                 {"solve_ms", r.solve_ms}};
        if (r.hooi_rre) row["hooi_rre"] = *r.hooi_rre;
        arr.push_back(std::move(row));
    }
    return arr;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw format_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw format_error("write failed for '" + path + "'");
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
    emit(j.dump(2) + "\n", path, out);
}

// ----- input loading -----------------------------------------------------

bool looks_like_npy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open '" + path + "'");
    char magic[6] = {};
    in.read(magic, 6);
    return in.gcount() == 6 && std::memcmp(magic, "\x93NUMPY", 6) == 0;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw format_error("JSON parse error in '" + path + "': " + e.what());
    }
}

// ----- commands -----------------------------------------------------------

struct GenOptions {
    std::vector<std::int64_t> shape;
    std::vector<std::int64_t> core;
    std::string preset;
    double noise = 0.0;
    std::uint64_t seed = 42;
    std::string output;
};

void cmd_gen(const GenOptions& o) {
    std::vector<std::int64_t> shape = o.shape;
    if (!o.preset.empty()) {
        if (!shape.empty())
            throw std::invalid_argument("--shape and --preset are exclusive");
        const auto p = preset_shape(o.preset);
        if (!p) throw std::invalid_argument("unknown preset '" + o.preset + "'");
        shape = *p;
    }
    if (shape.empty()) throw std::invalid_argument("gen needs --shape or --preset");
    const std::vector<std::int64_t> core = o.core.empty() ? shape : o.core;
    const DenseTensor x = gen_synthetic(shape, core, o.noise, o.seed);
    write_npy(x, o.output);
}

struct SingvalsOptions {
    std::string input;
    std::string output;
};

void cmd_singvals(const SingvalsOptions& o, std::ostream& out) {
    const DenseTensor x = read_npy(o.input);
    const ModeSpectra s = mode_sq_singular_values(x);
    json arr = json::array();
    for (std::size_t n = 0; n < s.sq_singular_values.size(); ++n)
        arr.push_back(
            json{{"mode", n + 1}, {"sq_singular_values", s.sq_singular_values[n]}});
    emit_json(arr, o.output, out);
}

struct SolveOptions {
    std::string input;
    std::int64_t budget = -1; // -1: not given, fall back to the instance's own
    std::string algo = "ip";
    double epsilon = 0.25;
    int hooi_iters = 20;
    bool with_rre = false;
    std::string format = "json";
    std::string output;
};

void cmd_solve(const SolveOptions& o, std::ostream& out) {
    const bool is_tensor = looks_like_npy(o.input);
    if (!is_tensor && o.algo == "rre-greedy")
        throw std::invalid_argument("rre-greedy needs a tensor input, not an instance");
    if (!is_tensor && o.with_rre)
        throw std::invalid_argument("--with-rre needs a tensor input");
    if (o.algo != "rre-greedy" && !kPackingAlgos.contains(o.algo))
        throw std::invalid_argument("unknown algo '" + o.algo + "'");

    std::optional<DenseTensor> x;
    std::optional<ModeSpectra> spectra;
    double spectra_ms = 0.0;
    PackingInstance inst;
    if (is_tensor) {
        if (o.budget < 0) throw std::invalid_argument("solve needs --budget");
        x = read_npy(o.input);
        const auto t0 = Clock::now();
        spectra = mode_sq_singular_values(*x);
        // mck bounds only the core size, so it accepts budgets the
        // full-cost solvers must reject
        inst = o.algo == "mck"
                   ? PackingInstance::create(x->shape(), spectra->sq_singular_values,
                                             o.budget)
                   : from_spectra(*spectra, o.budget);
        spectra_ms = ms_since(t0);
    } else {
        inst = packing_instance_from_json(load_json_file(o.input));
        if (o.budget >= 0)
            inst = PackingInstance::create(inst.dims, inst.values, o.budget);
        if (o.algo != "mck" && inst.budget < inst.min_cost())
            throw infeasible_error(
                "budget " + std::to_string(inst.budget) + " is below 1 + sum I_n = " +
                std::to_string(inst.min_cost()));
    }

    Solution sol;
    std::optional<double> hooi_rre;
    json trace = nullptr;
    if (o.algo == "rre-greedy") {
        const auto t0 = Clock::now();
        const RreGreedyResult res = rre_greedy(*x, o.budget, o.hooi_iters);
        sol.shape = res.shape;
        sol.objective = objective(inst, res.shape);
        sol.cost = cost(inst, res.shape);
        sol.solver_id = "rre-greedy";
        sol.elapsed_ms = ms_since(t0);
        hooi_rre = res.rre;
        trace = json::array();
        for (const auto& [shape, rre_v] : res.trace)
            trace.push_back(json{{"shape", shape_json(shape)}, {"rre", rre_v}});
    } else {
        sol = dispatch_solver(inst, o.algo, o.epsilon);
        sol.elapsed_ms += spectra_ms; // reported time includes the spectra
        if (o.with_rre) {
            const TuckerDecomposition d = hooi(*x, sol.shape, o.hooi_iters);
            hooi_rre = identity_rre(spectra->tensor_fro_sq, d.core);
        }
    }

    const double surr_rre =
        spectra ? surrogate_loss(*spectra, sol.shape) / spectra->tensor_fro_sq
                : instance_surrogate_rre(inst, sol.shape);

    if (o.format == "csv") {
        SweepRecord rec;
        rec.budget = inst.budget;
        rec.algo = sol.solver_id;
        rec.shape = sol.shape;
        rec.objective = sol.objective;
        rec.surrogate_rre = surr_rre;
        rec.hooi_rre = hooi_rre;
        rec.spectra_ms = spectra_ms;
        rec.solve_ms = sol.elapsed_ms - spectra_ms;
        emit(sweep_csv({rec}), o.output, out);
        return;
    }

    json j = solution_to_json(sol);
    j["surrogate_rre"] = surr_rre;
    if (spectra) j["spectra_ms"] = spectra_ms;
    if (hooi_rre) j["hooi_rre"] = *hooi_rre;
    if (!trace.is_null()) j["trace"] = trace;
    emit_json(j, o.output, out);
}

struct SweepOptions {
    std::string input;
    std::string budgets;
    std::vector<std::string> algos = {"ip"};
    double epsilon = 0.25;
    bool with_rre = false;
    int hooi_iters = 20;
    std::string format = "csv";
    std::string output;
};

void cmd_sweep(const SweepOptions& o, std::ostream& out) {
    const DenseTensor x = read_npy(o.input);
    SweepConfig cfg;
    cfg.budgets = parse_budgets(o.budgets);
    cfg.algos = o.algos;
    cfg.epsilon = o.epsilon;
    cfg.with_rre = o.with_rre;
    cfg.hooi_iters = o.hooi_iters;
    const auto records = run_sweep(x, cfg);
    if (o.format == "json")
        emit_json(sweep_json(records), o.output, out);
    else
        emit(sweep_csv(records), o.output, out);
}

struct ParetoOptions {
    std::string input;
    std::string budgets;
    std::vector<std::string> algos = {"ip"};
    double epsilon = 0.25;
    int hooi_iters = 20;
    std::vector<std::int64_t> max_rank;
    std::string output;
};

void cmd_pareto(const ParetoOptions& o, std::ostream& out) {
    const DenseTensor x = read_npy(o.input);
    SweepConfig cfg;
    cfg.budgets = parse_budgets(o.budgets);
    cfg.algos = o.algos;
    cfg.epsilon = o.epsilon;
    cfg.with_rre = true; // the frontier is (compression, measured error)
    cfg.hooi_iters = o.hooi_iters;
    cfg.max_rank = o.max_rank;
    const auto records = run_sweep(x, cfg);

    double numel = 1.0;
    for (std::int64_t d : x.shape()) numel *= static_cast<double>(d);
    std::string text = "budget,algo,shape,compression_rate,rre\n";
    for (const auto& r : records) {
        const double size = static_cast<double>(tucker_size(x.shape(), r.shape));
        text += std::to_string(r.budget) + ',' + r.algo + ',' + format_shape(r.shape) +
                ',' + fmt_double(size / numel) + ',' + fmt_double(*r.hooi_rre) + '\n';
    }
    emit(text, o.output, out);
}

struct RreOptions {
    std::string input;
    std::vector<std::int64_t> shape;
    int iters = 20;
    std::string output;
};

void cmd_rre(const RreOptions& o, std::ostream& out) {
    const DenseTensor x = read_npy(o.input);
    const CoreShape r(o.shape);
    const double fro_sq = fro_sq_of(x);
    if (fro_sq == 0.0) throw std::invalid_argument("rre: zero tensor");
    const TuckerDecomposition h = tucker_hosvd(x, r);
    const double hosvd_rre = identity_rre(fro_sq, h.core);
    const TuckerDecomposition d = hooi(x, r, o.iters, &h);
    const json j{{"shape", o.shape},
                 {"rre", identity_rre(fro_sq, d.core)},
                 {"hosvd_rre", hosvd_rre},
                 {"iters", o.iters}};
    emit_json(j, o.output, out);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tucker core shape selection: spectra, packing solvers, sweeps"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* cgen = app.add_subcommand("gen", "generate a synthetic tensor (.npy)");
    cgen->add_option("--shape", gen.shape, "tensor dims, e.g. 32,32,32")
        ->delimiter(',');
    cgen->add_option("--core", gen.core, "core dims (default: full shape)")
        ->delimiter(',');
    cgen->add_option("--preset", gen.preset, "named shape: " + [] {
        std::string s;
        for (const auto& n : preset_names()) {
            if (!s.empty()) s += ", ";
            s += n;
        }
        return s;
    }());
    cgen->add_option("--noise", gen.noise, "noise level (default 0)");
    cgen->add_option("--seed", gen.seed, "RNG seed (default 42)");
    cgen->add_option("--output", gen.output, "output .npy path")->required();

    SingvalsOptions sing;
    auto* csing = app.add_subcommand("singvals", "squared mode-n singular values");
    csing->add_option("--input", sing.input, "tensor .npy")->required();
    csing->add_option("--output", sing.output, "output path (default stdout)");

    SolveOptions solve;
    auto* csolve = app.add_subcommand("solve", "pick a core shape for one budget");
    csolve->add_option("--input", solve.input, "tensor .npy or instance .json")
        ->required();
    csolve->add_option("--budget", solve.budget,
                       "size budget c (defaults to the instance's own budget)");
    csolve->add_option("--algo", solve.algo,
                       "ip|greedy|bang|brute|grid|mck|rre-greedy (default ip)");
    csolve->add_option("--epsilon", solve.epsilon, "accuracy knob (default 0.25)");
    csolve->add_option("--hooi-iters", solve.hooi_iters, "HOOI sweeps (default 20)");
    csolve->add_flag("--with-rre", solve.with_rre, "also run HOOI and report RRE");
    csolve->add_option("--format", solve.format, "json|csv (default json)")
        ->check(CLI::IsMember({"json", "csv"}));
    csolve->add_option("--output", solve.output, "output path (default stdout)");

    SweepOptions sweep;
    auto* csweep = app.add_subcommand("sweep", "solve across a budget range");
    csweep->add_option("--input", sweep.input, "tensor .npy")->required();
    csweep->add_option("--budgets", sweep.budgets, "list or lo:hi:count")->required();
    csweep
        ->add_option("--algos,--algo", sweep.algos,
                     "subset of ip,greedy,bang,brute,grid,mck,rre-greedy")
        ->delimiter(',');
    csweep->add_option("--epsilon", sweep.epsilon, "accuracy knob (default 0.25)");
    csweep->add_flag("--with-rre", sweep.with_rre, "also run HOOI per record");
    csweep->add_option("--hooi-iters", sweep.hooi_iters, "HOOI sweeps (default 20)");
    csweep->add_option("--format", sweep.format, "csv|json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    csweep->add_option("--output", sweep.output, "output path (default stdout)");

    ParetoOptions pareto;
    auto* cpareto = app.add_subcommand("pareto", "compression-vs-error frontier");
    cpareto->add_option("--input", pareto.input, "tensor .npy")->required();
    cpareto->add_option("--budgets", pareto.budgets, "list or lo:hi:count")
        ->required();
    cpareto
        ->add_option("--algos,--algo", pareto.algos,
                     "subset of ip,greedy,bang,brute,grid,mck,rre-greedy")
        ->delimiter(',');
    cpareto->add_option("--epsilon", pareto.epsilon, "accuracy knob (default 0.25)");
    cpareto->add_option("--hooi-iters", pareto.hooi_iters, "HOOI sweeps (default 20)");
    cpareto
        ->add_option("--max-rank", pareto.max_rank,
                     "rank cap, one value or one per mode")
        ->delimiter(',');
    cpareto->add_option("--output", pareto.output, "output path (default stdout)");

    RreOptions rre_o;
    auto* crre = app.add_subcommand("rre", "HOSVD/HOOI error at a fixed shape");
    crre->add_option("--input", rre_o.input, "tensor .npy")->required();
    crre->add_option("--shape", rre_o.shape, "core shape, e.g. 4,4,4")
        ->required()
        ->delimiter(',');
    crre->add_option("--iters", rre_o.iters, "HOOI sweeps (default 20)");
    crre->add_option("--output", rre_o.output, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cgen->parsed()) cmd_gen(gen);
        if (csing->parsed()) cmd_singvals(sing, out);
        if (csolve->parsed()) cmd_solve(solve, out);
        if (csweep->parsed()) cmd_sweep(sweep, out);
        if (cpareto->parsed()) cmd_pareto(pareto, out);
        if (crre->parsed()) cmd_rre(rre_o, out);
    } catch (const infeasible_error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const format_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace coreshape::cli
