#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coreshape/cli.hpp"
#include "coreshape/core_shape.hpp"
#include "coreshape/decomp.hpp"
#include "coreshape/errors.hpp"
#include "coreshape/npy.hpp"
#include "coreshape/packing.hpp"
#include "coreshape/spectra.hpp"
#include "coreshape/synthetic.hpp"
#include "coreshape/tensor.hpp"

using namespace coreshape;
using nlohmann::json;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("coreshape");
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code =
        cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string tmp_path(const std::string& name) {
    static const std::string dir = [] {
        const auto d =
            std::filesystem::temp_directory_path() / "coreshape_cli_tests";
        std::filesystem::create_directories(d);
        return d.string();
    }();
    return dir + "/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::vector<std::int64_t> parse_shape_field(const std::string& s) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, 'x')) out.push_back(std::stoll(tok));
    return out;
}

// blank the two trailing timing columns of the sweep schema
std::string strip_timing(const std::string& csv) {
    std::string out;
    for (auto& row : parse_csv(csv)) {
        if (row.size() == 8) {
            row[6].clear();
            row[7].clear();
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

const char* kHeader =
    "budget,algo,shape,objective,surrogate_rre,hooi_rre,spectra_ms,solve_ms";

} // namespace

TEST_CASE("parse_budgets accepts ascending comma lists") {
    CHECK(cli::parse_budgets("448") == std::vector<std::int64_t>{448});
    const std::vector<std::int64_t> want{100, 200, 300};
    CHECK(cli::parse_budgets("100,200,300") == want);

    CHECK_THROWS_AS(cli::parse_budgets(""), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("300,200"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("100,100"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("12,nope"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("12.5"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("0"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("-4"), std::invalid_argument);
}

TEST_CASE("parse_budgets expands geometric lo:hi:count specs") {
    const auto geo = cli::parse_budgets("1000:100000:20");
    REQUIRE(geo.size() == 20);
    CHECK(geo.front() == 1000);
    CHECK(geo.back() == 100000);
    for (std::size_t k = 1; k < geo.size(); ++k) CHECK(geo[k] > geo[k - 1]);
    for (std::size_t k = 0; k < geo.size(); ++k) {
        // each point rounds the exact geometric interpolant
        const double ideal =
            1000.0 * std::pow(100.0, static_cast<double>(k) / 19.0);
        CHECK(std::abs(static_cast<double>(geo[k]) - ideal) <=
              0.5 + 1e-9 * ideal);
    }

    CHECK(cli::parse_budgets("5:5:3") == std::vector<std::int64_t>{5});
    const std::vector<std::int64_t> two{7, 8};
    CHECK(cli::parse_budgets("7:8:2") == two);

    CHECK_THROWS_AS(cli::parse_budgets("10:5:3"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("5:10:1"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("5:10"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("5:10:3:2"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_budgets("a:10:3"), std::invalid_argument);
}

TEST_CASE("preset shapes match the published dataset dimensions") {
    const std::vector<std::int64_t> cardiac{256, 256, 14, 20};
    const std::vector<std::int64_t> hyper{1024, 1344, 33};
    const std::vector<std::int64_t> mini{128, 128, 32};
    const std::vector<std::int64_t> vic{1084, 2033, 96};
    const std::vector<std::int64_t> coil{7200, 128, 128, 3};
    REQUIRE(cli::preset_shape("cardiac").has_value());
    CHECK(*cli::preset_shape("cardiac") == cardiac);
    CHECK(*cli::preset_shape("hyperspectral") == hyper);
    CHECK(*cli::preset_shape("hyperspectral-mini") == mini);
    CHECK(*cli::preset_shape("vicroads") == vic);
    CHECK(*cli::preset_shape("coil") == coil);
    CHECK(!cli::preset_shape("landsat").has_value());

    const auto names = cli::preset_names();
    CHECK(names.size() == 5);
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(std::find(names.begin(), names.end(), "hyperspectral-mini") !=
          names.end());
}

TEST_CASE("worker_count reads COREShape_THREADS with clamping") {
    unsetenv("COREShape_THREADS");
    CHECK(cli::worker_count() == 1);
    setenv("COREShape_THREADS", "4", 1);
    CHECK(cli::worker_count() == 4);
    setenv("COREShape_THREADS", "1", 1);
    CHECK(cli::worker_count() == 1);
    setenv("COREShape_THREADS", "0", 1);
    CHECK(cli::worker_count() == 1);
    setenv("COREShape_THREADS", "-3", 1);
    CHECK(cli::worker_count() == 1);
    setenv("COREShape_THREADS", "100000", 1);
    CHECK(cli::worker_count() == 256);
    setenv("COREShape_THREADS", "lots", 1);
    CHECK(cli::worker_count() == 1);
    setenv("COREShape_THREADS", "4x", 1);
    CHECK(cli::worker_count() == 1);
    unsetenv("COREShape_THREADS");
}

TEST_CASE("rre_greedy climbs from all-ones and nails an exact low-rank tensor") {
    const DenseTensor x = gen_synthetic({8, 8, 8}, {2, 2, 2}, 0.0, 31);
    const auto res = cli::rre_greedy(x, 120, 3);

    REQUIRE(!res.trace.empty());
    const std::vector<std::int64_t> ones{1, 1, 1};
    CHECK(res.trace.front().first.ranks == ones);
    CHECK(res.trace.back().first == res.shape);
    CHECK(res.trace.back().second == res.rre);
    CHECK(res.rre <= 1e-9);

    // the error hits numerical zero no later than the true core shape
    bool seen = false;
    for (const auto& [shape, err] : res.trace) {
        if (err <= 1e-9) {
            for (std::int64_t v : shape.ranks) CHECK(v <= 2);
            seen = true;
            break;
        }
    }
    CHECK(seen);

    for (const auto& [shape, err] : res.trace) {
        CHECK(err >= 0.0);
        CHECK(tucker_size(x.shape(), shape) <= 120);
    }
    // one rank increment per accepted step
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
        std::int64_t bumps = 0;
        for (int n = 0; n < 3; ++n) {
            const auto d =
                res.trace[i].first.ranks[n] - res.trace[i - 1].first.ranks[n];
            CHECK(d >= 0);
            CHECK(d <= 1);
            bumps += d;
        }
        CHECK(bumps == 1);
    }
}

TEST_CASE("rre_greedy edge cases") {
    const DenseTensor x = gen_synthetic({8, 8, 8}, {2, 2, 2}, 0.0, 32);

    // budget == 1 + sum I_n only fits the all-ones shape
    const auto tight = cli::rre_greedy(x, 25, 2);
    const std::vector<std::int64_t> ones{1, 1, 1};
    CHECK(tight.shape.ranks == ones);
    CHECK(tight.trace.size() == 1);

    CHECK_THROWS_AS(cli::rre_greedy(x, 24, 2), infeasible_error);
    CHECK_THROWS_AS(cli::rre_greedy(x, 120, -1), std::invalid_argument);
    const DenseTensor zero(std::vector<std::int64_t>{3, 3, 3});
    CHECK_THROWS_AS(cli::rre_greedy(zero, 100, 2), std::invalid_argument);
}

TEST_CASE("cli gen writes reproducible npy tensors") {
    const auto a = tmp_path("gen_a.npy");
    const auto b = tmp_path("gen_b.npy");
    const auto c = tmp_path("gen_c.npy");
    const std::vector<std::string> base{"gen",     "--shape", "6,5,4",
                                        "--core",  "2,2,2",   "--noise",
                                        "0.05",    "--seed",  "7"};
    auto with_out = [&](const std::string& p) {
        auto v = base;
        v.insert(v.end(), {"--output", p});
        return v;
    };

    const auto r1 = run(with_out(a));
    REQUIRE(r1.code == 0);
    CHECK(r1.out.empty());
    CHECK(r1.err.empty());
    REQUIRE(run(with_out(b)).code == 0);
    CHECK(slurp(a) == slurp(b));

    const DenseTensor x = read_npy(a);
    const std::vector<std::int64_t> dims{6, 5, 4};
    CHECK(x.shape() == dims);
    const DenseTensor ref = gen_synthetic({6, 5, 4}, {2, 2, 2}, 0.05, 7);
    REQUIRE(x.data().size() == ref.data().size());
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < x.data().size(); ++i)
        if (x.data()[i] != ref.data()[i]) ++mismatches;
    CHECK(mismatches == 0);

    auto other = with_out(c);
    other[8] = "8"; // different seed, different bytes
    REQUIRE(run(other).code == 0);
    CHECK(slurp(a) != slurp(c));

    // --core defaults to the full shape
    const auto d = tmp_path("gen_d.npy");
    REQUIRE(run({"gen", "--shape", "3,4,2", "--noise", "0", "--seed", "1",
                 "--output", d})
                .code == 0);
    const DenseTensor y = read_npy(d);
    const DenseTensor yref = gen_synthetic({3, 4, 2}, {3, 4, 2}, 0.0, 1);
    REQUIRE(y.data().size() == yref.data().size());
    mismatches = 0;
    for (std::size_t i = 0; i < y.data().size(); ++i)
        if (y.data()[i] != yref.data()[i]) ++mismatches;
    CHECK(mismatches == 0);
}

TEST_CASE("cli gen usage errors") {
    const auto p = tmp_path("gen_err.npy");
    CHECK(run({"gen", "--shape", "4,4", "--preset", "cardiac", "--output", p})
              .code == 2);
    CHECK(run({"gen", "--output", p}).code == 2);
    CHECK(run({"gen", "--preset", "landsat", "--output", p}).code == 2);
    CHECK(run({"gen", "--shape", "4,4"}).code == 2); // --output is required
    const auto bad_core =
        run({"gen", "--shape", "4,4", "--core", "5,4", "--output", p});
    CHECK(bad_core.code == 2);
    CHECK(bad_core.err.find("error:") != std::string::npos);
}

TEST_CASE("cli singvals emits per-mode squared spectra") {
    const auto t = tmp_path("sv.npy");
    REQUIRE(run({"gen", "--shape", "5,6,4", "--core", "3,2,2", "--noise", "0.2",
                 "--seed", "11", "--output", t})
                .code == 0);
    const auto r = run({"singvals", "--input", t});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 3);

    const DenseTensor x = read_npy(t);
    const ModeSpectra s = mode_sq_singular_values(x);
    const std::vector<std::int64_t> dims{5, 6, 4};
    for (std::size_t n = 0; n < 3; ++n) {
        const auto& entry = j[n];
        CHECK(entry.at("mode").get<int>() == static_cast<int>(n) + 1);
        const auto vals =
            entry.at("sq_singular_values").get<std::vector<double>>();
        REQUIRE(static_cast<std::int64_t>(vals.size()) == dims[n]);
        const auto& ref = s.sq_singular_values[n];
        REQUIRE(vals.size() == ref.size());
        for (std::size_t i = 0; i < vals.size(); ++i) CHECK(vals[i] == ref[i]);
        for (std::size_t i = 1; i < vals.size(); ++i)
            CHECK(vals[i] <= vals[i - 1]);
    }

    // --output routes the same bytes into a file instead of stdout
    const auto outfile = tmp_path("sv.json");
    const auto r2 = run({"singvals", "--input", t, "--output", outfile});
    REQUIRE(r2.code == 0);
    CHECK(r2.out.empty());
    CHECK(slurp(outfile) == r.out);
}

TEST_CASE("cli singvals input errors") {
    CHECK(run({"singvals", "--input", tmp_path("no_such.npy")}).code == 3);
    const auto junk = tmp_path("junk.npy");
    spit(junk, "definitely not numpy");
    CHECK(run({"singvals", "--input", junk}).code == 3);
    CHECK(run({"singvals"}).code == 2); // --input required
}

TEST_CASE("cli solve with brute force matches the library pipeline") {
    const auto t = tmp_path("solve666.npy");
    REQUIRE(run({"gen", "--shape", "6,6,6", "--core", "2,3,2", "--noise", "0.1",
                 "--seed", "3", "--output", t})
                .code == 0);
    const auto r =
        run({"solve", "--input", t, "--budget", "200", "--algo", "brute"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("solver").get<std::string>() == "brute");
    REQUIRE(j.contains("shape"));
    REQUIRE(j.contains("objective"));
    REQUIRE(j.contains("cost"));
    REQUIRE(j.contains("elapsed_ms"));
    REQUIRE(j.contains("surrogate_rre"));
    REQUIRE(j.contains("spectra_ms"));
    CHECK(!j.contains("hooi_rre"));
    CHECK(!j.contains("trace"));

    const DenseTensor x = read_npy(t);
    const ModeSpectra s = mode_sq_singular_values(x);
    const Solution want = solve_brute_force(from_spectra(s, 200));
    CHECK(j.at("shape").get<std::vector<std::int64_t>>() == want.shape.ranks);
    CHECK(j.at("objective").get<double>() == want.objective);
    CHECK(j.at("cost").get<std::int64_t>() == want.cost);
    CHECK(j.at("cost").get<std::int64_t>() <= 200);

    const double fro = s.tensor_fro_sq;
    const double surr = j.at("surrogate_rre").get<double>();
    CHECK(surr ==
          doctest::Approx(surrogate_loss(s, want.shape) / fro).epsilon(1e-12));
    // complement identity: f(r) + Ltilde(r) == N * ||X||^2
    CHECK(want.objective + surr * fro == doctest::Approx(3.0 * fro).epsilon(1e-8));

    SUBCASE("--output writes the same json to a file") {
        const auto outj = tmp_path("solve_out.json");
        const auto rr = run({"solve", "--input", t, "--budget", "200", "--algo",
                             "brute", "--output", outj});
        REQUIRE(rr.code == 0);
        CHECK(rr.out.empty());
        const json jf = json::parse(slurp(outj));
        CHECK(jf.at("shape") == j.at("shape"));
        CHECK(jf.at("objective") == j.at("objective"));
    }
    SUBCASE("unwritable output path") {
        CHECK(run({"solve", "--input", t, "--budget", "200", "--algo", "brute",
                   "--output", "/no/such/dir/out.json"})
                  .code == 3);
    }
}

TEST_CASE("cli solve --with-rre stays within the surrogate bound") {
    const auto t = tmp_path("solve_rre.npy");
    REQUIRE(run({"gen", "--shape", "6,5,4", "--core", "2,2,2", "--noise", "0.1",
                 "--seed", "21", "--output", t})
                .code == 0);
    const auto r = run({"solve", "--input", t, "--budget", "90", "--algo", "ip",
                        "--with-rre", "--hooi-iters", "5"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j.contains("hooi_rre"));
    const double hooi_rre = j.at("hooi_rre").get<double>();
    const double surr = j.at("surrogate_rre").get<double>();
    CHECK(hooi_rre >= 0.0);
    CHECK(hooi_rre <= surr + 1e-8); // measured loss never exceeds the surrogate
}

TEST_CASE("cli solve csv format") {
    const auto t = tmp_path("solve_csv.npy");
    REQUIRE(run({"gen", "--shape", "6,5,4", "--core", "2,2,2", "--noise", "0.3",
                 "--seed", "4", "--output", t})
                .code == 0);
    const auto r = run({"solve", "--input", t, "--budget", "90", "--algo",
                        "greedy", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.substr(0, r.out.find('\n')) == kHeader);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[1].size() == 8);
    CHECK(rows[1][0] == "90");
    CHECK(rows[1][1] == "greedy");
    const auto shape = parse_shape_field(rows[1][2]);
    REQUIRE(shape.size() == 3);
    const std::vector<std::int64_t> dims{6, 5, 4};
    CHECK(tucker_size(dims, CoreShape(shape)) <= 90);
    CHECK(std::stod(rows[1][3]) > 0.0);
    CHECK(rows[1][5].empty()); // no --with-rre, empty hooi column
    CHECK(std::stod(rows[1][6]) >= 0.0);
    CHECK(std::stod(rows[1][7]) >= 0.0);
}

TEST_CASE("cli solve rre-greedy end to end") {
    const auto t = tmp_path("solve_rg.npy");
    REQUIRE(run({"gen", "--shape", "6,5,4", "--core", "2,2,2", "--noise", "0",
                 "--seed", "17", "--output", t})
                .code == 0);
    const auto r = run({"solve", "--input", t, "--budget", "80", "--algo",
                        "rre-greedy", "--hooi-iters", "2"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("solver").get<std::string>() == "rre-greedy");
    REQUIRE(j.contains("hooi_rre"));
    REQUIRE(j.contains("trace"));
    const auto& trace = j.at("trace");
    REQUIRE(trace.is_array());
    REQUIRE(!trace.empty());
    const std::vector<std::int64_t> ones{1, 1, 1};
    CHECK(trace.front().at("shape").get<std::vector<std::int64_t>>() == ones);
    CHECK(trace.back().at("shape").get<std::vector<std::int64_t>>() ==
          j.at("shape").get<std::vector<std::int64_t>>());
    CHECK(trace.back().at("rre").get<double>() ==
          j.at("hooi_rre").get<double>());
    CHECK(j.at("hooi_rre").get<double>() <= 1e-9); // exact low-rank input
    CHECK(j.at("cost").get<std::int64_t>() <= 80);
}

TEST_CASE("cli solve accepts packing instance json") {
    const std::vector<std::int64_t> dims{3, 2, 2};
    const std::vector<std::vector<double>> values{
        {9.0, 4.0, 1.0}, {8.0, 3.0}, {7.0, 2.0}};
    const auto inst = PackingInstance::create(dims, values, 30);
    const auto path = tmp_path("inst.json");
    spit(path, packing_instance_to_json(inst).dump(2) + "\n");

    const auto r = run({"solve", "--input", path, "--algo", "brute"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    const Solution want = solve_brute_force(inst);
    CHECK(j.at("shape").get<std::vector<std::int64_t>>() == want.shape.ranks);
    CHECK(j.at("objective").get<double>() == want.objective);
    CHECK(!j.contains("spectra_ms")); // no tensor, no spectra
    CHECK(!j.contains("hooi_rre"));

    SUBCASE("--budget overrides the stored budget") {
        const auto r2 =
            run({"solve", "--input", path, "--algo", "brute", "--budget", "14"});
        REQUIRE(r2.code == 0);
        const json j2 = json::parse(r2.out);
        const Solution want2 =
            solve_brute_force(PackingInstance::create(dims, values, 14));
        CHECK(j2.at("shape").get<std::vector<std::int64_t>>() ==
              want2.shape.ranks);
        const std::vector<std::int64_t> best{2, 1, 1};
        CHECK(want2.shape.ranks == best); // hand-checked optimum at c=14
        CHECK(j2.at("cost").get<std::int64_t>() <= 14);
    }
    SUBCASE("usage and feasibility errors") {
        CHECK(run({"solve", "--input", path, "--algo", "rre-greedy"}).code == 2);
        CHECK(run({"solve", "--input", path, "--algo", "brute", "--with-rre"})
                  .code == 2);
        const auto starved =
            run({"solve", "--input", path, "--algo", "brute", "--budget", "7"});
        CHECK(starved.code == 4);
        CHECK(starved.err.find("error:") != std::string::npos);
        // mck only bounds the core, so the same budget is accepted there
        CHECK(run({"solve", "--input", path, "--algo", "mck", "--budget", "7"})
                  .code == 0);
    }
}

TEST_CASE("cli solve malformed inputs and usage errors") {
    const auto t = tmp_path("solve_err.npy");
    REQUIRE(run({"gen", "--shape", "5,4,3", "--noise", "0.2", "--seed", "2",
                 "--output", t})
                .code == 0);

    CHECK(run({"solve", "--input", t, "--algo", "brute"}).code == 2);
    CHECK(run({"solve", "--input", t, "--budget", "60", "--algo", "sorcery"})
              .code == 2);
    CHECK(run({"solve", "--input", t, "--budget", "60", "--algo", "ip",
               "--epsilon", "0.4"})
              .code == 2);
    CHECK(run({"solve", "--input", t, "--budget", "60", "--algo", "brute",
               "--format", "xml"})
              .code == 2);
    CHECK(run({"solve", "--input", t, "--budget", "10", "--algo", "brute"})
              .code == 4);
    CHECK(run({"solve", "--input", t, "--budget", "10", "--algo", "mck"})
              .code == 0);

    const auto bad = tmp_path("bad_inst.json");
    spit(bad, "{ this is not json");
    CHECK(run({"solve", "--input", bad, "--algo", "brute"}).code == 3);

    const auto increasing = tmp_path("increasing.json");
    spit(increasing,
         R"({"dims":[2,2],"budget":9,"values":[[1.0,2.0],[3.0,1.0]]})");
    CHECK(run({"solve", "--input", increasing, "--algo", "brute"}).code == 3);

    CHECK(run({"solve", "--input", tmp_path("ghost.json"), "--algo", "brute"})
              .code == 3);
}

TEST_CASE("cli sweep ordering, schema, and solver guarantees") {
    const auto t = tmp_path("sweep.npy");
    REQUIRE(run({"gen", "--shape", "6,5,4", "--core", "3,2,2", "--noise", "0.3",
                 "--seed", "5", "--output", t})
                .code == 0);
    const std::vector<std::string> args{
        "sweep", "--input", t, "--budgets", "40,80,160",
        "--algos", "ip,greedy,brute"};
    const auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(r.out.substr(0, r.out.find('\n')) == kHeader);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 10);

    const DenseTensor x = read_npy(t);
    const ModeSpectra s = mode_sq_singular_values(x);
    const double fro = s.tensor_fro_sq;

    const std::vector<std::string> budgets{"40",  "40",  "40",  "80", "80",
                                           "80",  "160", "160", "160"};
    const std::vector<std::string> algos{"brute", "greedy", "ip"};
    std::map<std::string, std::vector<double>> obj_by_algo;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        REQUIRE(row.size() == 8);
        CHECK(row[0] == budgets[i - 1]); // budget-major ordering
        CHECK(row[1] == algos[(i - 1) % 3]); // algos alphabetical within
        const auto shape = parse_shape_field(row[2]);
        REQUIRE(shape.size() == 3);
        CHECK(tucker_size(x.shape(), CoreShape(shape)) <= std::stoll(row[0]));
        const double obj = std::stod(row[3]);
        const double surr = std::stod(row[4]);
        // complement identity on every record
        CHECK(obj + surr * fro == doctest::Approx(3.0 * fro).epsilon(1e-8));
        CHECK(row[5].empty()); // no --with-rre
        obj_by_algo[row[1]].push_back(obj);
    }
    for (const auto& [algo, objs] : obj_by_algo) {
        REQUIRE(objs.size() == 3);
        CHECK(objs[1] >= objs[0] - 1e-9 * fro); // larger budget, no worse
        CHECK(objs[2] >= objs[1] - 1e-9 * fro);
    }
    // brute is exact, so nobody beats it; ip keeps its (1 - 3 eps) guarantee
    for (std::size_t b = 0; b < 3; ++b) {
        const double best = obj_by_algo["brute"][b];
        CHECK(obj_by_algo["greedy"][b] <= best + 1e-9 * fro);
        CHECK(obj_by_algo["ip"][b] <= best + 1e-9 * fro);
        CHECK(obj_by_algo["ip"][b] >= 0.25 * best - 1e-9 * fro);
    }

    SUBCASE("reruns are byte-identical modulo timing columns") {
        const auto again = run(args);
        REQUIRE(again.code == 0);
        CHECK(strip_timing(again.out) == strip_timing(r.out));
    }
    SUBCASE("a worker pool does not change the records") {
        setenv("COREShape_THREADS", "3", 1);
        const auto pooled = run(args);
        unsetenv("COREShape_THREADS");
        REQUIRE(pooled.code == 0);
        CHECK(strip_timing(pooled.out) == strip_timing(r.out));
    }
    SUBCASE("duplicate algos collapse") {
        const auto dd =
            run({"sweep", "--input", t, "--budgets", "40", "--algos", "ip,ip"});
        REQUIRE(dd.code == 0);
        CHECK(parse_csv(dd.out).size() == 2);
    }
}

TEST_CASE("cli sweep rre-greedy rows and json format") {
    const auto t = tmp_path("sweep_rg.npy");
    REQUIRE(run({"gen", "--shape", "5,5,4", "--core", "2,2,2", "--noise",
                 "0.05", "--seed", "9", "--output", t})
                .code == 0);
    const auto r = run({"sweep", "--input", t, "--budgets", "30,70", "--algos",
                        "rre-greedy,ip", "--hooi-iters", "2"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[1][1] == "ip");
    CHECK(rows[2][1] == "rre-greedy");
    CHECK(rows[3][1] == "ip");
    CHECK(rows[4][1] == "rre-greedy");
    CHECK(rows[1][5].empty());  // packing solver without --with-rre
    CHECK(!rows[2][5].empty()); // rre-greedy always measures
    CHECK(std::stod(rows[2][5]) >= 0.0);

    const auto rj =
        run({"sweep", "--input", t, "--budgets", "30,70", "--algos",
             "rre-greedy,ip", "--hooi-iters", "2", "--format", "json"});
    REQUIRE(rj.code == 0);
    const json arr = json::parse(rj.out);
    REQUIRE(arr.is_array());
    REQUIRE(arr.size() == 4);
    for (const auto& row : arr) {
        for (const char* key : {"budget", "algo", "shape", "objective",
                                "surrogate_rre", "hooi_rre", "spectra_ms",
                                "solve_ms"})
            CHECK(row.contains(key));
        if (row.at("algo").get<std::string>() == "ip")
            CHECK(row.at("hooi_rre").is_null());
        else
            CHECK(row.at("hooi_rre").is_number());
    }
}

TEST_CASE("cli sweep usage and feasibility errors") {
    const auto t = tmp_path("sweep_err.npy");
    REQUIRE(run({"gen", "--shape", "5,4,3", "--noise", "0.2", "--seed", "6",
                 "--output", t})
                .code == 0);
    CHECK(run({"sweep", "--input", t, "--budgets", "80,40", "--algos", "ip"})
              .code == 2);
    CHECK(run({"sweep", "--input", t, "--budgets", "40", "--algos", "ip,hype"})
              .code == 2);
    CHECK(run({"sweep", "--input", t, "--budgets", "12", "--algos", "brute"})
              .code == 4);
    CHECK(run({"sweep", "--input", t, "--algos", "ip"}).code == 2);
}

TEST_CASE("cli pareto frontier csv") {
    // decaying spectrum: signal dominates, so the measured frontier is clean
    const auto t = tmp_path("pareto_decay.npy");
    REQUIRE(run({"gen", "--shape", "8,7,6", "--core", "4,4,4", "--noise",
                 "0.05", "--seed", "9", "--output", t})
                .code == 0);
    const std::vector<std::string> args{"pareto", "--input", t,
                                        "--budgets", "22:300:5",
                                        "--algos", "brute"};
    const auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(r.out.substr(0, r.out.find('\n')) ==
          "budget,algo,shape,compression_rate,rre");
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 6); // |budgets| x |algos| data rows

    const std::vector<std::int64_t> dims{8, 7, 6};
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        REQUIRE(row.size() == 5);
        CHECK(row[1] == "brute");
        const CoreShape shape(parse_shape_field(row[2]));
        const double size = static_cast<double>(tucker_size(dims, shape));
        CHECK(std::stod(row[3]) == doctest::Approx(size / 336.0).epsilon(1e-12));
        const double err = std::stod(row[4]);
        CHECK(err >= 0.0);
        CHECK(err <= prev + 1e-8); // exact solver: monotone frontier
        prev = err;
    }

    // no timing columns, so reruns are byte-identical outright
    const auto again = run(args);
    CHECK(again.out == r.out);

    // full-shape core plus noise: every direction carries positive energy
    const auto tn = tmp_path("pareto_noise.npy");
    REQUIRE(run({"gen", "--shape", "8,7,6", "--noise", "0.5", "--seed", "9",
                 "--output", tn})
                .code == 0);

    SUBCASE("full-shape point") {
        const auto rf = run({"pareto", "--input", tn, "--budgets", "485,500",
                             "--algos", "brute"});
        REQUIRE(rf.code == 0);
        const auto frows = parse_csv(rf.out);
        REQUIRE(frows.size() == 3);
        CHECK(frows[1][2] == "8x7x6");
        CHECK(frows[2][2] == "8x7x6");
        CHECK(std::stod(frows[1][4]) <= 1e-10);
        CHECK(std::stod(frows[1][3]) ==
              doctest::Approx(485.0 / 336.0).epsilon(1e-12)); // > 1 is fine
    }
    SUBCASE("--max-rank caps the search") {
        const auto rm =
            run({"pareto", "--input", tn, "--budgets", "100,200", "--algos",
                 "brute,greedy", "--max-rank", "3"});
        REQUIRE(rm.code == 0);
        const auto mrows = parse_csv(rm.out);
        REQUIRE(mrows.size() == 5);
        for (std::size_t i = 1; i < mrows.size(); ++i)
            for (std::int64_t v : parse_shape_field(mrows[i][2])) CHECK(v <= 3);

        const auto rp = run({"pareto", "--input", tn, "--budgets", "100",
                             "--algos", "brute", "--max-rank", "3,2,4"});
        REQUIRE(rp.code == 0);
        const auto capped = parse_shape_field(parse_csv(rp.out)[1][2]);
        REQUIRE(capped.size() == 3);
        CHECK(capped[0] <= 3);
        CHECK(capped[1] <= 2);
        CHECK(capped[2] <= 4);

        CHECK(run({"pareto", "--input", tn, "--budgets", "100", "--algos",
                   "brute", "--max-rank", "3,2"})
                  .code == 2);
        CHECK(run({"pareto", "--input", tn, "--budgets", "100", "--algos",
                   "brute", "--max-rank", "0"})
                  .code == 2);
    }
}

TEST_CASE("cli rre reports hosvd and hooi errors for a chosen shape") {
    const auto t = tmp_path("rre_cmd.npy");
    REQUIRE(run({"gen", "--shape", "6,6,6", "--core", "2,2,2", "--noise", "0.1",
                 "--seed", "13", "--output", t})
                .code == 0);
    const auto r = run({"rre", "--input", t, "--shape", "2,2,2", "--iters", "7"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.size() == 4);
    const std::vector<std::int64_t> want{2, 2, 2};
    CHECK(j.at("shape").get<std::vector<std::int64_t>>() == want);
    CHECK(j.at("iters").get<int>() == 7);
    const double rre_v = j.at("rre").get<double>();
    const double hosvd_v = j.at("hosvd_rre").get<double>();
    CHECK(rre_v <= hosvd_v + 1e-12); // hooi starts from hosvd and only improves

    // reconstruction-error oracle for both numbers
    const DenseTensor x = read_npy(t);
    const CoreShape shape(std::vector<std::int64_t>{2, 2, 2});
    const TuckerDecomposition h = tucker_hosvd(x, shape);
    CHECK(hosvd_v == doctest::Approx(rre(x, h)).epsilon(1e-8));
    const TuckerDecomposition d = hooi(x, shape, 7, &h);
    CHECK(rre_v == doctest::Approx(rre(x, d)).epsilon(1e-8));

    SUBCASE("zero sweeps reproduce the hosvd error") {
        const auto r0 =
            run({"rre", "--input", t, "--shape", "2,2,2", "--iters", "0"});
        REQUIRE(r0.code == 0);
        const json j0 = json::parse(r0.out);
        CHECK(j0.at("rre").get<double>() == j0.at("hosvd_rre").get<double>());
    }
    SUBCASE("noiseless recovery") {
        const auto tn = tmp_path("rre_clean.npy");
        REQUIRE(run({"gen", "--shape", "6,6,6", "--core", "2,2,2", "--noise",
                     "0", "--seed", "14", "--output", tn})
                    .code == 0);
        const auto rn = run({"rre", "--input", tn, "--shape", "2,2,2"});
        REQUIRE(rn.code == 0);
        CHECK(json::parse(rn.out).at("rre").get<double>() <= 1e-9);
    }
    SUBCASE("usage errors") {
        CHECK(run({"rre", "--input", t, "--shape", "7,1,1"}).code == 2);
        CHECK(run({"rre", "--input", t, "--shape", "0,2,2"}).code == 2);
        CHECK(run({"rre", "--input", t, "--shape", "2,2"}).code == 2);
        CHECK(run({"rre", "--input", t}).code == 2); // --shape required
        CHECK(run({"rre", "--input", tmp_path("nope.npy"), "--shape", "2,2,2"})
                  .code == 3);
    }
}

TEST_CASE("cli top-level usage") {
    CHECK(run({}).code == 2);
    CHECK(run({"conjure"}).code == 2);
    const auto h = run({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("gen") != std::string::npos);
    CHECK(h.out.find("sweep") != std::string::npos);
    const auto hs = run({"solve", "--help"});
    CHECK(hs.code == 0);
    CHECK(hs.out.find("--budget") != std::string::npos);
    CHECK(run({"solve", "--input"}).code == 2); // dangling option value
}

TEST_CASE("cli identical runs agree modulo timing") {
    const auto t = tmp_path("det.npy");
    REQUIRE(run({"gen", "--shape", "6,5,4", "--core", "2,2,2", "--noise", "0.2",
                 "--seed", "23", "--output", t})
                .code == 0);
    const auto strip_json_timing = [](const std::string& text) {
        json j = json::parse(text);
        for (const char* k : {"elapsed_ms", "spectra_ms", "solve_ms"})
            j.erase(k);
        return j.dump(2);
    };
    const std::vector<std::string> args{"solve", "--input", t, "--budget",
                                        "90", "--algo", "ip", "--with-rre"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(strip_json_timing(a.out) == strip_json_timing(b.out));

    const auto sv1 = run({"singvals", "--input", t});
    const auto sv2 = run({"singvals", "--input", t});
    CHECK(sv1.out == sv2.out); // no timing fields at all
}
