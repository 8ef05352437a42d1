#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mweights/cli/selftest.hpp"
#include "mweights/core/io.hpp"
#include "mweights/experiments/audit.hpp"
#include "mweights/experiments/fit.hpp"
#include "mweights/experiments/sweep.hpp"
#include "mweights/operators/maximal.hpp"
#include "mweights/operators/sparse.hpp"
#include "mweights/weights/ap.hpp"

namespace mweights::cli {

using nlohmann::json;

struct RunConfig {
    std::string command;
    std::string p = "2,2";
    int m = 0; // 0: take it from p or the function list
    std::vector<std::string> w;
    std::vector<std::string> f;
    int n = 1;
    int L = -1; // -1: 12 for n=1, 8 for n=2
    std::string eps = "2^-2..2^-9";
    double a = 0.0; // 0: 2^{mn+2}
    int g_min = -2;
    int T = 5;
    std::string variant = "direct";
    int trials = 20;
    std::uint64_t seed = 1;
    bool unit_weights = false;
    std::string out;
    bool binary = false;
    bool timing = false;
    int threads = 0;
    std::string config;

    int level() const { return L >= 0 ? L : (n == 1 ? 12 : 8); }
};

// "3", "4/3", "-0.5"
inline double parse_number(std::string s)
{
    const auto slash = s.find('/');
    if (slash == std::string::npos)
        return io::parse_double(s);
    return io::parse_double(s.substr(0, slash)) / io::parse_double(s.substr(slash + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto k = s.find(sep, start);
        out.push_back(s.substr(start, k == std::string::npos ? std::string::npos : k - start));
        if (k == std::string::npos)
            return out;
        start = k + 1;
    }
}

/// "2^-a..2^-b" or a comma list.
inline std::vector<double> parse_eps(const std::string& s)
{
    if (const auto dots = s.find(".."); dots != std::string::npos) {
        auto exponent = [&](const std::string& t) {
            if (t.rfind("2^-", 0) != 0)
                throw ConfigError("epsilon range must read 2^-a..2^-b, got '" + s + "'");
            return static_cast<int>(io::parse_double(t.substr(3)));
        };
        return dyadic_eps(exponent(s.substr(0, dots)), exponent(s.substr(dots + 2)));
    }
    std::vector<double> out;
    for (const std::string& t : split(s, ','))
        out.push_back(t.rfind("2^", 0) == 0 ? std::exp2(parse_number(t.substr(2))) : parse_number(t));
    return out;
}

inline std::string option_arg(const std::string& text, const std::string& kind)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos || text.substr(0, colon) != kind)
        return {};
    return text.substr(colon + 1);
}

inline Weight parse_weight(const std::string& text, int n)
{
    if (text == "const")
        return Weight::constant(n);
    if (auto a = option_arg(text, "power"); !a.empty())
        return Weight::power(parse_number(a), n);
    if (auto path = option_arg(text, "grid"); !path.empty())
        return Weight::grid(io::load(path));
    throw ConfigError("weight text '" + text + "' is not power:<a>, const or grid:<path>");
}

inline GridFunction parse_function(const std::string& text, const Lattice& lat)
{
    if (text == "const")
        return GridFunction::constant(lat, 1.0);
    if (auto b = option_arg(text, "power"); !b.empty())
        return GridFunction::from_profile(lat, PowerProfile{1.0, parse_number(b), Ball{1.0}});
    if (auto r = option_arg(text, "indicator"); !r.empty()) {
        const auto ends = split(r, ':');
        if (ends.size() != 2)
            throw ConfigError("indicator text is indicator:<lo>:<hi>");
        return GridFunction::indicator(lat, AxisBox::cube(lat.dim(), parse_number(ends[0]), parse_number(ends[1])));
    }
    if (auto path = option_arg(text, "grid"); !path.empty()) {
        GridFunction g = io::load(path);
        if (g.lattice().dim() != lat.dim() || g.lattice().level() != lat.level())
            throw ConfigError("grid file " + path + " does not match n and L");
        return g;
    }
    throw ConfigError("function text '" + text + "' is not power:<b>, indicator:<lo>:<hi>, const or grid:<path>");
}

// accepts "a,b" or ["a","b"] or [1,2]
inline std::string joined(const json& v)
{
    if (!v.is_array())
        return v.is_string() ? v.get<std::string>() : v.dump();
    std::string s;
    for (const json& x : v) {
        if (!s.empty())
            s += ',';
        s += x.is_string() ? x.get<std::string>() : x.dump();
    }
    return s;
}

/// Keys of the config file override the corresponding flags.
inline void apply_config(RunConfig& rc)
{
    std::ifstream in(rc.config);
    if (!in)
        throw ConfigError("cannot open config " + rc.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + rc.config + ": " + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "p") rc.p = joined(v);
            else if (key == "m") rc.m = v.get<int>();
            else if (key == "w") rc.w = split(joined(v), ',');
            else if (key == "f") rc.f = split(joined(v), ',');
            else if (key == "n") rc.n = v.get<int>();
            else if (key == "L") rc.L = v.get<int>();
            else if (key == "eps") rc.eps = joined(v);
            else if (key == "a") rc.a = v.get<double>();
            else if (key == "g_min") rc.g_min = v.get<int>();
            else if (key == "T") rc.T = v.get<int>();
            else if (key == "variant") rc.variant = v.get<std::string>();
            else if (key == "trials") rc.trials = v.get<int>();
            else if (key == "seed") rc.seed = v.get<std::uint64_t>();
            else if (key == "unit_weights") rc.unit_weights = v.get<bool>();
            else if (key == "out") rc.out = v.get<std::string>();
            else if (key == "binary") rc.binary = v.get<bool>();
            else if (key == "timing") rc.timing = v.get<bool>();
            else if (key == "threads") rc.threads = v.get<int>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError("config " + rc.config + ": " + e.what());
    }
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text))
        throw ConfigError("cannot write " + path);
}

inline void emit(const RunConfig& rc, const json& j)
{
    std::cout << j.dump(2) << '\n';
    if (!rc.out.empty())
        write_file(rc.out + ".json", j.dump(2) + '\n');
}

inline int slot_count(const RunConfig& rc, std::size_t listed)
{
    const int m = rc.m > 0 ? rc.m : (listed > 0 ? static_cast<int>(listed) : 2);
    if (listed > 0 && static_cast<int>(listed) != m)
        throw ConfigError(std::to_string(listed) + " entries given for m=" + std::to_string(m));
    return m;
}

inline std::vector<GridFunction> input_functions(const RunConfig& rc, const Lattice& lat)
{
    const int m = slot_count(rc, rc.f.size());
    std::vector<GridFunction> fs;
    for (int i = 0; i < m; ++i)
        fs.push_back(parse_function(rc.f.empty() ? "power:0" : rc.f[static_cast<std::size_t>(i)], lat));
    return fs;
}

inline void run_apconst(const RunConfig& rc)
{
    const ExponentTuple P = ExponentTuple::parse(rc.p);
    if (rc.m > 0 && rc.m != P.m())
        throw ConfigError("--m " + std::to_string(rc.m) + " but p has " + std::to_string(P.m()) + " entries");
    if (!rc.w.empty() && static_cast<int>(rc.w.size()) != P.m())
        throw ConfigError(std::to_string(rc.w.size()) + " weights given for m=" + std::to_string(P.m()));
    std::vector<Weight> w;
    std::optional<Lattice> lat;
    for (int i = 0; i < P.m(); ++i) {
        w.push_back(rc.w.empty() ? Weight::constant(rc.n) : parse_weight(rc.w[static_cast<std::size_t>(i)], rc.n));
        if (!w.back().is_power())
            lat = w.back().values().lattice(); // grid weights fix the lattice
    }
    const WeightVector wv(std::move(w), P);
    const CubeFamily fam = CubeFamily::dyadic(lat ? *lat : Lattice::centered(rc.n, rc.level()), rc.g_min);
    json j = ap_constant(wv, fam).json();
    j["p"] = P.str();
    emit(rc, j);
}

inline void run_maximal(const RunConfig& rc)
{
    const Lattice lat = Lattice::centered(rc.n, rc.level());
    const std::vector<GridFunction> fs = input_functions(rc, lat);
    const MaximalBracket b = multilinear_maximal(fs);
    double lo = 0.0, hi = 0.0, spread = 1.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        lo = std::max(lo, b.lower[i]);
        hi = std::max(hi, b.upper[i]);
        if (b.lower[i] > 0.0)
            spread = std::max(spread, b.upper[i] / b.lower[i]);
    }
    json j = {{"n", rc.n}, {"L", lat.level()}, {"m", fs.size()}, {"lower_max", lo}, {"upper_max", hi}, {"max_upper_over_lower", spread}};
    if (!rc.out.empty()) {
        const std::string ext = rc.binary ? ".bin" : ".csv";
        io::save(rc.out + ".lower" + ext, b.lower);
        io::save(rc.out + ".upper" + ext, b.upper);
        j["files"] = {rc.out + ".lower" + ext, rc.out + ".upper" + ext};
    }
    emit(rc, j);
}

inline void run_sparse(const RunConfig& rc)
{
    const Lattice lat = Lattice::centered(rc.n, rc.level());
    const std::vector<GridFunction> fs = input_functions(rc, lat);
    const int m = static_cast<int>(fs.size());
    const double a = rc.a > 0.0 ? rc.a : std::ldexp(1.0, m * rc.n + 2);
    const GridId grid{(1u << rc.n) - 1, lat.level()};
    const auto root = covering_cube(lat, grid);
    if (!root)
        throw ConfigError("no cube of the shifted grid covers the box");
    const SparseFamily S = build_sparse_family(fs, grid, a, *root);
    emit(rc, S.json());
}

inline void run_sweep_command(const RunConfig& rc, SweepOperator op)
{
    SweepConfig cfg;
    cfg.op = op;
    cfg.P = ExponentTuple::parse(rc.p);
    cfg.n = rc.n;
    cfg.eps = parse_eps(rc.eps);
    cfg.L = op == SweepOperator::maximal ? rc.level() : (rc.L >= 0 ? rc.L : 9);
    cfg.shell_exponent = rc.T;
    cfg.family_g_min = rc.g_min;
    cfg.timing = rc.timing;
    if (op != SweepOperator::maximal && rc.n != 1)
        throw ConfigError("the Riesz sweep is one-dimensional");
    for (double e : cfg.eps)
        build_extremal(cfg, e); // reject before any work

    const std::vector<SweepRow> rows = run_sweep(cfg);
    const std::string prefix = rc.out.empty() ? (op == SweepOperator::maximal ? "mw-sweep" : "riesz-sweep") : rc.out;
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_file(prefix + ".csv", csv.str());

    const Extremal e0 = build_extremal(cfg, cfg.eps.front());
    const double expected = op == SweepOperator::maximal ? cfg.P.maximal_exponent() : cfg.P.sparse_exponent();
    json j = {{"operator", operator_name(op)}, {"p", cfg.P.str()}, {"n", cfg.n}, {"L", cfg.L},
              {"rows", rows.size()}, {"expected_slope", expected}, {"csv", prefix + ".csv"}};
    int flagged = 0;
    for (const SweepRow& r : rows)
        flagged += r.flagged;
    j["flagged_rows"] = flagged;
    std::optional<FitResult> fit;
    try {
        fit = fit_exponent(rows);
        j["fit"] = fit->json();
        const FitResult g = fit_ap_growth(rows);
        j["ap_growth"] = g.json();
        if (op == SweepOperator::maximal)
            j["expected_ap_growth"] = e0.P.p() / e0.P.conj(0);
    } catch (const ConfigError& err) {
        j["fit"] = nullptr;
        j["fit_error"] = err.what();
    }
    write_file(prefix + ".fit.json", j.dump(2) + '\n');
    if (fit) {
        std::ostringstream gp;
        write_gnuplot(gp, prefix + ".csv", *fit, std::string(operator_name(op)) + " P=(" + cfg.P.str() + ")");
        write_file(prefix + ".gp", gp.str());
    }
    std::cout << j.dump(2) << '\n';
}

inline void run_audit(const RunConfig& rc)
{
    AuditConfig cfg;
    cfg.P = ExponentTuple::parse(rc.p);
    cfg.n = rc.n;
    cfg.L = rc.L >= 0 ? rc.L : (rc.n == 1 ? 8 : 5);
    cfg.trials = rc.trials;
    cfg.seed = rc.seed;
    cfg.ratio = rc.a;
    cfg.family_g_min = rc.g_min;
    cfg.unit_weights = rc.unit_weights;
    emit(rc, upper_bound_audit(cfg).json());
}

inline int main(int argc, char** argv)
{
    RunConfig rc;
    CLI::App app{"Multilinear weight experiments"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    auto common = [&](CLI::App* sub) {
        sub->add_option("--n", rc.n, "dimension (1 or 2)")->check(CLI::Range(1, 2));
        sub->add_option("--L", rc.L, "resolution level, cell side 2^-L");
        sub->add_option("--out", rc.out, "output path prefix");
        sub->add_option("--config", rc.config, "JSON file whose keys override flags");
        sub->add_option("--threads", rc.threads, "worker cap (overrides MWEIGHTS_THREADS)");
    };

    auto* apconst = app.add_subcommand("apconst", "multilinear A_P constant of a weight vector");
    common(apconst);
    apconst->add_option("--p", rc.p, "exponents, e.g. 4,4/3");
    apconst->add_option("--m", rc.m, "number of slots");
    apconst->add_option("--w", rc.w, "weights: power:<a>, const or grid:<path>")->delimiter(',');
    apconst->add_option("--g-min", rc.g_min, "coarsest cube generation");

    auto* maximal = app.add_subcommand("maximal", "lower/upper bracket of the multilinear maximal function");
    common(maximal);
    maximal->add_option("--m", rc.m, "number of slots");
    maximal->add_option("--f", rc.f, "inputs: power:<b>, indicator:<lo>:<hi>, const or grid:<path>")->delimiter(',');
    maximal->add_flag("--binary", rc.binary, "write .bin grids instead of CSV");

    auto* sparse = app.add_subcommand("sparse", "sparse family by level-set stopping");
    common(sparse);
    sparse->add_option("--m", rc.m, "number of slots");
    sparse->add_option("--f", rc.f, "inputs, as for maximal")->delimiter(',');
    sparse->add_option("--a", rc.a, "stopping ratio, default 2^{mn+2}");

    auto* mw = app.add_subcommand("mw-sweep", "sharpness sweep for the multilinear maximal function");
    auto* rz = app.add_subcommand("riesz-sweep", "sharpness sweep for the bilinear Riesz transform");
    for (auto* sub : {mw, rz}) {
        common(sub);
        sub->add_option("--p", rc.p, "exponents");
        sub->add_option("--eps", rc.eps, "2^-a..2^-b or a comma list");
        sub->add_option("--g-min", rc.g_min, "coarsest generation of the A_P family");
        sub->add_option("--T", rc.T, "shell radius 2^T cells for the tail");
        sub->add_flag("--timing", rc.timing, "fill the ms column (breaks byte identity)");
    }
    rz->add_option("--variant", rc.variant, "direct or adjoint")->check(CLI::IsMember({"direct", "adjoint"}));

    auto* audit = app.add_subcommand("audit", "upper-bound audit on random weights");
    common(audit);
    audit->add_option("--p", rc.p, "exponents");
    audit->add_option("--trials", rc.trials, "number of trials");
    audit->add_option("--seed", rc.seed, "random seed");
    audit->add_option("--a", rc.a, "stopping ratio, default 2^{mn+2}");
    audit->add_option("--g-min", rc.g_min, "coarsest generation of the A_P family");
    audit->add_flag("--unit-weights", rc.unit_weights, "use w_i = 1 in every trial");

    app.add_subcommand("selftest", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    rc.command = sub->get_name();
    try {
        if (!rc.config.empty())
            apply_config(rc);
        if (rc.n < 1 || rc.n > 2)
            throw ConfigError("n must be 1 or 2");
        if (rc.variant != "direct" && rc.variant != "adjoint")
            throw ConfigError("variant must be direct or adjoint");
        if (rc.threads > 0)
            set_thread_cap(rc.threads);

        if (rc.command == "apconst")
            run_apconst(rc);
        else if (rc.command == "maximal")
            run_maximal(rc);
        else if (rc.command == "sparse")
            run_sparse(rc);
        else if (rc.command == "mw-sweep")
            run_sweep_command(rc, SweepOperator::maximal);
        else if (rc.command == "riesz-sweep")
            run_sweep_command(rc, rc.variant == "adjoint" ? SweepOperator::riesz_adjoint : SweepOperator::riesz_direct);
        else if (rc.command == "audit")
            run_audit(rc);
        else if (rc.command == "selftest")
            return selftest(std::cout) == 0 ? 0 : 3;
        return 0;
    } catch (const InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace mweights::cli
