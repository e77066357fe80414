// Command-line front end: sweep forces over a periodic potential, compare
// the quadrature formulas against the asymptotic expansions and the two
// numerical oracles, and emit CSV/JSONL tables.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "washboard/sweep.hpp"

namespace {

nlohmann::json load_potential_arg(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg.front() != '{') {
        std::ifstream in(arg);
        if (!in) throw washboard::DomainError("cannot open potential file " + arg);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw washboard::DomainError("potential spec is not valid JSON");
    return j;
}

struct CommonOpts {
    std::string potential;
    std::string forces;
    std::string engines = "formula";
    std::string out;
    std::string format = "csv";
    std::string config;
    std::uint64_t seed = 0;
    int quad_n = 0;
    double quad_tol = 0.0;
    double sde_dt = 0.0;
    double sde_tfinal = 0.0;
    int sde_paths = 0;
    int fpe_n = 0;
    double fpe_tfinal = 0.0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--potential", o.potential, "potential spec: inline JSON or a file path");
    cmd->add_option("--forces", o.forces, "force values: list v1,v2,... or range a:b:n or loga:b:n");
    cmd->add_option("--engines", o.engines, "subset of formula,small_f,large_f,sde,fpe");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_option("--format", o.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_option("--config", o.config, "JSON config file; flags override its keys");
    cmd->add_option("--seed", o.seed, "RNG seed for the sde engine");
    cmd->add_option("--quad-n", o.quad_n, "quadrature base grid (power of two)");
    cmd->add_option("--quad-tol", o.quad_tol, "quadrature refinement tolerance");
    cmd->add_option("--sde-dt", o.sde_dt, "Euler-Maruyama time step");
    cmd->add_option("--sde-tfinal", o.sde_tfinal, "SDE horizon");
    cmd->add_option("--sde-paths", o.sde_paths, "SDE ensemble size");
    cmd->add_option("--fpe-n", o.fpe_n, "FPE grid cells");
    cmd->add_option("--fpe-tfinal", o.fpe_tfinal, "FPE horizon");
    cmd->add_option("--threads", o.threads, "row-level parallelism (0: hardware)");
}

washboard::SweepSpec build_spec(const CommonOpts& o) {
    washboard::SweepSpec spec;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw washboard::DomainError("cannot open config file " + o.config);
        nlohmann::json j;
        in >> j;
        spec = washboard::SweepSpec::from_json(j);
    }
    if (!o.potential.empty()) spec.potential = load_potential_arg(o.potential);
    if (!o.forces.empty()) spec.forces = washboard::parse_forces(o.forces);
    if (!o.engines.empty()) spec.engines = washboard::parse_engines(o.engines);
    if (!o.out.empty()) spec.out_path = o.out;
    spec.format = (o.format == "jsonl") ? washboard::TableFormat::Jsonl
                                        : washboard::TableFormat::Csv;
    spec.seed = o.seed;
    if (o.quad_n > 0) spec.quad.n_grid = o.quad_n;
    if (o.quad_tol > 0.0) spec.quad.rel_tol = o.quad_tol;
    if (o.sde_dt > 0.0) spec.sde.dt = o.sde_dt;
    if (o.sde_tfinal > 0.0) spec.sde.t_final = o.sde_tfinal;
    if (o.sde_paths > 0) spec.sde.n_paths = o.sde_paths;
    if (o.fpe_n > 0) spec.fpe.n = o.fpe_n;
    if (o.fpe_tfinal > 0.0) spec.fpe.t_final = o.fpe_tfinal;
    spec.threads = o.threads;
    if (spec.potential.is_null())
        throw washboard::DomainError("no potential given (use --potential or --config)");
    if (spec.forces.empty()) throw washboard::DomainError("no forces given (use --forces)");
    return spec;
}

int write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return 0;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        return 1;
    }
    out << content;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transport coefficients of a driven Brownian particle on a periodic potential"};
    app.require_subcommand(1);

    CommonOpts sweep_opts, val_opts, min_opts;
    std::string min_bracket = "-2:2";

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run engines over a force list and write a table");
    add_common(sweep_cmd, sweep_opts);

    CLI::App* val_cmd =
        app.add_subcommand("validate", "cross-engine deltas with pass/fail classification");
    add_common(val_cmd, val_opts);

    CLI::App* min_cmd = app.add_subcommand("minscan", "locate the minimum of D_eff(f)");
    add_common(min_cmd, min_opts);
    min_cmd->add_option("--min-scan", min_bracket, "force bracket lo:hi (default -2:2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sweep_cmd->parsed()) {
            const washboard::SweepSpec spec = build_spec(sweep_opts);
            const washboard::SweepResult result = washboard::run_sweep(spec);
            std::ostringstream table;
            washboard::write_table(table, result, spec.format);
            if (write_output(spec.out_path, table.str()) != 0) return 1;
            const nlohmann::json summary = washboard::sweep_summary(spec, result);
            // keep stdout byte-clean for tables written there
            (spec.out_path.empty() ? std::cerr : std::cout) << summary.dump(2) << "\n";
            return result.ok() ? 0 : 1;
        }
        if (val_cmd->parsed()) {
            const washboard::SweepSpec spec = build_spec(val_opts);
            const nlohmann::json report = washboard::report_validation(spec);
            if (write_output(spec.out_path, report.dump(2) + "\n") != 0) return 1;
            return report.at("overall_pass").get<bool>() ? 0 : 1;
        }
        if (min_cmd->parsed()) {
            double lo = 0.0, hi = 0.0;
            if (std::sscanf(min_bracket.c_str(), "%lf:%lf", &lo, &hi) != 2)
                throw washboard::DomainError("bad --min-scan bracket (want lo:hi)");
            washboard::SweepSpec spec;
            spec.quad.n_grid = min_opts.quad_n > 0 ? min_opts.quad_n : spec.quad.n_grid;
            if (min_opts.quad_tol > 0.0) spec.quad.rel_tol = min_opts.quad_tol;
            if (min_opts.potential.empty())
                throw washboard::DomainError("minscan needs --potential");
            const nlohmann::json j = washboard::run_min_scan(
                load_potential_arg(min_opts.potential), lo, hi, spec.quad);
            if (write_output(min_opts.out, j.dump(2) + "\n") != 0) return 1;
            return 0;
        }
    } catch (const washboard::DomainError& e) {
        nlohmann::json err;
        err["error"] = e.what();
        err["kind"] = "usage";
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const washboard::Error& e) {
        nlohmann::json err;
        err["error"] = e.what();
        err["kind"] = "engine";
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 2;
}
