#include "washboard/sweep.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

namespace washboard {

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

EngineSelection parse_engines(const std::string& csv) {
    EngineSelection sel;
    for (const auto& name : split_csv(csv)) {
        if (name.empty()) continue;
        if (name == "formula") sel.formula = true;
        else if (name == "small_f") sel.small_f = true;
        else if (name == "large_f") sel.large_f = true;
        else if (name == "sde") sel.sde = true;
        else if (name == "fpe") sel.fpe = true;
        else throw DomainError("unknown engine \"" + name + "\"");
    }
    return sel;
}

std::vector<double> parse_forces(const std::string& text) {
    std::vector<double> out;
    const bool log_range = text.rfind("log", 0) == 0;
    const std::string body = log_range ? text.substr(3) : text;
    const auto colons = std::count(body.begin(), body.end(), ':');
    if (colons == 2) {
        double a, b;
        int n;
        if (std::sscanf(body.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 || n < 1)
            throw DomainError("bad force range \"" + text + "\" (want a:b:n)");
        if (n == 1) {
            out.push_back(a);
            return out;
        }
        if (log_range) {
            if (!(a > 0.0 && b > 0.0))
                throw DomainError("log force range needs positive endpoints");
            const double la = std::log(a), lb = std::log(b);
            for (int i = 0; i < n; ++i)
                out.push_back(std::exp(la + (lb - la) * i / (n - 1)));
        } else {
            for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
        }
        return out;
    }
    if (log_range) throw DomainError("log force spec needs the form loga:b:n");
    for (const auto& tok : split_csv(text)) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw DomainError("bad force value \"" + tok + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw DomainError("empty force list");
    return out;
}

void SweepSpec::validate() const {
    if (engines.count() < 1) throw DomainError("SweepSpec: select at least one engine");
    if (forces.empty()) throw DomainError("SweepSpec: force list is empty");
    quad.validate();
    if (engines.sde) sde.validate();
    if (engines.fpe) fpe.validate();
    PeriodicPotential::from_json(potential);  // throws on a bad spec
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
    SweepSpec spec;
    if (j.contains("potential")) spec.potential = j.at("potential");
    if (j.contains("forces")) {
        if (j.at("forces").is_string())
            spec.forces = parse_forces(j.at("forces").get<std::string>());
        else
            spec.forces = j.at("forces").get<std::vector<double>>();
    }
    if (j.contains("engines")) spec.engines = parse_engines(j.at("engines").get<std::string>());
    if (j.contains("out")) spec.out_path = j.at("out").get<std::string>();
    if (j.contains("format")) {
        const auto f = j.at("format").get<std::string>();
        if (f == "csv") spec.format = TableFormat::Csv;
        else if (f == "jsonl") spec.format = TableFormat::Jsonl;
        else throw DomainError("format must be csv or jsonl");
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("quad_n")) spec.quad.n_grid = j.at("quad_n").get<int>();
    if (j.contains("quad_tol")) spec.quad.rel_tol = j.at("quad_tol").get<double>();
    if (j.contains("sde_dt")) spec.sde.dt = j.at("sde_dt").get<double>();
    if (j.contains("sde_tfinal")) spec.sde.t_final = j.at("sde_tfinal").get<double>();
    if (j.contains("sde_paths")) spec.sde.n_paths = j.at("sde_paths").get<int>();
    if (j.contains("fpe_n")) spec.fpe.n = j.at("fpe_n").get<int>();
    if (j.contains("fpe_tfinal")) spec.fpe.t_final = j.at("fpe_tfinal").get<double>();
    if (j.contains("threads")) spec.threads = j.at("threads").get<int>();
    return spec;
}

namespace {

struct RowWork {
    SweepRow row;
    std::vector<EngineFailure> failures;
    std::map<std::string, double> seconds;
};

class StopWatch {
public:
    explicit StopWatch(double& sink) : sink_(sink), t0_(std::chrono::steady_clock::now()) {}
    ~StopWatch() {
        sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    double& sink_;
    std::chrono::steady_clock::time_point t0_;
};

RowWork run_row(const SweepSpec& spec, const PeriodicPotential& phi,
                const SmallForceCoefficients* coeffs, const double* grad_sq, std::size_t k) {
    RowWork w;
    const double f = spec.forces[k];
    w.row.f = f;
    const DimensionlessSystem sys{phi, f};

    if (spec.engines.formula) {
        StopWatch sw(w.seconds["formula"]);
        try {
            const TransportCoefficients tc = compute_diffusion(sys, spec.quad);
            w.row.V_formula = tc.V;
            w.row.Deff_formula = tc.D_eff;
            w.row.zeta_formula = tc.zeta_eff;
            w.row.einstein_formula = tc.zeta_eff * tc.D_eff;
            w.row.quad_n = tc.quadrature_n;
            w.row.quad_relerr = tc.achieved_rel_err;
        } catch (const Error& e) {
            w.failures.push_back({k, "formula", e.what()});
        }
    }
    if (spec.engines.small_f && coeffs) {
        StopWatch sw(w.seconds["small_f"]);
        const ExpansionResult r = small_f_expansion(*coeffs, f);
        w.row.V_smallf = r.V;
        w.row.Deff_smallf = r.D_eff;
    }
    if (spec.engines.large_f && grad_sq) {
        StopWatch sw(w.seconds["large_f"]);
        if (f > 0.0) {
            const double g = *grad_sq;
            w.row.V_largef = f * (1.0 - g / (f * f));
            w.row.Deff_largef = 1.0 + 3.0 * g / (f * f);
        } else {
            w.failures.push_back({k, "large_f", "large-f expansion needs f > 0"});
        }
    }
    if (spec.engines.sde) {
        StopWatch sw(w.seconds["sde"]);
        try {
            SdeConfig scfg = spec.sde;
            scfg.seed = spec.seed + k;
            scfg.n_threads = 1;  // rows are already parallel
            const SdeEstimate est = simulate_ensemble(sys, scfg);
            w.row.V_sde = est.V_hat;
            w.row.V_sde_ci = est.V_ci;
            w.row.Deff_sde = est.Deff_hat;
            w.row.Deff_sde_ci = est.Deff_ci;
        } catch (const Error& e) {
            w.failures.push_back({k, "sde", e.what()});
        }
    }
    if (spec.engines.fpe) {
        StopWatch sw(w.seconds["fpe"]);
        try {
            const FpeTransport ft = run_moment_hierarchy(sys, spec.fpe);
            w.row.V_fpe = ft.estimate.V_fpe;
            w.row.Deff_fpe = ft.estimate.Deff_fpe;
        } catch (const Error& e) {
            w.failures.push_back({k, "fpe", e.what()});
        }
    }
    return w;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const PeriodicPotential phi = PeriodicPotential::from_json(spec.potential);

    SweepResult result;
    result.rows.resize(spec.forces.size());

    // per-potential engine prerequisites
    std::optional<SmallForceCoefficients> coeffs;
    std::optional<double> grad_sq;
    if (spec.engines.small_f) {
        StopWatch sw(result.engine_seconds["small_f"]);
        try {
            coeffs = small_f_coefficients(phi, spec.quad);
        } catch (const Error& e) {
            result.failures.push_back({EngineFailure::npos, "small_f", e.what()});
        }
    }
    if (spec.engines.large_f) {
        StopWatch sw(result.engine_seconds["large_f"]);
        try {
            grad_sq = grad_squared_integral(phi);
        } catch (const Error& e) {
            result.failures.push_back({EngineFailure::npos, "large_f", e.what()});
        }
    }

    const std::size_t n_rows = spec.forces.size();
    std::vector<RowWork> work(n_rows);
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int n_threads =
        std::max(1, std::min<int>(spec.threads > 0 ? spec.threads : std::max(1, hw),
                                  static_cast<int>(n_rows)));
    if (n_threads <= 1) {
        for (std::size_t k = 0; k < n_rows; ++k)
            work[k] = run_row(spec, phi, coeffs ? &*coeffs : nullptr,
                              grad_sq ? &*grad_sq : nullptr, k);
    } else {
        std::vector<std::thread> pool;
        std::mutex next_mutex;
        std::size_t next = 0;
        for (int c = 0; c < n_threads; ++c) {
            pool.emplace_back([&]() {
                for (;;) {
                    std::size_t k;
                    {
                        std::lock_guard<std::mutex> lock(next_mutex);
                        if (next >= n_rows) return;
                        k = next++;
                    }
                    work[k] = run_row(spec, phi, coeffs ? &*coeffs : nullptr,
                                      grad_sq ? &*grad_sq : nullptr, k);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // merge in input order so the output is schedule-independent
    for (std::size_t k = 0; k < n_rows; ++k) {
        result.rows[k] = work[k].row;
        for (const auto& fail : work[k].failures) result.failures.push_back(fail);
        for (const auto& [name, sec] : work[k].seconds) result.engine_seconds[name] += sec;
    }
    return result;
}

void write_table(std::ostream& os, const SweepResult& result, TableFormat fmt) {
    static const char* kColumns[] = {
        "f",         "V_formula", "Deff_formula", "zeta_formula", "einstein_formula",
        "V_smallf",  "Deff_smallf", "V_largef",   "Deff_largef",  "V_sde",
        "V_sde_ci",  "Deff_sde",  "Deff_sde_ci",  "V_fpe",        "Deff_fpe",
        "quad_n",    "quad_relerr"};
    auto fields = [](const SweepRow& r) {
        auto opt = [](const std::optional<double>& v) -> std::string {
            return v ? fmt_double(*v) : std::string();
        };
        std::vector<std::string> out;
        out.push_back(fmt_double(r.f));
        out.push_back(opt(r.V_formula));
        out.push_back(opt(r.Deff_formula));
        out.push_back(opt(r.zeta_formula));
        out.push_back(opt(r.einstein_formula));
        out.push_back(opt(r.V_smallf));
        out.push_back(opt(r.Deff_smallf));
        out.push_back(opt(r.V_largef));
        out.push_back(opt(r.Deff_largef));
        out.push_back(opt(r.V_sde));
        out.push_back(opt(r.V_sde_ci));
        out.push_back(opt(r.Deff_sde));
        out.push_back(opt(r.Deff_sde_ci));
        out.push_back(opt(r.V_fpe));
        out.push_back(opt(r.Deff_fpe));
        out.push_back(r.quad_n ? std::to_string(*r.quad_n) : std::string());
        out.push_back(opt(r.quad_relerr));
        return out;
    };
    if (fmt == TableFormat::Csv) {
        for (std::size_t c = 0; c < std::size(kColumns); ++c)
            os << (c ? "," : "") << kColumns[c];
        os << '\n';
        for (const auto& row : result.rows) {
            const auto fs = fields(row);
            for (std::size_t c = 0; c < fs.size(); ++c) os << (c ? "," : "") << fs[c];
            os << '\n';
        }
    } else {
        for (const auto& row : result.rows) {
            nlohmann::json j;
            auto set = [&j](const char* key, const std::optional<double>& v) {
                if (v)
                    j[key] = *v;
                else
                    j[key] = nullptr;
            };
            j["f"] = row.f;
            set("V_formula", row.V_formula);
            set("Deff_formula", row.Deff_formula);
            set("zeta_formula", row.zeta_formula);
            set("einstein_formula", row.einstein_formula);
            set("V_smallf", row.V_smallf);
            set("Deff_smallf", row.Deff_smallf);
            set("V_largef", row.V_largef);
            set("Deff_largef", row.Deff_largef);
            set("V_sde", row.V_sde);
            set("V_sde_ci", row.V_sde_ci);
            set("Deff_sde", row.Deff_sde);
            set("Deff_sde_ci", row.Deff_sde_ci);
            set("V_fpe", row.V_fpe);
            set("Deff_fpe", row.Deff_fpe);
            if (row.quad_n)
                j["quad_n"] = *row.quad_n;
            else
                j["quad_n"] = nullptr;
            set("quad_relerr", row.quad_relerr);
            os << j.dump() << '\n';
        }
    }
}

nlohmann::json sweep_summary(const SweepSpec& spec, const SweepResult& result) {
    nlohmann::json j;
    j["rows"] = result.rows.size();
    j["seed"] = spec.seed;
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [name, sec] : result.engine_seconds) timings[name] = sec;
    j["engine_seconds"] = timings;
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& f : result.failures) {
        nlohmann::json e;
        if (f.row == EngineFailure::npos)
            e["row"] = nullptr;
        else
            e["row"] = f.row;
        e["engine"] = f.engine;
        e["error"] = f.message;
        fails.push_back(e);
    }
    j["failures"] = fails;
    j["ok"] = result.ok();
    return j;
}

nlohmann::json report_validation(const SweepSpec& spec, const ValidationConfig& vcfg) {
    if (spec.engines.count() < 2)
        throw DomainError("report_validation: select at least two engines");
    const SweepResult res = run_sweep(spec);

    auto rel_delta = [](double a, double ref) {
        return std::abs(a - ref) / std::max(std::abs(ref), 1e-300);
    };

    bool overall = true;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res.rows) {
        nlohmann::json checks = nlohmann::json::array();
        auto push = [&checks, &overall](const std::string& pair, const std::string& metric,
                                        double value, double threshold, bool in_regime,
                                        bool pass) {
            nlohmann::json c;
            c["pair"] = pair;
            c["metric"] = metric;
            c["value"] = value;
            c["threshold"] = threshold;
            c["status"] = !in_regime ? "out_of_regime" : (pass ? "pass" : "fail");
            if (in_regime && !pass) overall = false;
            checks.push_back(c);
        };
        if (r.V_formula && r.V_fpe) {
            if (*r.V_formula == 0.0) {
                const double d = std::abs(*r.V_fpe);
                push("formula_vs_fpe", "abs_dV", d, vcfg.zero_force_v_abs, true,
                     d <= vcfg.zero_force_v_abs);
            } else {
                const double d = rel_delta(*r.V_fpe, *r.V_formula);
                push("formula_vs_fpe", "rel_dV", d, vcfg.fpe_v_rel, true, d <= vcfg.fpe_v_rel);
            }
            const double dd = rel_delta(*r.Deff_fpe, *r.Deff_formula);
            push("formula_vs_fpe", "rel_dDeff", dd, vcfg.fpe_d_rel, true, dd <= vcfg.fpe_d_rel);
        }
        if (r.V_formula && r.V_sde) {
            const double dv = std::abs(*r.V_sde - *r.V_formula);
            push("formula_vs_sde", "V_ci_covers", dv, *r.V_sde_ci, true, dv <= *r.V_sde_ci);
            const double dd = std::abs(*r.Deff_sde - *r.Deff_formula);
            push("formula_vs_sde", "Deff_ci_covers", dd, *r.Deff_sde_ci, true,
                 dd <= *r.Deff_sde_ci);
        }
        if (r.Deff_formula && r.Deff_smallf) {
            const double d = rel_delta(*r.Deff_smallf, *r.Deff_formula);
            push("formula_vs_small_f", "rel_dDeff", d, vcfg.expansion_rel,
                 std::abs(r.f) <= vcfg.small_f_max, d <= vcfg.expansion_rel);
        }
        if (r.Deff_formula && r.Deff_largef) {
            const double d = rel_delta(*r.Deff_largef, *r.Deff_formula);
            push("formula_vs_large_f", "rel_dDeff", d, vcfg.expansion_rel,
                 r.f >= vcfg.large_f_min, d <= vcfg.expansion_rel);
        }
        nlohmann::json jr;
        jr["f"] = r.f;
        jr["checks"] = checks;
        rows.push_back(jr);
    }
    nlohmann::json out;
    out["rows"] = rows;
    out["failures"] = sweep_summary(spec, res)["failures"];
    out["overall_pass"] = overall && res.ok();
    return out;
}

nlohmann::json run_min_scan(const nlohmann::json& potential_spec, double f_lo, double f_hi,
                            const QuadratureConfig& quad) {
    const PeriodicPotential phi = PeriodicPotential::from_json(potential_spec);
    const MinDiffusionResult r = find_min_diffusion(phi, f_lo, f_hi, quad);
    nlohmann::json j;
    j["f_star"] = r.f_star;
    j["D_min"] = r.D_min;
    j["inv_a0"] = r.inv_a0;
    j["unimodal"] = r.unimodal;
    j["below_zero_force_value"] = r.D_min < r.inv_a0;
    return j;
}

} // namespace washboard
