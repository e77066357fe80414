#ifndef WASHBOARD_SWEEP_HPP
#define WASHBOARD_SWEEP_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "washboard/asymptotics.hpp"
#include "washboard/fpe.hpp"
#include "washboard/sde.hpp"
#include "washboard/transport.hpp"

namespace washboard {

struct EngineSelection {
    bool formula = false;
    bool small_f = false;
    bool large_f = false;
    bool sde = false;
    bool fpe = false;

    int count() const {
        return static_cast<int>(formula) + static_cast<int>(small_f) +
               static_cast<int>(large_f) + static_cast<int>(sde) + static_cast<int>(fpe);
    }
};

/// Parse "formula,small_f,large_f,sde,fpe" (any subset).
EngineSelection parse_engines(const std::string& csv);

/// Force list: "0.5,1,2" | linear range "a:b:n" | log range "loga:b:n".
std::vector<double> parse_forces(const std::string& text);

enum class TableFormat { Csv, Jsonl };

struct SweepSpec {
    nlohmann::json potential;  ///< potential spec (see PeriodicPotential::from_json)
    std::vector<double> forces;
    EngineSelection engines;
    std::string out_path;  ///< empty: stdout
    TableFormat format = TableFormat::Csv;
    std::uint64_t seed = 0;
    QuadratureConfig quad;
    SdeConfig sde;
    FpeConfig fpe;
    int threads = 0;  ///< row-level parallelism; 0: hardware concurrency

    void validate() const;
    static SweepSpec from_json(const nlohmann::json& j);  ///< config-file form
};

struct SweepRow {
    double f = 0.0;
    std::optional<double> V_formula, Deff_formula, zeta_formula, einstein_formula;
    std::optional<double> V_smallf, Deff_smallf;
    std::optional<double> V_largef, Deff_largef;
    std::optional<double> V_sde, V_sde_ci, Deff_sde, Deff_sde_ci;
    std::optional<double> V_fpe, Deff_fpe;
    std::optional<int> quad_n;
    std::optional<double> quad_relerr;
};

struct EngineFailure {
    std::size_t row = 0;  ///< row index; npos for engine-level failures
    std::string engine;
    std::string message;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<EngineFailure> failures;
    std::map<std::string, double> engine_seconds;

    bool ok() const { return failures.empty(); }
};

/// Run the selected engines for every force value. Rows run in parallel;
/// output order and all numbers are independent of the schedule (the SDE
/// engine for row k uses seed spec.seed + k).
SweepResult run_sweep(const SweepSpec& spec);

/// Fixed-schema table output. CSV columns:
/// f,V_formula,Deff_formula,zeta_formula,einstein_formula,V_smallf,
/// Deff_smallf,V_largef,Deff_largef,V_sde,V_sde_ci,Deff_sde,Deff_sde_ci,
/// V_fpe,Deff_fpe,quad_n,quad_relerr  (absent engines leave empty fields).
void write_table(std::ostream& os, const SweepResult& result, TableFormat fmt);

/// Machine-readable run summary: engine timings and failures.
nlohmann::json sweep_summary(const SweepSpec& spec, const SweepResult& result);

struct ValidationConfig {
    double small_f_max = 0.1;  ///< small-f expansion considered in-regime below this
    double large_f_min = 20.0; ///< large-f expansion considered in-regime above this
    double fpe_v_rel = 0.01;
    double fpe_d_rel = 0.02;
    double expansion_rel = 0.01;
    double zero_force_v_abs = 1e-3;  ///< absolute V tolerance when V_formula == 0
};

/// Cross-engine deltas with pass/fail/out_of_regime status per check.
/// Requires at least two engines in the spec.
nlohmann::json report_validation(const SweepSpec& spec, const ValidationConfig& vcfg = {});

/// Minimum-of-D_eff scan, JSON form used by the CLI.
nlohmann::json run_min_scan(const nlohmann::json& potential_spec, double f_lo, double f_hi,
                            const QuadratureConfig& quad);

} // namespace washboard

#endif
