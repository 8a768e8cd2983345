#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "qsk/serialize.hpp"
#include "qsk/vector_reduction.hpp"

namespace qsk {

// One CLI invocation's worth of work: which engine to run and with what
// parameters. Unused fields keep their defaults and are ignored by the
// command that does not read them, but every field is persisted so a stored
// spec replays without guessing.
struct ExperimentSpec {
    std::string command;  // ed | mc | reduce | parisi | optimize | trend | sweep | verify
    ModelParams params;
    int d = 1;
    int r = 1;                 // free path levels for parisi/optimize/trend
    long samples = 20000;      // paths for mc/reduce, sampling budget otherwise
    int disorder_samples = 1;
    std::uint64_t seed = 1;
    int threads = 0;           // 0: environment default, then hardware
    std::vector<int> d_list;        // trend
    std::vector<double> beta_grid;  // sweep
    std::vector<double> h_grid;     // sweep
    std::vector<int> n_grid;        // sweep
    std::string output_path;   // empty: nothing is written to disk
};

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds{"ed",       "mc",    "reduce", "parisi",
                                               "optimize", "trend", "sweep",  "verify"};
    return cmds;
}

namespace detail {

inline void check_model_params(const ModelParams& p) {
    try {
        validate(p);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("spec.params: ") + e.what());
    }
}

inline void check_fields_only(const ModelParams& p) {
    if (!std::isfinite(p.beta) || p.beta < 0.0)
        throw ValidationError("spec.params.beta: must be finite and >= 0");
    if (!std::isfinite(p.h) || p.h < 0.0)
        throw ValidationError("spec.params.h: must be finite and >= 0");
}

}  // namespace detail

// Rejects incomplete or inconsistent specs up front, naming the offending
// field, so no engine starts work on a bad request.
inline void validate_spec(const ExperimentSpec& s) {
    const auto& cmds = known_commands();
    if (std::find(cmds.begin(), cmds.end(), s.command) == cmds.end())
        throw ValidationError("spec.command: unknown command '" + s.command + "'");
    if (s.threads < 0) throw ValidationError("spec.threads: must be >= 0");

    const bool wants_disorder =
        s.command == "ed" || s.command == "mc" || s.command == "trend" || s.command == "sweep";
    if (wants_disorder && s.disorder_samples < 1)
        throw ValidationError("spec.disorder_samples: must be >= 1");

    if (s.command == "ed") {
        detail::check_model_params(s.params);
    } else if (s.command == "mc" || s.command == "reduce") {
        detail::check_model_params(s.params);
        if (s.samples < 100 || s.samples > 50000000)
            throw ValidationError("spec.samples: must lie in [100, 5e7]");
        if (s.command == "reduce" && (s.d < 1 || s.d > 256))
            throw ValidationError("spec.d: must lie in [1, 256]");
    } else if (s.command == "parisi" || s.command == "optimize") {
        detail::check_fields_only(s.params);
        if (s.d < 1 || s.d > 64) throw ValidationError("spec.d: must lie in [1, 64]");
        if (s.r < 0 || s.r > 8) throw ValidationError("spec.r: must lie in [0, 8]");
        const long lo = s.command == "parisi" ? 100 : 1000;
        if (s.samples < lo || s.samples > 50000000)
            throw ValidationError("spec.samples: must lie in [" + std::to_string(lo) + ", 5e7]");
    } else if (s.command == "trend") {
        detail::check_model_params(s.params);
        if (s.d_list.empty()) throw ValidationError("spec.d_list: must not be empty");
        for (std::size_t i = 0; i < s.d_list.size(); ++i) {
            if (s.d_list[i] < 1 || s.d_list[i] > 64)
                throw ValidationError("spec.d_list: entries must lie in [1, 64]");
            if (i > 0 && s.d_list[i] <= s.d_list[i - 1])
                throw ValidationError("spec.d_list: entries must be strictly increasing");
        }
        if (s.r < 0 || s.r > 8) throw ValidationError("spec.r: must lie in [0, 8]");
        if (s.samples < 1000 || s.samples > 50000000)
            throw ValidationError("spec.samples: must lie in [1000, 5e7]");
    } else if (s.command == "sweep") {
        if (s.beta_grid.empty()) throw ValidationError("spec.beta_grid: must not be empty");
        if (s.h_grid.empty()) throw ValidationError("spec.h_grid: must not be empty");
        if (s.n_grid.empty()) throw ValidationError("spec.n_grid: must not be empty");
        for (double b : s.beta_grid)
            if (!std::isfinite(b) || b < 0.0)
                throw ValidationError("spec.beta_grid: entries must be finite and >= 0");
        for (double h : s.h_grid)
            if (!std::isfinite(h) || h < 0.0)
                throw ValidationError("spec.h_grid: entries must be finite and >= 0");
        for (int n : s.n_grid) {
            ModelParams cell;
            cell.n = n;
            try {
                validate(cell);
            } catch (const ValidationError& e) {
                throw ValidationError(std::string("spec.n_grid: ") + e.what());
            }
        }
    }
}

inline ordered_json json_of(const ExperimentSpec& s) {
    ordered_json j;
    j["command"] = s.command;
    j["params"] = {{"n", s.params.n}, {"beta", s.params.beta}, {"h", s.params.h}};
    j["d"] = s.d;
    j["r"] = s.r;
    j["samples"] = s.samples;
    j["disorder_samples"] = s.disorder_samples;
    j["seed"] = s.seed;
    j["threads"] = s.threads;
    j["d_list"] = s.d_list;
    j["beta_grid"] = s.beta_grid;
    j["h_grid"] = s.h_grid;
    j["n_grid"] = s.n_grid;
    j["output_path"] = s.output_path;
    return j;
}

inline ExperimentSpec spec_from_json(const ordered_json& j) {
    ExperimentSpec s;
    s.command = j.at("command").get<std::string>();
    s.params.n = j.at("params").at("n").get<int>();
    s.params.beta = j.at("params").at("beta").get<double>();
    s.params.h = j.at("params").at("h").get<double>();
    s.d = j.at("d").get<int>();
    s.r = j.at("r").get<int>();
    s.samples = j.at("samples").get<long>();
    s.disorder_samples = j.at("disorder_samples").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.threads = j.at("threads").get<int>();
    s.d_list = j.at("d_list").get<std::vector<int>>();
    s.beta_grid = j.at("beta_grid").get<std::vector<double>>();
    s.h_grid = j.at("h_grid").get<std::vector<double>>();
    s.n_grid = j.at("n_grid").get<std::vector<int>>();
    s.output_path = j.at("output_path").get<std::string>();
    return s;
}

// A finished run: the ExperimentSpec that produced it, the engine payload,
// and the bookkeeping needed to replay it. Re-running it must reproduce
// `results` byte for byte; `wall_seconds` sits outside that contract.
struct RunRecord {
    ExperimentSpec spec;
    ordered_json results;
    double wall_seconds = 0.0;
    std::string version = k_version;
    ordered_json rng_accounting;
};

// Defined in qsk/acceptance.hpp; include that header in any translation unit
// that dispatches the verify command through run().
ordered_json acceptance_payload(std::uint64_t seed, int threads, std::ostream* progress);

namespace detail {

inline SolverConfig solver_config_of(const ExperimentSpec& s) {
    SolverConfig cfg;
    cfg.r_levels = s.r;
    cfg.seed = s.seed;
    cfg.threads = s.threads;
    cfg.final_budget = s.samples;
    cfg.mc_budget = std::clamp(s.samples / 10, 500L, 20000L);
    return cfg;
}

inline ordered_json json_of_config(const SolverConfig& c) {
    ordered_json j;
    j["r_levels"] = c.r_levels;
    j["lambda_box"] = c.lambda_box;
    j["max_iters"] = c.max_iters;
    j["tolerance"] = c.tolerance;
    j["mc_budget"] = c.mc_budget;
    j["final_budget"] = c.final_budget;
    j["dictionary_size"] = c.dictionary_size;
    j["outer_candidates"] = c.outer_candidates;
    j["m_rounds"] = c.m_rounds;
    return j;
}

inline SpinLaw harness_law(int d, double field_h, std::uint64_t seed) {
    if (d == 1) return field_h == 0.0 ? SpinLaw::two_point() : SpinLaw::projection_histogram(field_h);
    return SpinLaw::sample_set(d, field_h, 32, derive_seed(seed, stream::dictionary));
}

inline Eigen::MatrixXd law_second_moment(const SpinLaw& law) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(law.d(), law.d());
    for (Eigen::Index k = 0; k < law.points().cols(); ++k)
        m += std::exp(law.log_weights()[k]) * law.points().col(k) *
             law.points().col(k).transpose();
    return m;
}

inline ordered_json run_ed(const ExperimentSpec& s) {
    const auto q = quenched_free_energy(s.params, s.disorder_samples, s.seed, s.threads);
    ordered_json results = json_of(q);
    results["partial"] = q.n_succeeded < q.n_requested;
    return results;
}

inline ordered_json run_mc(const ExperimentSpec& s) {
    ordered_json draws = ordered_json::array();
    std::vector<double> values;
    std::vector<double> errs;
    int n_failed = 0;
    for (int i = 0; i < s.disorder_samples; ++i) {
        const std::uint64_t gseed = derive_seed(s.seed, stream::disorder, static_cast<std::uint64_t>(i));
        ordered_json row;
        row["draw"] = i;
        row["disorder_seed"] = gseed;
        try {
            const auto g = DisorderMatrix::sample(s.params.n, gseed);
            const auto est =
                mc_log_partition(s.params, g, static_cast<int>(s.samples),
                                 derive_seed(s.seed, stream::paths, static_cast<std::uint64_t>(i)),
                                 0, s.threads);
            row["estimate"] = json_of(est);
            values.push_back(est.value);
            errs.push_back(est.stderr_);
        } catch (const std::exception& e) {
            row["error"] = e.what();
            ++n_failed;
        }
        draws.push_back(std::move(row));
    }
    if (values.empty()) throw NumericalError("every disorder draw failed");
    double se;
    if (values.size() == 1) {
        se = errs[0];
    } else {
        // disorder spread plus propagated per-draw noise
        double mc2 = 0.0;
        for (double e : errs) mc2 += e * e;
        const double nd = static_cast<double>(values.size());
        se = std::sqrt(sample_variance(values) / nd + mc2 / (nd * nd));
    }
    ordered_json results;
    results["value"] = json_number(mean(values));
    results["stderr"] = json_number(se);
    results["n_draws"] = s.disorder_samples;
    results["n_failed"] = n_failed;
    results["draws"] = std::move(draws);
    results["partial"] = n_failed > 0;
    return results;
}

inline ordered_json run_reduce(const ExperimentSpec& s) {
    const auto g = DisorderMatrix::sample(s.params.n, derive_seed(s.seed, stream::disorder, 0));
    // all three estimates share the path stream, so the gaps below are
    // truncation effects, not resampling noise
    const auto full =
        mc_log_partition(s.params, g, static_cast<int>(s.samples), s.seed, 0, s.threads);
    const auto rpt = pushforward_identity_check(s.params, g, s.d, static_cast<int>(s.samples),
                                                s.seed, s.threads);
    ordered_json results;
    results["d"] = s.d;
    results["disorder_seed"] = g.seed();
    results["full"] = json_of(full);
    results["reduced_via_paths"] = json_of(rpt.via_paths);
    results["reduced_via_vectors"] = json_of(rpt.via_vectors);
    results["pushforward_z"] = json_number(rpt.z_score);
    results["pushforward_combined_stderr"] = json_number(rpt.combined_stderr);
    results["truncation_gap"] = json_number(full.value - rpt.via_paths.value);
    results["partial"] = false;
    return results;
}

inline ordered_json run_parisi(const ExperimentSpec& s) {
    const SpinLaw law = harness_law(s.d, s.params.h, s.seed);
    const Eigen::MatrixXd rho = law_second_moment(law);

    // fixed reference ansatz: equal level spacing toward the matched
    // endpoint, equally spaced weights; a baseline the optimizer must beat
    DiscretePiPath path;
    path.d = s.d;
    path.levels.resize(static_cast<std::size_t>(s.r) + 2);
    path.levels[0] = Eigen::MatrixXd::Zero(s.d, s.d);
    for (int j = 1; j <= s.r; ++j)
        path.levels[static_cast<std::size_t>(j)] =
            (static_cast<double>(j) / (s.r + 1)) * rho;
    path.levels.back() = rho;
    for (int j = 0; j <= s.r; ++j)
        path.weights.push_back(static_cast<double>(j + 1) / (s.r + 2));
    path.weights.push_back(1.0);

    const Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(s.d, s.d);
    const auto budget = detail::level_budgets(s.r + 1, s.samples);
    const auto phi = parisi_phi(path, lambda, s.params.beta, law, budget, s.seed);
    const auto fn = functional_value(rho, path, lambda, s.params.beta, law, budget, s.seed);

    ordered_json results;
    results["d"] = s.d;
    results["r"] = s.r;
    results["beta"] = s.params.beta;
    results["h"] = s.params.h;
    results["budget"] = budget;
    results["rho"] = json_of(rho);
    results["path"] = json_of(path);
    results["lambda"] = json_of(lambda);
    results["phi"] = json_of(phi);
    results["functional"] = json_of(fn);
    results["partial"] = false;
    return results;
}

inline ordered_json run_optimize(const ExperimentSpec& s) {
    const SolverConfig cfg = solver_config_of(s);
    const auto res = outer_supremum(s.params.beta, s.params.h, s.d, cfg);
    ordered_json results;
    results["d"] = s.d;
    results["beta"] = s.params.beta;
    results["h"] = s.params.h;
    results["config"] = json_of_config(cfg);
    results.update(json_of(res));
    results["partial"] = false;
    return results;
}

inline ordered_json run_trend(const ExperimentSpec& s) {
    const SolverConfig cfg = solver_config_of(s);
    const auto points = d_trend(s.params.beta, s.params.h, s.d_list, cfg);
    const auto ed = quenched_free_energy(s.params, s.disorder_samples, s.seed, s.threads);

    ordered_json rows = ordered_json::array();
    bool partial = false;
    for (const auto& pt : points) {
        ordered_json row;
        row["d"] = pt.d;
        row["ok"] = pt.ok;
        if (pt.ok) {
            row["value"] = json_number(pt.result.value);
            row["stderr"] = json_number(pt.result.stderr_);
            row["inner_converged"] = pt.result.inner_converged;
            row["outer_converged"] = pt.result.outer_converged;
        } else {
            row["error"] = pt.error;
            partial = true;
        }
        rows.push_back(std::move(row));
    }
    ordered_json results;
    results["beta"] = s.params.beta;
    results["h"] = s.params.h;
    results["config"] = json_of_config(cfg);
    results["ed_reference"] = {{"n", s.params.n},
                               {"n_disorder", s.disorder_samples},
                               {"value", json_number(ed.mean_value)},
                               {"stderr", json_number(ed.stderr_)}};
    results["points"] = std::move(rows);
    results["partial"] = partial;
    return results;
}

// Cell seeds hash the coordinate values, not the grid position, so
// reordering or embedding a grid never changes any cell's stream.
inline std::uint64_t sweep_cell_seed(std::uint64_t master, double beta, double h, int n) {
    const std::uint64_t base = derive_seed(master, stream::cell, std::bit_cast<std::uint64_t>(beta),
                                           std::bit_cast<std::uint64_t>(h));
    return derive_seed(base, static_cast<std::uint64_t>(n));
}

inline ordered_json run_sweep(const ExperimentSpec& s) {
    struct Cell {
        double beta;
        double h;
        int n;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (double b : s.beta_grid)
        for (double h : s.h_grid)
            for (int n : s.n_grid) cells.push_back({b, h, n, sweep_cell_seed(s.seed, b, h, n)});

    std::vector<QuenchedResult> outs(cells.size());
    std::vector<std::string> cell_errors(cells.size());
    parallel_for(cells.size(), s.threads, [&](std::size_t c) {
        ModelParams p;
        p.n = cells[c].n;
        p.beta = cells[c].beta;
        p.h = cells[c].h;
        try {
            outs[c] = quenched_free_energy(p, s.disorder_samples, cells[c].seed, 1);
        } catch (const std::exception& e) {
            cell_errors[c] = e.what();
        }
    });

    ordered_json rows = ordered_json::array();
    bool partial = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        ordered_json row;
        row["beta"] = cells[c].beta;
        row["h"] = cells[c].h;
        row["n"] = cells[c].n;
        row["seed"] = cells[c].seed;
        row["n_disorder"] = s.disorder_samples;
        if (cell_errors[c].empty()) {
            row["value"] = json_number(outs[c].mean_value);
            row["stderr"] = json_number(outs[c].stderr_);
            row["n_succeeded"] = outs[c].n_succeeded;
            if (outs[c].n_succeeded < outs[c].n_requested) {
                row["failed_draws"] = outs[c].failed_draws;
                partial = true;
            }
        } else {
            row["error"] = cell_errors[c];
            partial = true;
        }
        rows.push_back(std::move(row));
    }
    ordered_json results;
    results["n_cells"] = cells.size();
    results["cells"] = std::move(rows);
    results["partial"] = partial;
    return results;
}

inline ordered_json rng_accounting_of(const ExperimentSpec& s) {
    ordered_json acct;
    acct["scheme"] =
        "every task seeds an independent generator derived from (master seed, stream tag, "
        "task index) through a splitmix chain";
    acct["master_seed"] = s.seed;
    std::vector<std::string> tags;
    if (s.command == "ed") {
        tags = {"disorder"};
    } else if (s.command == "mc") {
        tags = {"disorder", "paths"};
    } else if (s.command == "reduce") {
        tags = {"disorder", "paths", "cavity"};
    } else if (s.command == "parisi") {
        tags = {"cavity", "bootstrap"};
        if (s.d > 1)
            tags.insert(tags.begin(), {"dictionary", "law"});
        else if (s.params.h > 0.0)
            tags.insert(tags.begin(), "histogram");
    } else if (s.command == "optimize" || s.command == "trend") {
        tags = {"dictionary", "law", "histogram", "optimizer", "cavity", "bootstrap",
                "final_eval"};
        if (s.command == "trend") tags.push_back("disorder");
    } else if (s.command == "sweep") {
        tags = {"cell", "disorder"};
    } else if (s.command == "verify") {
        tags = {"disorder", "paths",     "cavity",    "bootstrap", "cascade",
                "law",      "dictionary", "optimizer", "final_eval"};
    }
    acct["streams"] = tags;
    return acct;
}

}  // namespace detail

// Validates, dispatches to the engine, and wraps the payload with replay
// bookkeeping. Engine failures gain the command name as context; their type
// (and exit code) is preserved. `progress` receives per-criterion lines for
// verify.
inline RunRecord run(const ExperimentSpec& spec, std::ostream* progress = nullptr) {
    validate_spec(spec);
    RunRecord rec;
    rec.spec = spec;
    rec.rng_accounting = detail::rng_accounting_of(spec);
    const std::string context = "command '" + spec.command + "': ";
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (spec.command == "ed") rec.results = detail::run_ed(spec);
        else if (spec.command == "mc") rec.results = detail::run_mc(spec);
        else if (spec.command == "reduce") rec.results = detail::run_reduce(spec);
        else if (spec.command == "parisi") rec.results = detail::run_parisi(spec);
        else if (spec.command == "optimize") rec.results = detail::run_optimize(spec);
        else if (spec.command == "trend") rec.results = detail::run_trend(spec);
        else if (spec.command == "sweep") rec.results = detail::run_sweep(spec);
        else rec.results = acceptance_payload(spec.seed, spec.threads, progress);
    } catch (const CapacityError& e) {
        throw CapacityError(context + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(context + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(context + e.what());
    } catch (const std::exception& e) {
        throw NumericalError(context + e.what());
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

inline ordered_json record_to_json(const RunRecord& rec) {
    ordered_json j;
    j["version"] = rec.version;
    j["spec"] = json_of(rec.spec);
    j["rng_accounting"] = rec.rng_accounting;
    j["results"] = rec.results;
    j["wall_seconds"] = rec.wall_seconds;  // excluded from replay comparisons
    return j;
}

inline RunRecord record_from_json(const ordered_json& j) {
    RunRecord rec;
    rec.version = j.at("version").get<std::string>();
    rec.spec = spec_from_json(j.at("spec"));
    rec.rng_accounting = j.at("rng_accounting");
    rec.results = j.at("results");
    rec.wall_seconds = j.at("wall_seconds").get<double>();
    return rec;
}

inline bool record_results_match(const RunRecord& a, const RunRecord& b) {
    return a.results.dump() == b.results.dump();
}

inline bool record_partial(const RunRecord& rec) {
    const auto it = rec.results.find("partial");
    return it != rec.results.end() && it->is_boolean() && it->get<bool>();
}

// Plot-ready table for the grid commands, one row per grid point. Every row
// carries the seed and budget that produced it.
inline CsvTable record_csv(const RunRecord& rec) {
    CsvTable t;
    if (rec.spec.command == "trend") {
        t.header = {"d", "value", "stderr", "ed_reference", "seed", "samples", "status"};
        const double ed = rec.results.at("ed_reference").at("value").get<double>();
        for (const auto& row : rec.results.at("points")) {
            const bool ok = row.at("ok").get<bool>();
            t.rows.push_back({std::to_string(row.at("d").get<int>()),
                              ok ? csv_cell(row.at("value").get<double>()) : "nan",
                              ok ? csv_cell(row.at("stderr").get<double>()) : "nan",
                              csv_cell(ed), std::to_string(rec.spec.seed),
                              std::to_string(rec.spec.samples), ok ? "ok" : "error"});
        }
        return t;
    }
    if (rec.spec.command == "sweep") {
        t.header = {"beta", "h", "n", "seed", "n_disorder", "value", "stderr",
                    "n_succeeded", "status"};
        for (const auto& row : rec.results.at("cells")) {
            const bool ok = !row.contains("error");
            t.rows.push_back({csv_cell(row.at("beta").get<double>()),
                              csv_cell(row.at("h").get<double>()),
                              std::to_string(row.at("n").get<int>()),
                              std::to_string(row.at("seed").get<std::uint64_t>()),
                              std::to_string(row.at("n_disorder").get<int>()),
                              ok ? csv_cell(row.at("value").get<double>()) : "nan",
                              ok ? csv_cell(row.at("stderr").get<double>()) : "nan",
                              ok ? std::to_string(row.at("n_succeeded").get<int>()) : "0",
                              ok ? "ok" : "error"});
        }
        return t;
    }
    throw ValidationError("command '" + rec.spec.command + "' has no tabular output");
}

// Writes the record JSON to spec.output_path; grid commands also get a CSV
// next to it, and a single-draw ed run stores the coupling matrix it used.
// Returns the list of files written.
inline std::vector<std::string> persist_record(const RunRecord& rec) {
    std::vector<std::string> written;
    if (rec.spec.output_path.empty()) return written;
    const std::filesystem::path out(rec.spec.output_path);
    write_text_file(out, record_to_json(rec).dump(2) + "\n");
    written.push_back(out.string());
    if (rec.spec.command == "trend" || rec.spec.command == "sweep") {
        std::filesystem::path csv = out;
        csv.replace_extension(".csv");
        write_text_file(csv, record_csv(rec).to_string());
        written.push_back(csv.string());
    }
    if (rec.spec.command == "ed" && rec.spec.disorder_samples == 1) {
        std::filesystem::path gfile = out;
        gfile.replace_extension(".disorder.bin");
        save_disorder(gfile, DisorderMatrix::sample(rec.spec.params.n,
                                                    derive_seed(rec.spec.seed, stream::disorder, 0)));
        written.push_back(gfile.string());
    }
    return written;
}

struct ResumeOutcome {
    RunRecord fresh;
    bool matched = false;
};

// Re-executes a stored record's spec and reports whether the payload came
// back byte-identical.
inline ResumeOutcome rerun_record(const RunRecord& original, std::ostream* progress = nullptr) {
    ResumeOutcome out{run(original.spec, progress), false};
    out.matched = record_results_match(original, out.fresh);
    return out;
}

}  // namespace qsk
