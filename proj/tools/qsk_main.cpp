// Command line driver: builds an ExperimentSpec from flags, hands it to the
// harness, prints a short human summary, and persists the run record when
// asked. Exit codes: 0 success, 1 rejected input, 2 numerical failure,
// 3 partial results.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "qsk/acceptance.hpp"

namespace {

void print_summary(const qsk::RunRecord& rec) {
    const auto& res = rec.results;
    const auto& cmd = rec.spec.command;
    if (cmd == "ed" || cmd == "mc") {
        std::printf("%s: value %.6f +- %.6f\n", cmd.c_str(), res.at("value").get<double>(),
                    res.at("stderr").get<double>());
    } else if (cmd == "reduce") {
        std::printf("full     %.6f +- %.6f\n", res.at("full").at("value").get<double>(),
                    res.at("full").at("stderr").get<double>());
        std::printf("reduced  %.6f +- %.6f (d=%d, pushforward z %.2f)\n",
                    res.at("reduced_via_paths").at("value").get<double>(),
                    res.at("reduced_via_paths").at("stderr").get<double>(),
                    res.at("d").get<int>(), res.at("pushforward_z").get<double>());
    } else if (cmd == "parisi") {
        std::printf("head value  %.6f +- %.6f\n", res.at("phi").at("value").get<double>(),
                    res.at("phi").at("stderr").get<double>());
        std::printf("functional  %.6f +- %.6f\n",
                    res.at("functional").at("value").get<double>(),
                    res.at("functional").at("stderr").get<double>());
    } else if (cmd == "optimize") {
        std::printf("optimize: value %.6f +- %.6f (inner %s, outer %s)\n",
                    res.at("value").get<double>(), res.at("stderr").get<double>(),
                    res.at("inner_converged").get<bool>() ? "converged" : "not converged",
                    res.at("outer_converged").get<bool>() ? "converged" : "not converged");
    } else if (cmd == "trend") {
        for (const auto& row : res.at("points")) {
            if (row.at("ok").get<bool>())
                std::printf("d=%-3d value %.6f +- %.6f\n", row.at("d").get<int>(),
                            row.at("value").get<double>(), row.at("stderr").get<double>());
            else
                std::printf("d=%-3d failed: %s\n", row.at("d").get<int>(),
                            row.at("error").get<std::string>().c_str());
        }
        std::printf("reference (n=%d): %.6f +- %.6f\n",
                    res.at("ed_reference").at("n").get<int>(),
                    res.at("ed_reference").at("value").get<double>(),
                    res.at("ed_reference").at("stderr").get<double>());
    } else if (cmd == "sweep") {
        int failed = 0;
        for (const auto& row : res.at("cells"))
            if (row.contains("error")) ++failed;
        std::printf("sweep: %d cells, %d failed\n", res.at("n_cells").get<int>(), failed);
    } else if (cmd == "verify") {
        std::printf("%d/%zu criteria passed\n", res.at("n_passed").get<int>(),
                    res.at("criteria").size());
    }
    std::printf("wall time %.1fs\n", rec.wall_seconds);
}

int run_spec(qsk::ExperimentSpec spec) {
    const qsk::RunRecord rec =
        qsk::run(spec, spec.command == "verify" ? &std::cout : nullptr);
    print_summary(rec);
    for (const auto& f : qsk::persist_record(rec)) std::printf("wrote %s\n", f.c_str());
    if (spec.command == "verify" && !rec.results.at("all_passed").get<bool>()) return 2;
    return qsk::record_partial(rec) ? 3 : 0;
}

int run_resume(const std::string& path) {
    const auto original =
        qsk::record_from_json(qsk::ordered_json::parse(qsk::read_text_file(path)));
    const auto outcome = qsk::rerun_record(
        original, original.spec.command == "verify" ? &std::cout : nullptr);
    if (outcome.matched) {
        std::printf("record replayed byte-identically (command '%s')\n",
                    original.spec.command.c_str());
        return 0;
    }
    std::printf("record did NOT replay identically (command '%s')\n",
                original.spec.command.c_str());
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-energy toolkit for a mean-field spin model in a transverse field"};
    app.name("qsk");
    app.require_subcommand(0, 1);
    // --h is a model flag here, so help lives on --help alone
    app.set_help_flag("--help", "print help and exit");

    qsk::ExperimentSpec spec;
    std::string resume_path;
    app.add_option("--resume", resume_path,
                   "re-execute a stored run record and compare payloads");

    const auto sub = [&](const char* name, const char* desc) {
        CLI::App* c = app.add_subcommand(name, desc);
        c->set_help_flag("--help", "print help and exit");
        return c;
    };
    const auto add_shared = [&](CLI::App* cmd) {
        cmd->add_option("--seed", spec.seed, "master seed; every stream derives from it");
        cmd->add_option("--threads", spec.threads,
                        "worker threads (0: QSK_THREADS env, then hardware)");
        cmd->add_option("--out", spec.output_path,
                        "write the run record as JSON (grid commands add a CSV)");
    };
    const auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--n", spec.params.n, "number of sites");
        cmd->add_option("--beta", spec.params.beta, "inverse temperature");
        cmd->add_option("--h", spec.params.h, "transverse field");
    };

    auto* ed = sub("ed", "quenched free energy by exact diagonalization");
    add_model(ed);
    ed->add_option("--disorder-samples", spec.disorder_samples, "coupling draws to average");
    add_shared(ed);

    auto* mc = sub("mc", "free energy by path sampling");
    add_model(mc);
    mc->add_option("--samples", spec.samples, "paths per coupling draw");
    mc->add_option("--disorder-samples", spec.disorder_samples, "coupling draws to average");
    add_shared(mc);

    auto* reduce =
        sub("reduce", "coefficient-truncated estimates and their pushforward");
    add_model(reduce);
    reduce->add_option("--d", spec.d, "number of retained coefficients");
    reduce->add_option("--samples", spec.samples, "paths per estimate");
    add_shared(reduce);

    auto* parisi =
        sub("parisi", "head value and functional for a reference step path");
    parisi->add_option("--beta", spec.params.beta, "inverse temperature");
    parisi->add_option("--h", spec.params.h, "transverse field");
    parisi->add_option("--d", spec.d, "projection dimension");
    parisi->add_option("--r", spec.r, "free levels of the step path");
    parisi->add_option("--samples", spec.samples, "total sampling budget");
    add_shared(parisi);

    auto* optimize = sub("optimize", "variational bound by nested search");
    optimize->add_option("--beta", spec.params.beta, "inverse temperature");
    optimize->add_option("--h", spec.params.h, "transverse field");
    optimize->add_option("--d", spec.d, "projection dimension");
    optimize->add_option("--r", spec.r, "free levels of the step path");
    optimize->add_option("--samples", spec.samples, "final evaluation budget");
    add_shared(optimize);

    auto* trend = sub("trend", "variational bound across dimensions");
    trend->add_option("--beta", spec.params.beta, "inverse temperature");
    trend->add_option("--h", spec.params.h, "transverse field");
    auto* trend_d =
        trend->add_option("--d", spec.d_list, "dimensions, ascending")->delimiter(',');
    auto* trend_n = trend->add_option("--n", spec.params.n, "sites for the reference value");
    trend->add_option("--r", spec.r, "free levels of the step path");
    auto* trend_s = trend->add_option("--samples", spec.samples, "final budget per dimension");
    auto* trend_g = trend->add_option("--disorder-samples", spec.disorder_samples,
                                      "coupling draws for the reference value");
    add_shared(trend);

    auto* sweep = sub("sweep", "quenched free energy over a parameter grid");
    sweep->add_option("--beta", spec.beta_grid, "inverse temperatures")->delimiter(',');
    sweep->add_option("--h", spec.h_grid, "transverse fields")->delimiter(',');
    sweep->add_option("--n", spec.n_grid, "site counts")->delimiter(',');
    sweep->add_option("--disorder-samples", spec.disorder_samples,
                      "coupling draws per grid cell");
    add_shared(sweep);

    auto* verify = sub("verify", "run the full acceptance suite");
    auto* verify_seed =
        verify->add_option("--seed", spec.seed, "master seed for the suite");
    verify->add_option("--threads", spec.threads,
                       "worker threads (0: QSK_THREADS env, then hardware)");
    verify->add_option("--out", spec.output_path, "write the suite record as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!resume_path.empty()) {
            if (!app.get_subcommands().empty()) {
                std::fprintf(stderr, "error: --resume does not take a subcommand\n");
                return 1;
            }
            return run_resume(resume_path);
        }
        if (app.get_subcommands().empty()) {
            std::fprintf(stderr, "%s", app.help().c_str());
            return 1;
        }
        CLI::App* chosen = app.get_subcommands().front();
        spec.command = chosen->get_name();
        if (chosen == trend) {
            // grid-friendly defaults; flags still win
            if (trend_d->count() == 0) spec.d_list = {1, 2, 4};
            if (trend_n->count() == 0) spec.params.n = 8;
            if (trend_s->count() == 0) spec.samples = 12000;
            if (trend_g->count() == 0) spec.disorder_samples = 20;
        }
        if (chosen == verify && verify_seed->count() == 0)
            spec.seed = qsk::acceptance::k_default_seed;
        return run_spec(std::move(spec));
    } catch (const qsk::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
