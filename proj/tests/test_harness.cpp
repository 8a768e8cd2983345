#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qsk/acceptance.hpp"
#include "qsk/harness.hpp"

using namespace qsk;

namespace {

ExperimentSpec ed_spec() {
    ExperimentSpec s;
    s.command = "ed";
    s.params = {3, 0.4, 0.7};
    s.disorder_samples = 3;
    s.seed = 91;
    s.threads = 1;
    return s;
}

}  // namespace

TEST_CASE("spec validation names the offending field") {
    ExperimentSpec s;
    s.command = "frobnicate";
    CHECK_THROWS_WITH(validate_spec(s), Catch::Matchers::ContainsSubstring("spec.command"));

    s = ed_spec();
    s.params.n = 0;
    CHECK_THROWS_WITH(validate_spec(s), Catch::Matchers::ContainsSubstring("spec.params"));

    s = ed_spec();
    s.params.n = 40;  // beyond the site capacity
    CHECK_THROWS_AS(validate_spec(s), ValidationError);

    s = ed_spec();
    s.disorder_samples = 0;
    CHECK_THROWS_WITH(validate_spec(s),
                      Catch::Matchers::ContainsSubstring("spec.disorder_samples"));

    s = ed_spec();
    s.command = "mc";
    s.samples = 10;
    CHECK_THROWS_WITH(validate_spec(s), Catch::Matchers::ContainsSubstring("spec.samples"));

    s = ed_spec();
    s.command = "trend";
    s.d_list = {2, 2};
    CHECK_THROWS_WITH(validate_spec(s), Catch::Matchers::ContainsSubstring("spec.d_list"));

    s = ed_spec();
    s.command = "sweep";
    CHECK_THROWS_WITH(validate_spec(s), Catch::Matchers::ContainsSubstring("spec.beta_grid"));

    s.beta_grid = {0.1};
    s.h_grid = {0.0};
    s.n_grid = {0};
    CHECK_THROWS_WITH(validate_spec(s), Catch::Matchers::ContainsSubstring("spec.n_grid"));
}

TEST_CASE("mc runs cleanly at the minimum sample count") {
    ExperimentSpec s = ed_spec();
    s.command = "mc";
    s.samples = 120;
    const auto rec = run(s);
    CHECK(rec.results.at("n_failed").get<int>() == 0);
    CHECK_FALSE(record_partial(rec));
}

TEST_CASE("ed record value is exact at zero coupling strength") {
    ExperimentSpec s;
    s.command = "ed";
    s.params = {2, 0.0, 1.2};
    s.disorder_samples = 1;
    s.seed = 5;
    const auto rec = run(s);
    CHECK(std::abs(rec.results.at("value").get<double>()) < 1e-12);
    CHECK(rec.results.at("n_succeeded").get<int>() == 1);
    CHECK_FALSE(record_partial(rec));
}

TEST_CASE("records replay byte for byte") {
    const auto a = run(ed_spec());
    const auto b = run(ed_spec());
    CHECK(record_results_match(a, b));

    // thread count must not leak into the payload
    ExperimentSpec threaded = ed_spec();
    threaded.threads = 3;
    CHECK(record_results_match(a, run(threaded)));

    // survive a JSON round trip
    const auto restored = record_from_json(ordered_json::parse(record_to_json(a).dump(2)));
    CHECK(restored.spec.command == "ed");
    CHECK(restored.spec.seed == 91);
    CHECK(restored.version == a.version);
    const auto outcome = rerun_record(restored);
    CHECK(outcome.matched);
}

TEST_CASE("mc records aggregate per-draw estimates") {
    ExperimentSpec s;
    s.command = "mc";
    s.params = {2, 0.3, 1.0};
    s.samples = 400;
    s.disorder_samples = 2;
    s.seed = 17;
    const auto rec = run(s);
    const auto& draws = rec.results.at("draws");
    REQUIRE(draws.size() == 2);
    const double v0 = draws[0].at("estimate").at("value").get<double>();
    const double v1 = draws[1].at("estimate").at("value").get<double>();
    CHECK(rec.results.at("value").get<double>() == Catch::Approx(0.5 * (v0 + v1)));
    CHECK(rec.results.at("stderr").get<double>() > 0.0);
    // distinct couplings, distinct estimates
    CHECK(v0 != v1);
}

TEST_CASE("sweep cells depend on coordinates, not grid position") {
    ExperimentSpec s;
    s.command = "sweep";
    s.beta_grid = {0.2, 0.4};
    s.h_grid = {0.5};
    s.n_grid = {3};
    s.disorder_samples = 2;
    s.seed = 23;
    const auto rec = run(s);
    REQUIRE(rec.results.at("cells").size() == 2);

    ExperimentSpec rev = s;
    rev.beta_grid = {0.4, 0.2};
    const auto rec2 = run(rev);

    const auto cell_value = [](const RunRecord& r, double beta) {
        for (const auto& row : r.results.at("cells"))
            if (row.at("beta").get<double>() == beta) return row.at("value").get<double>();
        FAIL("cell not found");
        return 0.0;
    };
    CHECK(cell_value(rec, 0.2) == cell_value(rec2, 0.2));
    CHECK(cell_value(rec, 0.4) == cell_value(rec2, 0.4));

    // a single cell reproduces a direct quenched call with the derived seed
    ModelParams p{3, 0.2, 0.5};
    const auto direct =
        quenched_free_energy(p, 2, detail::sweep_cell_seed(23, 0.2, 0.5, 3), 1);
    CHECK(cell_value(rec, 0.2) == direct.mean_value);
}

TEST_CASE("sweep csv carries seeds and budgets per row") {
    ExperimentSpec s;
    s.command = "sweep";
    s.beta_grid = {0.1};
    s.h_grid = {0.0, 1.0};
    s.n_grid = {2};
    s.disorder_samples = 2;
    s.seed = 29;
    const auto rec = run(s);
    const auto table = record_csv(rec);
    REQUIRE(table.header.size() == 9);
    CHECK(table.header[0] == "beta");
    CHECK(table.header[3] == "seed");
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][3] == std::to_string(detail::sweep_cell_seed(29, 0.1, 0.0, 2)));
    CHECK(table.rows[0][4] == "2");
    CHECK(table.rows[0][8] == "ok");
    // the serialized table must parse back into the same number of columns
    const std::string text = table.to_string();
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("trend records and csv include the reference value") {
    ExperimentSpec s;
    s.command = "trend";
    s.params = {4, 0.0, 0.6};
    s.d_list = {1, 2};
    s.r = 1;
    s.samples = 2000;
    s.disorder_samples = 2;
    s.seed = 31;
    s.threads = 1;
    const auto rec = run(s);
    REQUIRE(rec.results.at("points").size() == 2);
    for (const auto& row : rec.results.at("points")) {
        REQUIRE(row.at("ok").get<bool>());
        // at zero coupling strength the bound collapses to zero exactly
        CHECK(std::abs(row.at("value").get<double>()) < 1e-6);
    }
    CHECK(std::abs(rec.results.at("ed_reference").at("value").get<double>()) < 1e-12);
    CHECK_FALSE(record_partial(rec));

    const auto table = record_csv(rec);
    REQUIRE(table.header.size() == 7);
    CHECK(table.header[3] == "ed_reference");
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][0] == "1");
    CHECK(table.rows[1][0] == "2");
    CHECK(table.rows[0][4] == "31");
    CHECK(table.rows[0][6] == "ok");
}

TEST_CASE("parisi records expose the reference ansatz") {
    ExperimentSpec s;
    s.command = "parisi";
    s.params = {1, 0.35, 0.0};
    s.d = 1;
    s.r = 1;
    s.samples = 600;
    s.seed = 37;
    const auto rec = run(s);
    CHECK(rec.results.at("budget").size() == 2);
    CHECK(std::isfinite(rec.results.at("phi").at("value").get<double>()));
    CHECK(std::isfinite(rec.results.at("functional").at("value").get<double>()));
    // endpoint is the matched second moment of the two-atom law
    CHECK(rec.results.at("rho").at(0).at(0).get<double>() == Catch::Approx(1.0));

    const auto again = run(s);
    CHECK(record_results_match(rec, again));
}

TEST_CASE("persisted records land next to their tables") {
    const std::filesystem::path dir("./harness_out_test");
    std::filesystem::remove_all(dir);

    ExperimentSpec s;
    s.command = "ed";
    s.params = {2, 0.5, 0.3};
    s.disorder_samples = 1;
    s.seed = 41;
    s.output_path = (dir / "run.json").string();
    const auto rec = run(s);
    const auto written = persist_record(rec);
    REQUIRE(written.size() == 2);  // record plus the coupling snapshot
    CHECK(std::filesystem::exists(dir / "run.json"));
    CHECK(std::filesystem::exists(dir / "run.disorder.bin"));

    const auto loaded =
        record_from_json(ordered_json::parse(read_text_file(dir / "run.json")));
    CHECK(record_results_match(rec, loaded));

    const auto g = load_disorder(dir / "run.disorder.bin");
    const auto fresh = DisorderMatrix::sample(2, derive_seed(41, stream::disorder, 0));
    CHECK(g.values() == fresh.values());

    ExperimentSpec sw;
    sw.command = "sweep";
    sw.beta_grid = {0.1};
    sw.h_grid = {0.2};
    sw.n_grid = {2};
    sw.disorder_samples = 1;
    sw.seed = 43;
    sw.output_path = (dir / "grid.json").string();
    const auto wrote = persist_record(run(sw));
    REQUIRE(wrote.size() == 2);
    CHECK(std::filesystem::exists(dir / "grid.csv"));

    std::filesystem::remove_all(dir);
}

TEST_CASE("spec json round trip preserves every field") {
    ExperimentSpec s;
    s.command = "sweep";
    s.params = {5, 0.25, 1.5};
    s.d = 3;
    s.r = 2;
    s.samples = 1234;
    s.disorder_samples = 7;
    s.seed = 0xDEADBEEFCAFEF00Dull;
    s.threads = 2;
    s.d_list = {1, 2, 8};
    s.beta_grid = {0.1, 0.2};
    s.h_grid = {0.0};
    s.n_grid = {2, 3};
    s.output_path = "x/y.json";
    const auto t = spec_from_json(ordered_json::parse(json_of(s).dump()));
    CHECK(t.command == s.command);
    CHECK(t.params.n == 5);
    CHECK(t.params.beta == 0.25);
    CHECK(t.params.h == 1.5);
    CHECK(t.d == 3);
    CHECK(t.r == 2);
    CHECK(t.samples == 1234);
    CHECK(t.disorder_samples == 7);
    CHECK(t.seed == s.seed);
    CHECK(t.threads == 2);
    CHECK(t.d_list == s.d_list);
    CHECK(t.beta_grid == s.beta_grid);
    CHECK(t.h_grid == s.h_grid);
    CHECK(t.n_grid == s.n_grid);
    CHECK(t.output_path == s.output_path);
}

TEST_CASE("rng accounting names the consumed streams") {
    const auto rec = run(ed_spec());
    const auto& acct = rec.rng_accounting;
    CHECK(acct.at("master_seed").get<std::uint64_t>() == 91);
    REQUIRE(acct.at("streams").size() == 1);
    CHECK(acct.at("streams")[0].get<std::string>() == "disorder");
}
