#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qsk/model_core.hpp"

using namespace qsk;

namespace {

DisorderMatrix single_coupling_n2(double g12) {
    // g(0,1) = g12, every other entry zero
    return DisorderMatrix::from_values(2, {0.0, g12, 0.0, 0.0});
}

}  // namespace

TEST_CASE("interaction diagonal matches the hand-computed two-spin table") {
    const ModelParams p{2, 1.0, 0.0};
    const auto diag = interaction_diagonal(p, single_coupling_n2(1.0));
    const double inv_sqrt2 = 0.7071067811865476;
    REQUIRE(diag.size() == 4);
    CHECK(std::abs(diag[0] - inv_sqrt2) < 1e-14);
    CHECK(std::abs(diag[1] + inv_sqrt2) < 1e-14);
    CHECK(std::abs(diag[2] + inv_sqrt2) < 1e-14);
    CHECK(std::abs(diag[3] - inv_sqrt2) < 1e-14);
}

TEST_CASE("single spin log partition is beta*g + log(2 cosh h)") {
    const double g11 = 0.8231;
    const auto g = DisorderMatrix::from_values(1, {g11});
    for (double beta : {0.0, 0.5, 1.3}) {
        for (double h : {0.0, 0.7, 2.5}) {
            const ModelParams p{1, beta, h};
            const auto r = log_partition_ed(p, g);
            const double expected = beta * g11 + std::log(2.0 * std::cosh(h));
            CHECK(std::abs(r.log_partition - expected) < 1e-12);
        }
    }
}

TEST_CASE("analytic single-spin value at beta=0.5, g=1, h=0.7") {
    const auto g = DisorderMatrix::from_values(1, {1.0});
    const auto r = log_partition_ed(ModelParams{1, 0.5, 0.7}, g);
    CHECK(std::abs(r.log_partition - (0.5 + std::log(2.0 * std::cosh(0.7)))) < 1e-12);
}

TEST_CASE("zero coupling gives n*log(2 cosh h) and zero normalized free energy") {
    for (int n : {1, 2, 3}) {
        const ModelParams p{n, 0.0, 1.2};
        const auto g = DisorderMatrix::sample(n, 99);
        const auto r = log_partition_ed(p, g);
        CHECK(std::abs(r.log_partition - n * std::log(2.0 * std::cosh(1.2))) < 1e-12);
        CHECK(std::abs(r.normalized_free_energy) < 1e-12);
    }
}

TEST_CASE("log partition dominates the top eigenvalue") {
    const auto g = DisorderMatrix::sample(3, 17);
    const auto r = log_partition_ed(ModelParams{3, 0.8, 0.9}, g);
    CHECK(r.log_partition >= r.ground_energy);
}

TEST_CASE("log partition is invariant under joint spin relabeling") {
    const int n = 3;
    const auto g = DisorderMatrix::sample(n, 5);
    const int perm[3] = {2, 0, 1};
    std::vector<double> shuffled(9);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            shuffled[static_cast<std::size_t>(i) * n + j] = g(perm[i], perm[j]);
    const auto gp = DisorderMatrix::from_values(n, shuffled);
    for (double h : {0.0, 0.7}) {
        const ModelParams p{n, 0.9, h};
        const auto a = log_partition_ed(p, g);
        const auto b = log_partition_ed(p, gp);
        CHECK(std::abs(a.log_partition - b.log_partition) < 1e-10);
    }
}

TEST_CASE("log partition is convex in beta") {
    const auto g = DisorderMatrix::sample(2, 31);
    for (double h : {0.0, 1.0}) {
        const double l1 = log_partition_ed(ModelParams{2, 0.2, h}, g).log_partition;
        const double l2 = log_partition_ed(ModelParams{2, 0.4, h}, g).log_partition;
        const double l3 = log_partition_ed(ModelParams{2, 0.6, h}, g).log_partition;
        CHECK(l1 + l3 - 2.0 * l2 >= -1e-8);
    }
}

TEST_CASE("split-product matches diagonalization and is exact when h=0") {
    const auto g = DisorderMatrix::sample(3, 11);
    const ModelParams p{3, 0.5, 1.0};
    const auto ed = log_partition_ed(p, g);
    CHECK(std::abs(trotter_log_partition(p, g, 10000) - ed.log_partition) < 1e-4);

    const ModelParams pc{3, 0.5, 0.0};
    const auto edc = log_partition_ed(pc, g);
    CHECK(std::abs(trotter_log_partition(pc, g, 3) - edc.log_partition) < 1e-12);
}

TEST_CASE("split-product single spin is analytic at 1e4 steps") {
    const auto g = DisorderMatrix::from_values(1, {1.0});
    const ModelParams p{1, 0.5, 0.7};
    const double expected = 0.5 + std::log(2.0 * std::cosh(0.7));
    CHECK(std::abs(trotter_log_partition(p, g, 10000) - expected) < 1e-5);
}

TEST_CASE("split-product error shrinks with step count at measured order >= 0.9") {
    const auto g = DisorderMatrix::sample(3, 23);
    const ModelParams p{3, 0.5, 1.0};
    const double exact = log_partition_ed(p, g).log_partition;
    const std::vector<long> steps = {100, 1000, 10000};
    std::vector<double> lx, ly;
    for (long s : steps) {
        const double err = std::abs(trotter_log_partition(p, g, s) - exact);
        REQUIRE(err > 0.0);
        lx.push_back(std::log(1.0 / static_cast<double>(s)));
        ly.push_back(std::log(err));
    }
    // least-squares slope of log err against log(1/steps)
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
    const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        num += (lx[static_cast<std::size_t>(i)] - mx) * (ly[static_cast<std::size_t>(i)] - my);
        den += (lx[static_cast<std::size_t>(i)] - mx) * (lx[static_cast<std::size_t>(i)] - mx);
    }
    const double order = num / den;
    CHECK(order >= 0.9);

    // doubling the step count must cut the error by a clear factor
    const double e1 = std::abs(trotter_log_partition(p, g, 200) - exact);
    const double e2 = std::abs(trotter_log_partition(p, g, 400) - exact);
    CHECK(e1 / e2 >= 1.7);
}

TEST_CASE("quenched average at beta=0 is exactly zero with zero spread") {
    const auto q = quenched_free_energy(ModelParams{2, 0.0, 1.0}, 8, 42);
    // the diagonal vanishes, so every draw solves the same matrix bit-for-bit
    CHECK(std::abs(q.mean_value) < 1e-12);
    CHECK(q.stderr_ == 0.0);
    CHECK(q.n_succeeded == 8);
    CHECK(q.failed_draws.empty());
}

TEST_CASE("quenched spread shrinks with system size at matched budgets") {
    const int draws = 60;
    const auto small = quenched_free_energy(ModelParams{6, 0.3, 0.0}, draws, 2024);
    const auto large = quenched_free_energy(ModelParams{12, 0.3, 0.0}, draws, 2024);
    CHECK(large.stderr_ < small.stderr_);
}

TEST_CASE("quenched draws are reproducible and independent of thread count") {
    const ModelParams p{4, 0.7, 0.6};
    const auto a = quenched_free_energy(p, 12, 7, 1);
    const auto b = quenched_free_energy(p, 12, 7, 4);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    CHECK(a.mean_value == b.mean_value);
}

TEST_CASE("disorder sampling is seed-deterministic") {
    const auto a = DisorderMatrix::sample(4, 123);
    const auto b = DisorderMatrix::sample(4, 123);
    const auto c = DisorderMatrix::sample(4, 124);
    CHECK(a.values() == b.values());
    CHECK(a.values() != c.values());
}

TEST_CASE("validation and capacity errors") {
    CHECK_THROWS_AS(validate(ModelParams{0, 0.1, 0.1}), ValidationError);
    CHECK_THROWS_AS(validate(ModelParams{15, 0.1, 0.1}), CapacityError);
    CHECK_THROWS_AS(validate(ModelParams{1, -0.5, 0.1}), ValidationError);
    CHECK_THROWS_AS(validate(ModelParams{1, 0.5, -0.1}), ValidationError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(DisorderMatrix::from_values(1, {nan}), ValidationError);
    CHECK_THROWS_AS(DisorderMatrix::from_values(2, {1.0, 2.0}), ValidationError);
    const auto g = DisorderMatrix::sample(2, 1);
    CHECK_THROWS_AS(trotter_log_partition(ModelParams{2, 0.1, 0.1}, g, 0), ValidationError);
    const auto g3 = DisorderMatrix::sample(3, 1);
    CHECK_THROWS_AS(interaction_diagonal(ModelParams{2, 0.1, 0.1}, g3), ValidationError);
}
