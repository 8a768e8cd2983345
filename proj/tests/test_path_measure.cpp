#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qsk/path_measure.hpp"

using namespace qsk;

namespace {

FlipPath constant_path(int sign) { return FlipPath{sign, {}}; }

FlipPath two_flip_path(int sign, double t1, double t2) { return FlipPath{sign, {t1, t2}}; }

}  // namespace

TEST_CASE("zero field always yields constant paths of both signs") {
    Rng rng(7);
    bool saw_plus = false, saw_minus = false;
    for (int i = 0; i < 200; ++i) {
        const auto p = sample_path(0.0, rng);
        REQUIRE(p.flip_count() == 0);
        (p.initial_sign > 0 ? saw_plus : saw_minus) = true;
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
}

TEST_CASE("sampled flip statistics match the even-conditioned law at h=1") {
    Rng rng(11);
    const int n = 100000;
    long zero_count = 0;
    double flip_sum = 0.0, flip_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto p = sample_path(1.0, rng);
        REQUIRE(p.flip_count() % 2 == 0);
        REQUIRE(p.sign_at(1.0) == p.initial_sign);
        validate_path(p);
        if (p.flip_count() == 0) ++zero_count;
        flip_sum += p.flip_count();
        flip_sq += static_cast<double>(p.flip_count()) * p.flip_count();
    }
    const double p0 = static_cast<double>(zero_count) / n;
    const double p0_expected = 1.0 / std::cosh(1.0);  // 0.648054...
    const double p0_sigma = std::sqrt(p0_expected * (1.0 - p0_expected) / n);
    CHECK(std::abs(p0 - p0_expected) < 3.0 * p0_sigma);

    const double mean_flips = flip_sum / n;
    const double var_flips = flip_sq / n - mean_flips * mean_flips;
    const double mean_expected = std::tanh(1.0);  // 0.761594...
    CHECK(std::abs(mean_flips - mean_expected) < 3.0 * std::sqrt(var_flips / n));
}

TEST_CASE("l2 inner products on hand-checked pieces") {
    const auto plus = constant_path(1);
    const auto minus = constant_path(-1);
    CHECK(std::abs(l2_inner(plus, plus) - 1.0) < 1e-14);
    CHECK(std::abs(l2_inner(plus, minus) + 1.0) < 1e-14);
    CHECK(std::abs(l2_inner(plus, two_flip_path(1, 0.25, 0.75))) < 1e-15);
    CHECK(std::abs(l2_inner(plus, two_flip_path(1, 1.0 / 3.0, 2.0 / 3.0)) - 1.0 / 3.0) < 1e-14);

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto a = sample_path(1.5, rng);
        const auto b = sample_path(1.5, rng);
        const double ab = l2_inner(a, b);
        CHECK(ab * ab <= l2_inner(a, a) * l2_inner(b, b) + 1e-12);
        CHECK(std::abs(ab) <= 1.0 + 1e-12);
    }
}

TEST_CASE("basis coefficients of constant paths vanish exactly beyond index 1") {
    const auto plus = constant_path(1);
    const auto minus = constant_path(-1);
    CHECK(fourier_coeff(plus, 1) == 1.0);
    CHECK(fourier_coeff(minus, 1) == -1.0);
    for (int k = 2; k <= 9; ++k) {
        CHECK(fourier_coeff(plus, k) == 0.0);
        CHECK(fourier_coeff(minus, k) == 0.0);
    }
}

TEST_CASE("coefficients of the quarter-three-quarter flip path") {
    const auto p = two_flip_path(1, 0.25, 0.75);
    CHECK(std::abs(fourier_coeff(p, 1)) < 1e-15);
    CHECK(std::abs(fourier_coeff(p, 2)) < 1e-15);
    CHECK(std::abs(fourier_coeff(p, 3) - 0.9003163161571061) < 1e-12);  // 2 sqrt(2) / pi
    CHECK(std::abs(fourier_coeff(p, 4)) < 1e-15);
    CHECK(std::abs(fourier_coeff(p, 5)) < 1e-15);

    const auto v = project_d(p, 3);
    REQUIRE(v.size() == 3);
    CHECK(std::abs(v[0]) < 1e-15);
    CHECK(std::abs(v[1]) < 1e-15);
    CHECK(std::abs(v[2] - 0.9003163161571061) < 1e-12);
}

TEST_CASE("coefficient magnitudes obey the flip-count bound") {
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const auto p = sample_path(1.0, rng);
        const double nf = p.flip_count();
        for (int k = 1; k <= 30; ++k) {
            const double bound = std::sqrt(2.0) * nf / k;
            CHECK(std::abs(fourier_coeff(p, 2 * k)) <= bound);
            CHECK(std::abs(fourier_coeff(p, 2 * k + 1)) <= bound);
        }
    }
}

TEST_CASE("partial energy sums grow monotonely toward unit norm") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const auto p = sample_path(1.0, rng);
        double prev = 0.0;
        for (int d : {1, 2, 4, 8, 16, 32, 64}) {
            const double kept = 1.0 - projection_tail_sq(p, d);
            CHECK(kept >= prev - 1e-13);
            CHECK(kept <= 1.0 + 1e-12);
            CHECK(1.0 - kept <= 4.0 * p.flip_count() / std::sqrt(static_cast<double>(d)) + 1e-12);
            prev = kept;
        }
    }
}

TEST_CASE("projection tail shrinks roughly like 1/d and is exactly zero for constants") {
    const auto p = two_flip_path(1, 0.3, 0.8);
    const double t100 = projection_tail_sq(p, 100);
    const double t1000 = projection_tail_sq(p, 1000);
    CHECK(t1000 < t100 / 3.0);
    CHECK(t1000 < 0.02);
    CHECK(projection_tail_sq(constant_path(1), 1000) == 0.0);
}

TEST_CASE("path energy specializations") {
    const auto g = DisorderMatrix::sample(1, 9);
    SpinConfig single{{constant_path(1)}};
    CHECK(path_energy(single, g, 0.0) == 0.0);
    CHECK(std::abs(path_energy(single, g, 0.7) - 0.7 * g(0, 0)) < 1e-14);

    // constant paths reduce to the classical spin energy
    const auto g3 = DisorderMatrix::sample(3, 13);
    SpinConfig cfg{{constant_path(1), constant_path(-1), constant_path(1)}};
    const double tau[3] = {1.0, -1.0, 1.0};
    double classical = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) classical += g3(i, j) * tau[i] * tau[j];
    classical *= 0.9 / std::sqrt(3.0);
    CHECK(std::abs(path_energy(cfg, g3, 0.9) - classical) < 1e-12);
}

TEST_CASE("monte carlo estimate is exact at beta=0") {
    const auto g = DisorderMatrix::sample(2, 40);
    const auto est = mc_log_partition(ModelParams{2, 0.0, 1.0}, g, 200, 5);
    CHECK(est.value == 0.0);
    CHECK(est.stderr_ == 0.0);
    CHECK(est.status == EstimateStatus::ok);
    CHECK(est.ess == 200.0);
}

TEST_CASE("monte carlo estimate brackets the diagonalization value") {
    const ModelParams p{2, 0.4, 1.0};
    const auto g = DisorderMatrix::sample(2, 77);
    const double target = log_partition_ed(p, g).normalized_free_energy;
    const auto est = mc_log_partition(p, g, 20000, 123);
    REQUIRE(est.stderr_ > 0.0);
    CHECK(std::abs(est.value - target) < 3.0 * est.stderr_);
}

TEST_CASE("monte carlo estimates are seed-deterministic and thread-invariant") {
    const ModelParams p{2, 0.4, 1.0};
    const auto g = DisorderMatrix::sample(2, 8);
    const auto a = mc_log_partition(p, g, 500, 99, 0, 1);
    const auto b = mc_log_partition(p, g, 500, 99, 0, 3);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    const auto c = mc_log_partition(p, g, 500, 100, 0, 1);
    CHECK(a.value != c.value);
}

TEST_CASE("dimension reduction at d=64 changes the estimate within noise") {
    const ModelParams p{2, 0.3, 1.0};
    const auto g = DisorderMatrix::sample(2, 55);
    const auto full = mc_log_partition(p, g, 20000, 202);
    const auto red = mc_log_partition(p, g, 20000, 303, 64);
    const double comb = std::sqrt(full.stderr_ * full.stderr_ + red.stderr_ * red.stderr_);
    CHECK(std::abs(full.value - red.value) < 3.0 * comb + 2e-3);
}

TEST_CASE("restriction window membership") {
    SpinConfig constants{{constant_path(1), constant_path(-1)}};
    CHECK(in_restricted_set(constants, RestrictionSpec{1e-12, 1}));

    FlipPath many{1, {}};
    for (int i = 1; i <= 20; ++i) many.flip_times.push_back(i / 21.0);
    SpinConfig busy{{many}};
    CHECK_FALSE(in_restricted_set(busy, RestrictionSpec{0.01, 1}));
}

TEST_CASE("loose restriction reproduces the unrestricted estimator exactly") {
    const ModelParams p{2, 0.4, 1.0};
    const auto g = DisorderMatrix::sample(2, 21);
    const auto full = mc_log_partition(p, g, 400, 33);
    const auto restr = restricted_mc_log_partition(p, g, RestrictionSpec{4.0, 8}, 400, 33);
    CHECK(restr.acceptance_rate == 1.0);
    CHECK(restr.value == full.value);
    CHECK(restr.stderr_ == full.stderr_);
}

TEST_CASE("total rejection raises a numerical error") {
    const ModelParams p{3, 0.4, 8.0};
    const auto g = DisorderMatrix::sample(3, 2);
    CHECK_THROWS_AS(
        restricted_mc_log_partition(p, g, RestrictionSpec{1e-12, 1}, 100, 11),
        NumericalError);
}

TEST_CASE("interpolation gap between full and reduced restricted estimates") {
    const ModelParams p{3, 0.3, 1.0};
    const auto g = DisorderMatrix::sample(3, 91);
    const RestrictionSpec spec{0.25, 2};
    const auto full = restricted_mc_log_partition(p, g, spec, 4000, 7, false);
    const auto red = restricted_mc_log_partition(p, g, spec, 4000, 7, true);
    REQUIRE(full.acceptance_rate > 0.1);
    const double comb = std::sqrt(full.stderr_ * full.stderr_ + red.stderr_ * red.stderr_);
    const double bound = 4.0 * p.beta * p.beta * std::sqrt(spec.epsilon);
    CHECK(std::abs(full.value - red.value) <= bound + 3.0 * comb);
}

TEST_CASE("path measure input validation") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_path(-1.0, rng), ValidationError);
    CHECK_THROWS_AS(fourier_coeff(constant_path(1), 0), ValidationError);
    CHECK_THROWS_AS(project_d(constant_path(1), 0), ValidationError);
    CHECK_THROWS_AS(validate_path(FlipPath{2, {}}), ValidationError);
    CHECK_THROWS_AS(validate_path(FlipPath{1, {0.5}}), ValidationError);
    CHECK_THROWS_AS(validate_path(FlipPath{1, {0.7, 0.3}}), ValidationError);
    const auto g = DisorderMatrix::sample(2, 1);
    CHECK_THROWS_AS(mc_log_partition(ModelParams{2, 0.1, 0.1}, g, 99, 1), ValidationError);
    CHECK_THROWS_AS(
        restricted_mc_log_partition(ModelParams{2, 0.1, 0.1}, g, RestrictionSpec{0.0, 1}, 100, 1),
        ValidationError);
}
