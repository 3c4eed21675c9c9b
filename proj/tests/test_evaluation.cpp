#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedonet/datagen.hpp"
#include "fedonet/evaluation.hpp"
#include "fedonet/rng.hpp"

#include <cmath>
#include <numbers>

using namespace fedonet;

TEST_CASE("relative_l2: identities and scale awareness") {
    std::vector<double> truth = {1.0, -2.0, 3.0, 0.5};
    CHECK(relative_l2(truth, truth) == 0.0);

    std::vector<double> zero(truth.size(), 0.0);
    CHECK(relative_l2(zero, truth) == doctest::Approx(1.0));

    std::vector<double> twice = truth;
    for (auto& v : twice) v *= 2.0;
    CHECK(relative_l2(twice, truth) == doctest::Approx(1.0));

    // scaling both arguments leaves the error unchanged
    std::vector<double> pred = {0.9, -2.2, 3.3, 0.7};
    const double base = relative_l2(pred, truth);
    std::vector<double> pred_s = pred, truth_s = truth;
    for (auto& v : pred_s) v *= -7.5;
    for (auto& v : truth_s) v *= -7.5;
    CHECK(relative_l2(pred_s, truth_s) == doctest::Approx(base).epsilon(1e-12));

    CHECK_THROWS_AS(relative_l2(pred, zero), std::invalid_argument);
    std::vector<double> shorter = {1.0};
    CHECK_THROWS_AS(relative_l2(shorter, truth), std::invalid_argument);
}

TEST_CASE("energy_spectrum_1d: single mode lands in its bin; Parseval holds") {
    const int n = 64;
    std::vector<double> field(n);
    for (int j = 0; j < n; ++j) field[static_cast<std::size_t>(j)] = std::sin(2.0 * std::numbers::pi * 3.0 * j / n);
    const auto e = energy_spectrum_1d(field);
    REQUIRE(e.size() == 33);
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (k == 3) CHECK(e[k] > 1.0);
        else CHECK(e[k] <= 1e-20);
    }

    Rng rng(5);
    for (int n_len : {64, 200, 101}) {
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> f(static_cast<std::size_t>(n_len));
            double norm2 = 0.0;
            for (auto& v : f) {
                v = rng.normal();
                norm2 += v * v;
            }
            const auto spec = energy_spectrum_1d(f);
            double total = 0.0;
            for (double v : spec) total += v;
            CHECK(std::abs(total - norm2) <= 1e-10 * norm2);
        }
    }
}

TEST_CASE("energy_spectrum_1d: white noise is flat") {
    const int n = 64;
    std::vector<double> avg(static_cast<std::size_t>(n / 2) + 1, 0.0);
    const int n_draws = 400;
    Rng rng(3);
    for (int d = 0; d < n_draws; ++d) {
        std::vector<double> f(static_cast<std::size_t>(n));
        for (auto& v : f) v = rng.normal();
        const auto e = energy_spectrum_1d(f);
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += e[k];
    }
    for (auto& v : avg) v /= static_cast<double>(n_draws);
    // interior bins hold two modes of unit expected energy each
    for (int k = 1; k <= n / 4; ++k) CHECK(avg[static_cast<std::size_t>(k)] == doctest::Approx(2.0).epsilon(0.20));
}

TEST_CASE("energy_spectrum_2d: separable modes, Parseval, rotation invariance") {
    const int n = 32;
    Matrix field(n, n);
    const int k1 = 3, k2 = 4;  // shell round(sqrt(9+16)) = 5
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            field(i, j) = std::sin(2.0 * std::numbers::pi * k1 * i / n) *
                          std::sin(2.0 * std::numbers::pi * k2 * j / n);
    const auto e = energy_spectrum_2d(field);
    double total = 0.0;
    for (double v : e) total += v;
    CHECK(e[5] == doctest::Approx(total).epsilon(1e-12));

    Rng rng(9);
    for (int rep = 0; rep < 30; ++rep) {
        Matrix f(n, n);
        for (int i = 0; i < f.size(); ++i) f.data()[i] = rng.normal();
        const auto spec = energy_spectrum_2d(f);
        double sum = 0.0;
        for (double v : spec) sum += v;
        CHECK(std::abs(sum - f.squaredNorm()) <= 1e-10 * f.squaredNorm());

        // 90-degree grid rotation permutes modes within shells
        Matrix rot(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) rot(i, j) = f(j, (n - i) % n);
        const auto spec_rot = energy_spectrum_2d(rot);
        for (std::size_t k = 0; k < spec.size(); ++k)
            CHECK(std::abs(spec_rot[k] - spec[k]) <= 1e-10 * std::max(1.0, spec[k]));
    }

    CHECK_THROWS_AS(energy_spectrum_2d(Matrix::Zero(4, 6)), std::invalid_argument);
}

TEST_CASE("pointwise_error matches a scalar loop") {
    Rng rng(11);
    std::vector<double> pred(40), truth(40);
    for (std::size_t i = 0; i < 40; ++i) {
        pred[i] = rng.normal();
        truth[i] = rng.normal();
    }
    const auto e = pointwise_error(pred, truth);
    for (std::size_t i = 0; i < 40; ++i) CHECK(e[i] == std::abs(pred[i] - truth[i]));

    const auto zero = pointwise_error(truth, truth);
    for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("cumulative_error: final entry equals the full relative error") {
    Rng rng(13);
    Matrix pred(20, 3), truth(20, 3);
    for (int i = 0; i < pred.size(); ++i) {
        pred.data()[i] = rng.normal();
        truth.data()[i] = rng.normal();
    }
    const auto curve = cumulative_error(pred, truth);
    REQUIRE(curve.size() == 20);
    for (double v : curve) CHECK(v >= 0.0);
    std::vector<double> pv(pred.size()), tv(truth.size());
    for (int t = 0; t < 20; ++t)
        for (int c = 0; c < 3; ++c) {
            pv[static_cast<std::size_t>(t * 3 + c)] = pred(t, c);
            tv[static_cast<std::size_t>(t * 3 + c)] = truth(t, c);
        }
    CHECK(curve.back() == doctest::Approx(relative_l2(pv, tv)).epsilon(1e-12));

    const auto zeros = cumulative_error(truth, truth);
    for (double v : zeros) CHECK(v == 0.0);

    // zero truth prefix is flagged as undefined
    Matrix t2 = truth;
    t2.row(0).setZero();
    const auto flagged = cumulative_error(pred, t2);
    CHECK(std::isnan(flagged[0]));
    CHECK_FALSE(std::isnan(flagged[1]));
}

TEST_CASE("evaluate_model: a perfect model scores zero; aggregates are consistent") {
    GenerateOptions opt;
    opt.count = 10;
    opt.base_seed = 21;
    const Dataset base =
        generate_dataset(make_benchmark_spec(BenchmarkId::Burgers1d, {{"nx", 32.0}, {"nt", 11.0}}), opt);

    ModelConfig mc;
    mc.variant = Variant::Fedonet;
    mc.latent_p = 4;
    mc.out_channels = 1;
    mc.sensor_count = 32;
    mc.coord_dim = 2;
    mc.embed = EmbedConfig{4, 5.0, 3};
    mc.branch_layers = {32, 8, 4};
    mc.trunk_layers = {8, 8, 4};
    const DeepOnetModel model = build_model(mc, 7);

    // copy the model's own predictions into the targets: a perfect model
    Dataset ds = base;
    for (std::int64_t i = 0; i < ds.count(); ++i) {
        const Matrix pred = predict_field(model, ds.branch.row(i).transpose(), ds.coords);
        auto target = ds.target_mut(i);
        for (std::int64_t j = 0; j < pred.rows(); ++j) target[static_cast<std::size_t>(j)] = pred(j, 0);
    }
    const EvalReport perfect = evaluate_model(model, ds, Split::All);
    CHECK(perfect.mean == 0.0);
    CHECK(perfect.max == 0.0);

    const EvalReport r = evaluate_model(model, base, Split::Test);
    CHECK(r.per_sample_rel_l2.size() == static_cast<std::size_t>(base.test_count()));
    double mean = 0.0;
    for (double v : r.per_sample_rel_l2) mean += v;
    mean /= static_cast<double>(r.per_sample_rel_l2.size());
    CHECK(r.mean == doctest::Approx(mean).epsilon(1e-14));
    double mn = r.per_sample_rel_l2[0], mx = r.per_sample_rel_l2[0];
    for (double v : r.per_sample_rel_l2) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(r.min == mn);
    CHECK(r.max == mx);

    // purity: repeated calls agree bit-exactly
    const EvalReport r2 = evaluate_model(model, base, Split::Test);
    CHECK(r.per_sample_rel_l2 == r2.per_sample_rel_l2);

    // best/worst indices point at the right samples
    CHECK(r.per_sample_rel_l2[static_cast<std::size_t>(r.best_index - base.train_count)] == r.min);
    CHECK(r.per_sample_rel_l2[static_cast<std::size_t>(r.worst_index - base.train_count)] == r.max);
}

TEST_CASE("evaluate_model rejects a mismatched model") {
    GenerateOptions opt;
    opt.count = 3;
    opt.base_seed = 2;
    const Dataset ds =
        generate_dataset(make_benchmark_spec(BenchmarkId::Burgers1d, {{"nx", 32.0}, {"nt", 11.0}}), opt);
    ModelConfig mc;
    mc.variant = Variant::Vanilla;
    mc.latent_p = 4;
    mc.out_channels = 1;
    mc.sensor_count = 16;  // wrong sensor count
    mc.coord_dim = 2;
    mc.branch_layers = {16, 8, 4};
    mc.trunk_layers = {2, 8, 4};
    const DeepOnetModel model = build_model(mc, 3);
    CHECK_THROWS_AS(evaluate_model(model, ds, Split::All), std::invalid_argument);
}
