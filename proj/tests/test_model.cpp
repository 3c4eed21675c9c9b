#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedonet/model.hpp"
#include "fedonet/rng.hpp"

#include <cmath>
#include <string>
#include <thread>

using namespace fedonet;

namespace {

ModelConfig small_config(Variant variant) {
    ModelConfig mc;
    mc.variant = variant;
    mc.latent_p = 2;
    mc.out_channels = 1;
    mc.sensor_count = 3;
    mc.coord_dim = 2;
    mc.branch_layers = {3, 5, 2};
    if (variant == Variant::Fedonet) {
        mc.embed = EmbedConfig{4, 3.0, 7};
        mc.trunk_layers = {8, 5, 2};
    } else {
        mc.trunk_layers = {2, 5, 2};
    }
    return mc;
}

// Scalar-loop evaluation of the branch-trunk dot product, independent of
// the batched path.
double naive_prediction(const DeepOnetModel& model, const Matrix& branch_out, const Matrix& trunk_out,
                        std::int64_t i, std::int64_t j, int ch) {
    double acc = 0.0;
    for (int k = 0; k < model.config.latent_p; ++k)
        acc += branch_out(i, ch * model.config.latent_p + k) * trunk_out(j, ch * model.config.latent_p + k);
    return acc;
}

}  // namespace

TEST_CASE("config validation names the violated equality") {
    ModelConfig ok = small_config(Variant::Vanilla);
    CHECK_NOTHROW(validate_config(ok));

    ModelConfig fed = small_config(Variant::Fedonet);
    fed.embed->mapping_size = 64;
    fed.trunk_layers = {100, 5, 2};
    try {
        validate_config(fed);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("128") != std::string::npos);
        CHECK(std::string(e.what()).find("100") != std::string::npos);
    }

    ModelConfig multi = small_config(Variant::Vanilla);
    multi.latent_p = 32;
    multi.out_channels = 3;
    multi.branch_layers = {3, 16, 96};
    multi.trunk_layers = {2, 16, 96};
    CHECK_NOTHROW(validate_config(multi));

    ModelConfig bad = multi;
    bad.branch_layers.back() = 95;
    CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);

    ModelConfig no_embed = small_config(Variant::Fedonet);
    no_embed.embed.reset();
    CHECK_THROWS_AS(validate_config(no_embed), std::invalid_argument);
}

TEST_CASE("zero branch output forces zero predictions") {
    DeepOnetModel model = build_model(small_config(Variant::Vanilla), 3);
    model.branch.weights.back().setZero();
    model.branch.biases.back().setZero();
    Matrix u = Matrix::Random(4, 3);
    Matrix coords = Matrix::Random(6, 2).cwiseAbs();
    const Tensor3 pred = model_forward(model, u, coords);
    for (double v : pred.v) CHECK(v == 0.0);
}

TEST_CASE("p=1: prediction is branch scalar times trunk basis (bilinearity)") {
    ModelConfig mc;
    mc.variant = Variant::Vanilla;
    mc.latent_p = 1;
    mc.out_channels = 1;
    mc.sensor_count = 2;
    mc.coord_dim = 1;
    mc.branch_layers = {2, 3, 1};
    mc.trunk_layers = {1, 3, 1};
    DeepOnetModel model = build_model(mc, 5);
    // force the branch to output the constant 2
    for (auto& w : model.branch.weights) w.setZero();
    model.branch.biases.back()(0) = 2.0;

    Matrix u = Matrix::Random(1, 2);
    Matrix coords(4, 1);
    coords << 0.0, 0.25, 0.5, 0.75;
    const Tensor3 pred = model_forward(model, u, coords);
    const Matrix trunk_out = mlp_forward_nocache(model.trunk, coords);
    for (int j = 0; j < 4; ++j) CHECK(pred.at(0, j, 0) == doctest::Approx(2.0 * trunk_out(j, 0)));
}

TEST_CASE("branch scaling scales predictions exactly (bilinearity)") {
    DeepOnetModel model = build_model(small_config(Variant::Fedonet), 11);
    Matrix u = Matrix::Random(2, 3);
    Matrix coords = Matrix::Random(5, 2).cwiseAbs();
    const Tensor3 base = model_forward(model, u, coords);
    model.branch.weights.back() *= 3.0;
    model.branch.biases.back() *= 3.0;
    const Tensor3 scaled = model_forward(model, u, coords);
    for (std::size_t i = 0; i < base.v.size(); ++i)
        CHECK(scaled.v[i] == doctest::Approx(3.0 * base.v[i]).epsilon(1e-12));
}

TEST_CASE("dense forward matches the scalar-loop oracle, multi-channel") {
    ModelConfig mc;
    mc.variant = Variant::Fedonet;
    mc.latent_p = 3;
    mc.out_channels = 2;
    mc.sensor_count = 4;
    mc.coord_dim = 2;
    mc.embed = EmbedConfig{5, 2.0, 13};
    mc.branch_layers = {4, 7, 6};
    mc.trunk_layers = {10, 7, 6};
    DeepOnetModel model = build_model(mc, 21);
    Rng rng(3);
    Matrix u(3, 4), coords(4, 2);
    for (int i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
    for (int i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform01();

    ModelCache cache;
    const Tensor3 pred = model_forward(model, u, coords, &cache);
    for (std::int64_t i = 0; i < 3; ++i)
        for (std::int64_t j = 0; j < 4; ++j)
            for (int ch = 0; ch < 2; ++ch) {
                const double want = naive_prediction(model, cache.branch_out, cache.trunk_out, i, j, ch);
                CHECK(std::abs(pred.at(i, j, ch) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
            }
}

TEST_CASE("paired forward agrees with dense forward on the diagonal blocks") {
    DeepOnetModel model = build_model(small_config(Variant::Fedonet), 31);
    Rng rng(8);
    const std::int64_t b = 3, q = 4;
    Matrix u(b, 3), coords(b * q, 2);
    for (int i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
    for (int i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform01();
    const Tensor3 paired = model_forward_paired(model, u, coords, q);
    const Tensor3 dense = model_forward(model, u, coords);
    for (std::int64_t i = 0; i < b; ++i)
        for (std::int64_t j = 0; j < q; ++j)
            CHECK(paired.at(i, j, 0) == doctest::Approx(dense.at(i, i * q + j, 0)).epsilon(1e-13));
}

TEST_CASE("model gradients match finite differences; freq stays frozen") {
    for (Variant variant : {Variant::Vanilla, Variant::Fedonet}) {
        DeepOnetModel model = build_model(small_config(variant), 17);
        Rng rng(19);
        Matrix u(2, 3), coords(3, 2);
        for (int i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
        for (int i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform01();
        Tensor3 dl(2, 3, 1);
        for (auto& v : dl.v) v = rng.normal();

        const Matrix freq_before = model.freq ? model.freq->B : Matrix();
        ModelCache cache;
        model_forward(model, u, coords, &cache);
        const ModelGrads grads = model_backward(model, cache, dl);

        auto loss_of = [&]() {
            const Tensor3 pred = model_forward(model, u, coords);
            double s = 0.0;
            for (std::size_t i = 0; i < pred.v.size(); ++i) s += pred.v[i] * dl.v[i];
            return s;
        };
        const double h = 1e-6;
        double worst = 0.0;
        auto probe = [&](double& value, double grad) {
            const double save = value;
            value = save + h;
            const double lp = loss_of();
            value = save - h;
            const double lm = loss_of();
            value = save;
            const double fd = (lp - lm) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - grad) / std::max({std::abs(fd), std::abs(grad), 1e-4}));
        };
        for (std::size_t l = 0; l < model.branch.weights.size(); ++l) {
            for (int i = 0; i < model.branch.weights[l].size(); ++i)
                probe(model.branch.weights[l].data()[i], grads.branch.weights[l].data()[i]);
            for (int i = 0; i < model.branch.biases[l].size(); ++i)
                probe(model.branch.biases[l].data()[i], grads.branch.biases[l].data()[i]);
        }
        for (std::size_t l = 0; l < model.trunk.weights.size(); ++l) {
            for (int i = 0; i < model.trunk.weights[l].size(); ++i)
                probe(model.trunk.weights[l].data()[i], grads.trunk.weights[l].data()[i]);
            for (int i = 0; i < model.trunk.biases[l].size(); ++i)
                probe(model.trunk.biases[l].data()[i], grads.trunk.biases[l].data()[i]);
        }
        CHECK(worst <= 1e-5);
        if (model.freq) CHECK((model.freq->B == freq_before));

        // zero upstream gradient
        Tensor3 zero(2, 3, 1);
        const ModelGrads zg = model_backward(model, cache, zero);
        for (const auto& w : zg.branch.weights) CHECK(w.isZero());
        for (const auto& w : zg.trunk.weights) CHECK(w.isZero());
    }
}

TEST_CASE("predict_field: permutation equivariance and resolution independence") {
    DeepOnetModel model = build_model(small_config(Variant::Fedonet), 41);
    Rng rng(23);
    Vector u(3);
    u << rng.normal(), rng.normal(), rng.normal();

    Matrix grid(6, 2);
    for (int i = 0; i < grid.size(); ++i) grid.data()[i] = rng.uniform01();
    const Matrix out = predict_field(model, u, grid);
    CHECK(out.rows() == 6);
    CHECK(out.cols() == 1);

    // single point
    const Matrix single = predict_field(model, u, grid.topRows(1));
    CHECK(single(0, 0) == doctest::Approx(out(0, 0)));

    // permuted queries give the same values per coordinate
    Matrix perm(6, 2);
    const int order[6] = {5, 3, 0, 1, 4, 2};
    for (int i = 0; i < 6; ++i) perm.row(i) = grid.row(order[i]);
    const Matrix out_perm = predict_field(model, u, perm);
    for (int i = 0; i < 6; ++i) CHECK(out_perm(i, 0) == out(order[i], 0));

    // doubling resolution leaves shared coordinates untouched (values depend
    // only on zeta; tolerance covers batched-GEMM kernel differences)
    Matrix fine(12, 2);
    fine.topRows(6) = grid;
    for (int i = 0; i < 6; ++i) fine.row(6 + i) = grid.row(i) * 0.5;
    const Matrix out_fine = predict_field(model, u, fine);
    for (int i = 0; i < 6; ++i)
        CHECK(std::abs(out_fine(i, 0) - out(i, 0)) <= 1e-12 * std::max(1.0, std::abs(out(i, 0))));
}

TEST_CASE("frozen models evaluate identically from concurrent threads") {
    const DeepOnetModel model = build_model(small_config(Variant::Fedonet), 61);
    Rng rng(37);
    Vector u(3);
    u << rng.normal(), rng.normal(), rng.normal();
    Matrix grid(32, 2);
    for (int i = 0; i < grid.size(); ++i) grid.data()[i] = rng.uniform01();
    const Matrix want = predict_field(model, u, grid);

    std::vector<Matrix> results(4);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] { results[static_cast<std::size_t>(t)] = predict_field(model, u, grid); });
    for (auto& t : pool) t.join();
    for (const auto& r : results) CHECK((r == want));
}

TEST_CASE("variant parity: equal-parameter trunks pass the same gradient suite") {
    // vanilla [2,13,8,4] and fedonet M=2 [4,11,8,4] carry exactly the same
    // trunk parameter count: 11*13 + 44 == 13*11 + 44
    ModelConfig van;
    van.variant = Variant::Vanilla;
    van.latent_p = 4;
    van.out_channels = 1;
    van.sensor_count = 3;
    van.coord_dim = 2;
    van.branch_layers = {3, 6, 4};
    van.trunk_layers = {2, 13, 8, 4};

    ModelConfig fed = van;
    fed.variant = Variant::Fedonet;
    fed.embed = EmbedConfig{2, 5.0, 3};
    fed.trunk_layers = {4, 11, 8, 4};

    const DeepOnetModel a = build_model(van, 51);
    const DeepOnetModel b = build_model(fed, 52);
    REQUIRE(a.trunk.parameter_count() == b.trunk.parameter_count());

    Rng rng(29);
    Matrix u(2, 3), coords(3, 2);
    for (int i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
    for (int i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform01();
    Tensor3 dl(2, 3, 1);
    for (auto& v : dl.v) v = rng.normal();

    for (const DeepOnetModel* model : {&a, &b}) {
        DeepOnetModel m = *model;
        ModelCache cache;
        const Tensor3 pred = model_forward(m, u, coords, &cache);
        CHECK(pred.n == 2);
        CHECK(pred.q == 3);
        const ModelGrads grads = model_backward(m, cache, dl);
        auto loss_of = [&]() {
            const Tensor3 p = model_forward(m, u, coords);
            double s = 0.0;
            for (std::size_t i = 0; i < p.v.size(); ++i) s += p.v[i] * dl.v[i];
            return s;
        };
        const double h = 1e-6;
        double worst = 0.0;
        for (std::size_t l = 0; l < m.trunk.weights.size(); ++l)
            for (int i = 0; i < m.trunk.weights[l].size(); ++i) {
                double& value = m.trunk.weights[l].data()[i];
                const double save = value;
                value = save + h;
                const double lp = loss_of();
                value = save - h;
                const double lm = loss_of();
                value = save;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = grads.trunk.weights[l].data()[i];
                worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4}));
            }
        CHECK(worst <= 1e-5);
    }
}
