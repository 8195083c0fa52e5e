#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "gradcheck.hpp"
#include "pdn/errors.hpp"
#include "pdn/model.hpp"
#include "pdn/network.hpp"
#include "tempdir.hpp"

using namespace pdn;

namespace {

NetworkWeights single_layer(std::size_t in, std::size_t out, Activation act, bool bn = false) {
    const LayerSpec spec{in, out, act, bn};
    return init_weights(std::span<const LayerSpec>(&spec, 1), 1);
}

}  // namespace

TEST_CASE("zero weights give zero activations") {
    NetworkWeights w = init_weights(chain_specs(3, std::vector<std::size_t>{4}, Activation::relu, false, 2, Activation::relu), 7);
    for (auto& l : w.layers) std::fill(l.weight.values().begin(), l.weight.values().end(), 0.0);
    const ForwardTrace t = forward(w, Matrix::from_rows({{1.0, -2.0, 3.0}, {0.5, 0.5, 0.5}}), PassMode::infer);
    for (const auto& lt : t.layers) {
        for (double v : lt.pre_activation.values()) CHECK(v == 0.0);
    }
    for (double v : t.output.values()) CHECK(v == 0.0);
}

TEST_CASE("relu of an identity layer") {
    NetworkWeights w = single_layer(2, 2, Activation::relu);
    w.layers[0].weight = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    const Matrix out = predict(w, Matrix::from_rows({{-1.0, 2.0}}));
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 2.0);
}

TEST_CASE("hand-computed 2 -> 1 layer") {
    NetworkWeights w = single_layer(2, 1, Activation::linear);
    w.layers[0].weight = Matrix::from_rows({{0.5}, {-1.5}});
    w.layers[0].bias = {0.25};
    const Matrix out = predict(w, Matrix::from_rows({{2.0, 1.0}, {-4.0, 0.0}}));
    CHECK(out(0, 0) == doctest::Approx(0.5 * 2.0 - 1.5 * 1.0 + 0.25));
    CHECK(out(1, 0) == doctest::Approx(-2.0 + 0.25));
    w.layers[0].spec.activation = Activation::relu6;
    w.layers[0].weight = Matrix::from_rows({{4.0}, {0.0}});
    CHECK(predict(w, Matrix::from_rows({{2.0, 0.0}}))(0, 0) == 6.0);
}

TEST_CASE("shape mismatches are errors") {
    NetworkWeights w = single_layer(3, 2, Activation::relu);
    CHECK_THROWS_AS(forward(w, Matrix(2, 4), PassMode::train), DomainError);
    const ForwardTrace t = forward(w, Matrix(2, 3, 1.0), PassMode::train);
    CHECK_THROWS_AS(backward(w, t, Matrix(2, 3)), DomainError);
    NetworkWeights other = single_layer(3, 2, Activation::relu);
    other.layers.push_back(other.layers[0]);
    CHECK_THROWS_AS(backward(other, t, Matrix(2, 2)), DomainError);
    NetworkWeights bn = single_layer(3, 2, Activation::relu, true);
    CHECK_THROWS_AS(forward(bn, Matrix(1, 3), PassMode::train), DomainError);
    CHECK_NOTHROW(forward(bn, Matrix(1, 3), PassMode::infer));
}

TEST_CASE("backward base cases") {
    NetworkWeights w = single_layer(1, 1, Activation::linear);
    w.layers[0].weight(0, 0) = 0.7;
    const Matrix x = Matrix::from_rows({{1.3}});
    const ForwardTrace t = forward(w, x, PassMode::train);
    const NetworkGradients g = backward(w, t, Matrix::from_rows({{-0.4}}));
    CHECK(g.layers[0].weight(0, 0) == 1.3 * -0.4);
    CHECK(g.layers[0].bias[0] == -0.4);
    CHECK(g.input(0, 0) == 0.7 * -0.4);

    NetworkWeights deep =
        init_weights(chain_specs(4, std::vector<std::size_t>{5, 6}, Activation::relu, true, 3, Activation::linear), 3);
    Rng rng(1);
    const Matrix xb = gradcheck::random_matrix(rng, 6, 4);
    const NetworkGradients zero = backward(deep, forward(deep, xb, PassMode::train), Matrix(6, 3));
    for (const auto& lg : zero.layers) {
        for (double v : lg.weight.values()) CHECK(v == 0.0);
        for (double v : lg.bias) CHECK(v == 0.0);
        for (double v : lg.gamma) CHECK(v == 0.0);
        for (double v : lg.beta) CHECK(v == 0.0);
    }
}

TEST_CASE("gradients match central differences") {
    Rng rng(2024);
    gradcheck::Tally total;
    std::size_t trials = 0;
    const Activation acts[] = {Activation::relu, Activation::relu6, Activation::linear};
    for (int attempt = 0; attempt < 60 && trials < 12; ++attempt) {
        const Activation act = acts[attempt % 3];
        const bool bn = attempt % 2 == 0;
        NetworkWeights w = init_weights(
            chain_specs(3, std::vector<std::size_t>{4, 5}, act, bn, 2, Activation::linear), rng.next_u64());
        gradcheck::jitter_batch_norm(w, rng);
        const Matrix x = gradcheck::random_matrix(rng, 5, 3, act == Activation::relu6 ? 4.0 : 1.0);
        if (gradcheck::near_kink(w, forward(w, x, PassMode::train))) continue;
        total.merge(gradcheck::check_network(w, x, gradcheck::random_matrix(rng, 5, 2)));
        ++trials;
    }
    CHECK(trials >= 10);
    CHECK(total.failed == 0);
    CHECK(total.worst < 1e-4);
}

TEST_CASE("batch normalization statistics") {
    NetworkWeights w = single_layer(4, 6, Activation::linear, true);
    Rng rng(8);
    const Matrix x = gradcheck::random_matrix(rng, 32, 4, 3.0);
    const ForwardTrace t = forward(w, x, PassMode::train);
    const Matrix& xh = t.layers[0].normalized;
    for (std::size_t j = 0; j < 6; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t r = 0; r < 32; ++r) mean += xh(r, j);
        mean /= 32.0;
        for (std::size_t r = 0; r < 32; ++r) var += (xh(r, j) - mean) * (xh(r, j) - mean);
        var /= 32.0;
        CHECK(std::abs(mean) < 1e-6);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }

    // Running statistics: momentum 0.9 with the unbiased batch variance.
    NetworkWeights updated = w;
    update_running_stats(updated, t);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(updated.layers[0].running_mean[j] == doctest::Approx(0.1 * t.batch_mean[0][j]).epsilon(1e-12));
        CHECK(updated.layers[0].running_var[j] ==
              doctest::Approx(0.9 + 0.1 * t.batch_var[0][j] * 32.0 / 31.0).epsilon(1e-12));
    }
    // forward itself leaves the weights untouched.
    CHECK(w.layers[0].running_mean == std::vector<double>(6, 0.0));

    // Infer mode normalizes with the running estimates.
    const Matrix one = gather_rows(x, std::vector<std::size_t>{3});
    const ForwardTrace inf = forward(updated, one, PassMode::infer);
    Matrix z;
    matmul(one, updated.layers[0].weight, z);
    for (std::size_t j = 0; j < 6; ++j) {
        const double expect = (z(0, j) + updated.layers[0].bias[j] - updated.layers[0].running_mean[j]) /
                              std::sqrt(updated.layers[0].running_var[j] + kBatchNormEpsilon);
        CHECK(inf.output(0, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("Adam") {
    SUBCASE("zero gradients leave weights unchanged") {
        std::vector<double> values{1.0, -2.0}, grads{0.0, 0.0};
        const ParamBlock block{values, grads, 0};
        AdamState s;
        adam_step(std::span<const ParamBlock>(&block, 1), s);
        CHECK(values == std::vector<double>{1.0, -2.0});
        CHECK(s.step == 1);
    }
    SUBCASE("first step of a constant gradient") {
        for (double g : {3.0, -0.25, 1e-3}) {
            std::vector<double> value{0.5}, grad{g};
            const ParamBlock block{value, grad, 0};
            AdamState s;
            s.learning_rate = 1e-3;
            adam_step(std::span<const ParamBlock>(&block, 1), s);
            const double moved = value[0] - 0.5;
            CHECK(moved == doctest::Approx(-1e-3 * g / (std::abs(g) + 1e-8)).epsilon(1e-12));
            CHECK(std::abs(moved + 1e-3 * (g > 0 ? 1.0 : -1.0)) < 1e-7);
        }
    }
    SUBCASE("non-finite gradients name the layer and change nothing") {
        std::vector<double> a{1.0}, ga{0.5}, b{2.0}, gb{std::nan("")};
        const ParamBlock blocks[] = {{a, ga, 0}, {b, gb, 3}};
        AdamState s;
        try {
            adam_step(blocks, s);
            FAIL("accepted a NaN gradient");
        } catch (const TrainingError& e) {
            CHECK(e.where() == 3);
        }
        CHECK(a[0] == 1.0);
        CHECK(s.step == 0);
    }
    SUBCASE("deterministic trajectories") {
        const auto run = [] {
            NetworkWeights w = init_weights(
                chain_specs(3, std::vector<std::size_t>{8}, Activation::relu, true, 2, Activation::linear), 5);
            Rng rng(6);
            const Matrix x = gradcheck::random_matrix(rng, 16, 3);
            const Matrix y = gradcheck::random_matrix(rng, 16, 2);
            AdamState s;
            for (int step = 0; step < 25; ++step) {
                const RegressionStep r = mse_loss_and_gradients(w, x, y);
                adam_step(param_blocks(w, r.grads), s);
                update_running_stats(w, forward(w, x, PassMode::train));
            }
            return w;
        };
        CHECK(run() == run());
    }
}

TEST_CASE("initialization") {
    const auto specs = chain_specs(400, std::vector<std::size_t>{300}, Activation::relu, true, 10, Activation::linear);
    const NetworkWeights a = init_weights(specs, 99);
    CHECK(a == init_weights(specs, 99));
    CHECK_FALSE(a == init_weights(specs, 100));
    const auto w = a.layers[0].weight.values();
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size() - 1);
    CHECK(std::abs(var - 2.0 / 400.0) < 0.2 * 2.0 / 400.0);
    for (const auto& l : a.layers) {
        for (double b : l.bias) CHECK(b == 0.0);
        for (double g : l.gamma) CHECK(g == 1.0);
        for (double b : l.beta) CHECK(b == 0.0);
        for (double v : l.running_var) CHECK(v == 1.0);
    }
    CHECK(a.layers[0].spec.batch_norm);
    CHECK_FALSE(a.layers[1].spec.batch_norm);
    CHECK(a.layers[1].spec.activation == Activation::linear);
}

TEST_CASE("weights persistence") {
    TempDir dir;
    NetworkWeights w =
        init_weights(chain_specs(5, std::vector<std::size_t>{7, 4}, Activation::relu6, true, 3, Activation::linear), 12);
    Rng rng(3);
    const Matrix x = gradcheck::random_matrix(rng, 9, 5);
    update_running_stats(w, forward(w, x, PassMode::train));
    save_weights(w, dir / "w.pdnw");
    const NetworkWeights back = load_weights(dir / "w.pdnw");
    CHECK(back == w);
    CHECK(predict(back, x) == predict(w, x));

    auto bytes = io::read_file(dir / "w.pdnw");
    bytes.resize(bytes.size() / 2);
    io::write_file(dir / "cut.pdnw", bytes);
    CHECK_THROWS_AS(load_weights(dir / "cut.pdnw"), FormatError);
    bytes = io::read_file(dir / "w.pdnw");
    bytes[4] = 2;
    io::write_file(dir / "v2.pdnw", bytes);
    CHECK_THROWS_AS(load_weights(dir / "v2.pdnw"), FormatError);
}

TEST_CASE("epoch batches") {
    const auto batches = epoch_batches(10, 3, 7, 0);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 3);
    CHECK(batches[2].size() == 4);  // the lone tenth sample joins the last batch
    std::set<std::size_t> seen;
    for (const auto& b : batches) seen.insert(b.begin(), b.end());
    CHECK(seen.size() == 10);
    CHECK(epoch_batches(10, 3, 7, 0) == batches);
    CHECK_FALSE(epoch_batches(10, 3, 7, 1) == batches);
    CHECK(epoch_batches(11, 3, 7, 0).back().size() == 2);
    CHECK(epoch_batches(1, 4, 7, 0).size() == 1);
    CHECK_THROWS_AS(epoch_batches(5, 0, 1, 0), DomainError);
}
