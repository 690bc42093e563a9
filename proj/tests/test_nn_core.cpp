#include <doctest.h>

#include <cmath>

#include "gmsplit/dataset.hpp"
#include "gmsplit/finite_diff.hpp"
#include "gmsplit/loss.hpp"
#include "gmsplit/ops.hpp"
#include "gmsplit/optim.hpp"
#include "gmsplit/rng.hpp"

using namespace gmsplit;

namespace {

ParamBundle random_linear(std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    ParamBundle b;
    Tensor w({d, d});
    for (double& v : w.values()) v = rng.uniform(-1.0, 1.0);
    Tensor bias({d});
    for (double& v : bias.values()) v = rng.uniform(-0.5, 0.5);
    b.params.emplace_back(ParamId{0, 0, "weight"}, std::move(w));
    b.params.emplace_back(ParamId{0, 0, "bias"}, std::move(bias));
    return b;
}

Tensor random_input(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Tensor x({rows, cols});
    for (double& v : x.values()) v = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("op_forward basics") {
    const Tensor x({1, 2}, {1.0, 2.0});
    CHECK(op_forward(OpKind::Zero, nullptr, x).values() == std::vector<double>{0.0, 0.0});
    CHECK(op_forward(OpKind::Skip, nullptr, x).values() == std::vector<double>{1.0, 2.0});

    // window-3 average with edge replication: (3+3+6)/3, (3+6+9)/3, (6+9+9)/3
    const Tensor spread({1, 3}, {3.0, 6.0, 9.0});
    const Tensor avg = op_forward(OpKind::FeatAvg, nullptr, spread);
    CHECK(avg[0] == doctest::Approx(4.0));
    CHECK(avg[1] == doctest::Approx(6.0));
    CHECK(avg[2] == doctest::Approx(8.0));
}

TEST_CASE("op_forward shape errors carry context") {
    const Tensor x({2, 3});
    ParamBundle bad = random_linear(4, 1);
    CHECK_THROWS_AS(op_forward(OpKind::LinearTanh, &bad, x, "edge 1 op linear_tanh"), ShapeError);
    CHECK_THROWS_AS(op_forward(OpKind::LinearRelu, nullptr, x), ShapeError);
    try {
        op_forward(OpKind::LinearTanh, &bad, x, "edge 1 op linear_tanh");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("edge 1") != std::string::npos);
    }
}

TEST_CASE("op_backward trivial kinds") {
    const Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
    const Tensor g({2, 3}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    const auto zero = op_backward(OpKind::Zero, nullptr, x, g);
    CHECK(zero.input_grad.values() == std::vector<double>(6, 0.0));
    CHECK(zero.param_grads.empty());
    const auto skip = op_backward(OpKind::Skip, nullptr, x, g);
    CHECK(skip.input_grad.values() == g.values());
}

TEST_CASE("op gradients match finite differences") {
    // every kind, many random shape-valid inputs through a scalar readout
    const double h = 1e-5;
    int cases = 0;
    for (OpKind kind : {OpKind::Zero, OpKind::Skip, OpKind::LinearTanh, OpKind::LinearRelu,
                        OpKind::FeatAvg}) {
        for (std::uint64_t trial = 0; trial < 12; ++trial) {
            const std::size_t d = 2 + trial % 4;
            const std::size_t batch = 1 + trial % 3;
            ParamBundle bundle = random_linear(d, 100 + trial);
            ParamBundle* params = op_is_parametric(kind) ? &bundle : nullptr;
            Tensor x = random_input(batch, d, 200 + trial);
            Tensor readout = random_input(batch, d, 300 + trial);

            auto loss_of = [&](const Tensor& input) {
                const Tensor y = op_forward(kind, params, input);
                double s = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) s += readout[i] * y[i];
                return s;
            };

            const auto back = op_backward(kind, params, x, readout);

            // input gradient via a fake parameter holding x
            Parameter x_param(ParamId{0, 0, "input"}, x);
            const auto fd_input = finite_diff_grad(
                [&] { return loss_of(x_param.value); }, {&x_param}, h);
            for (std::size_t i = 0; i < x.size(); ++i) {
                CHECK(grad_rel_err(back.input_grad[i], fd_input[0][i]) < 1e-6);
            }

            if (params) {
                const auto fd_params = finite_diff_grad(
                    [&] { return loss_of(x); },
                    {&bundle.params[0], &bundle.params[1]}, h);
                for (std::size_t k = 0; k < 2; ++k) {
                    for (std::size_t i = 0; i < fd_params[k].size(); ++i) {
                        CHECK(grad_rel_err(back.param_grads[k][i], fd_params[k][i]) < 1e-6);
                    }
                }
            }
            ++cases;
        }
    }
    CHECK(cases >= 50);
}

TEST_CASE("cross_entropy values and gradient") {
    SUBCASE("uniform logits give ln C") {
        const Tensor logits({1, 2}, {0.3, 0.3});
        const auto r = cross_entropy(logits, {0});
        CHECK(r.loss == doctest::Approx(std::log(2.0)));
        const Tensor logits5({2, 5}, std::vector<double>(10, -1.7));
        CHECK(cross_entropy(logits5, {3, 0}).loss == doctest::Approx(std::log(5.0)));
    }
    SUBCASE("confident correct logits drive the loss to zero") {
        double prev = 1e9;
        for (double margin : {2.0, 5.0, 10.0, 20.0}) {
            const Tensor logits({1, 3}, {margin, 0.0, 0.0});
            const double loss = cross_entropy(logits, {0}).loss;
            CHECK(loss < prev);
            prev = loss;
        }
        CHECK(prev < 1e-8);
    }
    SUBCASE("gradient matches finite differences on a random 4x3 case") {
        Tensor logits = random_input(4, 3, 42);
        const std::vector<int> labels{0, 2, 1, 2};
        const auto r = cross_entropy(logits, labels);
        Parameter p(ParamId{0, 0, "logits"}, logits);
        const auto fd = finite_diff_grad(
            [&] { return cross_entropy(p.value, labels).loss; }, {&p}, 1e-5);
        for (std::size_t i = 0; i < logits.size(); ++i) {
            CHECK(grad_rel_err(r.logit_grad[i], fd[0][i]) < 1e-6);
        }
    }
    SUBCASE("loss is non-negative") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            Tensor logits = random_input(3, 4, 1000 + s);
            CHECK(cross_entropy(logits, {0, 1, 2}).loss >= 0.0);
        }
    }
}

TEST_CASE("sgd_step") {
    OptimizerConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.0;
    cfg.schedule = LrSchedule::Constant;

    SUBCASE("plain gradient step") {
        Parameter w(ParamId{0, 0, "weight"}, Tensor({1}, {0.0}));
        w.grad[0] = 1.0;
        sgd_step(w, cfg, 0.0);
        CHECK(w.value[0] == doctest::Approx(-1.0));
    }
    SUBCASE("zero gradient and zero momentum buffer is a fixed point") {
        Parameter w(ParamId{0, 0, "weight"}, Tensor({1}, {0.7}));
        sgd_step(w, cfg, 0.0);
        CHECK(w.value[0] == doctest::Approx(0.7));
    }
    SUBCASE("two momentum steps match the scalar recurrence") {
        // v1 = g1, w1 = w0 - lr v1; v2 = m v1 + g2, w2 = w1 - lr v2
        cfg.momentum = 0.9;
        cfg.learning_rate = 0.1;
        Parameter w(ParamId{0, 0, "weight"}, Tensor({1}, {1.0}));
        w.grad[0] = 0.5;
        sgd_step(w, cfg, 0.0);
        const double v1 = 0.5;
        const double w1 = 1.0 - 0.1 * v1;
        CHECK(w.value[0] == doctest::Approx(w1));
        w.grad[0] = -0.25;
        sgd_step(w, cfg, 0.0);
        const double v2 = 0.9 * v1 - 0.25;
        CHECK(w.value[0] == doctest::Approx(w1 - 0.1 * v2));
    }
    SUBCASE("cosine schedule endpoints") {
        cfg.schedule = LrSchedule::Cosine;
        cfg.learning_rate = 0.4;
        CHECK(cfg.lr_at(0.0) == doctest::Approx(0.4));
        CHECK(cfg.lr_at(0.5) == doctest::Approx(0.2));
        CHECK(cfg.lr_at(1.0) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("finite_diff_grad sanity") {
    Parameter w(ParamId{0, 0, "w"}, Tensor({2}, {3.0, -1.0}));
    // loss = w0^2, constant in w1
    const auto fd = finite_diff_grad([&] { return w.value[0] * w.value[0]; }, {&w}, 1e-5);
    CHECK(std::fabs(fd[0][0] - 6.0) < 1e-8);
    CHECK(std::fabs(fd[0][1]) < 1e-10);
    CHECK_THROWS_AS(finite_diff_grad([] { return 0.0; }, {}, 0.0), ShapeError);
}

TEST_CASE("spiral dataset") {
    SUBCASE("same seed twice is bitwise identical") {
        const Dataset a = make_spiral_dataset(7, 50, 3, 0.15);
        const Dataset b = make_spiral_dataset(7, 50, 3, 0.15);
        CHECK(a.inputs.values() == b.inputs.values());
        CHECK(a.labels == b.labels);
        CHECK(a.train_idx == b.train_idx);
        CHECK(a.valid_idx == b.valid_idx);
    }
    SUBCASE("different seeds differ") {
        const Dataset a = make_spiral_dataset(7, 50, 3, 0.15);
        const Dataset b = make_spiral_dataset(8, 50, 3, 0.15);
        CHECK(a.inputs.values() != b.inputs.values());
    }
    SUBCASE("split is a stratified disjoint cover") {
        const Dataset d = make_spiral_dataset(11, 40, 4, 0.1);
        CHECK(d.train_idx.size() + d.valid_idx.size() == d.size());
        std::vector<int> seen(d.size(), 0);
        for (std::size_t i : d.train_idx) seen[i]++;
        for (std::size_t i : d.valid_idx) seen[i]++;
        for (int s : seen) CHECK(s == 1);
        std::vector<int> train_per_class(4, 0), valid_per_class(4, 0);
        for (std::size_t i : d.train_idx) train_per_class[d.labels[i]]++;
        for (std::size_t i : d.valid_idx) valid_per_class[d.labels[i]]++;
        for (int c = 0; c < 4; ++c) {
            CHECK(train_per_class[c] == 32);
            CHECK(valid_per_class[c] == 8);
        }
    }
    SUBCASE("noiseless points lie on the embedded curves") {
        // with zero noise the same (class, t) position regenerates exactly
        const Dataset a = make_spiral_dataset(3, 20, 2, 0.0);
        const Dataset b = make_spiral_dataset(3, 20, 2, 0.0);
        CHECK(a.inputs.values() == b.inputs.values());
        // rank of the lifted cloud stays 2: every point is a combination of
        // the two embedding rows, so any 3 points are linearly dependent in
        // the lifted space; check via the Gram determinant of 3 points
        const auto& x = a.inputs;
        double g[3][3];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double dot = 0.0;
                for (std::size_t k = 0; k < x.cols(); ++k) dot += x.at(i, k) * x.at(j, k);
                g[i][j] = dot;
            }
        }
        const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                           g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                           g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        CHECK(std::fabs(det) < 1e-9);
    }
    SUBCASE("constructor validates") {
        CHECK_THROWS_AS(make_spiral_dataset(1, 10, 3, 0.1), ShapeError);
        CHECK_THROWS_AS(make_spiral_dataset(1, 30, 1, 0.1), ShapeError);
    }
}

TEST_CASE("batching") {
    const Dataset d = make_spiral_dataset(5, 40, 3, 0.1);
    Rng rng(99);
    const auto batches = epoch_batches(d, d.train_idx, 16, rng);
    CHECK(batches.size() == d.train_idx.size() / 16);
    for (const auto& b : batches) {
        CHECK(b.x.rows() == 16);
        CHECK(b.labels.size() == 16);
    }
    Rng rng2(99);
    const auto again = epoch_batches(d, d.train_idx, 16, rng2);
    CHECK(again[0].x.values() == batches[0].x.values());
    CHECK_THROWS_AS(epoch_batches(d, d.train_idx, d.train_idx.size() + 1, rng), ShapeError);
}

TEST_CASE("rng determinism and uniformity") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng u(7);
    int low = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        if (u.next_below(4) < 2) ++low;
    }
    CHECK(low > n / 2 - 600);
    CHECK(low < n / 2 + 600);
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
}
