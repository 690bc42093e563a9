#include <doctest.h>

#include <cmath>

#include "gmsplit/finite_diff.hpp"
#include "gmsplit/supernet.hpp"

using namespace gmsplit;

namespace {

Batch toy_batch(const CellGraph& graph, std::uint64_t seed, std::size_t rows = 5) {
    Rng rng(seed);
    Batch b;
    b.x = Tensor({rows, graph.feature_dim});
    for (double& v : b.x.values()) v = rng.normal();
    b.labels.resize(rows);
    for (int& l : b.labels) l = static_cast<int>(rng.next_below(graph.num_classes));
    return b;
}

}  // namespace

TEST_CASE("enumerate_children counts") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    CHECK(enumerate_children(toy, full).size() == 64);

    Restriction pinned = full;
    pinned.allowed[0] = {1, 2};
    CHECK(enumerate_children(toy, pinned).size() == 32);

    const CellGraph wide = CellGraph::wide_space();
    CHECK(enumerate_children(wide, Restriction::full(wide)).size() == 15625);
}

TEST_CASE("enumerate_children order and errors") {
    const CellGraph toy = CellGraph::toy_space();
    const auto children = enumerate_children(toy, Restriction::full(toy));
    CHECK(children.front().encode() == "0-0-0");
    CHECK(children[1].encode() == "0-0-1");
    CHECK(children.back().encode() == "3-3-3");
    CHECK(std::is_sorted(children.begin(), children.end()));

    Restriction bad = Restriction::full(toy);
    bad.allowed[1] = {9};
    CHECK_THROWS_AS(enumerate_children(toy, bad), ConfigError);
}

TEST_CASE("forward_child trivial paths") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    const SharedWeights weights = SharedWeights::init(toy, full, 5);
    const Batch batch = toy_batch(toy, 17);

    SUBCASE("all-zero arch emits the head bias") {
        Architecture arch;
        arch.choice = {0, 0, 0};
        const Tensor logits = forward_child(weights, toy, arch, batch.x);
        const Tensor& bias = weights.head().params[1].value;
        for (std::size_t r = 0; r < logits.rows(); ++r) {
            for (std::size_t c = 0; c < logits.cols(); ++c) {
                CHECK(logits.at(r, c) == doctest::Approx(bias[c]));
            }
        }
    }
    SUBCASE("skip path on a 2-node graph applies the head to the input") {
        CellGraph line = toy;
        line.num_nodes = 2;
        line.edges = {{0, 1, {OpKind::Zero, OpKind::Skip}}};
        const Restriction line_full = Restriction::full(line);
        const SharedWeights w2 = SharedWeights::init(line, line_full, 6);
        Architecture skip;
        skip.choice = {1};
        const Tensor logits = forward_child(w2, line, skip, batch.x);
        const Tensor expected = matmul(batch.x, w2.head().params[0].value);
        for (std::size_t r = 0; r < logits.rows(); ++r) {
            for (std::size_t c = 0; c < logits.cols(); ++c) {
                CHECK(logits.at(r, c) ==
                      doctest::Approx(expected.at(r, c) + w2.head().params[1].value[c]));
            }
        }
    }
    SUBCASE("matches a hand-composed forward for one fixed arch") {
        // arch: e0 (0->1) linear_tanh, e1 (0->2) skip, e2 (1->2) linear_relu
        Architecture arch;
        arch.choice = {2, 1, 3};
        const Tensor n1 = op_forward(OpKind::LinearTanh, weights.bundle(0, 2), batch.x);
        const Tensor n2a = op_forward(OpKind::Skip, nullptr, batch.x);
        const Tensor n2b = op_forward(OpKind::LinearRelu, weights.bundle(2, 3), n1);
        Tensor n2(n2a.shape());
        for (std::size_t i = 0; i < n2.size(); ++i) n2[i] = n2a[i] + n2b[i];
        Tensor expected = matmul(n2, weights.head().params[0].value);
        for (std::size_t r = 0; r < expected.rows(); ++r) {
            for (std::size_t c = 0; c < expected.cols(); ++c) {
                expected.at(r, c) += weights.head().params[1].value[c];
            }
        }
        const Tensor logits = forward_child(weights, toy, arch, batch.x);
        for (std::size_t i = 0; i < logits.size(); ++i) {
            CHECK(logits[i] == doctest::Approx(expected[i]));
        }
    }
    SUBCASE("deterministic") {
        Architecture arch;
        arch.choice = {2, 3, 1};
        const Tensor a = forward_child(weights, toy, arch, batch.x);
        const Tensor b = forward_child(weights, toy, arch, batch.x);
        CHECK(a.values() == b.values());
    }
}

TEST_CASE("backward_child gradient semantics") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    const Batch batch = toy_batch(toy, 23);

    SUBCASE("zero arch leaves only head-bias gradients nonzero") {
        SharedWeights weights = SharedWeights::init(toy, full, 5);
        Architecture arch;
        arch.choice = {0, 0, 0};
        backward_child(weights, toy, arch, batch);
        for (std::size_t e = 0; e < toy.num_edges(); ++e) {
            for (int o = 0; o < 4; ++o) {
                if (const ParamBundle* b = weights.bundle(static_cast<int>(e), o)) {
                    for (const auto& p : b->params) {
                        for (double g : p.grad.values()) CHECK(g == 0.0);
                    }
                }
            }
        }
        double head_bias_norm = 0.0;
        for (double g : weights.head().params[1].grad.values()) head_bias_norm += g * g;
        CHECK(head_bias_norm > 0.0);
        // the last node value is zero, so the head weight grad vanishes too
        for (double g : weights.head().params[0].grad.values()) CHECK(g == 0.0);
    }

    SUBCASE("touched gradients match finite differences") {
        SharedWeights weights = SharedWeights::init(toy, full, 5);
        Architecture arch;
        arch.choice = {2, 3, 2};  // linear ops everywhere
        backward_child(weights, toy, arch, batch);

        std::vector<Parameter*> touched;
        std::vector<double> analytic;
        for (std::size_t e = 0; e < toy.num_edges(); ++e) {
            ParamBundle* b = weights.bundle(static_cast<int>(e), arch.choice[e]);
            REQUIRE(b != nullptr);
            for (auto& p : b->params) touched.push_back(&p);
        }
        for (auto& p : weights.head().params) touched.push_back(&p);
        for (Parameter* p : touched) {
            analytic.insert(analytic.end(), p->grad.values().begin(), p->grad.values().end());
        }

        auto loss_fn = [&] {
            const Tensor logits = forward_child(weights, toy, arch, batch.x);
            return cross_entropy(logits, batch.labels).loss;
        };
        const auto fd = finite_diff_grad(loss_fn, touched, 1e-5);
        std::size_t at = 0;
        double worst = 0.0;
        for (const Tensor& g : fd) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                worst = std::max(worst, grad_rel_err(analytic[at++], g[i]));
            }
        }
        CHECK(worst < 1e-4);
    }

    SUBCASE("no accumulation across calls") {
        SharedWeights weights = SharedWeights::init(toy, full, 5);
        Architecture a1, a2;
        a1.choice = {2, 0, 0};
        a2.choice = {3, 0, 0};
        backward_child(weights, toy, a1, batch);
        const std::vector<double> grad_once = weights.bundle(0, 2)->params[0].grad.values();
        backward_child(weights, toy, a2, batch);
        // a2 does not touch (0, 2): its gradient was reset, not accumulated
        for (double g : weights.bundle(0, 2)->params[0].grad.values()) CHECK(g == 0.0);
        backward_child(weights, toy, a1, batch);
        CHECK(weights.bundle(0, 2)->params[0].grad.values() == grad_once);
    }
}

TEST_CASE("mixture_forward") {
    const CellGraph toy = CellGraph::toy_space();
    const Batch batch = toy_batch(toy, 31);

    SUBCASE("singleton edges reduce to the plain child") {
        Architecture arch;
        arch.choice = {1, 2, 3};
        Restriction single;
        single.allowed = {{1}, {2}, {3}};
        const SharedWeights weights = SharedWeights::init(toy, single, 9);
        const Tensor mixture = mixture_forward(weights, toy, single, batch.x);
        const Tensor child = forward_child(weights, toy, arch, batch.x);
        for (std::size_t i = 0; i < mixture.size(); ++i) {
            CHECK(mixture[i] == doctest::Approx(child[i]));
        }
    }

    SUBCASE("softmax weights follow the arithmetic") {
        // 2-op edge with logits (ln 3, 0) mixes with weights (0.75, 0.25)
        const auto w = softmax_weights({{std::log(3.0), 0.0}});
        CHECK(w[0][0] == doctest::Approx(0.75));
        CHECK(w[0][1] == doctest::Approx(0.25));
        // equal logits mix as the plain average
        const auto eq = softmax_weights({{0.0, 0.0, 0.0, 0.0}});
        for (double v : eq[0]) CHECK(v == doctest::Approx(0.25));
    }

    SUBCASE("saturated logits converge to the argmax child") {
        const Restriction full = Restriction::full(toy);
        SharedWeights weights = SharedWeights::init(toy, full, 9);
        Architecture arch;
        arch.choice = {2, 1, 3};
        for (std::size_t e = 0; e < toy.num_edges(); ++e) {
            weights.arch_params()[e][static_cast<std::size_t>(arch.choice[e])] = 60.0;
        }
        const Tensor mixture = mixture_forward(weights, toy, full, batch.x);
        const Tensor child = forward_child(weights, toy, arch, batch.x);
        for (std::size_t i = 0; i < mixture.size(); ++i) {
            CHECK(std::fabs(mixture[i] - child[i]) < 1e-6);
        }
    }
}

TEST_CASE("mixture gradients match finite differences") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    SharedWeights weights = SharedWeights::init(toy, full, 13);
    const Batch batch = toy_batch(toy, 37);

    // arbitrary non-uniform mixing weights
    EdgeWeights ew = softmax_weights({{0.5, -0.2, 0.1, 0.0}, {0.0, 0.3, -0.1, 0.2}, {1.0, 0.0, -0.5, 0.25}});
    EdgeWeights mixture_grads;
    cell_backward(weights, toy, full, ew, batch, &mixture_grads);

    // weight gradients
    std::vector<Parameter*> params = weights.all_params();
    std::vector<double> analytic;
    for (Parameter* p : params) {
        analytic.insert(analytic.end(), p->grad.values().begin(), p->grad.values().end());
    }
    auto loss_fn = [&] {
        const CellTrace t = cell_forward(weights, toy, full, ew, batch.x);
        return cross_entropy(t.logits, batch.labels).loss;
    };
    const auto fd = finite_diff_grad(loss_fn, params, 1e-5);
    std::size_t at = 0;
    double worst = 0.0;
    for (const Tensor& g : fd) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            worst = std::max(worst, grad_rel_err(analytic[at++], g[i]));
        }
    }
    CHECK(worst < 1e-4);

    // mixing-coefficient gradients against central differences on the weights
    for (std::size_t e = 0; e < ew.size(); ++e) {
        for (std::size_t k = 0; k < ew[e].size(); ++k) {
            const double h = 1e-6;
            const double orig = ew[e][k];
            ew[e][k] = orig + h;
            const double up = loss_fn();
            ew[e][k] = orig - h;
            const double down = loss_fn();
            ew[e][k] = orig;
            CHECK(grad_rel_err(mixture_grads[e][k], (up - down) / (2 * h)) < 1e-4);
        }
    }
}

TEST_CASE("sample_uniform_arch") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);

    SUBCASE("singleton restriction yields the unique architecture") {
        Restriction single;
        single.allowed = {{2}, {0}, {3}};
        Rng rng(1);
        const Architecture arch = sample_uniform_arch(toy, single, rng);
        CHECK(arch.encode() == "2-0-3");
    }
    SUBCASE("per-op frequency stays near uniform") {
        Rng rng(12);
        std::vector<int> counts(4, 0);
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            counts[static_cast<std::size_t>(sample_uniform_arch(toy, full, rng).choice[0])]++;
        }
        for (int c : counts) {
            CHECK(c >= static_cast<int>(0.225 * n));
            CHECK(c <= static_cast<int>(0.275 * n));
        }
    }
    SUBCASE("fixed seed reproduces the sequence") {
        Rng a(77), b(77);
        for (int i = 0; i < 50; ++i) {
            CHECK(sample_uniform_arch(toy, full, a).choice ==
                  sample_uniform_arch(toy, full, b).choice);
        }
    }
}

TEST_CASE("weight sharing contract across restricted copies") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    const SharedWeights parent = SharedWeights::init(toy, full, 5);

    Restriction left = full, right = full;
    left.allowed[0] = {0, 2};
    right.allowed[0] = {1, 3};
    const SharedWeights wl = parent.restricted_copy(full, left);
    const SharedWeights wr = parent.restricted_copy(full, right);

    // children keep exactly the bundles their restriction allows
    CHECK(wl.bundle(0, 2) != nullptr);
    CHECK(wl.bundle(0, 3) == nullptr);
    CHECK(wr.bundle(0, 3) != nullptr);
    CHECK(wr.bundle(0, 2) == nullptr);
    // values copied from the parent, stores disjoint
    CHECK(wl.bundle(0, 2)->params[0].value.values() ==
          parent.bundle(0, 2)->params[0].value.values());
    CHECK(wl.bundle(2, 2) != wr.bundle(2, 2));
    CHECK(wl.arch_params()[0].size() == 2);
}

TEST_CASE("init is a pure per-bundle function of the seed") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    Restriction narrow = full;
    narrow.allowed[0] = {2};

    const SharedWeights a = SharedWeights::init(toy, full, 42);
    const SharedWeights b = SharedWeights::init(toy, narrow, 42);
    // the shared (edge, op) bundle has identical values regardless of which
    // sibling ops the restriction admits
    CHECK(a.bundle(0, 2)->params[0].value.values() == b.bundle(0, 2)->params[0].value.values());
    CHECK(a.bundle(1, 3)->params[0].value.values() == b.bundle(1, 3)->params[0].value.values());
    const SharedWeights c = SharedWeights::init(toy, full, 43);
    CHECK(a.bundle(0, 2)->params[0].value.values() != c.bundle(0, 2)->params[0].value.values());
}
