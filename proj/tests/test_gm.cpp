#include <doctest.h>

#include <cmath>
#include <set>

#include "gmsplit/gm.hpp"

using namespace gmsplit;

namespace {

// Independent brute-force oracle: enumerate every labeling in {0..B-1}^n,
// keep balanced surjective ones, canonicalize, dedupe, take the minimum with
// the lexicographically smallest canonical assignment. A different code path
// from the production recursion on purpose.
struct OracleCut {
    double cost = 0.0;
    std::vector<int> assignment;
};

std::vector<int> canonicalize(const std::vector<int>& labels, int groups) {
    std::vector<int> remap(static_cast<std::size_t>(groups), -1);
    int next = 0;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int& m = remap[static_cast<std::size_t>(labels[i])];
        if (m < 0) m = next++;
        out[i] = m;
    }
    return out;
}

OracleCut oracle_min_cut(const std::vector<std::vector<double>>& scores, int groups) {
    const std::size_t n = scores.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(groups);

    OracleCut best;
    bool found = false;
    std::set<std::vector<int>> seen;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<int> labels(n);
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(c % static_cast<std::size_t>(groups));
            c /= static_cast<std::size_t>(groups);
        }
        std::vector<int> sizes(static_cast<std::size_t>(groups), 0);
        for (int l : labels) sizes[static_cast<std::size_t>(l)]++;
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        if (*lo == 0 || *hi - *lo > 1) continue;
        const std::vector<int> canon = canonicalize(labels, groups);
        if (!seen.insert(canon).second) continue;
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (canon[i] != canon[j]) cost += scores[i][j];
            }
        }
        if (!found || cost < best.cost || (cost == best.cost && canon < best.assignment)) {
            found = true;
            best.cost = cost;
            best.assignment = canon;
        }
    }
    return best;
}

GMMatrix random_matrix(std::size_t n, Similarity measure, Rng& rng) {
    GMMatrix gm;
    gm.edge = 0;
    gm.measure = measure;
    gm.num_batches = 1;
    gm.scores.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        gm.op_labels.push_back("op" + std::to_string(i));
        gm.scores[i][i] = measure == Similarity::NegL2 ? 0.0 : 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = measure == Similarity::NegL2 ? -rng.next_double()
                                                          : rng.uniform(-1.0, 1.0);
            gm.scores[i][j] = v;
            gm.scores[j][i] = v;
        }
    }
    return gm;
}

std::vector<int> groups_to_assignment(const SplitDecision& d, std::size_t n) {
    std::vector<int> a(n, -1);
    for (std::size_t g = 0; g < d.groups.size(); ++g) {
        for (int i : d.groups[g]) a[static_cast<std::size_t>(i)] = static_cast<int>(g);
    }
    return a;
}

FlatGradient flat(std::vector<double> values, std::vector<std::size_t> offsets = {0}) {
    FlatGradient g;
    g.values = std::move(values);
    g.bundle_offsets = std::move(offsets);
    return g;
}

}  // namespace

TEST_CASE("gm_score cosine") {
    const FlatGradient g1 = flat({1.0, 2.0, 2.0});
    CHECK(gm_score(g1, g1, Similarity::Cosine) == doctest::Approx(1.0));
    FlatGradient neg = g1;
    for (double& v : neg.values) v = -v;
    CHECK(gm_score(g1, neg, Similarity::Cosine) == doctest::Approx(-1.0));
    const FlatGradient orth = flat({2.0, -1.0, 0.0});
    CHECK(gm_score(g1, orth, Similarity::Cosine) == doctest::Approx(0.0));

    // invariant under positive rescaling of either argument
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        FlatGradient a = flat({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
        FlatGradient b = flat({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
        const double base = gm_score(a, b, Similarity::Cosine);
        FlatGradient scaled = a;
        const double factor = 0.01 + 10.0 * rng.next_double();
        for (double& v : scaled.values) v *= factor;
        CHECK(gm_score(scaled, b, Similarity::Cosine) == doctest::Approx(base));
    }

    CHECK_THROWS_AS(gm_score(flat({0.0, 0.0}), flat({1.0, 0.0}), Similarity::Cosine),
                    DegenerateGradientError);
    CHECK_THROWS_AS(gm_score(flat({1.0}), flat({1.0, 0.0}), Similarity::Cosine), ShapeError);
}

TEST_CASE("gm_score per-filter and neg_l2") {
    // two bundles with per-bundle cosines 1.0 and 0.0 average to 0.5
    const FlatGradient a = flat({1.0, 0.0, /*bundle 2*/ 1.0, 0.0}, {0, 2});
    const FlatGradient b = flat({2.0, 0.0, /*bundle 2*/ 0.0, 3.0}, {0, 2});
    CHECK(gm_score(a, b, Similarity::PerFilterCosine) == doctest::Approx(0.5));
    // the flat cosine differs from the per-filter mean
    CHECK(gm_score(a, b, Similarity::Cosine) != doctest::Approx(0.5));

    // zero-norm bundles are skipped
    const FlatGradient c = flat({0.0, 0.0, 1.0, 0.0}, {0, 2});
    const FlatGradient d = flat({0.0, 0.0, 1.0, 0.0}, {0, 2});
    CHECK(gm_score(c, d, Similarity::PerFilterCosine) == doctest::Approx(1.0));
    const FlatGradient z = flat({0.0, 0.0, 0.0, 0.0}, {0, 2});
    CHECK_THROWS_AS(gm_score(z, z, Similarity::PerFilterCosine), DegenerateGradientError);

    CHECK(gm_score(flat({1.0, 2.0}), flat({1.0, 2.0}), Similarity::NegL2) == doctest::Approx(0.0));
    CHECK(gm_score(flat({0.0, 3.0}), flat({4.0, 0.0}), Similarity::NegL2) == doctest::Approx(-5.0));
}

TEST_CASE("GMMatrix invariants are enforced") {
    Rng rng(1);
    GMMatrix ok = random_matrix(4, Similarity::Cosine, rng);
    CHECK_NOTHROW(ok.validate());
    GMMatrix asym = ok;
    asym.scores[0][1] += 0.5;
    CHECK_THROWS_AS(asym.validate(), ShapeError);
    GMMatrix diag = ok;
    diag.scores[2][2] = 0.9;
    CHECK_THROWS_AS(diag.validate(), ShapeError);
    GMMatrix range = ok;
    range.scores[0][1] = range.scores[1][0] = 1.5;
    CHECK_THROWS_AS(range.validate(), ShapeError);

    GMMatrix l2 = random_matrix(3, Similarity::NegL2, rng);
    CHECK_NOTHROW(l2.validate());
    l2.scores[0][1] = l2.scores[1][0] = 0.25;
    CHECK_THROWS_AS(l2.validate(), ShapeError);
}

TEST_CASE("balanced_min_cut hand-checked cases") {
    SUBCASE("two ops have a unique split") {
        Rng rng(2);
        GMMatrix gm = random_matrix(2, Similarity::Cosine, rng);
        const SplitDecision d = balanced_min_cut(gm, 2);
        CHECK(d.groups == std::vector<std::vector<int>>{{0}, {1}});
        CHECK(*d.cut_cost == doctest::Approx(gm.scores[0][1]));
    }
    SUBCASE("similar pairs stick together") {
        GMMatrix gm;
        gm.edge = 3;
        gm.measure = Similarity::Cosine;
        gm.op_labels = {"a", "b", "c", "d"};
        gm.scores = {{1.0, 0.9, 0.1, 0.1},
                     {0.9, 1.0, 0.1, 0.1},
                     {0.1, 0.1, 1.0, 0.9},
                     {0.1, 0.1, 0.9, 1.0}};
        const SplitDecision d = balanced_min_cut(gm, 2);
        CHECK(d.groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
        CHECK(*d.cut_cost == doctest::Approx(0.4));
        CHECK(d.edge == 3);
        // cut cost is recomputable from the stored matrix
        CHECK(d.gm->cut_cost(d.groups) == doctest::Approx(*d.cut_cost));
    }
    SUBCASE("five ops split 3-2") {
        Rng rng(3);
        GMMatrix gm = random_matrix(5, Similarity::Cosine, rng);
        const SplitDecision d = balanced_min_cut(gm, 2);
        std::multiset<std::size_t> sizes;
        for (const auto& g : d.groups) sizes.insert(g.size());
        CHECK(sizes == std::multiset<std::size_t>{2, 3});
    }
    SUBCASE("branching bounds are checked") {
        Rng rng(4);
        GMMatrix gm = random_matrix(3, Similarity::Cosine, rng);
        CHECK_THROWS_AS(balanced_min_cut(gm, 1), ShapeError);
        CHECK_THROWS_AS(balanced_min_cut(gm, 4), ShapeError);
    }
}

TEST_CASE("balanced_min_cut agrees with the exhaustive oracle") {
    Rng rng(20240);
    int checked = 0;
    for (std::size_t n = 3; n <= 8; ++n) {
        for (int b = 2; b <= 4 && static_cast<std::size_t>(b) <= n; ++b) {
            for (int rep = 0; rep < 25; ++rep) {
                const Similarity measure = rep % 2 ? Similarity::NegL2 : Similarity::Cosine;
                GMMatrix gm = random_matrix(n, measure, rng);
                const SplitDecision d = balanced_min_cut(gm, b);
                const OracleCut expect = oracle_min_cut(gm.scores, b);
                CHECK(std::fabs(*d.cut_cost - expect.cost) < 1e-9);
                CHECK(groups_to_assignment(d, n) == expect.assignment);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("exhaustive and random splits") {
    SUBCASE("exhaustive gives singleton groups") {
        const SplitDecision d = exhaustive_split(1, 4);
        CHECK(d.groups == std::vector<std::vector<int>>{{0}, {1}, {2}, {3}});
        CHECK_FALSE(d.cut_cost.has_value());
    }
    SUBCASE("exhaustive cut cost from a matrix when available") {
        Rng rng(6);
        GMMatrix gm = random_matrix(3, Similarity::Cosine, rng);
        const SplitDecision d = exhaustive_split(0, 3, gm);
        CHECK(*d.cut_cost ==
              doctest::Approx(gm.scores[0][1] + gm.scores[0][2] + gm.scores[1][2]));
    }
    SUBCASE("random split is balanced and covers all bipartitions over seeds") {
        std::set<std::vector<std::vector<int>>> seen;
        for (std::uint64_t s = 0; s < 200; ++s) {
            Rng rng(s);
            const SplitDecision d = random_split(2, 4, 2, rng);
            CHECK(d.groups.size() == 2);
            CHECK(d.groups[0].size() == 2);
            CHECK(d.groups[1].size() == 2);
            CHECK(d.groups[0].front() == 0);  // canonical order
            seen.insert(d.groups);
        }
        CHECK(seen.size() == 3);
        Rng rng(1);
        CHECK_THROWS_AS(random_split(0, 3, 5, rng), ShapeError);
    }
}

TEST_CASE("collect_op_gradient on the toy space") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    const Dataset data = make_spiral_dataset(7, 40, 3, 0.15);

    SUBCASE("average over M batches equals the external mean of single batches") {
        SharedWeights weights = SharedWeights::init(toy, full, 11);
        Rng rng(50);
        const std::vector<Batch> batches = sample_batches(data, data.train_idx, 8, 8, rng);
        const FlatGradient avg = collect_op_gradient(weights, toy, full, 0, 2, batches);
        std::vector<double> manual(avg.values.size(), 0.0);
        for (const Batch& b : batches) {
            const FlatGradient one = collect_op_gradient(weights, toy, full, 0, 2, {b});
            for (std::size_t i = 0; i < manual.size(); ++i) manual[i] += one.values[i];
        }
        for (double& v : manual) v /= 8.0;
        for (std::size_t i = 0; i < manual.size(); ++i) {
            CHECK(avg.values[i] == doctest::Approx(manual[i]).epsilon(1e-12));
        }
    }

    SUBCASE("deterministic in (weights, dataset, seed); op changes only the gradient") {
        SharedWeights weights = SharedWeights::init(toy, full, 11);
        Rng r1(50), r2(50), r3(50);
        const auto b1 = sample_batches(data, data.train_idx, 4, 8, r1);
        const auto b2 = sample_batches(data, data.train_idx, 4, 8, r2);
        for (std::size_t i = 0; i < b1.size(); ++i) {
            CHECK(b1[i].x.values() == b2[i].x.values());  // same minibatch sequence
        }
        const FlatGradient g1 = collect_op_gradient(weights, toy, full, 0, 2, b1);
        const FlatGradient g1_again = collect_op_gradient(weights, toy, full, 0, 2, b2);
        CHECK(g1.values == g1_again.values);
        const FlatGradient g2 = collect_op_gradient(weights, toy, full, 0, 3, b1);
        CHECK(g1.values != g2.values);
        CHECK(g1.bundle_offsets == g2.bundle_offsets);
    }

    SUBCASE("zero op on the only edge into the head matches the head-only model") {
        CellGraph line;
        line.num_nodes = 2;
        line.feature_dim = toy.feature_dim;
        line.num_classes = toy.num_classes;
        line.edges = {{0, 1, {OpKind::Zero, OpKind::Skip, OpKind::LinearTanh}}};
        const Restriction line_full = Restriction::full(line);
        SharedWeights weights = SharedWeights::init(line, line_full, 3);
        Rng rng(51);
        const auto batches = sample_batches(data, data.train_idx, 2, 8, rng);
        const FlatGradient g = collect_op_gradient(weights, line, line_full, 0, 0, batches);
        // shared vector = head only (no other edges); with a zero input the
        // head weight grad vanishes and the bias grad carries everything
        CHECK(g.bundle_offsets.size() == 1);
        const std::size_t weight_len = line.feature_dim * static_cast<std::size_t>(line.num_classes);
        for (std::size_t i = 0; i < weight_len; ++i) CHECK(g.values[i] == 0.0);
        double bias_norm = 0.0;
        for (std::size_t i = weight_len; i < g.values.size(); ++i) bias_norm += g.values[i] * g.values[i];
        CHECK(bias_norm > 0.0);
    }

    SUBCASE("degenerate gradient raises") {
        // loss constant in all weights: a single batch of all-zero inputs on
        // a head-only model still moves the bias, so zero the labels'
        // influence by... simpler: constant-zero input with a skip edge and
        // no parametric ops leaves only the head; bias gradient is nonzero
        // unless logits are uniform AND labels balanced. Force the true
        // degenerate case with a handcrafted batch instead.
        CellGraph line;
        line.num_nodes = 2;
        line.feature_dim = 2;
        line.num_classes = 2;
        line.edges = {{0, 1, {OpKind::Skip, OpKind::Zero}}};
        const Restriction line_full = Restriction::full(line);
        SharedWeights weights = SharedWeights::init(line, line_full, 3);
        // zero head weights: logits are identically zero; a label-balanced
        // batch then has exactly zero bias gradient
        for (auto& p : weights.head().params) p.value.fill(0.0);
        Batch batch;
        batch.x = Tensor({2, 2}, {0.0, 0.0, 0.0, 0.0});
        batch.labels = {0, 1};
        CHECK_THROWS_AS(collect_op_gradient(weights, line, line_full, 0, 0, {batch}),
                        DegenerateGradientError);
    }
}

TEST_CASE("build_gm_matrix structure") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    const Dataset data = make_spiral_dataset(7, 40, 3, 0.15);
    SharedWeights weights = SharedWeights::init(toy, full, 11);
    Rng rng(52);
    const auto batches = sample_batches(data, data.train_idx, 4, 8, rng);

    const GMMatrix gm = build_gm_matrix(weights, toy, full, 1, batches, Similarity::Cosine);
    CHECK(gm.size() == 4);
    CHECK(gm.op_labels == std::vector<std::string>{"zero", "skip", "linear_tanh", "linear_relu"});
    CHECK_NOTHROW(gm.validate());

    SUBCASE("duplicate kinds score 1 against each other") {
        CellGraph rig = toy;
        // a test rig with the same parametric op listed behind two ids is not
        // possible (duplicates are rejected), so emulate it by comparing an
        // op's gradient with itself through gm_score
        const FlatGradient g = collect_op_gradient(weights, rig, full, 1, 2, batches);
        CHECK(gm_score(g, g, Similarity::Cosine) == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("2-op edge gives a 2x2 matrix with one free entry") {
        Restriction narrow = full;
        narrow.allowed[1] = {0, 2};
        SharedWeights w = SharedWeights::init(toy, narrow, 12);
        const GMMatrix small = build_gm_matrix(w, toy, narrow, 1, batches, Similarity::Cosine);
        CHECK(small.size() == 2);
        CHECK(small.scores[0][0] == 1.0);
        CHECK(small.scores[1][1] == 1.0);
        CHECK(small.scores[0][1] == small.scores[1][0]);
    }
}

TEST_CASE("score_edges picks the argmin cut cost") {
    const CellGraph toy = CellGraph::toy_space();
    const Restriction full = Restriction::full(toy);
    const Dataset data = make_spiral_dataset(7, 40, 3, 0.15);

    SUBCASE("single unsplit edge is selected regardless of cost") {
        SharedWeights weights = SharedWeights::init(toy, full, 11);
        GmConfig cfg;
        cfg.num_batches = 2;
        cfg.batch_size = 8;
        Rng rng(60);
        const EdgeScores scores = score_edges(weights, toy, full, {2}, data, cfg, 2, rng);
        CHECK(scores.selected_edge == 2);
        CHECK(scores.per_edge.size() == 1);
    }
    SUBCASE("hand-injected costs resolve by argmin") {
        std::map<int, SplitDecision> injected;
        SplitDecision cheap, costly;
        cheap.edge = 2;
        cheap.cut_cost = 0.2;
        costly.edge = 0;
        costly.cut_cost = 0.8;
        injected[2] = cheap;
        injected[0] = costly;
        CHECK(select_edge(injected) == 2);
        // ties break to the lowest edge id
        injected[0].cut_cost = 0.2;
        CHECK(select_edge(injected) == 0);
        CHECK_THROWS_AS(select_edge({}), NothingToSplitError);
    }
    SUBCASE("deterministic under a fixed seed") {
        GmConfig cfg;
        cfg.num_batches = 3;
        cfg.batch_size = 8;
        SharedWeights w1 = SharedWeights::init(toy, full, 11);
        SharedWeights w2 = SharedWeights::init(toy, full, 11);
        Rng r1(61), r2(61);
        const EdgeScores s1 = score_edges(w1, toy, full, {0, 1, 2}, data, cfg, 2, r1);
        const EdgeScores s2 = score_edges(w2, toy, full, {0, 1, 2}, data, cfg, 2, r2);
        CHECK(s1.selected_edge == s2.selected_edge);
        for (const auto& [edge, d] : s1.per_edge) {
            CHECK(*d.cut_cost == *s2.per_edge.at(edge).cut_cost);
            CHECK(d.groups == s2.per_edge.at(edge).groups);
        }
    }
    SUBCASE("nothing to split") {
        SharedWeights weights = SharedWeights::init(toy, full, 11);
        GmConfig cfg;
        Rng rng(62);
        CHECK_THROWS_AS(score_edges(weights, toy, full, {}, data, cfg, 2, rng),
                        NothingToSplitError);
    }
}
