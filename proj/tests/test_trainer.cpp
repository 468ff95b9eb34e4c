#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rgnn/gradcheck.hpp"
#include "rgnn/losses.hpp"
#include "rgnn/rng.hpp"
#include "rgnn/sbm.hpp"
#include "rgnn/trainer.hpp"

using namespace rgnn;

namespace {

struct Fixture {
    Graph g;
    SplitMasks masks;
};

Fixture sbm_fixture(std::uint64_t seed = 7) {
    Graph g = largest_connected_component(generate_sbm({20, 20}, 0.35, 0.03, 12, 0.1, seed));
    SplitMasks masks = split_nodes(g, seed);
    return {std::move(g), std::move(masks)};
}

EncoderConfig tiny_cfg() {
    EncoderConfig cfg;
    cfg.layers = 2;
    cfg.perceptron_depth = 1;
    cfg.bottleneck_dim = 4;
    cfg.hidden_dim = 6;
    return cfg;
}

TrainConfig fast_tc() {
    TrainConfig tc;
    tc.epochs = 25;
    tc.lr = 0.05;
    tc.patience = 25;
    tc.batch_size = 6;
    tc.gen_budget = 2;
    tc.seed = 3;
    return tc;
}

}  // namespace

TEST_CASE("supervised loss is the masked cross-entropy") {
    Tape t;
    Tensor logits(3, 2, 0.0);
    Var a = supervised_loss(t, t.input(logits), {0, 1, 0}, {0, 1});
    Var b = softmax_xent(t, t.input(logits), {0, 1, 0}, {0, 1});
    CHECK(t.scalar_value(a) == t.scalar_value(b));
    CHECK(t.scalar_value(a) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("noise weights follow degrees to the 3/4 power") {
    Tensor x(4, 2, 1.0);
    Graph g = Graph::build(4, {{0, 1}, {1, 2}}, std::move(x), {0, 1, 0, 1}, 2);
    std::vector<double> w = degree_noise_weights(g);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(std::pow(2.0, 0.75)));
    CHECK(w[3] == 0.0);  // isolated node never sampled

    std::vector<double> cum = cumulative(w);
    CHECK(cum.back() == doctest::Approx(w[0] + w[1] + w[2]));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) CHECK(sample_weighted(cum, rng) != 3);

    CHECK_THROWS_AS(cumulative(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("neighbor-contrast loss at zero embeddings is (1+K) ln 2") {
    Tensor x(4, 2, 1.0);
    Graph g = Graph::build(4, {{0, 1}, {1, 2}, {2, 3}}, std::move(x), {0, 1, 0, 1}, 2);
    std::vector<double> noise = degree_noise_weights(g);
    for (int k : {1, 3, 5}) {
        Tape t;
        Var h = t.input(Tensor(4, 3, 0.0));
        std::mt19937_64 rng(9);
        Var loss = ncl_loss(t, h, g, k, noise, rng);
        CHECK(t.scalar_value(loss) == doctest::Approx((1 + k) * std::log(2.0)));
    }
}

TEST_CASE("neighbor-contrast loss gradient matches finite differences") {
    Tensor x(5, 2, 1.0);
    Graph g = Graph::build(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}, std::move(x),
                           {0, 1, 0, 1, 0}, 2);
    std::vector<double> noise = degree_noise_weights(g);
    std::mt19937_64 init(21);
    Tensor h0(5, 3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : h0.data) v = u(init);

    auto fn = [&](Tape& t, const std::vector<Var>& p) {
        std::mt19937_64 rng(77);  // identical negatives on every evaluation
        return ncl_loss(t, p[0], g, 3, noise, rng);
    };
    GradCheckReport r = grad_check(fn, {h0}, 1e-6);
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("discriminator scores are bilinear probabilities") {
    Tape t;
    Tensor hv(2, 2);
    hv.data = {1.0, 0.0, 0.0, 2.0};
    Tensor hg(1, 2);
    hg.data = {2.0, 3.0};
    Var scores = bilinear_scores(t, t.input(hv), t.input(Tensor::identity(2)), t.input(hg));
    CHECK(t.value(scores).rows == 2);
    CHECK(t.value(scores).at(0, 0) == doctest::Approx(2.0));
    CHECK(t.value(scores).at(1, 0) == doctest::Approx(6.0));

    Var probs = discriminate(t, t.input(hv), t.input(hg), t.input(Tensor::identity(2)));
    CHECK(t.value(probs).at(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));

    Var zero = discriminate(t, t.input(Tensor(3, 2, 0.0)), t.input(hg), t.input(Tensor::identity(2)));
    for (int i = 0; i < 3; ++i) CHECK(t.value(zero).at(i, 0) == doctest::Approx(0.5));
}

TEST_CASE("adversarial graph generation respects the edit budget") {
    Fixture f = sbm_fixture();
    std::vector<int> train = f.masks.train;
    SurrogateModel surrogate = train_surrogate(f.g, train, 3);
    std::vector<int> batch{0, 5, 9};

    Graph adv = generate_negatives(f.g, surrogate, 2, batch, 3);
    CHECK(adv.num_nodes() == f.g.num_nodes());
    CHECK(adv.features_ptr().get() == f.g.features_ptr().get());

    auto a = f.g.edge_list();
    auto b = adv.edge_list();
    std::set<std::pair<int, int>> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    int diff = 0;
    for (const auto& e : sa)
        if (!sb.count(e)) ++diff;
    for (const auto& e : sb)
        if (!sa.count(e)) ++diff;
    CHECK(diff > 0);
    CHECK(diff <= 2 * static_cast<int>(batch.size()));

    Graph adv2 = generate_negatives(f.g, surrogate, 2, batch, 99);  // seed is inert
    CHECK(adv2.edge_list() == adv.edge_list());
}

TEST_CASE("one adversarial-contrastive step reduces the joint loss") {
    Fixture f = sbm_fixture();
    EncoderConfig cfg = tiny_cfg();
    TrainConfig tc = fast_tc();
    SurrogateModel surrogate = train_surrogate(f.g, f.masks.train, 3);
    ModelParams params = init_params(cfg, f.g.feature_dim(), f.g.num_classes(), 3);
    Adam opt;

    std::vector<int> batch{1, 4, 7, 10};
    Graph adv = generate_negatives(f.g, surrogate, tc.gen_budget, batch, 3);

    AclStepResult first = acl_step(f.g, adv, batch, f.masks, cfg, tc, 1e-3, params, opt);
    CHECK(std::isfinite(first.total));
    CHECK(first.total == doctest::Approx(first.supervised + tc.lambda_acl * first.contrastive));
    CHECK(first.disc_acc >= 0.0);
    CHECK(first.disc_acc <= 1.0);

    AclStepResult last = first;
    for (int i = 0; i < 60; ++i) last = acl_step(f.g, adv, batch, f.masks, cfg, tc, 1e-3, params, opt);
    CHECK(last.total < first.total);
}

TEST_CASE("training with zero contrastive weight reproduces plain training bitwise") {
    Fixture f = sbm_fixture();
    EncoderConfig cfg = tiny_cfg();
    TrainConfig tc = fast_tc();
    tc.epochs = 12;
    SurrogateModel surrogate = train_surrogate(f.g, f.masks.train, tc.seed);

    TrainResult plain = train(f.g, f.masks, cfg, tc, TrainMode::Plain);
    TrainConfig zero = tc;
    zero.lambda_acl = 0.0;
    TrainResult acl = train(f.g, f.masks, cfg, zero, TrainMode::Acl, &surrogate);

    auto pa = plain.params.all();
    auto pb = acl.params.all();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
    REQUIRE(plain.log.size() == acl.log.size());
    for (std::size_t e = 0; e < plain.log.size(); ++e) {
        CHECK(plain.log[e].train_loss == acl.log[e].train_loss);
        CHECK(plain.log[e].val_acc == acl.log[e].val_acc);
        CHECK(std::isnan(plain.log[e].disc_acc));
        CHECK(std::isfinite(acl.log[e].disc_acc));
    }
    CHECK(plain.best_epoch == acl.best_epoch);
}

TEST_CASE("learning rate halves on the epoch step schedule") {
    Fixture f = sbm_fixture();
    TrainConfig tc = fast_tc();
    tc.epochs = 12;
    tc.decay_every = 5;
    tc.patience = 12;
    TrainResult r = train(f.g, f.masks, tiny_cfg(), tc, TrainMode::Plain);
    REQUIRE(static_cast<int>(r.log.size()) == 12);
    for (int e = 0; e < 12; ++e) {
        double expected = tc.lr * std::pow(tc.lr_decay, e / tc.decay_every);
        CHECK(r.log[e].lr == doctest::Approx(expected));
        CHECK(r.log[e].epoch == e);
    }
    // default schedule: epoch 100 sits two steps down
    CHECK(0.01 * std::pow(0.5, 100 / 50) == doctest::Approx(0.0025));
}

TEST_CASE("early stopping keeps the best checkpoint") {
    Fixture f = sbm_fixture();
    TrainConfig tc = fast_tc();
    tc.epochs = 200;
    tc.patience = 8;
    TrainResult r = train(f.g, f.masks, tiny_cfg(), tc, TrainMode::Plain);

    CHECK(r.epochs_run == static_cast<int>(r.log.size()));
    double best = 0.0;
    int best_at = -1;
    for (const EpochLog& e : r.log)
        if (e.val_acc > best) {
            best = e.val_acc;
            best_at = e.epoch;
        }
    CHECK(r.best_val_acc == best);
    CHECK(r.best_epoch == best_at);
    if (r.epochs_run < tc.epochs)  // stopped early: exactly `patience` flat epochs
        CHECK(r.epochs_run == r.best_epoch + 1 + tc.patience);

    // returned parameters really are the best-validation snapshot
    ForwardResult fr = forward(f.g, tiny_cfg(), r.params);
    CHECK(accuracy_on(fr.logits, f.g.labels(), f.masks.val) == doctest::Approx(r.best_val_acc));
}

TEST_CASE("training modes are deterministic and fit the block model") {
    Fixture f = sbm_fixture();
    EncoderConfig cfg = tiny_cfg();
    TrainConfig tc = fast_tc();
    SurrogateModel surrogate = train_surrogate(f.g, f.masks.train, tc.seed);

    for (TrainMode mode : {TrainMode::Plain, TrainMode::Ncl, TrainMode::Acl}) {
        CAPTURE(to_string(mode));
        TrainResult a = train(f.g, f.masks, cfg, tc, mode, &surrogate);
        TrainResult b = train(f.g, f.masks, cfg, tc, mode, &surrogate);
        auto av = a.params.all();
        auto bv = b.params.all();
        for (std::size_t i = 0; i < av.size(); ++i) CHECK(av[i]->data == bv[i]->data);
        CHECK(a.best_val_acc == b.best_val_acc);
        CHECK(a.best_val_acc > 0.6);  // two well-separated blocks are learnable
    }
}

TEST_CASE("mode names and config validation") {
    CHECK(train_mode_from_string("plain") == TrainMode::Plain);
    CHECK(train_mode_from_string("ncl") == TrainMode::Ncl);
    CHECK(train_mode_from_string("acl") == TrainMode::Acl);
    CHECK_THROWS_AS(train_mode_from_string("dropout"), std::invalid_argument);
    CHECK(std::string(to_string(TrainMode::Acl)) == "acl");

    TrainConfig tc;
    tc.lr = -0.1;
    CHECK_THROWS_AS(tc.validate(TrainMode::Plain), std::invalid_argument);
    tc = TrainConfig{};
    tc.lr_decay = 1.5;
    CHECK_THROWS_AS(tc.validate(TrainMode::Plain), std::invalid_argument);
    tc = TrainConfig{};
    tc.gen_budget = 0;
    CHECK_NOTHROW(tc.validate(TrainMode::Plain));  // only consulted in acl mode
    CHECK_THROWS_AS(tc.validate(TrainMode::Acl), std::invalid_argument);
    tc = TrainConfig{};
    tc.lambda_acl = -1.0;
    CHECK_THROWS_AS(tc.validate(TrainMode::Ncl), std::invalid_argument);
}

TEST_CASE("divergence reports the failing epoch") {
    Fixture f = sbm_fixture();
    TrainConfig tc = fast_tc();
    tc.lr = 1e18;  // guaranteed overflow through the linear layers
    tc.epochs = 50;
    try {
        train(f.g, f.masks, tiny_cfg(), tc, TrainMode::Plain);
        WARN("expected divergence did not occur");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("training log serializes as csv") {
    std::vector<EpochLog> log{{0, 0.01, 1.5, 0.5, std::numeric_limits<double>::quiet_NaN()},
                              {1, 0.01, 1.2, 0.75, 0.9}};
    std::ostringstream out;
    write_train_log(out, log);
    std::istringstream in(out.str());
    std::string header, l0, l1;
    std::getline(in, header);
    std::getline(in, l0);
    std::getline(in, l1);
    CHECK(header == "epoch,lr,train_loss,val_acc,disc_acc");
    CHECK(l0.substr(0, 2) == "0,");
    CHECK(l0.find("nan") != std::string::npos);
    CHECK(l1.find("0.9") != std::string::npos);
}
