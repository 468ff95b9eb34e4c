#include "rgnn/trainer.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rgnn/attack.hpp"
#include "rgnn/losses.hpp"
#include "rgnn/rng.hpp"

namespace rgnn {

namespace {

// One Adam step over every model parameter; parameters the loss never touched
// get an explicit zero gradient so the optimizer state stays aligned.
void step_all(Tape& t, const ParamVars& pv, ModelParams& params, Adam& opt, double lr) {
    std::vector<Tensor*> ps = params.all();
    std::vector<Tensor> zeros;
    zeros.reserve(ps.size());
    std::vector<const Tensor*> gs;
    for (size_t i = 0; i < ps.size(); ++i) {
        const Tensor& gv = t.grad(pv.flat[i]);
        if (gv.data.empty()) {
            zeros.push_back(Tensor(ps[i]->rows, ps[i]->cols));
            gs.push_back(&zeros.back());
        } else {
            gs.push_back(&gv);
        }
    }
    opt.step(ps, gs, lr);
}

std::vector<int> sample_batch(int n, int batch_size, std::mt19937_64& rng) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    const int take = std::min(batch_size, n);
    for (int i = 0; i < take; ++i) {
        int j = i + static_cast<int>(std::uniform_int_distribution<int>(0, n - 1 - i)(rng));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return pool;
}

}  // namespace

const char* to_string(TrainMode m) {
    switch (m) {
        case TrainMode::Plain: return "plain";
        case TrainMode::Ncl: return "ncl";
        case TrainMode::Acl: return "acl";
    }
    throw std::logic_error("bad train mode");
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "plain") return TrainMode::Plain;
    if (s == "ncl") return TrainMode::Ncl;
    if (s == "acl") return TrainMode::Acl;
    throw std::invalid_argument("unknown train mode: " + s);
}

void TrainConfig::validate(TrainMode mode) const {
    if (epochs < 1) throw std::invalid_argument("training.epochs must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("training.lr must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
        throw std::invalid_argument("training.lr_decay must be in (0, 1]");
    if (decay_every < 1) throw std::invalid_argument("training.decay_every must be >= 1");
    if (neg_per_pos < 1) throw std::invalid_argument("training.neg_per_pos must be >= 1");
    if (patience < 1) throw std::invalid_argument("training.patience must be >= 1");
    if (lambda_acl < 0.0) throw std::invalid_argument("training.lambda_acl must be >= 0");
    if (mode == TrainMode::Acl) {
        if (gen_budget < 1)
            throw std::invalid_argument("training.gen_budget must be >= 1 in acl mode");
        if (batch_size < 1)
            throw std::invalid_argument("training.batch_size must be >= 1 in acl mode");
    }
}

Graph generate_negatives(const Graph& g, const SurrogateModel& surrogate, int gen_budget,
                         const std::vector<int>& batch, std::uint64_t seed) {
    (void)seed;
    if (gen_budget < 1) throw std::invalid_argument("generate_negatives: gen_budget must be >= 1");
    Graph cur = g;
    for (int v : batch) {
        Perturbation p = attack_nettack(cur, v, gen_budget, surrogate);
        if (!p.ops.empty()) cur = apply(cur, p);
    }
    return cur;
}

AclStepResult acl_step(const Graph& g, const Graph& g_adv, const std::vector<int>& batch,
                       const SplitMasks& masks, const EncoderConfig& cfg, const TrainConfig& tc,
                       double lr, ModelParams& params, Adam& opt) {
    if (batch.empty()) throw std::invalid_argument("acl step: empty batch");
    Tape t;
    ParamVars pv = register_params(t, params);
    Embeddings clean = encode(t, g, cfg, pv);
    Var sup = supervised_loss(t, clean.logits, g.labels(), masks.train);
    Embeddings adv = encode(t, g_adv, cfg, pv);
    Var real_scores = bilinear_scores(t, row_lookup(t, clean.h, batch), pv.disc_w, clean.h_g);
    Var fake_scores = bilinear_scores(t, row_lookup(t, adv.h, batch), pv.disc_w, clean.h_g);
    const std::vector<double> ones(batch.size(), 1.0), zeros(batch.size(), 0.0);
    Var contrast = scale(
        t, add(t, binary_xent(t, real_scores, ones), binary_xent(t, fake_scores, zeros)), 0.5);
    Var total = add(t, sup, scale(t, contrast, tc.lambda_acl));

    AclStepResult r;
    r.total = t.scalar_value(total);
    r.supervised = t.scalar_value(sup);
    r.contrastive = t.scalar_value(contrast);
    if (!std::isfinite(r.total)) throw std::runtime_error("acl step: non-finite loss");
    int correct = 0;
    for (size_t i = 0; i < batch.size(); ++i) {
        if (t.value(real_scores).data[i] > 0.0) ++correct;
        if (t.value(fake_scores).data[i] < 0.0) ++correct;
    }
    r.disc_acc = correct / (2.0 * static_cast<double>(batch.size()));

    t.backward(total);
    step_all(t, pv, params, opt, lr);
    return r;
}

TrainResult train(const Graph& g, const SplitMasks& masks, const EncoderConfig& cfg,
                  const TrainConfig& tc, TrainMode mode, const SurrogateModel* surrogate) {
    tc.validate(mode);
    validate_encoder_config(cfg, g.feature_dim());
    if (masks.train.empty()) throw std::invalid_argument("train: empty training mask");
    if (masks.val.empty()) throw std::invalid_argument("train: empty validation mask");

    ModelParams params = init_params(cfg, g.feature_dim(), g.num_classes(), tc.seed);
    Adam opt;
    auto ncl_rng = make_rng(tc.seed, seed_stream::ncl);
    auto batch_rng = make_rng(tc.seed, seed_stream::negatives);
    std::vector<double> noise;
    if (mode == TrainMode::Ncl) noise = degree_noise_weights(g);

    SurrogateModel local_surrogate;
    if (mode == TrainMode::Acl && surrogate == nullptr) {
        local_surrogate = train_surrogate(g, masks.train, tc.seed);
        surrogate = &local_surrogate;
    }

    TrainResult res;
    res.params = params;
    double best_acc = -1.0;
    int since_best = 0;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        const double lr = tc.lr * std::pow(tc.lr_decay, epoch / tc.decay_every);
        double train_loss = 0.0;
        double disc_acc = std::numeric_limits<double>::quiet_NaN();
        if (mode == TrainMode::Acl) {
            std::vector<int> batch = sample_batch(g.num_nodes(), tc.batch_size, batch_rng);
            Graph g_adv = generate_negatives(g, *surrogate, tc.gen_budget, batch, tc.seed);
            AclStepResult step;
            try {
                step = acl_step(g, g_adv, batch, masks, cfg, tc, lr, params, opt);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("epoch " + std::to_string(epoch) + ": " + e.what());
            }
            train_loss = step.total;
            disc_acc = step.disc_acc;
        } else {
            Tape t;
            ParamVars pv = register_params(t, params);
            Embeddings emb = encode(t, g, cfg, pv);
            Var loss = supervised_loss(t, emb.logits, g.labels(), masks.train);
            if (mode == TrainMode::Ncl) {
                Var ncl = ncl_loss(t, emb.h, g, tc.neg_per_pos, noise, ncl_rng);
                loss = add(t, loss, scale(t, ncl, tc.lambda_acl));
            }
            train_loss = t.scalar_value(loss);
            if (!std::isfinite(train_loss))
                throw std::runtime_error("epoch " + std::to_string(epoch) + ": non-finite loss");
            t.backward(loss);
            step_all(t, pv, params, opt, lr);
        }
        const double val_acc = accuracy_on(forward(g, cfg, params).logits, g.labels(), masks.val);
        res.log.push_back(EpochLog{epoch, lr, train_loss, val_acc, disc_acc});
        res.epochs_run = epoch + 1;
        if (val_acc > best_acc) {
            best_acc = val_acc;
            res.params = params;
            res.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= tc.patience) {
            break;
        }
    }
    res.best_val_acc = best_acc;
    return res;
}

double accuracy_on(const Tensor& logits, const std::vector<int>& labels,
                   const std::vector<int>& nodes) {
    if (nodes.empty()) throw std::invalid_argument("accuracy: empty node set");
    int correct = 0;
    for (int v : nodes) {
        const double* row = logits.row_ptr(v);
        int arg = 0;
        for (int c = 1; c < logits.cols; ++c)
            if (row[c] > row[arg]) arg = c;
        if (arg == labels[v]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

void write_train_log(std::ostream& out, const std::vector<EpochLog>& log) {
    out << "epoch,lr,train_loss,val_acc,disc_acc\n";
    char buf[160];
    for (const EpochLog& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", e.epoch, e.lr,
                      e.train_loss, e.val_acc, e.disc_acc);
        out << buf;
    }
}

}  // namespace rgnn
