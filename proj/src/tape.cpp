#include "rgnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rgnn {

Var Tape::input(Tensor value) {
    require_finite(value, "Tape::input");
    return push(std::move(value));
}

Var Tape::param(Tensor value) {
    require_finite(value, "Tape::param");
    return push(std::move(value));
}

Var Tape::push(Tensor value) {
    recs_.push_back({std::move(value), Tensor(), nullptr});
    return Var{static_cast<int>(recs_.size()) - 1};
}

void Tape::set_back(Var v, std::function<void(Tape&)> back) {
    recs_[v.id].back = std::move(back);
}

Tensor& Tape::grad_mut(Var v) {
    Record& r = recs_[v.id];
    if (r.grad.data.empty()) r.grad = Tensor(r.value.rows, r.value.cols);
    return r.grad;
}

void Tape::backward(Var loss) {
    if (!loss.valid()) throw std::invalid_argument("Tape::backward: invalid var");
    const Tensor& lv = recs_[loss.id].value;
    if (lv.rows != 1 || lv.cols != 1)
        throw std::invalid_argument("Tape::backward: loss must be 1x1, got " + lv.shape_str());
    for (Record& r : recs_) r.grad = Tensor();
    grad_mut(loss).data[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
        Record& r = recs_[i];
        if (r.back && !r.grad.data.empty()) r.back(*this);
    }
}

// ---------------------------------------------------------------------------

namespace {

const Tensor& val(Tape& t, Var v, const char* op) {
    if (!v.valid()) throw std::invalid_argument(std::string(op) + ": invalid var");
    const Tensor& x = t.value(v);
    require_finite(x, op);
    return x;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
    const Tensor& av = val(t, a, "matmul");
    const Tensor& bv = val(t, b, "matmul");
    if (av.cols != bv.rows)
        throw std::invalid_argument("matmul: inner dimensions disagree (" + av.shape_str() +
                                    " vs " + bv.shape_str() + ")");
    Tensor c(av.rows, bv.cols);
    for (int i = 0; i < av.rows; ++i) {
        const double* ar = av.row_ptr(i);
        double* cr = c.row_ptr(i);
        for (int k = 0; k < av.cols; ++k) {
            const double aik = ar[k];
            if (aik == 0.0) continue;
            const double* br = bv.row_ptr(k);
            for (int j = 0; j < bv.cols; ++j) cr[j] += aik * br[j];
        }
    }
    Var out = t.push(std::move(c));
    t.set_back(out, [out, a, b](Tape& t) {
        const Tensor& g = t.grad(out);
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        // dL/da = g . b^T
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < av.rows; ++i) {
            const double* gr = g.row_ptr(i);
            double* gar = ga.row_ptr(i);
            for (int k = 0; k < av.cols; ++k) {
                const double* br = bv.row_ptr(k);
                double s = 0.0;
                for (int j = 0; j < bv.cols; ++j) s += gr[j] * br[j];
                gar[k] += s;
            }
        }
        // dL/db = a^T . g
        Tensor& gb = t.grad_mut(b);
        for (int i = 0; i < av.rows; ++i) {
            const double* ar = av.row_ptr(i);
            const double* gr = g.row_ptr(i);
            for (int k = 0; k < av.cols; ++k) {
                const double aik = ar[k];
                if (aik == 0.0) continue;
                double* gbr = gb.row_ptr(k);
                for (int j = 0; j < bv.cols; ++j) gbr[j] += aik * gr[j];
            }
        }
    });
    return out;
}

Var add(Tape& t, Var a, Var b) {
    const Tensor& av = val(t, a, "add");
    const Tensor& bv = val(t, b, "add");
    if (!av.same_shape(bv))
        throw std::invalid_argument("add: shape mismatch (" + av.shape_str() + " vs " +
                                    bv.shape_str() + ")");
    Tensor c = av;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += bv.data[i];
    Var out = t.push(std::move(c));
    t.set_back(out, [out, a, b](Tape& t) {
        const Tensor& g = t.grad(out);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
    return out;
}

Var scale(Tape& t, Var a, double c) {
    const Tensor& av = val(t, a, "scale");
    if (!std::isfinite(c)) throw std::invalid_argument("scale: non-finite factor");
    Tensor r = av;
    for (double& v : r.data) v *= c;
    Var out = t.push(std::move(r));
    t.set_back(out, [out, a, c](Tape& t) {
        const Tensor& g = t.grad(out);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += c * g.data[i];
    });
    return out;
}

Var transpose(Tape& t, Var a) {
    const Tensor& av = val(t, a, "transpose");
    Tensor r(av.cols, av.rows);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) r.at(j, i) = av.at(i, j);
    Var out = t.push(std::move(r));
    t.set_back(out, [out, a](Tape& t) {
        const Tensor& g = t.grad(out);
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) ga.at(j, i) += g.at(i, j);
    });
    return out;
}

Var relu(Tape& t, Var a) {
    const Tensor& av = val(t, a, "relu");
    Tensor r = av;
    for (double& v : r.data) v = std::max(v, 0.0);
    Var out = t.push(std::move(r));
    t.set_back(out, [out, a](Tape& t) {
        const Tensor& g = t.grad(out);
        const Tensor& av = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            if (av.data[i] > 0.0) ga.data[i] += g.data[i];
    });
    return out;
}

Var sigmoid(Tape& t, Var a) {
    const Tensor& av = val(t, a, "sigmoid");
    Tensor r = av;
    for (double& v : r.data) v = stable_sigmoid(v);
    Var out = t.push(std::move(r));
    t.set_back(out, [out, a](Tape& t) {
        const Tensor& g = t.grad(out);
        const Tensor& y = t.value(out);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            ga.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
    });
    return out;
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    int rows = val(t, parts[0], "concat_cols").rows;
    int total = 0;
    for (Var p : parts) {
        const Tensor& pv = val(t, p, "concat_cols");
        if (pv.rows != rows)
            throw std::invalid_argument("concat_cols: row mismatch (" +
                                        std::to_string(pv.rows) + " vs " + std::to_string(rows) +
                                        ")");
        total += pv.cols;
    }
    Tensor c(rows, total);
    int off = 0;
    for (Var p : parts) {
        const Tensor& pv = t.value(p);
        for (int i = 0; i < rows; ++i)
            std::copy(pv.row_ptr(i), pv.row_ptr(i) + pv.cols, c.row_ptr(i) + off);
        off += pv.cols;
    }
    Var out = t.push(std::move(c));
    std::vector<Var> ps = parts;
    t.set_back(out, [out, ps](Tape& t) {
        const Tensor& g = t.grad(out);
        int off = 0;
        for (Var p : ps) {
            Tensor& gp = t.grad_mut(p);
            for (int i = 0; i < gp.rows; ++i) {
                const double* gr = g.row_ptr(i) + off;
                double* pr = gp.row_ptr(i);
                for (int j = 0; j < gp.cols; ++j) pr[j] += gr[j];
            }
            off += gp.cols;
        }
    });
    return out;
}

Var row_lookup(Tape& t, Var a, std::vector<int> rows) {
    const Tensor& av = val(t, a, "row_lookup");
    for (int r : rows)
        if (r < 0 || r >= av.rows)
            throw std::invalid_argument("row_lookup: row " + std::to_string(r) +
                                        " out of range for " + av.shape_str());
    Tensor c(static_cast<int>(rows.size()), av.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(av.row_ptr(rows[i]), av.row_ptr(rows[i]) + av.cols,
                  c.row_ptr(static_cast<int>(i)));
    Var out = t.push(std::move(c));
    t.set_back(out, [out, a, rows = std::move(rows)](Tape& t) {
        const Tensor& g = t.grad(out);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double* gr = g.row_ptr(static_cast<int>(i));
            double* ar = ga.row_ptr(rows[i]);
            for (int j = 0; j < g.cols; ++j) ar[j] += gr[j];
        }
    });
    return out;
}

Var mean_rows(Tape& t, Var a) {
    const Tensor& av = val(t, a, "mean_rows");
    if (av.rows == 0) throw std::invalid_argument("mean_rows: empty tensor");
    Tensor c(1, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) c.data[j] += av.at(i, j);
    for (double& v : c.data) v /= av.rows;
    Var out = t.push(std::move(c));
    t.set_back(out, [out, a](Tape& t) {
        const Tensor& g = t.grad(out);
        Tensor& ga = t.grad_mut(a);
        const double inv = 1.0 / ga.rows;
        for (int i = 0; i < ga.rows; ++i)
            for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += g.data[j] * inv;
    });
    return out;
}

Var rows_dot(Tape& t, Var a, Var b) {
    const Tensor& av = val(t, a, "rows_dot");
    const Tensor& bv = val(t, b, "rows_dot");
    if (!av.same_shape(bv))
        throw std::invalid_argument("rows_dot: shape mismatch (" + av.shape_str() + " vs " +
                                    bv.shape_str() + ")");
    Tensor c(av.rows, 1);
    for (int i = 0; i < av.rows; ++i) {
        double s = 0.0;
        const double* ar = av.row_ptr(i);
        const double* br = bv.row_ptr(i);
        for (int j = 0; j < av.cols; ++j) s += ar[j] * br[j];
        c.data[i] = s;
    }
    Var out = t.push(std::move(c));
    t.set_back(out, [out, a, b](Tape& t) {
        const Tensor& g = t.grad(out);
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (int i = 0; i < av.rows; ++i) {
            const double gi = g.data[i];
            for (int j = 0; j < av.cols; ++j) {
                ga.at(i, j) += gi * bv.at(i, j);
                gb.at(i, j) += gi * av.at(i, j);
            }
        }
    });
    return out;
}

Var row_normalize(Tape& t, Var a) {
    const Tensor& av = val(t, a, "row_normalize");
    Tensor c = av;
    std::vector<double> sums(av.rows);
    for (int i = 0; i < av.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < av.cols; ++j) s += av.at(i, j);
        if (s == 0.0)
            throw std::invalid_argument("row_normalize: zero row sum at row " + std::to_string(i));
        sums[i] = s;
        for (int j = 0; j < av.cols; ++j) c.at(i, j) /= s;
    }
    Var out = t.push(std::move(c));
    t.set_back(out, [out, a, sums = std::move(sums)](Tape& t) {
        const Tensor& g = t.grad(out);
        const Tensor& y = t.value(out);  // y_ij = a_ij / s_i
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < g.rows; ++i) {
            double gy = 0.0;  // sum_j g_ij y_ij
            for (int j = 0; j < g.cols; ++j) gy += g.at(i, j) * y.at(i, j);
            const double inv = 1.0 / sums[i];
            for (int j = 0; j < g.cols; ++j) ga.at(i, j) += (g.at(i, j) - gy) * inv;
        }
    });
    return out;
}

namespace {

Var neighbor_agg(Tape& t, const Graph& g, Var h, bool mean, const char* op) {
    const Tensor& hv = val(t, h, op);
    if (hv.rows != g.num_nodes())
        throw std::invalid_argument(std::string(op) + ": row count " +
                                    std::to_string(hv.rows) + " != node count " +
                                    std::to_string(g.num_nodes()));
    Tensor c(g.num_nodes(), hv.cols);
    for (int v = 0; v < g.num_nodes(); ++v) {
        auto nb = g.neighbors(v);
        if (nb.empty()) continue;  // isolated node: zero row
        double* cr = c.row_ptr(v);
        for (int u : nb) {
            const double* hr = hv.row_ptr(u);
            for (int j = 0; j < hv.cols; ++j) cr[j] += hr[j];
        }
        if (mean)
            for (int j = 0; j < hv.cols; ++j) cr[j] /= static_cast<double>(nb.size());
    }
    Var out = t.push(std::move(c));
    const Graph* gp = &g;
    t.set_back(out, [out, h, gp, mean](Tape& t) {
        const Tensor& gr = t.grad(out);
        Tensor& gh = t.grad_mut(h);
        for (int v = 0; v < gp->num_nodes(); ++v) {
            auto nb = gp->neighbors(v);
            if (nb.empty()) continue;
            const double w = mean ? 1.0 / static_cast<double>(nb.size()) : 1.0;
            const double* gvr = gr.row_ptr(v);
            for (int u : nb) {
                double* ghr = gh.row_ptr(u);
                for (int j = 0; j < gr.cols; ++j) ghr[j] += w * gvr[j];
            }
        }
    });
    return out;
}

}  // namespace

Var neighbor_mean_rows(Tape& t, const Graph& g, Var h) {
    return neighbor_agg(t, g, h, true, "neighbor_mean_rows");
}

Var neighbor_sum_rows(Tape& t, const Graph& g, Var h) {
    return neighbor_agg(t, g, h, false, "neighbor_sum_rows");
}

Var neighbor_max_rows(Tape& t, const Graph& g, Var h) {
    const Tensor& hv = val(t, h, "neighbor_max_rows");
    if (hv.rows != g.num_nodes())
        throw std::invalid_argument("neighbor_max_rows: row count mismatch");
    Tensor c(g.num_nodes(), hv.cols);
    // argmax[v*cols + j] = neighbor whose row attains the max (first on ties)
    std::vector<int> argmax(static_cast<std::size_t>(g.num_nodes()) * hv.cols, -1);
    for (int v = 0; v < g.num_nodes(); ++v) {
        auto nb = g.neighbors(v);
        if (nb.empty()) continue;
        double* cr = c.row_ptr(v);
        for (int j = 0; j < hv.cols; ++j) {
            int best = nb[0];
            double bestv = hv.at(nb[0], j);
            for (std::size_t k = 1; k < nb.size(); ++k)
                if (hv.at(nb[k], j) > bestv) {
                    bestv = hv.at(nb[k], j);
                    best = nb[k];
                }
            cr[j] = bestv;
            argmax[static_cast<std::size_t>(v) * hv.cols + j] = best;
        }
    }
    Var out = t.push(std::move(c));
    t.set_back(out, [out, h, argmax = std::move(argmax)](Tape& t) {
        const Tensor& g = t.grad(out);
        Tensor& gh = t.grad_mut(h);
        for (int v = 0; v < g.rows; ++v)
            for (int j = 0; j < g.cols; ++j) {
                int u = argmax[static_cast<std::size_t>(v) * g.cols + j];
                if (u >= 0) gh.at(u, j) += g.at(v, j);
            }
    });
    return out;
}

Var self_loop_mean_rows(Tape& t, const Graph& g, Var h) {
    const Tensor& hv = val(t, h, "self_loop_mean_rows");
    if (hv.rows != g.num_nodes())
        throw std::invalid_argument("self_loop_mean_rows: row count mismatch");
    Tensor c(g.num_nodes(), hv.cols);
    for (int v = 0; v < g.num_nodes(); ++v) {
        double* cr = c.row_ptr(v);
        const double* self = hv.row_ptr(v);
        for (int j = 0; j < hv.cols; ++j) cr[j] = self[j];
        for (int u : g.neighbors(v)) {
            const double* hr = hv.row_ptr(u);
            for (int j = 0; j < hv.cols; ++j) cr[j] += hr[j];
        }
        const double inv = 1.0 / (g.degree(v) + 1.0);
        for (int j = 0; j < hv.cols; ++j) cr[j] *= inv;
    }
    Var out = t.push(std::move(c));
    const Graph* gp = &g;
    t.set_back(out, [out, h, gp](Tape& t) {
        const Tensor& gr = t.grad(out);
        Tensor& gh = t.grad_mut(h);
        for (int v = 0; v < gp->num_nodes(); ++v) {
            const double w = 1.0 / (gp->degree(v) + 1.0);
            const double* gvr = gr.row_ptr(v);
            double* selfg = gh.row_ptr(v);
            for (int j = 0; j < gr.cols; ++j) selfg[j] += w * gvr[j];
            for (int u : gp->neighbors(v)) {
                double* ghr = gh.row_ptr(u);
                for (int j = 0; j < gr.cols; ++j) ghr[j] += w * gvr[j];
            }
        }
    });
    return out;
}

Var softmax_xent(Tape& t, Var logits, const std::vector<int>& labels,
                 const std::vector<int>& mask) {
    const Tensor& lv = val(t, logits, "softmax_xent");
    if (static_cast<int>(labels.size()) != lv.rows)
        throw std::invalid_argument("softmax_xent: label count != logit rows");
    if (mask.empty()) throw std::invalid_argument("softmax_xent: empty mask");
    for (int i : mask) {
        if (i < 0 || i >= lv.rows)
            throw std::invalid_argument("softmax_xent: mask index out of range");
        if (labels[i] < 0 || labels[i] >= lv.cols)
            throw std::invalid_argument("softmax_xent: label out of range at node " +
                                        std::to_string(i));
    }
    // probs saved for backward
    Tensor probs(static_cast<int>(mask.size()), lv.cols);
    double loss = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        const int i = mask[k];
        const double* r = lv.row_ptr(i);
        double mx = r[0];
        for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, r[j]);
        double sum = 0.0;
        for (int j = 0; j < lv.cols; ++j) sum += std::exp(r[j] - mx);
        const double logsum = mx + std::log(sum);
        loss += logsum - r[labels[i]];
        for (int j = 0; j < lv.cols; ++j)
            probs.at(static_cast<int>(k), j) = std::exp(r[j] - logsum);
    }
    loss /= static_cast<double>(mask.size());
    Var out = t.push(Tensor::scalar(loss));
    t.set_back(out, [out, logits, labels, mask, probs = std::move(probs)](Tape& t) {
        const double g = t.grad(out).data[0] / static_cast<double>(mask.size());
        Tensor& gl = t.grad_mut(logits);
        for (std::size_t k = 0; k < mask.size(); ++k) {
            const int i = mask[k];
            double* gr = gl.row_ptr(i);
            for (int j = 0; j < gl.cols; ++j)
                gr[j] += g * (probs.at(static_cast<int>(k), j) - (j == labels[i] ? 1.0 : 0.0));
        }
    });
    return out;
}

Var binary_xent(Tape& t, Var scores, const std::vector<double>& targets) {
    const Tensor& sv = val(t, scores, "binary_xent");
    if (targets.size() != sv.data.size())
        throw std::invalid_argument("binary_xent: target count " +
                                    std::to_string(targets.size()) + " != score count " +
                                    std::to_string(sv.data.size()));
    if (sv.data.empty()) throw std::invalid_argument("binary_xent: empty scores");
    for (double y : targets)
        if (y != 0.0 && y != 1.0)
            throw std::invalid_argument("binary_xent: targets must be 0 or 1");
    double loss = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i)
        loss += softplus(sv.data[i]) - targets[i] * sv.data[i];
    loss /= static_cast<double>(targets.size());
    Var out = t.push(Tensor::scalar(loss));
    t.set_back(out, [out, scores, targets](Tape& t) {
        const double g = t.grad(out).data[0] / static_cast<double>(targets.size());
        const Tensor& sv = t.value(scores);
        Tensor& gs = t.grad_mut(scores);
        for (std::size_t i = 0; i < targets.size(); ++i)
            gs.data[i] += g * (stable_sigmoid(sv.data[i]) - targets[i]);
    });
    return out;
}

}  // namespace rgnn
