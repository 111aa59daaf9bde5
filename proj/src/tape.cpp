#include "hierwm/tape.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "hierwm/freq.hpp"
#include "hierwm/kernels.hpp"

namespace hierwm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double gelu_fwd(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }
inline double gelu_dfwd(double x) {
    const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    return phi + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Copies head columns [off, off+dh) of src [n, d] into dst [n, dh].
void take_head(const double* src, double* dst, int n, int d, int off, int dh) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dh; ++j)
            dst[static_cast<std::int64_t>(i) * dh + j] = src[static_cast<std::int64_t>(i) * d + off + j];
}

void put_head(const double* src, double* dst, int n, int d, int off, int dh, bool accumulate) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dh; ++j) {
            double& out = dst[static_cast<std::int64_t>(i) * d + off + j];
            const double v = src[static_cast<std::int64_t>(i) * dh + j];
            out = accumulate ? out + v : v;
        }
}

}  // namespace

Tape::Ref Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> vjp) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad && grad_enabled_;
    if (n.needs_grad) n.vjp = std::move(vjp);
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size() - 1);
}

bool Tape::wants_grad(std::initializer_list<Ref> inputs) const {
    if (!grad_enabled_) return false;
    for (Ref r : inputs)
        if (r != kNone && node(r).needs_grad) return true;
    return false;
}

void Tape::accum(Ref r, const double* g, std::int64_t n) {
    Node& nd = node(r);
    if (!nd.needs_grad) return;
    if (nd.grad.size() == 0) nd.grad = Tensor::zeros(nd.value.shape);
    if (nd.grad.size() != n) throw std::logic_error("Tape: gradient size mismatch");
    for (std::int64_t i = 0; i < n; ++i) nd.grad[i] += g[i];
}

const Tensor& Tape::grad(Ref r) const {
    const Node& nd = node(r);
    if (nd.grad.size() == 0) {
        if (zero_.shape != nd.value.shape) const_cast<Tape*>(this)->zero_ = Tensor::zeros(nd.value.shape);
        return zero_;
    }
    return nd.grad;
}

Tape::Ref Tape::input(Tensor v) { return push(std::move(v), false, nullptr); }

Tape::Ref Tape::param(Tensor v) {
    Node n;
    n.value = std::move(v);
    n.needs_grad = grad_enabled_;
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size() - 1);
}

Tape::Ref Tape::add(Ref a, Ref b) {
    const Tensor& va = val(a);
    const Tensor& vb = val(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::add: shape mismatch");
    Tensor out(va.shape);
    kern::add(va.ptr(), vb.ptr(), out.ptr(), out.size());
    Ref r = push(std::move(out), wants_grad({a, b}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [a, b, r](Tape& t) {
            const Tensor& g = t.node(r).grad;
            t.accum(a, g.ptr(), g.size());
            t.accum(b, g.ptr(), g.size());
        };
    return r;
}

Tape::Ref Tape::sub(Ref a, Ref b) { return add_scaled(a, b, -1.0); }

Tape::Ref Tape::scale(Ref a, double s) {
    const Tensor& va = val(a);
    Tensor out(va.shape);
    kern::scale(va.ptr(), s, out.ptr(), out.size());
    Ref r = push(std::move(out), wants_grad({a}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [a, s, r](Tape& t) {
            const Tensor& g = t.node(r).grad;
            Tensor ga(g.shape);
            kern::scale(g.ptr(), s, ga.ptr(), g.size());
            t.accum(a, ga.ptr(), ga.size());
        };
    return r;
}

Tape::Ref Tape::add_scaled(Ref a, Ref b, double s) {
    const Tensor& va = val(a);
    const Tensor& vb = val(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::add_scaled: shape mismatch");
    Tensor out = va;
    kern::axpy(s, vb.ptr(), out.ptr(), out.size());
    Ref r = push(std::move(out), wants_grad({a, b}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [a, b, s, r](Tape& t) {
            const Tensor& g = t.node(r).grad;
            t.accum(a, g.ptr(), g.size());
            Tensor gb(g.shape);
            kern::scale(g.ptr(), s, gb.ptr(), g.size());
            t.accum(b, gb.ptr(), gb.size());
        };
    return r;
}

Tape::Ref Tape::add_gated(Ref h, Ref x, Ref g) {
    const Tensor& vh = val(h);
    const Tensor& vx = val(x);
    const Tensor& vg = val(g);
    if (!vh.same_shape(vx)) throw std::invalid_argument("Tape::add_gated: shape mismatch");
    if (vg.size() != 1) throw std::invalid_argument("Tape::add_gated: gate must be scalar");

    if (!grad_enabled_ && vg[0] == 0.0) return push(vh, false, nullptr);  // bitwise pass-through

    Tensor out = vh;
    kern::axpy(vg[0], vx.ptr(), out.ptr(), out.size());
    Ref r = push(std::move(out), wants_grad({h, x, g}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [h, x, g, r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            t.accum(h, go.ptr(), go.size());
            const double gate = t.val(g)[0];
            Tensor gx(go.shape);
            kern::scale(go.ptr(), gate, gx.ptr(), go.size());
            t.accum(x, gx.ptr(), gx.size());
            double dg = 0.0;
            const Tensor& vx2 = t.val(x);
            for (std::int64_t i = 0; i < go.size(); ++i) dg += vx2[i] * go[i];
            t.accum(g, &dg, 1);
        };
    return r;
}

Tape::Ref Tape::linear(Ref x, Ref w, Ref b) {
    const Tensor& vx = val(x);
    const Tensor& vw = val(w);
    if (vw.ndim() != 2) throw std::invalid_argument("Tape::linear: weight must be 2D");
    const int in = vw.dim(0);
    const int out_dim = vw.dim(1);
    if (vx.size() % in != 0) throw std::invalid_argument("Tape::linear: input size not divisible by fan-in");
    const int rows = static_cast<int>(vx.size() / in);

    std::vector<int> out_shape = vx.shape;
    out_shape.back() = out_dim;
    if (vx.shape.back() != in) out_shape = {rows, out_dim};

    Tensor out(out_shape);
    kern::matmul(vx.ptr(), vw.ptr(), out.ptr(), rows, in, out_dim);
    if (b != kNone) {
        const Tensor& vb = val(b);
        if (vb.size() != out_dim) throw std::invalid_argument("Tape::linear: bias size mismatch");
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < out_dim; ++j) out[static_cast<std::int64_t>(i) * out_dim + j] += vb[j];
    }

    Ref r = push(std::move(out), wants_grad({x, w, b}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, w, b, rows, in, out_dim, r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            const Tensor& vx2 = t.val(x);
            const Tensor& vw2 = t.val(w);
            if (t.node(w).needs_grad) {
                Tensor gw({in, out_dim});
                kern::matmul(vx2.ptr(), go.ptr(), gw.ptr(), in, rows, out_dim, true, false);
                t.accum(w, gw.ptr(), gw.size());
            }
            if (b != kNone && t.node(b).needs_grad) {
                Tensor gb({out_dim});
                for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < out_dim; ++j) gb[j] += go[static_cast<std::int64_t>(i) * out_dim + j];
                t.accum(b, gb.ptr(), gb.size());
            }
            if (t.node(x).needs_grad) {
                Tensor gx(vx2.shape);
                kern::matmul(go.ptr(), vw2.ptr(), gx.ptr(), rows, out_dim, in, false, true);
                t.accum(x, gx.ptr(), gx.size());
            }
        };
    return r;
}

Tape::Ref Tape::add_row_broadcast(Ref x, Ref v) {
    const Tensor& vx = val(x);
    const Tensor& vv = val(v);
    const int c = static_cast<int>(vv.size());
    if (c == 0 || vx.size() % c != 0)
        throw std::invalid_argument("Tape::add_row_broadcast: size mismatch");
    const int rows = static_cast<int>(vx.size() / c);
    Tensor out = vx;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < c; ++j) out[static_cast<std::int64_t>(i) * c + j] += vv[j];
    Ref r = push(std::move(out), wants_grad({x, v}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, v, rows, c, r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            t.accum(x, go.ptr(), go.size());
            if (t.node(v).needs_grad) {
                Tensor gv({c});
                for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < c; ++j) gv[j] += go[static_cast<std::int64_t>(i) * c + j];
                t.accum(v, gv.ptr(), gv.size());
            }
        };
    return r;
}

Tape::Ref Tape::layer_norm(Ref x, Ref gamma, Ref beta, double eps) {
    const Tensor& vx = val(x);
    const Tensor& vg = val(gamma);
    const Tensor& vb = val(beta);
    const int c = static_cast<int>(vg.size());
    if (vb.size() != c || c == 0 || vx.size() % c != 0)
        throw std::invalid_argument("Tape::layer_norm: size mismatch");
    const int rows = static_cast<int>(vx.size() / c);

    Tensor out(vx.shape);
    auto xhat = std::make_shared<Tensor>(Tensor::zeros({rows, c}));
    auto rstd = std::make_shared<Tensor>(Tensor::zeros({rows}));
    for (int i = 0; i < rows; ++i) {
        const double* xp = vx.ptr() + static_cast<std::int64_t>(i) * c;
        double mu = 0.0;
        for (int j = 0; j < c; ++j) mu += xp[j];
        mu /= c;
        double var = 0.0;
        for (int j = 0; j < c; ++j) var += (xp[j] - mu) * (xp[j] - mu);
        var /= c;
        const double rs = 1.0 / std::sqrt(var + eps);
        (*rstd)[i] = rs;
        double* xh = xhat->ptr() + static_cast<std::int64_t>(i) * c;
        double* op = out.ptr() + static_cast<std::int64_t>(i) * c;
        for (int j = 0; j < c; ++j) {
            xh[j] = (xp[j] - mu) * rs;
            op[j] = xh[j] * vg[j] + vb[j];
        }
    }

    Ref r = push(std::move(out), wants_grad({x, gamma, beta}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, gamma, beta, rows, c, xhat, rstd, r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            const Tensor& vg2 = t.val(gamma);
            Tensor gx({rows, c});
            Tensor gg({c});
            Tensor gb({c});
            for (int i = 0; i < rows; ++i) {
                const double* g = go.ptr() + static_cast<std::int64_t>(i) * c;
                const double* xh = xhat->ptr() + static_cast<std::int64_t>(i) * c;
                const double rs = (*rstd)[i];
                double mean_a = 0.0, mean_ax = 0.0;
                for (int j = 0; j < c; ++j) {
                    const double a = g[j] * vg2[j];
                    mean_a += a;
                    mean_ax += a * xh[j];
                    gg[j] += g[j] * xh[j];
                    gb[j] += g[j];
                }
                mean_a /= c;
                mean_ax /= c;
                double* gxp = gx.ptr() + static_cast<std::int64_t>(i) * c;
                for (int j = 0; j < c; ++j)
                    gxp[j] = rs * (g[j] * vg2[j] - mean_a - xh[j] * mean_ax);
            }
            t.accum(x, gx.ptr(), gx.size());
            t.accum(gamma, gg.ptr(), gg.size());
            t.accum(beta, gb.ptr(), gb.size());
        };
    return r;
}

Tape::Ref Tape::gelu(Ref x) {
    const Tensor& vx = val(x);
    Tensor out(vx.shape);
    for (std::int64_t i = 0; i < vx.size(); ++i) out[i] = gelu_fwd(vx[i]);
    Ref r = push(std::move(out), wants_grad({x}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            const Tensor& vx2 = t.val(x);
            Tensor gx(go.shape);
            for (std::int64_t i = 0; i < go.size(); ++i) gx[i] = go[i] * gelu_dfwd(vx2[i]);
            t.accum(x, gx.ptr(), gx.size());
        };
    return r;
}

namespace {
struct AttnCache {
    Tensor q, k, v;   // [n, d]
    Tensor probs;     // [heads, n, n]
    Tensor concat;    // [n, d] pre-output-projection
};
}  // namespace

Tape::Ref Tape::attention(Ref x, Ref wq, Ref bq, Ref wk, Ref bk, Ref wv, Ref bv, Ref wo,
                          Ref bo, int num_heads) {
    const Tensor& vx = val(x);
    if (vx.ndim() != 2) throw std::invalid_argument("Tape::attention: x must be [n, d]");
    const int n = vx.dim(0);
    const int d = vx.dim(1);
    if (num_heads <= 0 || d % num_heads != 0)
        throw std::invalid_argument("Tape::attention: heads must divide dim");
    const int dh = d / num_heads;
    const double inv = 1.0 / std::sqrt(static_cast<double>(dh));

    auto cache = std::make_shared<AttnCache>();
    auto project = [&](Ref w, Ref b) {
        Tensor p({n, d});
        kern::matmul(vx.ptr(), val(w).ptr(), p.ptr(), n, d, d);
        const Tensor& bias = val(b);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) p[static_cast<std::int64_t>(i) * d + j] += bias[j];
        return p;
    };
    cache->q = project(wq, bq);
    cache->k = project(wk, bk);
    cache->v = project(wv, bv);
    cache->probs = Tensor::zeros({num_heads, n, n});
    cache->concat = Tensor::zeros({n, d});

    Tensor qh({n, dh}), kh({n, dh}), vh({n, dh}), scores({n, n}), oh({n, dh});
    for (int h = 0; h < num_heads; ++h) {
        const int off = h * dh;
        take_head(cache->q.ptr(), qh.ptr(), n, d, off, dh);
        take_head(cache->k.ptr(), kh.ptr(), n, d, off, dh);
        take_head(cache->v.ptr(), vh.ptr(), n, d, off, dh);
        kern::matmul(qh.ptr(), kh.ptr(), scores.ptr(), n, dh, n, false, true);
        double* probs = cache->probs.ptr() + static_cast<std::int64_t>(h) * n * n;
        for (int i = 0; i < n; ++i) {
            double* row = scores.ptr() + static_cast<std::int64_t>(i) * n;
            double mx = -1e300;
            for (int j = 0; j < n; ++j) mx = std::max(mx, row[j] * inv);
            double sum = 0.0;
            double* prow = probs + static_cast<std::int64_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                prow[j] = std::exp(row[j] * inv - mx);
                sum += prow[j];
            }
            for (int j = 0; j < n; ++j) prow[j] /= sum;
        }
        kern::matmul(probs, vh.ptr(), oh.ptr(), n, n, dh);
        put_head(oh.ptr(), cache->concat.ptr(), n, d, off, dh, false);
    }

    Tensor out({n, d});
    kern::matmul(cache->concat.ptr(), val(wo).ptr(), out.ptr(), n, d, d);
    const Tensor& vbo = val(bo);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out[static_cast<std::int64_t>(i) * d + j] += vbo[j];

    Ref r = push(std::move(out), wants_grad({x, wq, bq, wk, bk, wv, bv, wo, bo}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, wq, bq, wk, bk, wv, bv, wo, bo, num_heads, n, d, dh, inv, cache,
                       r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            const Tensor& vx2 = t.val(x);

            Tensor gwo({d, d}), gbo({d});
            kern::matmul(cache->concat.ptr(), go.ptr(), gwo.ptr(), d, n, d, true, false);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) gbo[j] += go[static_cast<std::int64_t>(i) * d + j];
            t.accum(wo, gwo.ptr(), gwo.size());
            t.accum(bo, gbo.ptr(), gbo.size());

            Tensor d_concat({n, d});
            kern::matmul(go.ptr(), t.val(wo).ptr(), d_concat.ptr(), n, d, d, false, true);

            Tensor dq({n, d}), dk({n, d}), dv({n, d});
            Tensor qh({n, dh}), kh({n, dh}), vh({n, dh}), doh({n, dh});
            Tensor dp({n, n}), ds({n, n});
            Tensor dqh({n, dh}), dkh({n, dh}), dvh({n, dh});
            for (int h = 0; h < num_heads; ++h) {
                const int off = h * dh;
                take_head(cache->q.ptr(), qh.ptr(), n, d, off, dh);
                take_head(cache->k.ptr(), kh.ptr(), n, d, off, dh);
                take_head(cache->v.ptr(), vh.ptr(), n, d, off, dh);
                take_head(d_concat.ptr(), doh.ptr(), n, d, off, dh);
                const double* probs = cache->probs.ptr() + static_cast<std::int64_t>(h) * n * n;

                kern::matmul(doh.ptr(), vh.ptr(), dp.ptr(), n, dh, n, false, true);
                kern::matmul(probs, doh.ptr(), dvh.ptr(), n, n, dh, true, false);
                for (int i = 0; i < n; ++i) {
                    const double* prow = probs + static_cast<std::int64_t>(i) * n;
                    const double* dprow = dp.ptr() + static_cast<std::int64_t>(i) * n;
                    double dot = 0.0;
                    for (int j = 0; j < n; ++j) dot += prow[j] * dprow[j];
                    double* dsrow = ds.ptr() + static_cast<std::int64_t>(i) * n;
                    for (int j = 0; j < n; ++j) dsrow[j] = inv * prow[j] * (dprow[j] - dot);
                }
                kern::matmul(ds.ptr(), kh.ptr(), dqh.ptr(), n, n, dh);
                kern::matmul(ds.ptr(), qh.ptr(), dkh.ptr(), n, n, dh, true, false);
                put_head(dqh.ptr(), dq.ptr(), n, d, off, dh, false);
                put_head(dkh.ptr(), dk.ptr(), n, d, off, dh, false);
                put_head(dvh.ptr(), dv.ptr(), n, d, off, dh, false);
            }

            Tensor gx({n, d});
            bool gx_used = t.node(x).needs_grad;
            auto backprop_proj = [&](const Tensor& dproj, Ref w, Ref b, bool first) {
                Tensor gw({d, d}), gb({d});
                kern::matmul(vx2.ptr(), dproj.ptr(), gw.ptr(), d, n, d, true, false);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j) gb[j] += dproj[static_cast<std::int64_t>(i) * d + j];
                t.accum(w, gw.ptr(), gw.size());
                t.accum(b, gb.ptr(), gb.size());
                if (gx_used)
                    kern::matmul(dproj.ptr(), t.val(w).ptr(), gx.ptr(), n, d, d, false, true, !first);
            };
            backprop_proj(dq, wq, bq, true);
            backprop_proj(dk, wk, bk, false);
            backprop_proj(dv, wv, bv, false);
            if (gx_used) t.accum(x, gx.ptr(), gx.size());
        };
    return r;
}

Tape::Ref Tape::permute(Ref x, std::vector<std::int64_t> index, std::vector<int> out_shape) {
    const Tensor& vx = val(x);
    if (Tensor::count(out_shape) != static_cast<std::int64_t>(index.size()) ||
        static_cast<std::int64_t>(index.size()) != vx.size())
        throw std::invalid_argument("Tape::permute: index/shape mismatch");
    Tensor out(out_shape);
    for (size_t i = 0; i < index.size(); ++i) out[static_cast<std::int64_t>(i)] = vx[index[i]];
    auto idx = std::make_shared<std::vector<std::int64_t>>(std::move(index));
    Ref r = push(std::move(out), wants_grad({x}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, idx, r](Tape& t) {
            const Tensor& go = t.node(r).grad;
            Tensor gx(t.val(x).shape);
            for (size_t i = 0; i < idx->size(); ++i) gx[(*idx)[i]] += go[static_cast<std::int64_t>(i)];
            t.accum(x, gx.ptr(), gx.size());
        };
    return r;
}

Tape::Ref Tape::highpass(Ref x, int h, int w, int c, double rho) {
    const Tensor& vx = val(x);
    Tensor out = dft_highpass(vx, h, w, c, rho);
    Ref r = push(std::move(out), wants_grad({x}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [x, h, w, c, rho, r](Tape& t) {
            // The filter is self-adjoint: pull the gradient back through it.
            Tensor gx = dft_highpass(t.node(r).grad, h, w, c, rho);
            t.accum(x, gx.ptr(), gx.size());
        };
    return r;
}

Tape::Ref Tape::mse(Ref a, Ref b) {
    const Tensor& va = val(a);
    const Tensor& vb = val(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::mse: shape mismatch");
    const std::int64_t n = va.size();
    if (n == 0) throw std::invalid_argument("Tape::mse: empty tensors");
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = va[i] - vb[i];
        acc += d * d;
    }
    Ref r = push(Tensor::scalar(acc / static_cast<double>(n)), wants_grad({a, b}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [a, b, n, r](Tape& t) {
            const double g = t.node(r).grad[0] * 2.0 / static_cast<double>(n);
            const Tensor& va2 = t.val(a);
            const Tensor& vb2 = t.val(b);
            Tensor ga(va2.shape);
            for (std::int64_t i = 0; i < n; ++i) ga[i] = g * (va2[i] - vb2[i]);
            t.accum(a, ga.ptr(), ga.size());
            for (std::int64_t i = 0; i < n; ++i) ga[i] = -ga[i];
            t.accum(b, ga.ptr(), ga.size());
        };
    return r;
}

Tape::Ref Tape::sum_squares(Ref a) {
    const Tensor& va = val(a);
    double acc = 0.0;
    for (std::int64_t i = 0; i < va.size(); ++i) acc += va[i] * va[i];
    Ref r = push(Tensor::scalar(acc), wants_grad({a}), nullptr);
    if (node(r).needs_grad)
        node(r).vjp = [a, r](Tape& t) {
            const double g = t.node(r).grad[0];
            const Tensor& va2 = t.val(a);
            Tensor ga(va2.shape);
            for (std::int64_t i = 0; i < va2.size(); ++i) ga[i] = 2.0 * g * va2[i];
            t.accum(a, ga.ptr(), ga.size());
        };
    return r;
}

void Tape::backward(Ref root) {
    if (!grad_enabled_) throw std::logic_error("Tape::backward: gradients disabled");
    Node& rn = node(root);
    if (rn.value.size() != 1) throw std::invalid_argument("Tape::backward: root must be scalar");
    rn.grad = Tensor::scalar(1.0);
    for (Ref i = root; i >= 0; --i) {
        Node& nd = node(i);
        if (nd.vjp && nd.grad.size() != 0) nd.vjp(*this);
    }
}

}  // namespace hierwm
