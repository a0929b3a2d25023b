#include "lolb/nn/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "lolb/parallel.hpp"

namespace lolb::nn {

namespace {

int reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

// Source index of a padded tap, or -1 when it falls in the zero border.
int tap_index(int i, int n, Padding pad) {
    if (i >= 0 && i < n) return i;
    return pad == Padding::Reflect ? reflect(i, n) : -1;
}

template <typename T>
void check_conv_args(const Tensor<T>& x, const Tensor<T>& w, ConvSpec spec) {
    x.require_rank(3, "conv2d input");
    w.require_rank(4, "conv2d weights");
    if (w.dim(1) != w.dim(2) || w.dim(1) % 2 == 0) throw ShapeError("conv2d kernel must be square with odd size");
    if (w.dim(3) != x.c()) {
        throw ShapeError("conv2d weights expect " + std::to_string(w.dim(3)) + " input channels, got " + x.shape_string());
    }
    if (spec.stride < 1) throw ShapeError("conv2d stride must be >= 1");
}

}  // namespace

int conv_out_size(int in, int k, int stride) {
    return (in + 2 * (k / 2) - k) / stride + 1;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, ConvSpec spec) {
    check_conv_args(x, w, spec);
    const int H = x.h(), W = x.w(), Cin = x.c();
    const int Cout = w.dim(0), K = w.dim(1), p = K / 2, s = spec.stride;
    if (!bias.empty() && static_cast<int>(bias.size()) != Cout) throw ShapeError("conv2d bias size mismatch");
    const int Ho = conv_out_size(H, K, s), Wo = conv_out_size(W, K, s);

    // Repack to (K,K,Cin,Cout) so the innermost loop runs over contiguous outputs.
    std::vector<T> wt(w.size());
    for (int co = 0; co < Cout; ++co)
        for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx)
                for (int ci = 0; ci < Cin; ++ci)
                    wt[((std::size_t(ky) * K + kx) * Cin + ci) * Cout + co] = w[((std::size_t(co) * K + ky) * K + kx) * Cin + ci];

    Tensor<T> out(Ho, Wo, Cout);
    LOLB_OMP(parallel for schedule(static))
    for (int oy = 0; oy < Ho; ++oy) {
        std::vector<double> acc(static_cast<std::size_t>(Cout));
        for (int ox = 0; ox < Wo; ++ox) {
            for (int co = 0; co < Cout; ++co) acc[std::size_t(co)] = bias.empty() ? 0.0 : double(bias[std::size_t(co)]);
            for (int ky = 0; ky < K; ++ky) {
                const int iy = tap_index(oy * s + ky - p, H, spec.pad);
                if (iy < 0) continue;
                for (int kx = 0; kx < K; ++kx) {
                    const int ix = tap_index(ox * s + kx - p, W, spec.pad);
                    if (ix < 0) continue;
                    const T* xp = x.pixel(iy, ix);
                    const T* wp = wt.data() + (std::size_t(ky) * K + kx) * Cin * Cout;
                    for (int ci = 0; ci < Cin; ++ci) {
                        const double xv = xp[ci];
                        const T* wr = wp + std::size_t(ci) * Cout;
                        double* a = acc.data();
                        for (int co = 0; co < Cout; ++co) a[co] += xv * double(wr[co]);
                    }
                }
            }
            T* op = out.pixel(oy, ox);
            for (int co = 0; co < Cout; ++co) op[co] = static_cast<T>(acc[std::size_t(co)]);
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy, ConvSpec spec) {
    check_conv_args(x, w, spec);
    const int H = x.h(), W = x.w(), Cin = x.c();
    const int Cout = w.dim(0), K = w.dim(1), p = K / 2, s = spec.stride;
    const int Ho = conv_out_size(H, K, s), Wo = conv_out_size(W, K, s);
    if (gy.dims() != std::vector<int>{Ho, Wo, Cout}) throw ShapeError("conv2d upstream gradient has shape " + gy.shape_string());

    ConvGrads<T> g{Tensor<T>(x.dims()), Tensor<T>(w.dims()), Tensor<T>(std::vector<int>{Cout})};

    if (spec.pad == Padding::Zero) {
        // Gather: each input pixel sums the outputs whose window covers it.
        LOLB_OMP(parallel for schedule(static))
        for (int iy = 0; iy < H; ++iy) {
            std::vector<double> acc(static_cast<std::size_t>(Cin));
            for (int ix = 0; ix < W; ++ix) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (int ky = 0; ky < K; ++ky) {
                    const int ty = iy + p - ky;
                    if (ty < 0 || ty % s != 0 || ty / s >= Ho) continue;
                    const int oy = ty / s;
                    for (int kx = 0; kx < K; ++kx) {
                        const int tx = ix + p - kx;
                        if (tx < 0 || tx % s != 0 || tx / s >= Wo) continue;
                        const T* gp = gy.pixel(oy, tx / s);
                        for (int co = 0; co < Cout; ++co) {
                            const double gv = gp[co];
                            const T* wr = w.raw() + ((std::size_t(co) * K + ky) * K + kx) * Cin;
                            double* a = acc.data();
                            for (int ci = 0; ci < Cin; ++ci) a[ci] += gv * double(wr[ci]);
                        }
                    }
                }
                T* xp = g.x.pixel(iy, ix);
                for (int ci = 0; ci < Cin; ++ci) xp[ci] = static_cast<T>(acc[std::size_t(ci)]);
            }
        }
    } else {
        // Reflected taps can land on the same input from several outputs; scatter serially.
        std::vector<double> acc(x.size(), 0.0);
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                const T* gp = gy.pixel(oy, ox);
                for (int ky = 0; ky < K; ++ky) {
                    const int iy = tap_index(oy * s + ky - p, H, spec.pad);
                    for (int kx = 0; kx < K; ++kx) {
                        const int ix = tap_index(ox * s + kx - p, W, spec.pad);
                        double* a = acc.data() + (std::size_t(iy) * W + ix) * Cin;
                        for (int co = 0; co < Cout; ++co) {
                            const double gv = gp[co];
                            const T* wr = w.raw() + ((std::size_t(co) * K + ky) * K + kx) * Cin;
                            for (int ci = 0; ci < Cin; ++ci) a[ci] += gv * double(wr[ci]);
                        }
                    }
                }
            }
        for (std::size_t i = 0; i < acc.size(); ++i) g.x[i] = static_cast<T>(acc[i]);
    }

    LOLB_OMP(parallel for schedule(dynamic))
    for (int co = 0; co < Cout; ++co) {
        std::vector<double> acc(std::size_t(K) * K * Cin, 0.0);
        double bacc = 0.0;
        for (int oy = 0; oy < Ho; ++oy) {
            for (int ox = 0; ox < Wo; ++ox) {
                const double gv = gy.at(oy, ox, co);
                bacc += gv;
                if (gv == 0.0) continue;
                for (int ky = 0; ky < K; ++ky) {
                    const int iy = tap_index(oy * s + ky - p, H, spec.pad);
                    if (iy < 0) continue;
                    for (int kx = 0; kx < K; ++kx) {
                        const int ix = tap_index(ox * s + kx - p, W, spec.pad);
                        if (ix < 0) continue;
                        const T* xp = x.pixel(iy, ix);
                        double* a = acc.data() + (std::size_t(ky) * K + kx) * Cin;
                        for (int ci = 0; ci < Cin; ++ci) a[ci] += gv * double(xp[ci]);
                    }
                }
            }
        }
        T* wg = g.weights.raw() + std::size_t(co) * K * K * Cin;
        for (std::size_t i = 0; i < acc.size(); ++i) wg[i] = static_cast<T>(acc[i]);
        g.bias[std::size_t(co)] = static_cast<T>(bacc);
    }
    return g;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
    Tensor<T> y(x.dims());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& gy) {
    require_same_shape(x, gy, "relu_backward");
    Tensor<T> gx(x.dims());
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > T(0) ? gy[i] : T(0);
    return gx;
}

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& x) {
    Tensor<T> y(x.dims());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<T>(1.0 / (1.0 + std::exp(-double(x[i]))));
    return y;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& gy) {
    require_same_shape(y, gy, "sigmoid_backward");
    Tensor<T> gx(y.dims());
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] = static_cast<T>(double(gy[i]) * double(y[i]) * (1.0 - double(y[i])));
    return gx;
}

namespace {

template <typename T>
void check_curve_args(const Tensor<T>& f, const Tensor<T>& a, int n) {
    f.require_rank(3, "curve_nlu features");
    a.require_rank(3, "curve_nlu parameters");
    if (n < 1) throw ValidationError("curve_nlu needs n >= 1");
    if (a.h() != f.h() || a.w() != f.w() || a.c() != n) {
        throw ShapeError("curve parameters " + a.shape_string() + " do not match features " + f.shape_string() +
                         " with n = " + std::to_string(n));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] >= T(0) && a[i] <= T(1))) throw ValidationError("curve parameter outside [0,1]: " + std::to_string(double(a[i])));
    }
}

}  // namespace

template <typename T>
Tensor<T> curve_nlu_forward(const Tensor<T>& f, const Tensor<T>& a, int n) {
    check_curve_args(f, a, n);
    const int H = f.h(), W = f.w(), C = f.c();
    Tensor<T> out(f.dims());
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const T* ap = a.pixel(y, x);
            const T* fp = f.pixel(y, x);
            T* op = out.pixel(y, x);
            for (int c = 0; c < C; ++c) {
                double v = std::clamp(double(fp[c]), 0.0, 1.0);
                for (int i = 0; i < n; ++i) v = double(ap[i]) * v * (1.0 - v) + v;
                op[c] = static_cast<T>(v);
            }
        }
    }
    return out;
}

template <typename T>
CurveGrads<T> curve_nlu_backward(const Tensor<T>& f, const Tensor<T>& a, int n, const Tensor<T>& gy) {
    check_curve_args(f, a, n);
    require_same_shape(f, gy, "curve_nlu_backward");
    const int H = f.h(), W = f.w(), C = f.c();
    CurveGrads<T> g{Tensor<T>(f.dims()), Tensor<T>(a.dims())};
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < H; ++y) {
        std::vector<double> chain(static_cast<std::size_t>(n) + 1);
        std::vector<double> ga(static_cast<std::size_t>(n));
        for (int x = 0; x < W; ++x) {
            const T* ap = a.pixel(y, x);
            const T* fp = f.pixel(y, x);
            const T* gp = gy.pixel(y, x);
            T* gfp = g.features.pixel(y, x);
            std::fill(ga.begin(), ga.end(), 0.0);
            for (int c = 0; c < C; ++c) {
                const double raw = fp[c];
                chain[0] = std::clamp(raw, 0.0, 1.0);
                for (int i = 0; i < n; ++i) chain[i + 1] = double(ap[i]) * chain[i] * (1.0 - chain[i]) + chain[i];
                double up = gp[c];
                for (int i = n - 1; i >= 0; --i) {
                    const double ci = chain[std::size_t(i)];
                    ga[std::size_t(i)] += up * ci * (1.0 - ci);
                    up *= 1.0 + double(ap[i]) * (1.0 - 2.0 * ci);
                }
                gfp[c] = (raw >= 0.0 && raw <= 1.0) ? static_cast<T>(up) : T(0);
            }
            T* gap = g.curve_params.pixel(y, x);
            for (int i = 0; i < n; ++i) gap[i] = static_cast<T>(ga[std::size_t(i)]);
        }
    }
    return g;
}

namespace {

template <typename T>
void check_fac_args(const Tensor<T>& d, const Tensor<T>& k, int ks) {
    d.require_rank(3, "fac features");
    k.require_rank(3, "fac filters");
    if (ks < 1 || ks % 2 == 0) throw ShapeError("fac kernel size must be odd");
    if (k.h() != d.h() || k.w() != d.w()) throw ShapeError("fac filters " + k.shape_string() + " vs features " + d.shape_string());
    if (k.c() % (ks * ks) != 0) throw ShapeError("fac filter channels not divisible by d*d");
    if (k.c() != d.c() * ks * ks) throw ShapeError("fac filter channels must equal C*d*d");
}

}  // namespace

template <typename T>
Tensor<T> fac_forward(const Tensor<T>& d, const Tensor<T>& k, int ks) {
    check_fac_args(d, k, ks);
    const int H = d.h(), W = d.w(), C = d.c(), r = ks / 2, kk = ks * ks;
    Tensor<T> out(d.dims());
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const T* kp = k.pixel(y, x);
            T* op = out.pixel(y, x);
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                const T* kc = kp + std::size_t(c) * kk;
                for (int u = 0; u < ks; ++u) {
                    const int sy = y + u - r;
                    if (sy < 0 || sy >= H) continue;
                    for (int v = 0; v < ks; ++v) {
                        const int sx = x + v - r;
                        if (sx < 0 || sx >= W) continue;
                        acc += double(kc[u * ks + v]) * double(d.at(sy, sx, c));
                    }
                }
                op[c] = static_cast<T>(acc);
            }
        }
    }
    return out;
}

template <typename T>
FacGrads<T> fac_backward(const Tensor<T>& d, const Tensor<T>& k, int ks, const Tensor<T>& gy) {
    check_fac_args(d, k, ks);
    require_same_shape(d, gy, "fac_backward");
    const int H = d.h(), W = d.w(), C = d.c(), r = ks / 2, kk = ks * ks;
    FacGrads<T> g{Tensor<T>(d.dims()), Tensor<T>(k.dims())};
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const T* gp = gy.pixel(y, x);
            T* gk = g.filters.pixel(y, x);
            for (int c = 0; c < C; ++c) {
                for (int u = 0; u < ks; ++u) {
                    const int sy = y + u - r;
                    for (int v = 0; v < ks; ++v) {
                        const int sx = x + v - r;
                        const bool inside = sy >= 0 && sy < H && sx >= 0 && sx < W;
                        gk[std::size_t(c) * kk + u * ks + v] = inside ? static_cast<T>(double(gp[c]) * double(d.at(sy, sx, c))) : T(0);
                    }
                }
            }
            // Feature (y,x) feeds output (y - u + r, x - v + r) through tap (u,v).
            T* gd = g.features.pixel(y, x);
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int u = 0; u < ks; ++u) {
                    const int oy = y - u + r;
                    if (oy < 0 || oy >= H) continue;
                    for (int v = 0; v < ks; ++v) {
                        const int ox = x - v + r;
                        if (ox < 0 || ox >= W) continue;
                        acc += double(gy.at(oy, ox, c)) * double(k.at(oy, ox, c * kk + u * ks + v));
                    }
                }
                gd[c] = static_cast<T>(acc);
            }
        }
    }
    return g;
}

namespace {

int bin_start(int i, int n, int b) { return (i * n) / b; }
int bin_end(int i, int n, int b) { return ((i + 1) * n + b - 1) / b; }

}  // namespace

template <typename T>
Tensor<T> adaptive_avg_pool_forward(const Tensor<T>& x, int bins) {
    x.require_rank(3, "adaptive_avg_pool");
    if (bins < 1) throw ShapeError("pool bins must be >= 1");
    const int H = x.h(), W = x.w(), C = x.c();
    Tensor<T> out(bins, bins, C);
    for (int by = 0; by < bins; ++by) {
        const int y0 = bin_start(by, H, bins), y1 = bin_end(by, H, bins);
        for (int bx = 0; bx < bins; ++bx) {
            const int x0 = bin_start(bx, W, bins), x1 = bin_end(bx, W, bins);
            const double inv = 1.0 / double((y1 - y0) * (x1 - x0));
            for (int c = 0; c < C; ++c) {
                double s = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int xx = x0; xx < x1; ++xx) s += x.at(y, xx, c);
                out.at(by, bx, c) = static_cast<T>(s * inv);
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> adaptive_avg_pool_backward(const std::vector<int>& dims, int bins, const Tensor<T>& gy) {
    Tensor<T> gx(dims);
    gx.require_rank(3, "adaptive_avg_pool_backward");
    const int H = gx.h(), W = gx.w(), C = gx.c();
    if (gy.dims() != std::vector<int>{bins, bins, C}) throw ShapeError("pool upstream gradient shape mismatch");
    std::vector<double> acc(gx.size(), 0.0);
    for (int by = 0; by < bins; ++by) {
        const int y0 = bin_start(by, H, bins), y1 = bin_end(by, H, bins);
        for (int bx = 0; bx < bins; ++bx) {
            const int x0 = bin_start(bx, W, bins), x1 = bin_end(bx, W, bins);
            const double inv = 1.0 / double((y1 - y0) * (x1 - x0));
            for (int c = 0; c < C; ++c) {
                const double g = double(gy.at(by, bx, c)) * inv;
                for (int y = y0; y < y1; ++y)
                    for (int xx = x0; xx < x1; ++xx) acc[(std::size_t(y) * W + xx) * C + c] += g;
            }
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) gx[i] = static_cast<T>(acc[i]);
    return gx;
}

namespace {

struct ResizeTap {
    int i0, i1;
    double t;
};

std::vector<ResizeTap> resize_taps(int in, int out) {
    std::vector<ResizeTap> taps(static_cast<std::size_t>(out));
    const double scale = double(in) / double(out);
    for (int i = 0; i < out; ++i) {
        double src = (i + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, double(in - 1));
        const int i0 = std::min(static_cast<int>(std::floor(src)), in - 1);
        const int i1 = std::min(i0 + 1, in - 1);
        taps[std::size_t(i)] = {i0, i1, src - i0};
    }
    return taps;
}

}  // namespace

template <typename T>
Tensor<T> resize_forward(const Tensor<T>& x, int out_h, int out_w) {
    x.require_rank(3, "resize");
    if (out_h < 1 || out_w < 1) throw ShapeError("resize target must be at least 1x1");
    const int C = x.c();
    const auto ty = resize_taps(x.h(), out_h);
    const auto tx = resize_taps(x.w(), out_w);
    Tensor<T> out(out_h, out_w, C);
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < out_h; ++y) {
        const ResizeTap a = ty[std::size_t(y)];
        for (int xx = 0; xx < out_w; ++xx) {
            const ResizeTap b = tx[std::size_t(xx)];
            const T* p00 = x.pixel(a.i0, b.i0);
            const T* p01 = x.pixel(a.i0, b.i1);
            const T* p10 = x.pixel(a.i1, b.i0);
            const T* p11 = x.pixel(a.i1, b.i1);
            T* op = out.pixel(y, xx);
            for (int c = 0; c < C; ++c) {
                const double top = (1.0 - b.t) * p00[c] + b.t * p01[c];
                const double bot = (1.0 - b.t) * p10[c] + b.t * p11[c];
                op[c] = static_cast<T>((1.0 - a.t) * top + a.t * bot);
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> resize_backward(const std::vector<int>& dims, const Tensor<T>& gy) {
    Tensor<T> gx(dims);
    gx.require_rank(3, "resize_backward");
    gy.require_rank(3, "resize_backward upstream");
    const int C = gx.c(), W = gx.w();
    if (gy.c() != C) throw ShapeError("resize upstream gradient channel mismatch");
    const auto ty = resize_taps(gx.h(), gy.h());
    const auto tx = resize_taps(gx.w(), gy.w());
    std::vector<double> acc(gx.size(), 0.0);
    for (int y = 0; y < gy.h(); ++y) {
        const ResizeTap a = ty[std::size_t(y)];
        for (int xx = 0; xx < gy.w(); ++xx) {
            const ResizeTap b = tx[std::size_t(xx)];
            const T* gp = gy.pixel(y, xx);
            const double w00 = (1 - a.t) * (1 - b.t), w01 = (1 - a.t) * b.t, w10 = a.t * (1 - b.t), w11 = a.t * b.t;
            for (int c = 0; c < C; ++c) {
                const double g = gp[c];
                acc[(std::size_t(a.i0) * W + b.i0) * C + c] += w00 * g;
                acc[(std::size_t(a.i0) * W + b.i1) * C + c] += w01 * g;
                acc[(std::size_t(a.i1) * W + b.i0) * C + c] += w10 * g;
                acc[(std::size_t(a.i1) * W + b.i1) * C + c] += w11 * g;
            }
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) gx[i] = static_cast<T>(acc[i]);
    return gx;
}

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
    if (parts.empty()) throw ShapeError("concat of zero tensors");
    const int H = parts[0]->h(), W = parts[0]->w();
    int C = 0;
    for (const Tensor<T>* p : parts) {
        p->require_rank(3, "concat_channels");
        if (p->h() != H || p->w() != W) throw ShapeError("concat_channels spatial mismatch");
        C += p->c();
    }
    Tensor<T> out(H, W, C);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            T* op = out.pixel(y, x);
            for (const Tensor<T>* p : parts) {
                const T* ip = p->pixel(y, x);
                op = std::copy(ip, ip + p->c(), op);
            }
        }
    return out;
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<int>& widths) {
    x.require_rank(3, "split_channels");
    int total = 0;
    for (int w : widths) total += w;
    if (total != x.c()) throw ShapeError("split_channels widths do not sum to channel count");
    std::vector<Tensor<T>> parts;
    for (int w : widths) parts.emplace_back(x.h(), x.w(), w);
    for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx) {
            const T* ip = x.pixel(y, xx);
            for (std::size_t i = 0; i < parts.size(); ++i) {
                std::copy(ip, ip + widths[i], parts[i].pixel(y, xx));
                ip += widths[i];
            }
        }
    return parts;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    Tensor<T> out = a;
    out += b;
    return out;
}

template <typename T>
double l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    require_same_shape(pred, target, "l1_loss");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(double(pred[i]) - double(target[i]));
    return pred.empty() ? 0.0 : s / double(pred.size());
}

template <typename T>
Tensor<T> l1_loss_grad(const Tensor<T>& pred, const Tensor<T>& target) {
    require_same_shape(pred, target, "l1_loss_grad");
    Tensor<T> g(pred.dims());
    const double inv = 1.0 / double(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = double(pred[i]) - double(target[i]);
        g[i] = static_cast<T>(d > 0 ? inv : (d < 0 ? -inv : 0.0));
    }
    return g;
}

namespace ref {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, ConvSpec spec) {
    check_conv_args(x, w, spec);
    const int Cout = w.dim(0), K = w.dim(1), p = K / 2, s = spec.stride;
    const int Ho = conv_out_size(x.h(), K, s), Wo = conv_out_size(x.w(), K, s);
    Tensor<T> out(Ho, Wo, Cout);
    for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox)
            for (int co = 0; co < Cout; ++co) {
                double acc = bias.empty() ? 0.0 : double(bias[std::size_t(co)]);
                for (int ky = 0; ky < K; ++ky)
                    for (int kx = 0; kx < K; ++kx) {
                        const int iy = tap_index(oy * s + ky - p, x.h(), spec.pad);
                        const int ix = tap_index(ox * s + kx - p, x.w(), spec.pad);
                        if (iy < 0 || ix < 0) continue;
                        for (int ci = 0; ci < x.c(); ++ci)
                            acc += double(w[((std::size_t(co) * K + ky) * K + kx) * x.c() + ci]) * double(x.at(iy, ix, ci));
                    }
                out.at(oy, ox, co) = static_cast<T>(acc);
            }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy, ConvSpec spec) {
    check_conv_args(x, w, spec);
    const int Cout = w.dim(0), K = w.dim(1), p = K / 2, s = spec.stride, Cin = x.c();
    const int Ho = conv_out_size(x.h(), K, s), Wo = conv_out_size(x.w(), K, s);
    std::vector<double> gx(x.size(), 0.0), gw(w.size(), 0.0), gb(static_cast<std::size_t>(Cout), 0.0);
    for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox)
            for (int co = 0; co < Cout; ++co) {
                const double g = gy.at(oy, ox, co);
                gb[std::size_t(co)] += g;
                for (int ky = 0; ky < K; ++ky)
                    for (int kx = 0; kx < K; ++kx) {
                        const int iy = tap_index(oy * s + ky - p, x.h(), spec.pad);
                        const int ix = tap_index(ox * s + kx - p, x.w(), spec.pad);
                        if (iy < 0 || ix < 0) continue;
                        for (int ci = 0; ci < Cin; ++ci) {
                            const std::size_t wi = ((std::size_t(co) * K + ky) * K + kx) * Cin + ci;
                            const std::size_t xi = (std::size_t(iy) * x.w() + ix) * Cin + ci;
                            gx[xi] += g * double(w[wi]);
                            gw[wi] += g * double(x[xi]);
                        }
                    }
            }
    ConvGrads<T> out{Tensor<T>(x.dims()), Tensor<T>(w.dims()), Tensor<T>(std::vector<int>{Cout})};
    for (std::size_t i = 0; i < gx.size(); ++i) out.x[i] = static_cast<T>(gx[i]);
    for (std::size_t i = 0; i < gw.size(); ++i) out.weights[i] = static_cast<T>(gw[i]);
    for (std::size_t i = 0; i < gb.size(); ++i) out.bias[i] = static_cast<T>(gb[i]);
    return out;
}

template <typename T>
Tensor<T> fac_forward(const Tensor<T>& d, const Tensor<T>& k, int ks) {
    check_fac_args(d, k, ks);
    const int r = ks / 2;
    Tensor<T> out(d.dims());
    for (int y = 0; y < d.h(); ++y)
        for (int x = 0; x < d.w(); ++x)
            for (int c = 0; c < d.c(); ++c) {
                double acc = 0.0;
                for (int u = 0; u < ks; ++u)
                    for (int v = 0; v < ks; ++v) {
                        const int sy = y + u - r, sx = x + v - r;
                        if (sy < 0 || sy >= d.h() || sx < 0 || sx >= d.w()) continue;
                        acc += double(k.at(y, x, c * ks * ks + u * ks + v)) * double(d.at(sy, sx, c));
                    }
                out.at(y, x, c) = static_cast<T>(acc);
            }
    return out;
}

template <typename T>
FacGrads<T> fac_backward(const Tensor<T>& d, const Tensor<T>& k, int ks, const Tensor<T>& gy) {
    check_fac_args(d, k, ks);
    const int r = ks / 2;
    std::vector<double> gd(d.size(), 0.0);
    FacGrads<T> out{Tensor<T>(d.dims()), Tensor<T>(k.dims())};
    for (int y = 0; y < d.h(); ++y)
        for (int x = 0; x < d.w(); ++x)
            for (int c = 0; c < d.c(); ++c) {
                const double g = gy.at(y, x, c);
                for (int u = 0; u < ks; ++u)
                    for (int v = 0; v < ks; ++v) {
                        const int sy = y + u - r, sx = x + v - r;
                        if (sy < 0 || sy >= d.h() || sx < 0 || sx >= d.w()) continue;
                        const int kc = c * ks * ks + u * ks + v;
                        out.filters.at(y, x, kc) = static_cast<T>(g * double(d.at(sy, sx, c)));
                        gd[(std::size_t(sy) * d.w() + sx) * d.c() + c] += g * double(k.at(y, x, kc));
                    }
            }
    for (std::size_t i = 0; i < gd.size(); ++i) out.features[i] = static_cast<T>(gd[i]);
    return out;
}

}  // namespace ref

#define LOLB_INSTANTIATE_KERNELS(T)                                                                            \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvSpec);         \
    template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvSpec);     \
    template Tensor<T> relu_forward(const Tensor<T>&);                                                         \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                      \
    template Tensor<T> sigmoid_forward(const Tensor<T>&);                                                      \
    template Tensor<T> sigmoid_backward(const Tensor<T>&, const Tensor<T>&);                                   \
    template Tensor<T> curve_nlu_forward(const Tensor<T>&, const Tensor<T>&, int);                             \
    template CurveGrads<T> curve_nlu_backward(const Tensor<T>&, const Tensor<T>&, int, const Tensor<T>&);      \
    template Tensor<T> fac_forward(const Tensor<T>&, const Tensor<T>&, int);                                   \
    template FacGrads<T> fac_backward(const Tensor<T>&, const Tensor<T>&, int, const Tensor<T>&);              \
    template Tensor<T> adaptive_avg_pool_forward(const Tensor<T>&, int);                                       \
    template Tensor<T> adaptive_avg_pool_backward(const std::vector<int>&, int, const Tensor<T>&);             \
    template Tensor<T> resize_forward(const Tensor<T>&, int, int);                                             \
    template Tensor<T> resize_backward(const std::vector<int>&, const Tensor<T>&);                             \
    template Tensor<T> concat_channels(const std::vector<const Tensor<T>*>&);                                  \
    template std::vector<Tensor<T>> split_channels(const Tensor<T>&, const std::vector<int>&);                 \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                                \
    template double l1_loss(const Tensor<T>&, const Tensor<T>&);                                               \
    template Tensor<T> l1_loss_grad(const Tensor<T>&, const Tensor<T>&);                                       \
    template Tensor<T> ref::conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvSpec);    \
    template ConvGrads<T> ref::conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvSpec); \
    template Tensor<T> ref::fac_forward(const Tensor<T>&, const Tensor<T>&, int);                              \
    template FacGrads<T> ref::fac_backward(const Tensor<T>&, const Tensor<T>&, int, const Tensor<T>&);

LOLB_INSTANTIATE_KERNELS(float)
LOLB_INSTANTIATE_KERNELS(double)

}  // namespace lolb::nn
