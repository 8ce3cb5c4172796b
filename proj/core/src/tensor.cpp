#include "airway/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "airway/error.hpp"

namespace airway::nn {

std::string Shape5::str() const {
  std::ostringstream s;
  s << "(" << n << ", " << c << ", " << d << ", " << h << ", " << w << ")";
  return s.str();
}

Tensor Tensor::zeros(const Shape5& shape, bool requires_grad) {
  return from_values(shape, std::vector<double>(shape.size(), 0.0), requires_grad);
}

Tensor Tensor::from_values(const Shape5& shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.size()) {
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " +
                     shape.str());
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + shape().str() + " is not scalar");
  return node_->value[0];
}

Tensor Tensor::detach(bool requires_grad) const {
  return from_values(shape(), node_->value, requires_grad);
}

Tensor Tensor::make_result(const Shape5& shape, std::vector<double> values,
                           std::vector<Tensor> parents,
                           std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(values);
  const bool any = std::any_of(parents.begin(), parents.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
  if (any) {
    node->requires_grad = true;
    node->backward = std::move(backward);
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_);
  }
  return Tensor(std::move(node));
}

void Tensor::backward() const {
  if (size() != 1) throw ShapeError("backward: requires a scalar, got " + shape().str());
  if (!requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

namespace {

detail::Node& parent(detail::Node& self, std::size_t i) { return *self.parents[i]; }

void require_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

struct ConvGeometry {
  std::size_t n, cin, cout, d, h, w, k;
  std::ptrdiff_t pad;
};

/// Valid [lo, hi) range of output coordinates for a tap offset `delta`
/// along an axis of length `len`.
inline void tap_range(std::ptrdiff_t delta, std::ptrdiff_t len, std::ptrdiff_t& lo,
                      std::ptrdiff_t& hi) {
  lo = std::max<std::ptrdiff_t>(0, -delta);
  hi = std::min(len, len - delta);
}

/// out[i] += w * in[i] over a row span.
inline void axpy(double* __restrict out, const double* __restrict in, double w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += w * in[i];
}

/// out[i] += a[i] * b[i] over a row span.
inline void fma_row(double* __restrict out, const double* __restrict a, const double* __restrict b,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

/// Zero-padded 3-tap row correlation: out[x] += w0 in[x-1] + w1 in[x] + w2 in[x+1].
inline void row3(double* __restrict out, const double* __restrict in, double w0, double w1,
                 double w2, std::size_t n) {
  if (n == 1) {
    out[0] += w1 * in[0];
    return;
  }
  out[0] += w1 * in[0] + w2 * in[1];
  for (std::size_t x = 1; x + 1 < n; ++x) out[x] += w0 * in[x - 1] + w1 * in[x] + w2 * in[x + 1];
  out[n - 1] += w0 * in[n - 2] + w1 * in[n - 1];
}

/// Adds one kernel row (k taps along x) of a zero-padded correlation.
/// `flip` applies the taps mirrored, which is the transpose used for the
/// input gradient.
inline void row_taps(double* out, const double* in, const double* w, std::ptrdiff_t k,
                     std::ptrdiff_t pad, std::ptrdiff_t W, bool flip) {
  if (k == 3) {
    if (flip) {
      row3(out, in, w[2], w[1], w[0], static_cast<std::size_t>(W));
    } else {
      row3(out, in, w[0], w[1], w[2], static_cast<std::size_t>(W));
    }
    return;
  }
  for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
    const std::ptrdiff_t dx = flip ? pad - kx : kx - pad;
    std::ptrdiff_t x0, x1;
    tap_range(dx, W, x0, x1);
    if (x1 > x0) axpy(out + x0, in + x0 + dx, w[kx], static_cast<std::size_t>(x1 - x0));
  }
}

/// Weight-gradient partial rows for a 3-tap x kernel:
/// p_k[x] += g[x] * in[x + k - 1] with zero padding.
inline void wgrad_row3(double* __restrict p0, double* __restrict p1, double* __restrict p2,
                       const double* __restrict g, const double* __restrict in, std::size_t n) {
  p1[0] += g[0] * in[0];
  if (n == 1) return;
  p2[0] += g[0] * in[1];
  for (std::size_t x = 1; x + 1 < n; ++x) {
    const double gx = g[x];
    p0[x] += gx * in[x - 1];
    p1[x] += gx * in[x];
    p2[x] += gx * in[x + 1];
  }
  p0[n - 1] += g[n - 1] * in[n - 2];
  p1[n - 1] += g[n - 1] * in[n - 1];
}

// All three conv kernels walk output rows (z, y) in the outer loops so the
// rows being accumulated stay in L1 while the k^2 source rows stream by.

void conv_forward(const ConvGeometry& g, const double* X, const double* Wt, const double* B,
                  double* out) {
  const auto D = static_cast<std::ptrdiff_t>(g.d), H = static_cast<std::ptrdiff_t>(g.h),
             W = static_cast<std::ptrdiff_t>(g.w), K = static_cast<std::ptrdiff_t>(g.k);
  const std::size_t S = g.d * g.h * g.w, K3 = g.k * g.k * g.k;
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t co = 0; co < g.cout; ++co) {
      double* o = out + (n * g.cout + co) * S;
      for (std::ptrdiff_t z = 0; z < D; ++z) {
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          double* orow = o + (z * H + y) * W;
          std::fill(orow, orow + W, B[co]);
          for (std::size_t ci = 0; ci < g.cin; ++ci) {
            const double* in = X + (n * g.cin + ci) * S;
            const double* wk = Wt + (co * g.cin + ci) * K3;
            for (std::ptrdiff_t kz = 0; kz < K; ++kz) {
              const std::ptrdiff_t zi = z + kz - g.pad;
              if (zi < 0 || zi >= D) continue;
              for (std::ptrdiff_t ky = 0; ky < K; ++ky) {
                const std::ptrdiff_t yi = y + ky - g.pad;
                if (yi < 0 || yi >= H) continue;
                row_taps(orow, in + (zi * H + yi) * W, wk + (kz * K + ky) * K, K, g.pad, W, false);
              }
            }
          }
        }
      }
    }
  }
}

void conv_backward_input(const ConvGeometry& g, const double* G, const double* Wt, double* GX) {
  const auto D = static_cast<std::ptrdiff_t>(g.d), H = static_cast<std::ptrdiff_t>(g.h),
             W = static_cast<std::ptrdiff_t>(g.w), K = static_cast<std::ptrdiff_t>(g.k);
  const std::size_t S = g.d * g.h * g.w, K3 = g.k * g.k * g.k;
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t ci = 0; ci < g.cin; ++ci) {
      double* gin = GX + (n * g.cin + ci) * S;
      for (std::ptrdiff_t zi = 0; zi < D; ++zi) {
        for (std::ptrdiff_t yi = 0; yi < H; ++yi) {
          double* girow = gin + (zi * H + yi) * W;
          for (std::size_t co = 0; co < g.cout; ++co) {
            const double* go = G + (n * g.cout + co) * S;
            const double* wk = Wt + (co * g.cin + ci) * K3;
            for (std::ptrdiff_t kz = 0; kz < K; ++kz) {
              const std::ptrdiff_t z = zi - (kz - g.pad);
              if (z < 0 || z >= D) continue;
              for (std::ptrdiff_t ky = 0; ky < K; ++ky) {
                const std::ptrdiff_t y = yi - (ky - g.pad);
                if (y < 0 || y >= H) continue;
                row_taps(girow, go + (z * H + y) * W, wk + (kz * K + ky) * K, K, g.pad, W, true);
              }
            }
          }
        }
      }
    }
  }
}

void conv_backward_weight(const ConvGeometry& g, const double* G, const double* X, double* GW) {
  const auto D = static_cast<std::ptrdiff_t>(g.d), H = static_cast<std::ptrdiff_t>(g.h),
             W = static_cast<std::ptrdiff_t>(g.w), K = static_cast<std::ptrdiff_t>(g.k);
  const std::size_t S = g.d * g.h * g.w, K3 = g.k * g.k * g.k;
  // One partial-sum row per tap keeps the inner loops elementwise; the
  // rows are reduced once per (co, ci) pair.
  std::vector<double> partial(K3 * g.w);
  for (std::size_t co = 0; co < g.cout; ++co) {
    for (std::size_t ci = 0; ci < g.cin; ++ci) {
      std::fill(partial.begin(), partial.end(), 0.0);
      for (std::size_t n = 0; n < g.n; ++n) {
        const double* go = G + (n * g.cout + co) * S;
        const double* in = X + (n * g.cin + ci) * S;
        for (std::ptrdiff_t z = 0; z < D; ++z) {
          for (std::ptrdiff_t y = 0; y < H; ++y) {
            const double* grow = go + (z * H + y) * W;
            for (std::ptrdiff_t kz = 0; kz < K; ++kz) {
              const std::ptrdiff_t zi = z + kz - g.pad;
              if (zi < 0 || zi >= D) continue;
              for (std::ptrdiff_t ky = 0; ky < K; ++ky) {
                const std::ptrdiff_t yi = y + ky - g.pad;
                if (yi < 0 || yi >= H) continue;
                const double* irow = in + (zi * H + yi) * W;
                double* prow0 = partial.data() + static_cast<std::size_t>((kz * K + ky) * K) * g.w;
                if (K == 3) {
                  wgrad_row3(prow0, prow0 + g.w, prow0 + 2 * g.w, grow, irow, g.w);
                  continue;
                }
                for (std::ptrdiff_t kx = 0; kx < K; ++kx) {
                  const std::ptrdiff_t dx = kx - g.pad;
                  std::ptrdiff_t x0, x1;
                  tap_range(dx, W, x0, x1);
                  if (x1 > x0) {
                    double* prow = partial.data() +
                                   static_cast<std::size_t>((kz * K + ky) * K + kx) * g.w;
                    fma_row(prow + x0, grow + x0, irow + x0 + dx, static_cast<std::size_t>(x1 - x0));
                  }
                }
              }
            }
          }
        }
      }
      double* gw = GW + (co * g.cin + ci) * K3;
      for (std::size_t t = 0; t < K3; ++t) {
        const double* prow = partial.data() + t * g.w;
        double acc = 0.0;
        for (std::size_t x = 0; x < g.w; ++x) acc += prow[x];
        gw[t] += acc;
      }
    }
  }
}

}  // namespace

Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const auto& xs = x.shape();
  const auto& ws = weight.shape();
  if (ws.c != xs.c || ws.d != ws.h || ws.d != ws.w || ws.d % 2 == 0) {
    throw ShapeError("conv3d: input " + xs.str() + " incompatible with kernel " + ws.str());
  }
  if (!(bias.shape() == Shape5{1, ws.n, 1, 1, 1})) {
    throw ShapeError("conv3d: bias " + bias.shape().str() + " does not match kernel " + ws.str());
  }
  const ConvGeometry g{xs.n, xs.c, ws.n, xs.d, xs.h, xs.w, ws.d,
                       static_cast<std::ptrdiff_t>(ws.d / 2)};
  const Shape5 out_shape{g.n, g.cout, g.d, g.h, g.w};
  const std::size_t S = xs.spatial();

  std::vector<double> out(out_shape.size());
  conv_forward(g, x.values().data(), weight.values().data(), bias.values().data(), out.data());

  return Tensor::make_result(out_shape, std::move(out), {x, weight, bias}, [g, S](detail::Node& self) {
    auto& xn = parent(self, 0);
    auto& wn = parent(self, 1);
    auto& bn = parent(self, 2);
    const double* G = self.grad.data();
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t co = 0; co < g.cout; ++co) {
          const double* go = G + (n * g.cout + co) * S;
          double acc = 0.0;
          for (std::size_t i = 0; i < S; ++i) acc += go[i];
          gb[co] += acc;
        }
      }
    }
    if (wn.requires_grad) conv_backward_weight(g, G, xn.value.data(), wn.grad_buffer().data());
    if (xn.requires_grad) conv_backward_input(g, G, wn.value.data(), xn.grad_buffer().data());
  });
}

Tensor relu(const Tensor& x) {
  const auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] < 0.0 ? 0.0 : in[i];
  return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto& xn = parent(self, 0);
    auto& gx = xn.grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (xn.value[i] > 0.0) gx[i] += self.grad[i];
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  const auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto& gx = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double y = self.value[i];
      gx[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor maxpool3d(const Tensor& x, std::size_t factor) {
  const auto& s = x.shape();
  if (factor == 0 || s.d % factor || s.h % factor || s.w % factor) {
    throw ShapeError("maxpool3d: spatial dims of " + s.str() + " not divisible by " +
                     std::to_string(factor));
  }
  if (factor == 1) return x;
  const Shape5 os{s.n, s.c, s.d / factor, s.h / factor, s.w / factor};
  std::vector<double> out(os.size());
  auto argmax = std::make_shared<std::vector<std::size_t>>(os.size());
  const double* X = x.values().data();
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    const std::size_t base = nc * s.spatial();
    for (std::size_t z = 0; z < os.d; ++z) {
      for (std::size_t y = 0; y < os.h; ++y) {
        for (std::size_t xx = 0; xx < os.w; ++xx, ++o) {
          std::size_t best = base + ((z * factor) * s.h + y * factor) * s.w + xx * factor;
          double bv = X[best];
          for (std::size_t dz = 0; dz < factor; ++dz) {
            for (std::size_t dy = 0; dy < factor; ++dy) {
              const std::size_t row =
                  base + ((z * factor + dz) * s.h + (y * factor + dy)) * s.w + xx * factor;
              for (std::size_t dx = 0; dx < factor; ++dx) {
                if (X[row + dx] > bv) {
                  bv = X[row + dx];
                  best = row + dx;
                }
              }
            }
          }
          out[o] = bv;
          (*argmax)[o] = best;
        }
      }
    }
  }
  return Tensor::make_result(os, std::move(out), {x}, [argmax](detail::Node& self) {
    auto& gx = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[(*argmax)[i]] += self.grad[i];
  });
}

Tensor upsample_nn(const Tensor& x, std::size_t factor) {
  if (factor == 0) throw ShapeError("upsample_nn: factor must be >= 1");
  if (factor == 1) return x;
  const auto& s = x.shape();
  const Shape5 os{s.n, s.c, s.d * factor, s.h * factor, s.w * factor};
  std::vector<double> out(os.size());
  const double* X = x.values().data();
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    const double* src = X + nc * s.spatial();
    for (std::size_t z = 0; z < os.d; ++z) {
      for (std::size_t y = 0; y < os.h; ++y) {
        const double* row = src + ((z / factor) * s.h + y / factor) * s.w;
        for (std::size_t xx = 0; xx < os.w; ++xx, ++o) out[o] = row[xx / factor];
      }
    }
  }
  return Tensor::make_result(os, std::move(out), {x}, [s, os, factor](detail::Node& self) {
    auto& gx = parent(self, 0).grad_buffer();
    std::size_t o = 0;
    for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
      double* dst = gx.data() + nc * s.spatial();
      for (std::size_t z = 0; z < os.d; ++z) {
        for (std::size_t y = 0; y < os.h; ++y) {
          double* row = dst + ((z / factor) * s.h + y / factor) * s.w;
          for (std::size_t xx = 0; xx < os.w; ++xx, ++o) row[xx / factor] += self.grad[o];
        }
      }
    }
  });
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: no inputs");
  Shape5 os = xs.front().shape();
  os.c = 0;
  for (const auto& t : xs) {
    const auto& s = t.shape();
    if (s.n != os.n || s.d != os.d || s.h != os.h || s.w != os.w) {
      throw ShapeError("concat_channels: " + xs.front().shape().str() + " vs " + s.str());
    }
    os.c += s.c;
  }
  const std::size_t S = os.spatial();
  std::vector<double> out(os.size());
  for (std::size_t n = 0; n < os.n; ++n) {
    std::size_t c0 = 0;
    for (const auto& t : xs) {
      const std::size_t block = t.shape().c * S;
      std::copy_n(t.values().data() + n * block, block, out.data() + (n * os.c + c0) * S);
      c0 += t.shape().c;
    }
  }
  std::vector<std::size_t> channels;
  for (const auto& t : xs) channels.push_back(t.shape().c);
  return Tensor::make_result(os, std::move(out), xs, [os, S, channels](detail::Node& self) {
    for (std::size_t n = 0; n < os.n; ++n) {
      std::size_t c0 = 0;
      for (std::size_t k = 0; k < channels.size(); ++k) {
        auto& pn = parent(self, k);
        const std::size_t block = channels[k] * S;
        if (pn.requires_grad) {
          double* dst = pn.grad_buffer().data() + n * block;
          const double* src = self.grad.data() + (n * os.c + c0) * S;
          for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
        }
        c0 += channels[k];
      }
    }
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return Tensor::make_result({}, {acc}, {x}, [](detail::Node& self) {
    auto& gx = parent(self, 0).grad_buffer();
    for (auto& g : gx) g += self.grad[0];
  });
}

Tensor weighted_sum(const Tensor& x, std::span<const double> weights) {
  if (weights.size() != x.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(weights.size()) + " weights for " +
                     x.shape().str());
  }
  double acc = 0.0;
  const auto v = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) acc += weights[i] * v[i];
  std::vector<double> w(weights.begin(), weights.end());
  return Tensor::make_result({}, {acc}, {x}, [w = std::move(w)](detail::Node& self) {
    auto& gx = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[0] * w[i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto& pn = parent(self, k);
      if (!pn.requires_grad) continue;
      auto& g = pn.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor soft_dice_loss(const Tensor& pred, const Tensor& truth, double eps) {
  require_shape(pred, truth, "soft_dice_loss");
  const auto p = pred.values();
  const auto t = truth.values();
  double sp = 0.0, st = 0.0, inter = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += p[i];
    st += t[i];
    inter += p[i] * t[i];
  }
  const double num = 2.0 * inter + eps;
  const double den = sp + st + eps;
  return Tensor::make_result({}, {1.0 - num / den}, {pred, truth},
                             [num, den](detail::Node& self) {
                               auto& pn = parent(self, 0);
                               if (!pn.requires_grad) return;
                               const auto& t = parent(self, 1).value;
                               auto& g = pn.grad_buffer();
                               const double scale = self.grad[0] / (den * den);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 g[i] -= scale * (2.0 * t[i] * den - num);
                               }
                             });
}

namespace {
constexpr double kProbFloor = 1e-12;
}

Tensor bce_loss(const Tensor& pred, const Tensor& truth) {
  require_shape(pred, truth, "bce_loss");
  const auto p = pred.values();
  const auto t = truth.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbFloor, 1.0 - kProbFloor);
    acc -= t[i] * std::log(q) + (1.0 - t[i]) * std::log(1.0 - q);
  }
  const double inv_n = 1.0 / static_cast<double>(p.size());
  return Tensor::make_result({}, {acc * inv_n}, {pred, truth}, [inv_n](detail::Node& self) {
    auto& pn = parent(self, 0);
    if (!pn.requires_grad) return;
    const auto& t = parent(self, 1).value;
    auto& g = pn.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double pv = pn.value[i];
      if (pv < kProbFloor || pv > 1.0 - kProbFloor) continue;
      g[i] -= self.grad[0] * inv_n * (t[i] / pv - (1.0 - t[i]) / (1.0 - pv));
    }
  });
}

Tensor segmentation_loss(const Tensor& pred, const Tensor& truth) {
  require_shape(pred, truth, "segmentation_loss");
  for (double v : truth.values()) {
    if (v != 0.0 && v != 1.0) throw ValidationError("segmentation_loss: truth must be binary");
  }
  return add(soft_dice_loss(pred, truth), bce_loss(pred, truth));
}

}  // namespace airway::nn
