#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "error.hpp"
#include "nn/arch.hpp"
#include "rng.hpp"

namespace matfit::nn {

template <typename Scalar>
struct LayerWeights {
  // Conv: W is filters x (in_c*k*k), column index (c*k+ky)*k+kx.
  // Dense: W is units x inputs. Bias always one entry per output unit.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> W;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b;
  bool present() const { return W.size() > 0; }
};

template <typename Scalar>
struct GradBuffers {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> dW;
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> db;
  void zero() {
    for (auto& m : dW) m.setZero();
    for (auto& v : db) v.setZero();
  }
};

// Per-sample forward bookkeeping reused by backward. Reusing one cache
// across calls avoids reallocation (sizes are stable per architecture).
template <typename Scalar>
struct ForwardCache {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> acts;  // acts[0] = input
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> cols;
  std::vector<std::vector<int>> argmax;
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> mask;
};

template <typename Scalar>
class Network {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Network() = default;
  explicit Network(ArchDescriptor d) : desc_(std::move(d)) {
    if (desc_.shapes.size() != desc_.layers.size()) desc_.finalize();
    alloc();
  }

  const ArchDescriptor& desc() const { return desc_; }
  std::vector<LayerWeights<Scalar>>& weights() { return weights_; }
  const std::vector<LayerWeights<Scalar>>& weights() const { return weights_; }

  size_t weight_count() const {
    size_t n = 0;
    for (const auto& lw : weights_) n += static_cast<size_t>(lw.W.size()) + lw.b.size();
    return n;
  }

  // Glorot-uniform weights, zero biases; draw order is row-major per tensor,
  // layer by layer, so a seed pins the full initialization.
  void init_weights(uint64_t seed) {
    Rng rng(seed);
    for (size_t i = 0; i < desc_.layers.size(); ++i) {
      auto& lw = weights_[i];
      if (!lw.present()) continue;
      const LayerSpec& l = desc_.layers[i];
      double fan_in, fan_out;
      if (l.kind == LayerKind::kConv2D) {
        fan_in = static_cast<double>(lw.W.cols());
        fan_out = static_cast<double>(l.filters) * l.kernel * l.kernel;
      } else {
        fan_in = static_cast<double>(lw.W.cols());
        fan_out = static_cast<double>(lw.W.rows());
      }
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index r = 0; r < lw.W.rows(); ++r) {
        for (Eigen::Index c = 0; c < lw.W.cols(); ++c) {
          lw.W(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
        }
      }
      lw.b.setZero();
    }
  }

  GradBuffers<Scalar> make_grads() const {
    GradBuffers<Scalar> g;
    g.dW.resize(weights_.size());
    g.db.resize(weights_.size());
    for (size_t i = 0; i < weights_.size(); ++i) {
      g.dW[i].setZero(weights_[i].W.rows(), weights_[i].W.cols());
      g.db[i].setZero(weights_[i].b.size());
    }
    return g;
  }

  Vec forward(const Vec& input) const {
    ForwardCache<Scalar> cache;
    return forward(input, cache, false, nullptr);
  }

  Vec forward(const Vec& input, ForwardCache<Scalar>& cache, bool train, Rng* rng) const {
    if (input.size() != desc_.input.size()) {
      fail(ErrorCode::kInvalidArgument,
           "forward: input size " + std::to_string(input.size()) + " != " +
               std::to_string(desc_.input.size()));
    }
    const size_t L = desc_.layers.size();
    cache.acts.resize(L + 1);
    cache.cols.resize(L);
    cache.argmax.resize(L);
    cache.mask.resize(L);
    cache.acts[0] = input;

    Shape in_shape = desc_.input;
    for (size_t i = 0; i < L; ++i) {
      const LayerSpec& l = desc_.layers[i];
      const Shape out_shape = desc_.shapes[i];
      const Vec& x = cache.acts[i];
      Vec& y = cache.acts[i + 1];
      switch (l.kind) {
        case LayerKind::kConv2D:
          conv_forward(i, l, in_shape, out_shape, x, cache.cols[i], y);
          break;
        case LayerKind::kMaxPool:
          pool_forward(l, in_shape, out_shape, x, cache.argmax[i], y);
          break;
        case LayerKind::kFlatten:
          y = x;
          break;
        case LayerKind::kDense: {
          const auto& lw = weights_[i];
          y.noalias() = lw.W * x;
          y += lw.b;
          if (train && l.dropout_p > 0.0) {
            if (!rng) fail(ErrorCode::kInvalidArgument, "dropout needs an RNG in train mode");
            auto& mask = cache.mask[i];
            mask.resize(y.size());
            const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - l.dropout_p));
            for (Eigen::Index j = 0; j < y.size(); ++j) {
              mask[j] = rng->uniform() < l.dropout_p ? Scalar(0) : keep_scale;
            }
            y.array() *= mask.array();
          } else {
            cache.mask[i].resize(0);
          }
          break;
        }
        case LayerKind::kActivation:
          apply_activation(l.act, x, y);
          break;
      }
      in_shape = out_shape;
    }
    return cache.acts[L];
  }

  // dout is dL/d(output). Gradients accumulate into g (caller zeroes).
  void backward(const ForwardCache<Scalar>& cache, Vec dout, GradBuffers<Scalar>& g) const {
    const size_t L = desc_.layers.size();
    Vec dcur = std::move(dout);
    for (size_t ii = L; ii-- > 0;) {
      const LayerSpec& l = desc_.layers[ii];
      const Shape in_shape = ii == 0 ? desc_.input : desc_.shapes[ii - 1];
      const Shape out_shape = desc_.shapes[ii];
      const Vec& x = cache.acts[ii];
      const Vec& y = cache.acts[ii + 1];
      switch (l.kind) {
        case LayerKind::kConv2D:
          dcur = conv_backward(ii, l, in_shape, out_shape, cache.cols[ii], dcur, g);
          break;
        case LayerKind::kMaxPool: {
          Vec dprev = Vec::Zero(in_shape.size());
          const auto& amax = cache.argmax[ii];
          for (size_t e = 0; e < amax.size(); ++e) dprev[amax[e]] += dcur[e];
          dcur = std::move(dprev);
          break;
        }
        case LayerKind::kFlatten:
          break;
        case LayerKind::kDense: {
          if (cache.mask[ii].size() > 0) dcur.array() *= cache.mask[ii].array();
          g.db[ii] += dcur;
          g.dW[ii].noalias() += dcur * x.transpose();
          Vec dprev;
          dprev.noalias() = weights_[ii].W.transpose() * dcur;
          dcur = std::move(dprev);
          break;
        }
        case LayerKind::kActivation: {
          switch (l.act) {
            case Act::kRelu:
              dcur.array() *= (y.array() > Scalar(0)).template cast<Scalar>();
              break;
            case Act::kSigmoid:
              dcur.array() *= y.array() * (Scalar(1) - y.array());
              break;
            case Act::kLinear:
              break;
          }
          break;
        }
      }
    }
  }

  template <typename S2>
  Network<S2> cast() const {
    Network<S2> out(desc_);
    for (size_t i = 0; i < weights_.size(); ++i) {
      out.weights()[i].W = weights_[i].W.template cast<S2>();
      out.weights()[i].b = weights_[i].b.template cast<S2>();
    }
    return out;
  }

 private:
  void alloc() {
    weights_.assign(desc_.layers.size(), {});
    Shape in_shape = desc_.input;
    for (size_t i = 0; i < desc_.layers.size(); ++i) {
      const LayerSpec& l = desc_.layers[i];
      if (l.kind == LayerKind::kConv2D) {
        weights_[i].W.setZero(l.filters, in_shape.c * l.kernel * l.kernel);
        weights_[i].b.setZero(l.filters);
      } else if (l.kind == LayerKind::kDense) {
        weights_[i].W.setZero(l.units, in_shape.size());
        weights_[i].b.setZero(l.units);
      }
      in_shape = desc_.shapes[i];
    }
  }

  static void apply_activation(Act a, const Vec& x, Vec& y) {
    switch (a) {
      case Act::kRelu:
        y = x.cwiseMax(Scalar(0));
        break;
      case Act::kSigmoid:
        // exp saturates to inf/0 in IEEE, so the naive form is safe at the
        // extremes and stays vectorized.
        y = (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
        break;
      case Act::kLinear:
        y = x;
        break;
    }
  }

  void conv_forward(size_t layer, const LayerSpec& l, const Shape& in, const Shape& out,
                    const Vec& x, Mat& cols, Vec& y) const {
    const int k = l.kernel, s = l.stride;
    const int ohw = out.h * out.w;
    cols.resize(in.c * k * k, ohw);
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        const int j = oy * out.w + ox;
        Scalar* col = cols.data() + static_cast<size_t>(j) * cols.rows();
        for (int c = 0; c < in.c; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            const Scalar* src = x.data() + (static_cast<size_t>(c) * in.h + oy * s + ky) * in.w + ox * s;
            Scalar* dst = col + (static_cast<size_t>(c) * k + ky) * k;
            for (int kx = 0; kx < k; ++kx) dst[kx] = src[kx];
          }
        }
      }
    }
    y.resize(out.size());
    Eigen::Map<RowMat> ymap(y.data(), out.c, ohw);
    ymap.noalias() = weights_[layer].W * cols;
    ymap.colwise() += weights_[layer].b;
  }

  void pool_forward(const LayerSpec& l, const Shape& in, const Shape& out,
                    const Vec& x, std::vector<int>& argmax, Vec& y) const {
    const int p = l.pool, s = l.pool_stride;
    y.resize(out.size());
    argmax.resize(out.size());
    for (int c = 0; c < out.c; ++c) {
      for (int oy = 0; oy < out.h; ++oy) {
        for (int ox = 0; ox < out.w; ++ox) {
          const int base_y = oy * s, base_x = ox * s;
          Scalar best = x[(static_cast<size_t>(c) * in.h + base_y) * in.w + base_x];
          int best_idx = static_cast<int>((static_cast<size_t>(c) * in.h + base_y) * in.w + base_x);
          for (int py = 0; py < p; ++py) {
            for (int px = 0; px < p; ++px) {
              const int idx = static_cast<int>((static_cast<size_t>(c) * in.h + base_y + py) * in.w + base_x + px);
              if (x[idx] > best) {
                best = x[idx];
                best_idx = idx;
              }
            }
          }
          const int e = (c * out.h + oy) * out.w + ox;
          y[e] = best;
          argmax[e] = best_idx;
        }
      }
    }
  }

  Vec conv_backward(size_t layer, const LayerSpec& l, const Shape& in, const Shape& out,
                    const Mat& cols, const Vec& dcur, GradBuffers<Scalar>& g) const {
    const int k = l.kernel, s = l.stride;
    const int ohw = out.h * out.w;
    Eigen::Map<const RowMat> dmap(dcur.data(), out.c, ohw);
    g.db[layer] += dmap.rowwise().sum();
    g.dW[layer].noalias() += dmap * cols.transpose();
    Mat dcols;
    dcols.noalias() = weights_[layer].W.transpose() * dmap;
    Vec dprev = Vec::Zero(in.size());
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        const int j = oy * out.w + ox;
        const Scalar* col = dcols.data() + static_cast<size_t>(j) * dcols.rows();
        for (int c = 0; c < in.c; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            Scalar* dst = dprev.data() + (static_cast<size_t>(c) * in.h + oy * s + ky) * in.w + ox * s;
            const Scalar* src = col + (static_cast<size_t>(c) * k + ky) * k;
            for (int kx = 0; kx < k; ++kx) dst[kx] += src[kx];
          }
        }
      }
    }
    return dprev;
  }

  ArchDescriptor desc_;
  std::vector<LayerWeights<Scalar>> weights_;
};

template <typename Scalar>
double mse(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  if (a.size() != b.size()) fail(ErrorCode::kInvalidArgument, "mse: size mismatch");
  return (a - b).template cast<double>().squaredNorm() / static_cast<double>(a.size());
}

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers and the update itself run in double regardless of the
// network scalar; the result is narrowed on store. Keeps the update exactly
// reproducible from the closed form even for float networks.
template <typename Scalar>
class AdamState {
 public:
  explicit AdamState(const Network<Scalar>& net) {
    const auto& ws = net.weights();
    mW_.resize(ws.size());
    vW_.resize(ws.size());
    mb_.resize(ws.size());
    vb_.resize(ws.size());
    for (size_t i = 0; i < ws.size(); ++i) {
      mW_[i].setZero(ws[i].W.rows(), ws[i].W.cols());
      vW_[i].setZero(ws[i].W.rows(), ws[i].W.cols());
      mb_[i].setZero(ws[i].b.size());
      vb_[i].setZero(ws[i].b.size());
    }
  }

  long step_count() const { return t_; }

  void step(Network<Scalar>& net, const GradBuffers<Scalar>& g, const AdamParams& p) {
    ++t_;
    const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(t_));
    auto& ws = net.weights();
    for (size_t i = 0; i < ws.size(); ++i) {
      if (!ws[i].present()) continue;
      update(ws[i].W, g.dW[i], mW_[i], vW_[i], p, bc1, bc2);
      update(ws[i].b, g.db[i], mb_[i], vb_[i], p, bc1, bc2);
    }
  }

 private:
  template <typename WT, typename GT, typename MT>
  static void update(WT& w, const GT& g, MT& m, MT& v, const AdamParams& p,
                     double bc1, double bc2) {
    const auto gd = g.template cast<double>().array();
    m.array() = p.beta1 * m.array() + (1.0 - p.beta1) * gd;
    v.array() = p.beta2 * v.array() + (1.0 - p.beta2) * gd.square();
    w.array() = (w.template cast<double>().array() -
                 p.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + p.eps))
                    .template cast<Scalar>();
  }

  std::vector<Eigen::MatrixXd> mW_, vW_;
  std::vector<Eigen::VectorXd> mb_, vb_;
  long t_ = 0;
};

// Analytic MSE gradient vs central finite differences (h = 1e-4 in weight
// space) over a seeded weight subset. Runs in double; callers with float
// networks promote via cast<double>() first. Dropout never fires because
// both paths use inference-mode forwards.
inline double grad_check(Network<double>& net, const Eigen::VectorXd& input,
                         const Eigen::VectorXd& target, uint64_t seed,
                         int sample_count = 200) {
  ForwardCache<double> cache;
  Eigen::VectorXd out = net.forward(input, cache, false, nullptr);
  if (out.size() != target.size()) {
    fail(ErrorCode::kInvalidArgument, "grad_check: target size mismatch");
  }
  GradBuffers<double> grads = net.make_grads();
  Eigen::VectorXd dout = 2.0 * (out - target) / static_cast<double>(out.size());
  net.backward(cache, dout, grads);

  // Flat index space over (layer, W-or-b, element).
  struct Slot {
    size_t layer;
    bool bias;
    Eigen::Index idx;
  };
  std::vector<Slot> slots;
  for (size_t i = 0; i < net.weights().size(); ++i) {
    for (Eigen::Index j = 0; j < net.weights()[i].W.size(); ++j) slots.push_back({i, false, j});
    for (Eigen::Index j = 0; j < net.weights()[i].b.size(); ++j) slots.push_back({i, true, j});
  }
  Rng rng(seed);
  rng.shuffle(slots);
  const size_t n_check = std::min(slots.size(), static_cast<size_t>(sample_count));

  const double h = 1e-4;
  double max_rel = 0.0;
  for (size_t s = 0; s < n_check; ++s) {
    const Slot& slot = slots[s];
    auto& lw = net.weights()[slot.layer];
    double* w = slot.bias ? lw.b.data() + slot.idx : lw.W.data() + slot.idx;
    const double saved = *w;
    *w = saved + h;
    const double lp = mse<double>(net.forward(input), target);
    *w = saved - h;
    const double lm = mse<double>(net.forward(input), target);
    *w = saved;
    const double g_fd = (lp - lm) / (2.0 * h);
    const double g_an = slot.bias ? grads.db[slot.layer][slot.idx]
                                  : grads.dW[slot.layer].data()[slot.idx];
    const double rel = std::abs(g_an - g_fd) / std::max(1e-8, std::abs(g_an) + std::abs(g_fd));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace matfit::nn
