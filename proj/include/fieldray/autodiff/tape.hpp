// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "fieldray/kernels/kernels.hpp"
#include "fieldray/kernels/reference.hpp"
#include "fieldray/util/error.hpp"

namespace fieldray {

// Dense tensor shape, rank 0 (scalar) through 3.
struct Shape {
  std::array<int, 3> dims{1, 1, 1};
  int rank = 0;

  static Shape scalar() { return {}; }
  static Shape of(int a) { return {{a, 1, 1}, 1}; }
  static Shape of(int a, int b) { return {{a, b, 1}, 2}; }
  static Shape of(int a, int b, int c) { return {{a, b, c}, 3}; }

  int64_t count() const {
    int64_t n = 1;
    for (int i = 0; i < rank; ++i) n *= dims[i];
    return n;
  }

  int dim(int i) const { return i < rank ? dims[i] : 1; }

  // Right-aligned padding to rank 3, leading dims filled with 1.
  std::array<int, 3> pad3() const {
    std::array<int, 3> p{1, 1, 1};
    for (int i = 0; i < rank; ++i) p[3 - rank + i] = dims[i];
    return p;
  }

  bool operator==(const Shape& o) const {
    if (rank != o.rank) return false;
    for (int i = 0; i < rank; ++i)
      if (dims[i] != o.dims[i]) return false;
    return true;
  }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < rank; ++i) {
      if (i) s += ",";
      s += std::to_string(dims[i]);
    }
    return s + "]";
  }
};

namespace detail {

template <typename T>
inline T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
inline T stable_softplus(T x) {
  if (x > T(0)) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// log(sigmoid(x)), safe for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace detail

// Reverse-mode differentiation tape over dense rank<=3 tensors. Nodes are
// evaluated eagerly at construction; backward() fills gradients for every
// ancestor of the loss that transitively depends on a grad-enabled input.
// Single-threaded per tape; independent tapes may run concurrently.
template <typename T>
class Tape {
 public:
  using Id = int32_t;

  enum class Op : uint8_t {
    kInput,
    kAdd,
    kSub,
    kMul,
    kMatmul,
    kRelu,
    kSigmoid,
    kExp,
    kLog,
    kSin,
    kCos,
    kSqrt,
    kSoftplus,
    kSumAll,
    kSumAxis,
    kBroadcast,
    kConcat,
    kSlice,
    kReshape,
    kAffine,
    kClamp,
    kPosenc,
    kNeusAlpha,
    kAlphaComposite,
  };

  // --- graph construction -------------------------------------------------

  // Differentiable leaf (parameters, probe points).
  Id input(const Shape& shape, std::span<const T> data, std::string label = {}) {
    return leaf(shape, data, true, std::move(label));
  }

  // Non-differentiable leaf; backward treats it as fixed, which lets the
  // matmul backward skip gradient blocks that feed only constants.
  Id constant(const Shape& shape, std::span<const T> data, std::string label = {}) {
    return leaf(shape, data, false, std::move(label));
  }

  Id constant_scalar(T v) { return constant(Shape::scalar(), std::span<const T>(&v, 1)); }

  Id add(Id a, Id b) { return binary_ew(Op::kAdd, a, b); }
  Id sub(Id a, Id b) { return binary_ew(Op::kSub, a, b); }
  Id mul(Id a, Id b) { return binary_ew(Op::kMul, a, b); }

  Id matmul(Id a, Id b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.shape.rank != 2 || nb.shape.rank != 2 || na.shape.dims[1] != nb.shape.dims[0])
      fail("autodiff",
           "matmul: incompatible shapes " + na.shape.str() + " x " + nb.shape.str());
    int m = na.shape.dims[0], k = na.shape.dims[1], nn = nb.shape.dims[1];
    Node n = make(Op::kMatmul, Shape::of(m, nn), a, b);
    gemm_nn_impl(n.data.data(), na.data.data(), nb.data.data(), m, k, nn, false);
    return push(std::move(n));
  }

  Id relu(Id a) {
    const Node& na = node(a);
    Node n = make(Op::kRelu, na.shape, a);
    if constexpr (std::is_same_v<T, float>)
      active_kernels().relu_fwd(n.data.data(), na.data.data(), na.shape.count());
    else
      ref::relu_fwd(n.data.data(), na.data.data(), na.shape.count());
    return push(std::move(n));
  }
  Id max_with_zero(Id a) { return relu(a); }

  Id sigmoid(Id a) {
    return unary(Op::kSigmoid, a, [](T x) { return detail::stable_sigmoid(x); });
  }
  Id exp(Id a) {
    return unary(Op::kExp, a, [](T x) { return std::exp(x); });
  }
  Id log(Id a) {
    return unary(Op::kLog, a, [](T x) { return std::log(x); });
  }
  Id sin(Id a) {
    return unary(Op::kSin, a, [](T x) { return std::sin(x); });
  }
  Id cos(Id a) {
    return unary(Op::kCos, a, [](T x) { return std::cos(x); });
  }
  Id sqrt(Id a) {
    return unary(Op::kSqrt, a, [](T x) { return std::sqrt(x); });
  }
  Id softplus(Id a) {
    return unary(Op::kSoftplus, a, [](T x) { return detail::stable_softplus(x); });
  }

  // y = scale * x + shift, elementwise with scalar immediates.
  Id affine(Id a, double scale, double shift) {
    const Node& na = node(a);
    Node n = make(Op::kAffine, na.shape, a);
    n.c0 = scale;
    n.c1 = shift;
    for (int64_t i = 0; i < na.shape.count(); ++i)
      n.data[i] = static_cast<T>(scale * static_cast<double>(na.data[i]) + shift);
    return push(std::move(n));
  }

  Id clamp(Id a, double lo, double hi) {
    const Node& na = node(a);
    Node n = make(Op::kClamp, na.shape, a);
    n.c0 = lo;
    n.c1 = hi;
    for (int64_t i = 0; i < na.shape.count(); ++i) {
      double x = static_cast<double>(na.data[i]);
      n.data[i] = static_cast<T>(x < lo ? lo : (x > hi ? hi : x));
    }
    return push(std::move(n));
  }

  // Sum of all elements, 64-bit accumulation, scalar result.
  Id sum(Id a) {
    const Node& na = node(a);
    Node n = make(Op::kSumAll, Shape::scalar(), a);
    n.data[0] = static_cast<T>(ref::sum_f64(na.data.data(), na.shape.count()));
    return push(std::move(n));
  }

  // Sum over one axis; the result keeps the remaining axes (rank - 1).
  Id sum_axis(Id a, int axis) {
    const Node& na = node(a);
    if (axis < 0 || axis >= na.shape.rank)
      fail("autodiff", "sum_axis: axis " + std::to_string(axis) + " out of range for shape " +
                           na.shape.str());
    Shape out;
    out.rank = na.shape.rank - 1;
    int j = 0;
    for (int i = 0; i < na.shape.rank; ++i)
      if (i != axis) out.dims[j++] = na.shape.dims[i];
    if (out.rank == 0) out = Shape::scalar();
    Node n = make(Op::kSumAxis, out, a);
    n.i0 = axis;
    auto [outer, len, inner] = axis_split(na.shape, axis);
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t in = 0; in < inner; ++in) {
        double s = 0.0;
        for (int64_t l = 0; l < len; ++l)
          s += static_cast<double>(na.data[(o * len + l) * inner + in]);
        n.data[o * inner + in] = static_cast<T>(s);
      }
    return push(std::move(n));
  }

  Id broadcast_to(Id a, const Shape& target) {
    const Node& na = node(a);
    auto pa = na.shape.pad3();
    auto pt = target.pad3();
    for (int i = 0; i < 3; ++i)
      if (pa[i] != pt[i] && pa[i] != 1)
        fail("autodiff",
             "broadcast: cannot expand " + na.shape.str() + " to " + target.str());
    Node n = make(Op::kBroadcast, target, a);
    fill_broadcast(n.data.data(), na.data.data(), pt, pa);
    return push(std::move(n));
  }

  Id concat(Id a, Id b, int axis) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.shape.rank != nb.shape.rank)
      fail("autodiff", "concat: rank mismatch " + na.shape.str() + " vs " + nb.shape.str());
    if (axis < 0 || axis >= na.shape.rank) fail("autodiff", "concat: bad axis");
    Shape out = na.shape;
    for (int i = 0; i < na.shape.rank; ++i) {
      if (i == axis)
        out.dims[i] = na.shape.dims[i] + nb.shape.dims[i];
      else if (na.shape.dims[i] != nb.shape.dims[i])
        fail("autodiff", "concat: incompatible shapes " + na.shape.str() + " vs " +
                             nb.shape.str() + " on axis " + std::to_string(i));
    }
    Node n = make(Op::kConcat, out, a, b);
    n.i0 = axis;
    auto [outer_a, len_a, inner] = axis_split(na.shape, axis);
    auto len_b = nb.shape.dims[axis];
    int64_t len_o = len_a + len_b;
    for (int64_t o = 0; o < outer_a; ++o) {
      for (int64_t l = 0; l < len_a; ++l)
        for (int64_t in = 0; in < inner; ++in)
          n.data[(o * len_o + l) * inner + in] = na.data[(o * len_a + l) * inner + in];
      for (int64_t l = 0; l < len_b; ++l)
        for (int64_t in = 0; in < inner; ++in)
          n.data[(o * len_o + len_a + l) * inner + in] = nb.data[(o * len_b + l) * inner + in];
    }
    return push(std::move(n));
  }

  Id slice(Id a, int axis, int start, int len) {
    const Node& na = node(a);
    if (axis < 0 || axis >= na.shape.rank) fail("autodiff", "slice: bad axis");
    if (start < 0 || len < 1 || start + len > na.shape.dims[axis])
      fail("autodiff", "slice: range [" + std::to_string(start) + "," +
                           std::to_string(start + len) + ") exceeds shape " + na.shape.str());
    Shape out = na.shape;
    out.dims[axis] = len;
    Node n = make(Op::kSlice, out, a);
    n.i0 = axis;
    n.i1 = start;
    n.i2 = len;
    auto [outer, src_len, inner] = axis_split(na.shape, axis);
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t l = 0; l < len; ++l)
        for (int64_t in = 0; in < inner; ++in)
          n.data[(o * len + l) * inner + in] = na.data[(o * src_len + start + l) * inner + in];
    return push(std::move(n));
  }

  Id reshape(Id a, const Shape& out) {
    const Node& na = node(a);
    if (out.count() != na.shape.count())
      fail("autodiff",
           "reshape: element count differs, " + na.shape.str() + " vs " + out.str());
    Node n = make(Op::kReshape, out, a);
    n.data = na.data;
    return push(std::move(n));
  }

  // Positional encoding: input [n, d] -> [n, d * 2(L+1)], per input scalar
  // the contiguous block [sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^L pi p),
  // cos(2^L pi p)]. Levels use the double-angle recurrence in 64-bit.
  Id posenc(Id a, int levels) {
    const Node& na = node(a);
    if (levels < 0) fail("autodiff", "posenc: levels must be >= 0");
    if (na.shape.rank != 2) fail("autodiff", "posenc: expects [n,d], got " + na.shape.str());
    int rows = na.shape.dims[0], d = na.shape.dims[1];
    int per = 2 * (levels + 1);
    Node n = make(Op::kPosenc, Shape::of(rows, d * per), a);
    n.i0 = levels;
    for (int64_t r = 0; r < rows; ++r) {
      for (int c = 0; c < d; ++c) {
        double p = static_cast<double>(na.data[r * d + c]);
        double s = std::sin(std::numbers::pi * p);
        double co = std::cos(std::numbers::pi * p);
        T* out = &n.data[(r * d + c) * per];
        for (int l = 0; l <= levels; ++l) {
          out[2 * l] = static_cast<T>(std::clamp(s, -1.0, 1.0));
          out[2 * l + 1] = static_cast<T>(std::clamp(co, -1.0, 1.0));
          double s2 = 2.0 * s * co;
          double c2 = 1.0 - 2.0 * s * s;
          s = s2;
          co = c2;
        }
      }
    }
    return push(std::move(n));
  }

  // Per-segment opacity from consecutive SDF samples along each ray:
  //   alpha_i = max((Sig(s f_i) - Sig(s f_{i+1})) / Sig(s f_i), 0)
  // with Sig the logistic sigmoid; forced to 0 when Sig(s f_i) < 1e-12.
  // f: [R,S], s: scalar (s > 0); result [R,S-1].
  Id neus_alpha(Id f, Id s) {
    const Node& nf = node(f);
    const Node& ns = node(s);
    if (nf.shape.rank != 2 || nf.shape.dims[1] < 2)
      fail("autodiff", "neus_alpha: expects [rays,samples>=2], got " + nf.shape.str());
    if (ns.shape.count() != 1) fail("autodiff", "neus_alpha: s must be scalar");
    int rows = nf.shape.dims[0], sc = nf.shape.dims[1];
    double sv = static_cast<double>(ns.data[0]);
    if (!(sv > 0.0)) fail("autodiff", "neus_alpha: sharpness must be positive");
    Node n = make(Op::kNeusAlpha, Shape::of(rows, sc - 1), f, s);
    for (int64_t r = 0; r < rows; ++r) {
      for (int i = 0; i < sc - 1; ++i) {
        double fa = static_cast<double>(nf.data[r * sc + i]);
        double fb = static_cast<double>(nf.data[r * sc + i + 1]);
        n.data[r * (sc - 1) + i] = static_cast<T>(alpha_fwd(sv * fa, sv * fb));
      }
    }
    return push(std::move(n));
  }

  // Front-to-back compositing of per-sample opacities. Input alpha [R,S]
  // in [0,1]; output [R,S+1]: columns 0..S-1 hold w_i = T_i alpha_i and
  // column S the residual transmittance. The running product is kept in
  // 64-bit so sum(w) + T_rem stays within 1e-6 of one.
  Id alpha_composite(Id a) {
    const Node& na = node(a);
    if (na.shape.rank != 2)
      fail("autodiff", "alpha_composite: expects [rays,samples], got " + na.shape.str());
    int rows = na.shape.dims[0], sc = na.shape.dims[1];
    Node n = make(Op::kAlphaComposite, Shape::of(rows, sc + 1), a);
    for (int64_t r = 0; r < rows; ++r) {
      double trans = 1.0;
      for (int i = 0; i < sc; ++i) {
        double al = static_cast<double>(na.data[r * sc + i]);
        if (al < -1e-6 || al > 1.0 + 1e-6)
          fail("render", "alpha_composite: opacity outside [0,1]");
        al = std::clamp(al, 0.0, 1.0);
        n.data[r * (sc + 1) + i] = static_cast<T>(trans * al);
        trans *= 1.0 - al;
      }
      n.data[r * (sc + 1) + sc] = static_cast<T>(trans);
    }
    return push(std::move(n));
  }

  // --- access ---------------------------------------------------------------

  int64_t size() const { return static_cast<int64_t>(nodes_.size()); }
  const Shape& shape(Id id) const { return node(id).shape; }
  std::span<const T> data(Id id) const { return node(id).data; }
  std::span<T> mutable_data(Id id) { return nodes_[check(id)].data; }

  std::span<const T> grad(Id id) {
    Node& n = nodes_[check(id)];
    if (n.grad.empty()) n.grad.assign(n.shape.count(), T(0));
    return n.grad;
  }

  void set_label(Id id, std::string label) { nodes_[check(id)].label = std::move(label); }
  const std::string& label(Id id) const { return node(id).label; }

  // Raises Error{"numeric"} naming the offending node if any value is not
  // finite. Returns id for chaining.
  Id check_finite(Id id, const std::string& context) const {
    const Node& n = node(id);
    for (int64_t i = 0; i < n.shape.count(); ++i) {
      if (!std::isfinite(static_cast<double>(n.data[i]))) {
        std::string who = n.label.empty() ? ("node " + std::to_string(id)) : n.label;
        fail("numeric", context + ": non-finite value in " + who + " at index " +
                            std::to_string(i));
      }
    }
    return id;
  }

  // --- backward -------------------------------------------------------------

  void backward(Id loss) {
    Node& ln = nodes_[check(loss)];
    if (ln.shape.count() != 1)
      fail("autodiff", "backward requires a scalar loss, got shape " + ln.shape.str());
    ensure_grad(loss)[0] = T(1);
    for (Id id = loss; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.grad.empty() || n.op == Op::kInput) continue;
      backward_node(n);
    }
  }

  void reset() { nodes_.clear(); }

 private:
  struct Node {
    Op op = Op::kInput;
    Shape shape;
    Id a = -1, b = -1;
    int i0 = 0, i1 = 0, i2 = 0;
    double c0 = 0.0, c1 = 0.0;
    bool needs_grad = false;
    std::vector<T> data;
    std::vector<T> grad;
    std::string label;
  };

  std::vector<Node> nodes_;

  Id leaf(const Shape& shape, std::span<const T> data, bool needs_grad, std::string label) {
    if (static_cast<int64_t>(data.size()) != shape.count())
      fail("autodiff", "input: data size " + std::to_string(data.size()) +
                           " does not match shape " + shape.str());
    Node n;
    n.op = Op::kInput;
    n.shape = shape;
    n.needs_grad = needs_grad;
    n.label = std::move(label);
    n.data.assign(data.begin(), data.end());
    return push(std::move(n));
  }

  Id check(Id id) const {
    if (id < 0 || id >= static_cast<Id>(nodes_.size())) fail("autodiff", "bad node id");
    return id;
  }
  const Node& node(Id id) const { return nodes_[check(id)]; }

  Node make(Op op, const Shape& shape, Id a, Id b = -1) {
    Node n;
    n.op = op;
    n.shape = shape;
    n.a = a;
    n.b = b;
    n.needs_grad = node(a).needs_grad || (b >= 0 && node(b).needs_grad);
    n.data.resize(shape.count());
    return n;
  }

  Id push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  std::span<T> ensure_grad(Id id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(n.shape.count(), T(0));
    return n.grad;
  }

  template <typename F>
  Id unary(Op op, Id a, F fn) {
    const Node& na = node(a);
    Node n = make(op, na.shape, a);
    for (int64_t i = 0; i < na.shape.count(); ++i) n.data[i] = fn(na.data[i]);
    return push(std::move(n));
  }

  void gemm_nn_impl(T* c, const T* a, const T* b, int m, int k, int n, bool acc) {
    if constexpr (std::is_same_v<T, float>)
      active_kernels().gemm_nn(c, a, b, m, k, n, acc);
    else
      ref::gemm_nn(c, a, b, m, k, n, acc);
  }
  void gemm_nt_impl(T* c, const T* a, const T* b, int m, int k, int n, bool acc) {
    if constexpr (std::is_same_v<T, float>)
      active_kernels().gemm_nt(c, a, b, m, k, n, acc);
    else
      ref::gemm_nt(c, a, b, m, k, n, acc);
  }
  void gemm_tn_impl(T* c, const T* a, const T* b, int m, int k, int n, bool acc) {
    if constexpr (std::is_same_v<T, float>)
      active_kernels().gemm_tn(c, a, b, m, k, n, acc);
    else
      ref::gemm_tn(c, a, b, m, k, n, acc);
  }

  static std::array<int64_t, 3> strides3(const std::array<int, 3>& d) {
    return {static_cast<int64_t>(d[1]) * d[2], static_cast<int64_t>(d[2]), 1};
  }

  // (outer, len, inner) split of a shape around one axis.
  static std::array<int64_t, 3> axis_split(const Shape& s, int axis) {
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= s.dims[i];
    for (int i = axis + 1; i < s.rank; ++i) inner *= s.dims[i];
    return {outer, static_cast<int64_t>(s.dims[axis]), inner};
  }

  void fill_broadcast(T* out, const T* in, const std::array<int, 3>& od,
                      const std::array<int, 3>& id) {
    auto is = strides3(id);
    for (int i = 0; i < 3; ++i)
      if (id[i] == 1 && od[i] != 1) is[i] = 0;
    int64_t idx = 0;
    for (int i0 = 0; i0 < od[0]; ++i0)
      for (int i1 = 0; i1 < od[1]; ++i1)
        for (int i2 = 0; i2 < od[2]; ++i2)
          out[idx++] = in[i0 * is[0] + i1 * is[1] + i2 * is[2]];
  }

  Id binary_ew(Op op, Id a, Id b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    auto pa = na.shape.pad3();
    auto pb = nb.shape.pad3();
    Shape out;
    out.rank = std::max(na.shape.rank, nb.shape.rank);
    std::array<int, 3> od{1, 1, 1};
    for (int i = 0; i < 3; ++i) {
      if (pa[i] == pb[i] || pa[i] == 1 || pb[i] == 1)
        od[i] = std::max(pa[i], pb[i]);
      else
        fail("autodiff", op_name(op) + std::string(": incompatible shapes ") + na.shape.str() +
                             " vs " + nb.shape.str());
    }
    if (out.rank == 0 && (od[0] != 1 || od[1] != 1 || od[2] != 1)) out.rank = 1;
    for (int i = 0; i < out.rank; ++i) out.dims[i] = od[3 - out.rank + i];

    Node n = make(op, out, a, b);
    int64_t total = out.count();
    bool same = (na.shape == nb.shape);
    if (same) {
      if (op == Op::kAdd) {
        if constexpr (std::is_same_v<T, float>)
          active_kernels().ew_add(n.data.data(), na.data.data(), nb.data.data(), total);
        else
          ref::ew_add(n.data.data(), na.data.data(), nb.data.data(), total);
      } else if (op == Op::kMul) {
        if constexpr (std::is_same_v<T, float>)
          active_kernels().ew_mul(n.data.data(), na.data.data(), nb.data.data(), total);
        else
          ref::ew_mul(n.data.data(), na.data.data(), nb.data.data(), total);
      } else {
        for (int64_t i = 0; i < total; ++i) n.data[i] = na.data[i] - nb.data[i];
      }
    } else {
      auto sa = strides3(pa);
      auto sb = strides3(pb);
      for (int i = 0; i < 3; ++i) {
        if (pa[i] == 1 && od[i] != 1) sa[i] = 0;
        if (pb[i] == 1 && od[i] != 1) sb[i] = 0;
      }
      int64_t idx = 0;
      for (int i0 = 0; i0 < od[0]; ++i0)
        for (int i1 = 0; i1 < od[1]; ++i1)
          for (int i2 = 0; i2 < od[2]; ++i2) {
            T va = na.data[i0 * sa[0] + i1 * sa[1] + i2 * sa[2]];
            T vb = nb.data[i0 * sb[0] + i1 * sb[1] + i2 * sb[2]];
            n.data[idx++] = op == Op::kAdd ? va + vb : (op == Op::kSub ? va - vb : va * vb);
          }
    }
    return push(std::move(n));
  }

  static const char* op_name(Op op) {
    switch (op) {
      case Op::kAdd: return "add";
      case Op::kSub: return "sub";
      case Op::kMul: return "mul";
      default: return "op";
    }
  }

  static double alpha_fwd(double a, double b) {
    // a = s*f_i, b = s*f_next. Guard: vanishing Sig(a) means the segment is
    // already deep inside the surface; treat as fully absorbed upstream.
    if (a < -27.6) return 0.0;
    double delta = detail::log_sigmoid(b) - detail::log_sigmoid(a);
    if (delta >= 0.0) return 0.0;
    return -std::expm1(delta);
  }

  // Accumulate dy (shaped od) into a parent gradient with padded dims pd,
  // summing over broadcast dimensions. sign multiplies the contribution.
  void reduce_into(T* pgrad, const std::array<int, 3>& pd, const T* dy,
                   const std::array<int, 3>& od, T sign) {
    auto ps = strides3(pd);
    std::array<int64_t, 3> s = ps;
    for (int i = 0; i < 3; ++i)
      if (pd[i] == 1 && od[i] != 1) s[i] = 0;
    int64_t idx = 0;
    for (int i0 = 0; i0 < od[0]; ++i0)
      for (int i1 = 0; i1 < od[1]; ++i1)
        for (int i2 = 0; i2 < od[2]; ++i2)
          pgrad[i0 * s[0] + i1 * s[1] + i2 * s[2]] += sign * dy[idx++];
  }

  void backward_node(Node& n) {
    const T* dy = n.grad.data();
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kAdd:
      case Op::kSub: {
        Node& pa = nodes_[n.a];
        Node& pb = nodes_[n.b];
        ensure_grad(n.a);
        reduce_into(pa.grad.data(), pa.shape.pad3(), dy, n.shape.pad3(), T(1));
        ensure_grad(n.b);
        reduce_into(pb.grad.data(), pb.shape.pad3(), dy, n.shape.pad3(),
                    n.op == Op::kAdd ? T(1) : T(-1));
        break;
      }
      case Op::kMul: {
        Node& pa = nodes_[n.a];
        Node& pb = nodes_[n.b];
        ensure_grad(n.a);
        ensure_grad(n.b);
        auto od = n.shape.pad3();
        auto pda = pa.shape.pad3();
        auto pdb = pb.shape.pad3();
        auto sa = strides3(pda);
        auto sb = strides3(pdb);
        for (int i = 0; i < 3; ++i) {
          if (pda[i] == 1 && od[i] != 1) sa[i] = 0;
          if (pdb[i] == 1 && od[i] != 1) sb[i] = 0;
        }
        int64_t idx = 0;
        for (int i0 = 0; i0 < od[0]; ++i0)
          for (int i1 = 0; i1 < od[1]; ++i1)
            for (int i2 = 0; i2 < od[2]; ++i2) {
              int64_t ia = i0 * sa[0] + i1 * sa[1] + i2 * sa[2];
              int64_t ib = i0 * sb[0] + i1 * sb[1] + i2 * sb[2];
              pa.grad[ia] += dy[idx] * pb.data[ib];
              pb.grad[ib] += dy[idx] * pa.data[ia];
              ++idx;
            }
        break;
      }
      case Op::kMatmul: {
        Node& pa = nodes_[n.a];
        Node& pb = nodes_[n.b];
        int m = pa.shape.dims[0], k = pa.shape.dims[1], nn = pb.shape.dims[1];
        if (pa.needs_grad) {
          ensure_grad(n.a);
          gemm_nt_impl(pa.grad.data(), dy, pb.data.data(), m, nn, k, true);
        }
        if (pb.needs_grad) {
          ensure_grad(n.b);
          gemm_tn_impl(pb.grad.data(), pa.data.data(), dy, k, m, nn, true);
        }
        break;
      }
      case Op::kRelu: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        if constexpr (std::is_same_v<T, float>)
          active_kernels().relu_bwd_acc(pa.grad.data(), pa.data.data(), dy, n.shape.count());
        else
          ref::relu_bwd_acc(pa.grad.data(), pa.data.data(), dy, n.shape.count());
        break;
      }
      case Op::kSigmoid: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i)
          pa.grad[i] += dy[i] * n.data[i] * (T(1) - n.data[i]);
        break;
      }
      case Op::kExp: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i) pa.grad[i] += dy[i] * n.data[i];
        break;
      }
      case Op::kLog: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i) pa.grad[i] += dy[i] / pa.data[i];
        break;
      }
      case Op::kSin: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i)
          pa.grad[i] += dy[i] * std::cos(pa.data[i]);
        break;
      }
      case Op::kCos: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i)
          pa.grad[i] -= dy[i] * std::sin(pa.data[i]);
        break;
      }
      case Op::kSqrt: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i)
          if (n.data[i] > T(0)) pa.grad[i] += dy[i] / (T(2) * n.data[i]);
        break;
      }
      case Op::kSoftplus: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i)
          pa.grad[i] += dy[i] * detail::stable_sigmoid(pa.data[i]);
        break;
      }
      case Op::kSumAll: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        T g = dy[0];
        for (int64_t i = 0; i < pa.shape.count(); ++i) pa.grad[i] += g;
        break;
      }
      case Op::kSumAxis: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        auto [outer, len, inner] = axis_split(pa.shape, n.i0);
        for (int64_t o = 0; o < outer; ++o)
          for (int64_t l = 0; l < len; ++l)
            for (int64_t in = 0; in < inner; ++in)
              pa.grad[(o * len + l) * inner + in] += dy[o * inner + in];
        break;
      }
      case Op::kBroadcast: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        reduce_into(pa.grad.data(), pa.shape.pad3(), dy, n.shape.pad3(), T(1));
        break;
      }
      case Op::kConcat: {
        Node& pa = nodes_[n.a];
        Node& pb = nodes_[n.b];
        ensure_grad(n.a);
        ensure_grad(n.b);
        auto [outer, len_a, inner] = axis_split(pa.shape, n.i0);
        int64_t len_b = pb.shape.dims[n.i0];
        int64_t len_o = len_a + len_b;
        for (int64_t o = 0; o < outer; ++o) {
          for (int64_t l = 0; l < len_a; ++l)
            for (int64_t in = 0; in < inner; ++in)
              pa.grad[(o * len_a + l) * inner + in] += dy[(o * len_o + l) * inner + in];
          for (int64_t l = 0; l < len_b; ++l)
            for (int64_t in = 0; in < inner; ++in)
              pb.grad[(o * len_b + l) * inner + in] +=
                  dy[(o * len_o + len_a + l) * inner + in];
        }
        break;
      }
      case Op::kSlice: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        auto [outer, src_len, inner] = axis_split(pa.shape, n.i0);
        int64_t len = n.i2, start = n.i1;
        for (int64_t o = 0; o < outer; ++o)
          for (int64_t l = 0; l < len; ++l)
            for (int64_t in = 0; in < inner; ++in)
              pa.grad[(o * src_len + start + l) * inner + in] += dy[(o * len + l) * inner + in];
        break;
      }
      case Op::kReshape: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i) pa.grad[i] += dy[i];
        break;
      }
      case Op::kAffine: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        T s = static_cast<T>(n.c0);
        if constexpr (std::is_same_v<T, float>)
          active_kernels().axpy(pa.grad.data(), s, dy, n.shape.count());
        else
          ref::axpy(pa.grad.data(), s, dy, n.shape.count());
        break;
      }
      case Op::kClamp: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        for (int64_t i = 0; i < n.shape.count(); ++i) {
          double x = static_cast<double>(pa.data[i]);
          if (x > n.c0 && x < n.c1) pa.grad[i] += dy[i];
        }
        break;
      }
      case Op::kPosenc: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        int rows = pa.shape.dims[0], d = pa.shape.dims[1];
        int levels = n.i0;
        int per = 2 * (levels + 1);
        for (int64_t r = 0; r < rows; ++r)
          for (int c = 0; c < d; ++c) {
            const T* out = &n.data[(r * d + c) * per];
            const T* g = &dy[(r * d + c) * per];
            double acc = 0.0;
            double freq = std::numbers::pi;
            for (int l = 0; l <= levels; ++l) {
              // d/dp sin(f p) = f cos(f p); d/dp cos(f p) = -f sin(f p).
              acc += freq * (static_cast<double>(g[2 * l]) * out[2 * l + 1] -
                             static_cast<double>(g[2 * l + 1]) * out[2 * l]);
              freq *= 2.0;
            }
            pa.grad[r * d + c] += static_cast<T>(acc);
          }
        break;
      }
      case Op::kNeusAlpha: {
        Node& pf = nodes_[n.a];
        Node& ps = nodes_[n.b];
        ensure_grad(n.a);
        ensure_grad(n.b);
        int rows = pf.shape.dims[0], sc = pf.shape.dims[1];
        double sv = static_cast<double>(ps.data[0]);
        double ds_acc = 0.0;
        for (int64_t r = 0; r < rows; ++r) {
          for (int i = 0; i < sc - 1; ++i) {
            double g = static_cast<double>(dy[r * (sc - 1) + i]);
            if (g == 0.0) continue;
            double fa = static_cast<double>(pf.data[r * sc + i]);
            double fb = static_cast<double>(pf.data[r * sc + i + 1]);
            double a = sv * fa, b = sv * fb;
            if (a < -27.6) continue;  // clamped forward, zero gradient
            double delta = detail::log_sigmoid(b) - detail::log_sigmoid(a);
            if (delta >= 0.0) continue;  // clamped at 0 by max
            double ratio = std::exp(delta);
            double siga = detail::stable_sigmoid(-a);
            double sigb = detail::stable_sigmoid(-b);
            // alpha = 1 - Sig(b)/Sig(a); d/da = r*Sig(-a), d/db = -r*Sig(-b).
            pf.grad[r * sc + i] += static_cast<T>(g * sv * ratio * siga);
            pf.grad[r * sc + i + 1] -= static_cast<T>(g * sv * ratio * sigb);
            ds_acc += g * (fa * ratio * siga - fb * ratio * sigb);
          }
        }
        ps.grad[0] += static_cast<T>(ds_acc);
        break;
      }
      case Op::kAlphaComposite: {
        Node& pa = nodes_[n.a];
        ensure_grad(n.a);
        int rows = pa.shape.dims[0], sc = pa.shape.dims[1];
        for (int64_t r = 0; r < rows; ++r) {
          const T* grow = &dy[r * (sc + 1)];
          const T* arow = &pa.data[r * sc];
          // Suffix recurrence: B_k = g_k a_k + (1 - a_k) B_{k+1}, B_S = g_rem;
          // then d/da_k = T_k (g_k - B_{k+1}).
          double bnext = static_cast<double>(grow[sc]);
          std::array<double, 512> bstash;
          std::vector<double> bheap;
          double* bs = sc <= 512 ? bstash.data() : (bheap.resize(sc), bheap.data());
          for (int i = sc - 1; i >= 0; --i) {
            bs[i] = bnext;
            double al = std::clamp(static_cast<double>(arow[i]), 0.0, 1.0);
            bnext = static_cast<double>(grow[i]) * al + (1.0 - al) * bnext;
          }
          double trans = 1.0;
          for (int i = 0; i < sc; ++i) {
            double al = std::clamp(static_cast<double>(arow[i]), 0.0, 1.0);
            pa.grad[r * sc + i] +=
                static_cast<T>(trans * (static_cast<double>(grow[i]) - bs[i]));
            trans *= 1.0 - al;
          }
        }
        break;
      }
    }
  }
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace fieldray
