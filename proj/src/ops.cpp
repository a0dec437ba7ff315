// Copyright 2026 The hrolf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrolf/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace hrolf {

std::string to_string(const FeatureShape& shape) {
  std::ostringstream os;
  os << "[n=" << shape.n << " s=" << shape.s << " t=" << shape.t << " x=" << shape.x
     << " y=" << shape.y << " c=" << shape.c << "]";
  return os.str();
}

std::string dims_to_string(const std::vector<std::size_t>& dims) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ")";
  return os.str();
}

void validate(const KernelShape& k) {
  for (std::size_t e : {k.s1, k.s2, k.a1, k.a2}) {
    if (e % 2 == 0) throw ShapeError("kernel window extents must be odd");
  }
  if (k.c_in == 0 || k.c_out == 0) throw ShapeError("kernel channel counts must be positive");
}

KernelShape kernel_shape_of(const std::vector<std::size_t>& d) {
  if (d.size() != 6) throw ShapeError("kernel weights must be rank 6, got " + dims_to_string(d));
  return {d[0], d[1], d[2], d[3], d[4], d[5]};
}

namespace ops {

namespace {

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kColumnBudget = std::size_t{1} << 18;  // elements per im2col block

struct ConvGeometry {
  FeatureShape in;
  FeatureShape out;
  KernelShape k;
  std::size_t stride = 1;

  std::size_t rows() const { return out.n * out.s * out.t * out.x * out.y; }
  std::size_t cols() const { return k.fan_in(); }
  std::size_t lines() const { return out.n * out.s * out.t * out.x; }
  // Whole output lines per im2col block.
  std::size_t block_lines() const { return std::max<std::size_t>(1, kColumnBudget / (cols() * out.y)); }
};

ConvGeometry make_geometry(const std::vector<std::size_t>& in_dims,
                           const std::vector<std::size_t>& w_dims, std::size_t stride) {
  if (in_dims.size() != 6) throw ShapeError("hconv4d input must be a rank-6 feature map");
  ConvGeometry g;
  g.in = {in_dims[0], in_dims[1], in_dims[2], in_dims[3], in_dims[4], in_dims[5]};
  g.k = kernel_shape_of(w_dims);
  validate(g.k);
  if (stride == 0) throw ShapeError("hconv4d stride must be positive");
  if (g.in.c != g.k.c_in) {
    throw ShapeError("hconv4d channel mismatch: input has " + std::to_string(g.in.c) +
                     " channels, kernel expects " + std::to_string(g.k.c_in));
  }
  g.stride = stride;
  g.out = g.in;
  g.out.x = (g.in.x + stride - 1) / stride;
  g.out.y = (g.in.y + stride - 1) / stride;
  g.out.c = g.k.c_out;
  return g;
}

// Walks the taps of whole output lines (n, s, t, x, all y). For each tap whose
// source line is inside the input, fn(line_row0, col, src_line, y_lo, y_hi)
// receives the output y range [y_lo, y_hi) whose source sample
// y * stride + j - s2/2 is inside, with src_line pointing at input y = 0.
// Rows outside [y_lo, y_hi) and taps with an outside source line read zeros.
template <typename Fn>
void for_each_line_tap(const ConvGeometry& g, std::size_t line, Fn&& fn) {
  std::size_t r = line;
  const std::size_t ox = r % g.out.x;
  r /= g.out.x;
  const std::size_t t = r % g.out.t;
  r /= g.out.t;
  const std::size_t s = r % g.out.s;
  const std::size_t n = r / g.out.s;
  const auto& k = g.k;
  const auto sx = static_cast<std::ptrdiff_t>(ox * g.stride) - static_cast<std::ptrdiff_t>(k.s1 / 2);
  const auto ss = static_cast<std::ptrdiff_t>(s) - static_cast<std::ptrdiff_t>(k.a1 / 2);
  const auto st = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(k.a2 / 2);
  const auto half_y = static_cast<std::ptrdiff_t>(k.s2 / 2);
  const auto stride = static_cast<std::ptrdiff_t>(g.stride);
  const auto in_y = static_cast<std::ptrdiff_t>(g.in.y);
  const auto out_y = static_cast<std::ptrdiff_t>(g.out.y);
  const auto inside = [](std::ptrdiff_t v, std::size_t extent) {
    return v >= 0 && v < static_cast<std::ptrdiff_t>(extent);
  };
  std::size_t col = 0;
  for (std::size_t i = 0; i < k.s1; ++i) {
    const std::ptrdiff_t ix = sx + static_cast<std::ptrdiff_t>(i);
    for (std::size_t j = 0; j < k.s2; ++j) {
      const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(j) - half_y;
      // Smallest and one-past-largest oy with 0 <= oy * stride + dy < in_y.
      const std::ptrdiff_t lo = dy >= 0 ? 0 : (-dy + stride - 1) / stride;
      const std::ptrdiff_t hi = std::min(out_y, (in_y - dy + stride - 1) / stride);
      for (std::size_t p = 0; p < k.a1; ++p) {
        const std::ptrdiff_t is = ss + static_cast<std::ptrdiff_t>(p);
        for (std::size_t q = 0; q < k.a2; ++q, col += k.c_in) {
          const std::ptrdiff_t it = st + static_cast<std::ptrdiff_t>(q);
          if (!(inside(ix, g.in.x) && inside(is, g.in.s) && inside(it, g.in.t)) || lo >= hi) {
            fn(col, static_cast<std::size_t>(-1), dy, std::size_t{0}, std::size_t{0});
            continue;
          }
          fn(col,
             g.in.index(n, static_cast<std::size_t>(is), static_cast<std::size_t>(it),
                        static_cast<std::size_t>(ix), 0, 0),
             dy, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
        }
      }
    }
  }
}

// Rows [line0 * out.y, (line0 + lines) * out.y) of the im2col matrix.
template <typename Real>
void im2col(const ConvGeometry& g, const Real* in, std::size_t line0, std::size_t lines, Real* col) {
  const std::size_t width = g.cols();
  const std::size_t cin = g.k.c_in;
  const std::size_t oy_n = g.out.y;
  const std::size_t src_step = g.stride * cin;
  for (std::size_t l = 0; l < lines; ++l) {
    Real* block = col + l * oy_n * width;
    for_each_line_tap(g, line0 + l, [&](std::size_t c, std::size_t src, std::ptrdiff_t dy, std::size_t lo,
                                         std::size_t hi) {
      if (src == static_cast<std::size_t>(-1)) {
        lo = hi = oy_n;
      }
      for (std::size_t oy = 0; oy < lo; ++oy) std::fill_n(block + oy * width + c, cin, Real(0));
      if (lo < hi) {
        const Real* from = in + src + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(lo * g.stride) + dy) * cin;
        Real* to = block + lo * width + c;
        if (cin == 1) {
          for (std::size_t oy = lo; oy < hi; ++oy, from += src_step, to += width) *to = *from;
        } else {
          for (std::size_t oy = lo; oy < hi; ++oy, from += src_step, to += width) std::copy_n(from, cin, to);
        }
      }
      for (std::size_t oy = std::max(hi, lo); oy < oy_n; ++oy) std::fill_n(block + oy * width + c, cin, Real(0));
    });
  }
}

template <typename Real>
void col2im_add(const ConvGeometry& g, const Real* col, std::size_t line0, std::size_t lines, Real* in) {
  const std::size_t width = g.cols();
  const std::size_t cin = g.k.c_in;
  const std::size_t oy_n = g.out.y;
  const std::size_t dst_step = g.stride * cin;
  for (std::size_t l = 0; l < lines; ++l) {
    const Real* block = col + l * oy_n * width;
    for_each_line_tap(g, line0 + l, [&](std::size_t c, std::size_t dst, std::ptrdiff_t dy, std::size_t lo,
                                         std::size_t hi) {
      if (dst == static_cast<std::size_t>(-1)) return;
      Real* to = in + dst + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(lo * g.stride) + dy) * cin;
      const Real* from = block + lo * width + c;
      for (std::size_t oy = lo; oy < hi; ++oy, to += dst_step, from += width) {
        for (std::size_t ci = 0; ci < cin; ++ci) to[ci] += from[ci];
      }
    });
  }
}

// Stride-1 path: one GEMM per (n, s, tap) over spatially padded planes.
// Features live in an "extended" layout (n, s, t, Xp, Yp, c) with
// Xp = X + s1 - 1 and Yp = Y + s2 - 1. Output sample (x, y) sits at extended
// (x, y) and reads padded input (x + i, y + j) for spatial tap (i, j), so for a
// fixed tap and a run of t the rows of both operands are contiguous. Rows with
// x >= X or y >= Y are scratch and never read back.
struct TapPlan {
  FeatureShape in;
  KernelShape k;
  std::size_t xp = 0;
  std::size_t yp = 0;
  std::size_t plane() const { return xp * yp; }
  std::size_t ext_rows() const { return in.n * in.s * in.t * plane(); }

  TapPlan(const ConvGeometry& g) : in(g.in), k(g.k), xp(g.in.x + g.k.s1 - 1), yp(g.in.y + g.k.s2 - 1) {}

  // fn(out_row, in_row, rows, weight_row) for every live (n, s, tap).
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const auto ha1 = static_cast<std::ptrdiff_t>(k.a1 / 2);
    const auto ha2 = static_cast<std::ptrdiff_t>(k.a2 / 2);
    const auto ns = static_cast<std::ptrdiff_t>(in.s);
    const auto nt = static_cast<std::ptrdiff_t>(in.t);
    for (std::size_t n = 0; n < in.n; ++n) {
      for (std::ptrdiff_t s = 0; s < ns; ++s) {
        std::size_t wrow = 0;
        for (std::size_t i = 0; i < k.s1; ++i) {
          for (std::size_t j = 0; j < k.s2; ++j) {
            for (std::size_t p = 0; p < k.a1; ++p) {
              const std::ptrdiff_t is = s + static_cast<std::ptrdiff_t>(p) - ha1;
              for (std::size_t q = 0; q < k.a2; ++q, wrow += k.c_in) {
                if (is < 0 || is >= ns) continue;
                const std::ptrdiff_t dq = static_cast<std::ptrdiff_t>(q) - ha2;
                const std::ptrdiff_t t_lo = std::max<std::ptrdiff_t>(0, -dq);
                const std::ptrdiff_t t_hi = std::min(nt, nt - dq);
                if (t_lo >= t_hi) continue;
                const std::size_t shift = i * yp + j;
                const std::size_t out_row =
                    ((n * in.s + static_cast<std::size_t>(s)) * in.t + static_cast<std::size_t>(t_lo)) * plane();
                const std::size_t in_row =
                    ((n * in.s + static_cast<std::size_t>(is)) * in.t + static_cast<std::size_t>(t_lo + dq)) *
                        plane() + shift;
                const std::size_t rows = static_cast<std::size_t>(t_hi - t_lo) * plane() - shift;
                fn(out_row, in_row, rows, wrow);
              }
            }
          }
        }
      }
    }
  }
};

// Copies a rank-6 tensor into the extended layout at spatial offset (ox, oy).
template <typename Real>
std::vector<Real> to_extended(const Tensor<Real>& x, const TapPlan& plan, std::size_t ox, std::size_t oy) {
  const FeatureShape sh = x.feature_shape();
  std::vector<Real> ext(plan.ext_rows() * sh.c, Real(0));
  const std::size_t planes = sh.n * sh.s * sh.t;
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t xx = 0; xx < sh.x; ++xx) {
      const Real* src = x.data() + (pl * sh.x + xx) * sh.y * sh.c;
      Real* dst = ext.data() + ((pl * plan.xp + xx + ox) * plan.yp + oy) * sh.c;
      std::copy_n(src, sh.y * sh.c, dst);
    }
  }
  return ext;
}

template <typename Real>
void from_extended(const std::vector<Real>& ext, const TapPlan& plan, std::size_t ox, std::size_t oy,
                   Tensor<Real>& x) {
  const FeatureShape sh = x.feature_shape();
  const std::size_t planes = sh.n * sh.s * sh.t;
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t xx = 0; xx < sh.x; ++xx) {
      const Real* src = ext.data() + ((pl * plan.xp + xx + ox) * plan.yp + oy) * sh.c;
      std::copy_n(src, sh.y * sh.c, x.data() + (pl * sh.x + xx) * sh.y * sh.c);
    }
  }
}

template <typename Real>
using ConstRowMap = Eigen::Map<const RowMat<Real>>;
template <typename Real>
using RowMap = Eigen::Map<RowMat<Real>>;

inline Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

// C[rows x N] += A[rows x K] * B[K x N], all row-major and contiguous. The
// channel counts here are tiny, where a fixed-width loop beats a packed GEMM.
template <std::size_t N, typename Real>
void matmul_acc_fixed(const Real* a, std::size_t rows, std::size_t k, const Real* b, Real* c) {
  using Row = Eigen::Matrix<Real, 1, static_cast<int>(N)>;
  std::size_t r = 0;
  // Four rows at a time keeps four independent accumulation chains in flight.
  for (; r + 4 <= rows; r += 4) {
    Row acc0 = Eigen::Map<Row>(c + r * N);
    Row acc1 = Eigen::Map<Row>(c + (r + 1) * N);
    Row acc2 = Eigen::Map<Row>(c + (r + 2) * N);
    Row acc3 = Eigen::Map<Row>(c + (r + 3) * N);
    const Real* ar = a + r * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const Eigen::Map<const Row> br(b + kk * N);
      acc0 += ar[kk] * br;
      acc1 += ar[k + kk] * br;
      acc2 += ar[2 * k + kk] * br;
      acc3 += ar[3 * k + kk] * br;
    }
    Eigen::Map<Row>(c + r * N) = acc0;
    Eigen::Map<Row>(c + (r + 1) * N) = acc1;
    Eigen::Map<Row>(c + (r + 2) * N) = acc2;
    Eigen::Map<Row>(c + (r + 3) * N) = acc3;
  }
  for (; r < rows; ++r) {
    Eigen::Map<Row> out(c + r * N);
    Row acc = out;
    const Real* ar = a + r * k;
    for (std::size_t kk = 0; kk < k; ++kk) acc += ar[kk] * Eigen::Map<const Row>(b + kk * N);
    out = acc;
  }
}

template <typename Real>
void matmul_acc(const Real* a, std::size_t rows, std::size_t k, const Real* b, std::size_t n, Real* c) {
  switch (n) {
    case 1: return matmul_acc_fixed<1>(a, rows, k, b, c);
    case 2: return matmul_acc_fixed<2>(a, rows, k, b, c);
    case 3: return matmul_acc_fixed<3>(a, rows, k, b, c);
    case 4: return matmul_acc_fixed<4>(a, rows, k, b, c);
    case 8: return matmul_acc_fixed<8>(a, rows, k, b, c);
    case 16: return matmul_acc_fixed<16>(a, rows, k, b, c);
    case 32: return matmul_acc_fixed<32>(a, rows, k, b, c);
    default: break;
  }
  RowMap<Real>(c, ix(rows), ix(n)).noalias() +=
      ConstRowMap<Real>(a, ix(rows), ix(k)) * ConstRowMap<Real>(b, ix(k), ix(n));
}

// D[K x N] += A[rows x K]^T * G[rows x N].
template <std::size_t N, typename Real>
void matmul_at_acc_fixed(const Real* a, std::size_t rows, std::size_t k, const Real* g, Real* d) {
  using Row = Eigen::Matrix<Real, 1, static_cast<int>(N)>;
  for (std::size_t kk = 0; kk < k; ++kk) {
    Row acc0 = Row::Zero();
    Row acc1 = Row::Zero();
    Row acc2 = Row::Zero();
    Row acc3 = Row::Zero();
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
      acc0 += a[r * k + kk] * Eigen::Map<const Row>(g + r * N);
      acc1 += a[(r + 1) * k + kk] * Eigen::Map<const Row>(g + (r + 1) * N);
      acc2 += a[(r + 2) * k + kk] * Eigen::Map<const Row>(g + (r + 2) * N);
      acc3 += a[(r + 3) * k + kk] * Eigen::Map<const Row>(g + (r + 3) * N);
    }
    for (; r < rows; ++r) acc0 += a[r * k + kk] * Eigen::Map<const Row>(g + r * N);
    Eigen::Map<Row>(d + kk * N) += (acc0 + acc1) + (acc2 + acc3);
  }
}

// out[c] += sum_r g[r, c], rows accumulated in order. Eigen's colwise sums
// peel by address alignment, which would make results depend on the heap.
template <typename Real>
void add_row_sums(const Real* g, std::size_t rows, std::size_t n, Real* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = g + r * n;
    for (std::size_t c = 0; c < n; ++c) out[c] += row[c];
  }
}

template <typename Real>
void matmul_at_acc(const Real* a, std::size_t rows, std::size_t k, const Real* g, std::size_t n, Real* d) {
  switch (n) {
    case 1: return matmul_at_acc_fixed<1>(a, rows, k, g, d);
    case 2: return matmul_at_acc_fixed<2>(a, rows, k, g, d);
    case 3: return matmul_at_acc_fixed<3>(a, rows, k, g, d);
    case 4: return matmul_at_acc_fixed<4>(a, rows, k, g, d);
    case 8: return matmul_at_acc_fixed<8>(a, rows, k, g, d);
    case 16: return matmul_at_acc_fixed<16>(a, rows, k, g, d);
    case 32: return matmul_at_acc_fixed<32>(a, rows, k, g, d);
    default: break;
  }
  RowMap<Real>(d, ix(k), ix(n)).noalias() +=
      ConstRowMap<Real>(a, ix(rows), ix(k)).transpose() * ConstRowMap<Real>(g, ix(rows), ix(n));
}

template <typename Real>
Tensor<Real> conv_taps_forward(const ConvGeometry& g, const Tensor<Real>& input, const Tensor<Real>& weights,
                               const Tensor<Real>& bias) {
  const TapPlan plan(g);
  const std::size_t cin = g.k.c_in;
  const std::size_t cout = g.k.c_out;
  const std::vector<Real> in_ext = to_extended(input, plan, g.k.s1 / 2, g.k.s2 / 2);
  std::vector<Real> out_ext(plan.ext_rows() * cout, Real(0));
  plan.for_each([&](std::size_t out_row, std::size_t in_row, std::size_t rows, std::size_t wrow) {
    matmul_acc(in_ext.data() + in_row * cin, rows, cin, weights.data() + wrow * cout, cout,
               out_ext.data() + out_row * cout);
  });
  Tensor<Real> out(g.out);
  from_extended(out_ext, plan, 0, 0, out);
  RowMap<Real> o(out.data(), ix(out.size() / cout), ix(cout));
  o.rowwise() += Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(bias.data(), ix(cout));
  return out;
}

template <typename Real>
Conv4dGrads<Real> conv_taps_backward(const ConvGeometry& g, const Tensor<Real>& input, const Tensor<Real>& weights,
                                     const Tensor<Real>& grad_out, bool need_input) {
  const TapPlan plan(g);
  const std::size_t cin = g.k.c_in;
  const std::size_t cout = g.k.c_out;
  const std::vector<Real> in_ext = to_extended(input, plan, g.k.s1 / 2, g.k.s2 / 2);
  const std::vector<Real> gout_ext = to_extended(grad_out, plan, 0, 0);
  std::vector<Real> gin_ext(need_input ? plan.ext_rows() * cin : 0, Real(0));
  Conv4dGrads<Real> grads;
  grads.weights = Tensor<Real>(weights.dims());
  grads.bias = Tensor<Real>(std::vector<std::size_t>{cout});
  // Per-tap transposed weights (cout x cin) for the input gradient.
  const std::size_t taps = g.k.taps();
  std::vector<Real> wt(taps * cin * cout);
  for (std::size_t tap = 0; tap < taps; ++tap) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t co = 0; co < cout; ++co) {
        wt[(tap * cout + co) * cin + ci] = weights[(tap * cin + ci) * cout + co];
      }
    }
  }
  plan.for_each([&](std::size_t out_row, std::size_t in_row, std::size_t rows, std::size_t wrow) {
    const Real* go = gout_ext.data() + out_row * cout;
    matmul_at_acc(in_ext.data() + in_row * cin, rows, cin, go, cout, grads.weights.data() + wrow * cout);
    if (need_input) {
      matmul_acc(go, rows, cout, wt.data() + wrow * cout, cin, gin_ext.data() + in_row * cin);
    }
  });
  add_row_sums(grad_out.data(), grad_out.size() / cout, cout, grads.bias.data());
  if (need_input) {
    grads.input = Tensor<Real>(input.dims());
    from_extended(gin_ext, plan, g.k.s1 / 2, g.k.s2 / 2, grads.input);
  }
  return grads;
}

}  // namespace

template <typename Real>
Tensor<Real> conv4d_forward(const Tensor<Real>& input, const Tensor<Real>& weights,
                            const Tensor<Real>& bias, std::size_t stride) {
  const ConvGeometry g = make_geometry(input.dims(), weights.dims(), stride);
  if (bias.size() != g.k.c_out) throw ShapeError("hconv4d bias length must equal c_out");
  if (stride == 1) return conv_taps_forward(g, input, weights, bias);
  Tensor<Real> out(g.out);
  const std::size_t k = g.cols();
  const std::size_t cout = g.k.c_out;
  const Eigen::Map<const RowMat<Real>> w(weights.data(), static_cast<Eigen::Index>(k),
                                          static_cast<Eigen::Index>(cout));
  const Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>> b(bias.data(), static_cast<Eigen::Index>(cout));
  const std::size_t block = g.block_lines();
  const std::size_t line_total = g.lines();
  std::vector<Real> col(std::min(block, line_total) * g.out.y * k);
  for (std::size_t l0 = 0; l0 < line_total; l0 += block) {
    const std::size_t lines = std::min(block, line_total - l0);
    const std::size_t m0 = l0 * g.out.y;
    const std::size_t rows = lines * g.out.y;
    im2col(g, input.data(), l0, lines, col.data());
    const Eigen::Map<const RowMat<Real>> c(col.data(), static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(k));
    Eigen::Map<RowMat<Real>> o(out.data() + m0 * cout, static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(cout));
    o.noalias() = c * w;
    o.rowwise() += b;
  }
  return out;
}

template <typename Real>
Conv4dGrads<Real> conv4d_backward(const Tensor<Real>& input, const Tensor<Real>& weights,
                                  const Tensor<Real>& grad_out, std::size_t stride,
                                  bool need_input) {
  const ConvGeometry g = make_geometry(input.dims(), weights.dims(), stride);
  if (grad_out.dims() != g.out.dims()) throw ShapeError("hconv4d gradient shape mismatch");
  if (stride == 1) return conv_taps_backward(g, input, weights, grad_out, need_input);
  const std::size_t k = g.cols();
  const std::size_t cout = g.k.c_out;
  Conv4dGrads<Real> grads;
  grads.weights = Tensor<Real>(weights.dims());
  grads.bias = Tensor<Real>(std::vector<std::size_t>{cout});
  if (need_input) grads.input = Tensor<Real>(input.dims());

  const Eigen::Map<const RowMat<Real>> w(weights.data(), static_cast<Eigen::Index>(k),
                                          static_cast<Eigen::Index>(cout));
  Eigen::Map<RowMat<Real>> gw(grads.weights.data(), static_cast<Eigen::Index>(k),
                              static_cast<Eigen::Index>(cout));
  const std::size_t block = g.block_lines();
  const std::size_t line_total = g.lines();
  std::vector<Real> col(std::min(block, line_total) * g.out.y * k);
  for (std::size_t l0 = 0; l0 < line_total; l0 += block) {
    const std::size_t lines = std::min(block, line_total - l0);
    const std::size_t m0 = l0 * g.out.y;
    const std::size_t rows = lines * g.out.y;
    const Eigen::Map<const RowMat<Real>> go(grad_out.data() + m0 * cout, static_cast<Eigen::Index>(rows),
                                             static_cast<Eigen::Index>(cout));
    add_row_sums(grad_out.data() + m0 * cout, rows, cout, grads.bias.data());
    im2col(g, input.data(), l0, lines, col.data());
    Eigen::Map<RowMat<Real>> c(col.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
    gw.noalias() += c.transpose() * go;
    if (need_input) {
      c.noalias() = go * w.transpose();
      col2im_add(g, col.data(), l0, lines, grads.input.data());
    }
  }
  return grads;
}

template <typename Real>
Tensor<Real> lrelu_forward(const Tensor<Real>& x, Real slope) {
  Tensor<Real> y(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > Real(0) ? x[i] : slope * x[i];
  return y;
}

template <typename Real>
Tensor<Real> lrelu_backward(const Tensor<Real>& x, const Tensor<Real>& grad_out, Real slope) {
  Tensor<Real> g(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > Real(0) ? grad_out[i] : slope * grad_out[i];
  return g;
}

template <typename Real>
AgbnStats agbn_statistics(const Tensor<Real>& x) {
  const FeatureShape sh = x.feature_shape();
  const std::size_t c = sh.c;
  const std::size_t count = sh.size() / c;
  AgbnStats stats{std::vector<double>(c, 0.0), std::vector<double>(c, 0.0)};
  for (std::size_t i = 0; i < x.size(); ++i) stats.mean[i % c] += static_cast<double>(x[i]);
  for (double& m : stats.mean) m /= static_cast<double>(count);
  // A channel holding a single value gets that value back exactly, so that
  // x - mean is exactly zero downstream.
  std::vector<bool> flat(c, true);
  for (std::size_t i = c; i < x.size(); ++i) {
    if (x[i] != x[i % c]) flat[i % c] = false;
  }
  for (std::size_t ch = 0; ch < c && ch < x.size(); ++ch) {
    if (flat[ch]) stats.mean[ch] = static_cast<double>(x[ch]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - stats.mean[i % c];
    stats.var[i % c] += d * d;
  }
  for (double& v : stats.var) v /= static_cast<double>(count);
  return stats;
}

template <typename Real>
Tensor<Real> agbn_apply(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                        const std::vector<double>& mean, const std::vector<double>& var, double eps) {
  const std::size_t c = x.feature_shape().c;
  if (gamma.size() != c || beta.size() != c || mean.size() != c || var.size() != c) {
    throw ShapeError("agbn parameter length must equal the channel count " + std::to_string(c));
  }
  std::vector<double> scale(c);
  for (std::size_t ch = 0; ch < c; ++ch) scale[ch] = static_cast<double>(gamma[ch]) / std::sqrt(var[ch] + eps);
  Tensor<Real> y(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t ch = i % c;
    y[i] = static_cast<Real>((static_cast<double>(x[i]) - mean[ch]) * scale[ch] + static_cast<double>(beta[ch]));
  }
  return y;
}

template <typename Real>
AgbnGrads<Real> agbn_backward(const Tensor<Real>& x, const Tensor<Real>& gamma,
                              const std::vector<double>& mean, const std::vector<double>& var,
                              double eps, const Tensor<Real>& grad_out, bool batch_statistics) {
  const FeatureShape sh = x.feature_shape();
  const std::size_t c = sh.c;
  const double count = static_cast<double>(sh.size() / c);
  std::vector<double> inv(c);
  for (std::size_t ch = 0; ch < c; ++ch) inv[ch] = 1.0 / std::sqrt(var[ch] + eps);
  std::vector<double> sum_g(c, 0.0);
  std::vector<double> sum_g_xhat(c, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t ch = i % c;
    const double xhat = (static_cast<double>(x[i]) - mean[ch]) * inv[ch];
    sum_g[ch] += static_cast<double>(grad_out[i]);
    sum_g_xhat[ch] += static_cast<double>(grad_out[i]) * xhat;
  }
  AgbnGrads<Real> grads;
  grads.gamma = Tensor<Real>(std::vector<std::size_t>{c});
  grads.beta = Tensor<Real>(std::vector<std::size_t>{c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    grads.gamma[ch] = static_cast<Real>(sum_g_xhat[ch]);
    grads.beta[ch] = static_cast<Real>(sum_g[ch]);
  }
  grads.x = Tensor<Real>(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t ch = i % c;
    const double scale = static_cast<double>(gamma[ch]) * inv[ch];
    double g = static_cast<double>(grad_out[i]);
    if (batch_statistics) {
      const double xhat = (static_cast<double>(x[i]) - mean[ch]) * inv[ch];
      g -= (sum_g[ch] + xhat * sum_g_xhat[ch]) / count;
    }
    grads.x[i] = static_cast<Real>(scale * g);
  }
  return grads;
}

template <typename Real>
Tensor<Real> pixel_shuffle(const Tensor<Real>& x, std::size_t r) {
  const FeatureShape in = x.feature_shape();
  if (r == 0 || in.c % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: channel count " + std::to_string(in.c) +
                     " is not divisible by r^2 = " + std::to_string(r * r));
  }
  FeatureShape out = in;
  out.x = in.x * r;
  out.y = in.y * r;
  out.c = in.c / (r * r);
  Tensor<Real> y(out);
  for (std::size_t a = 0; a < in.n * in.s * in.t; ++a) {
    for (std::size_t ix = 0; ix < in.x; ++ix) {
      for (std::size_t iy = 0; iy < in.y; ++iy) {
        const Real* src = x.data() + ((a * in.x + ix) * in.y + iy) * in.c;
        for (std::size_t c = 0; c < out.c; ++c) {
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
              const std::size_t ox = r * ix + i;
              const std::size_t oy = r * iy + j;
              y[((a * out.x + ox) * out.y + oy) * out.c + c] = src[c * r * r + i * r + j];
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> pixel_unshuffle(const Tensor<Real>& x, std::size_t r) {
  const FeatureShape in = x.feature_shape();
  if (r == 0 || in.x % r != 0 || in.y % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial extent not divisible by r");
  }
  FeatureShape out = in;
  out.x = in.x / r;
  out.y = in.y / r;
  out.c = in.c * r * r;
  Tensor<Real> y(out);
  for (std::size_t a = 0; a < in.n * in.s * in.t; ++a) {
    for (std::size_t ox = 0; ox < out.x; ++ox) {
      for (std::size_t oy = 0; oy < out.y; ++oy) {
        Real* dst = y.data() + ((a * out.x + ox) * out.y + oy) * out.c;
        for (std::size_t c = 0; c < in.c; ++c) {
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
              dst[c * r * r + i * r + j] = x[((a * in.x + r * ox + i) * in.y + r * oy + j) * in.c + c];
            }
          }
        }
      }
    }
  }
  return y;
}

void check_angular_interp_args(std::size_t s, std::size_t t, std::size_t s_out, std::size_t t_out) {
  const auto check = [](std::size_t n, std::size_t n_out, const char* axis) {
    if (n_out < n) {
      throw ContractError(std::string("angular_linear_interp: unsupported downsampling along ") + axis +
                          " (" + std::to_string(n) + " -> " + std::to_string(n_out) + ")");
    }
    if (n < 2 && n_out != n) {
      throw ContractError(std::string("angular_linear_interp: need at least 2 views along ") + axis +
                          " to interpolate");
    }
  };
  check(s, s_out, "s");
  check(t, t_out, "t");
}

std::vector<InterpTap> angular_taps(std::size_t n, std::size_t n_out) {
  std::vector<InterpTap> taps(n_out);
  if (n_out == n) {
    for (std::size_t k = 0; k < n; ++k) taps[k] = {k, 0.0};
    return taps;
  }
  const std::size_t den = n_out - 1;
  for (std::size_t k = 0; k < n_out; ++k) {
    const std::size_t num = k * (n - 1);
    taps[k] = {num / den, static_cast<double>(num % den) / static_cast<double>(den)};
  }
  return taps;
}

namespace {

// Resamples axis 1 (s) or 2 (t) of a rank-6 tensor.
template <typename Real>
Tensor<Real> interp_axis(const Tensor<Real>& x, std::size_t axis, std::size_t n_out) {
  std::vector<std::size_t> dims = x.dims();
  const std::size_t n = dims[axis];
  std::size_t outer = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= dims[a];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= dims[a];
  dims[axis] = n_out;
  Tensor<Real> y(dims);
  const auto taps = angular_taps(n, n_out);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n_out; ++k) {
      const Real* a = x.data() + (o * n + taps[k].base) * inner;
      Real* dst = y.data() + (o * n_out + k) * inner;
      if (taps[k].frac == 0.0) {
        std::copy_n(a, inner, dst);
      } else {
        const Real* b = a + inner;
        const auto w = static_cast<Real>(taps[k].frac);
        for (std::size_t i = 0; i < inner; ++i) dst[i] = a[i] + w * (b[i] - a[i]);
      }
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> interp_axis_adjoint(const Tensor<Real>& g, std::size_t axis, std::size_t n) {
  std::vector<std::size_t> dims = g.dims();
  const std::size_t n_out = dims[axis];
  std::size_t outer = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= dims[a];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= dims[a];
  dims[axis] = n;
  Tensor<Real> gx(dims);
  const auto taps = angular_taps(n, n_out);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n_out; ++k) {
      const Real* src = g.data() + (o * n_out + k) * inner;
      Real* a = gx.data() + (o * n + taps[k].base) * inner;
      if (taps[k].frac == 0.0) {
        for (std::size_t i = 0; i < inner; ++i) a[i] += src[i];
      } else {
        Real* b = a + inner;
        const auto w = static_cast<Real>(taps[k].frac);
        for (std::size_t i = 0; i < inner; ++i) {
          a[i] += (Real(1) - w) * src[i];
          b[i] += w * src[i];
        }
      }
    }
  }
  return gx;
}

}  // namespace

template <typename Real>
Tensor<Real> angular_interp_forward(const Tensor<Real>& x, std::size_t s_out, std::size_t t_out) {
  const FeatureShape sh = x.feature_shape();
  check_angular_interp_args(sh.s, sh.t, s_out, t_out);
  Tensor<Real> along_s = s_out == sh.s ? x : interp_axis(x, 1, s_out);
  return t_out == sh.t ? along_s : interp_axis(along_s, 2, t_out);
}

template <typename Real>
Tensor<Real> angular_interp_backward(const Tensor<Real>& grad_out, std::size_t s_in, std::size_t t_in) {
  const FeatureShape sh = grad_out.feature_shape();
  check_angular_interp_args(s_in, t_in, sh.s, sh.t);
  Tensor<Real> g_t = sh.t == t_in ? grad_out : interp_axis_adjoint(grad_out, 2, t_in);
  return sh.s == s_in ? g_t : interp_axis_adjoint(g_t, 1, s_in);
}

#define HROLF_INSTANTIATE_OPS(Real)                                                              \
  template Tensor<Real> conv4d_forward(const Tensor<Real>&, const Tensor<Real>&,                 \
                                       const Tensor<Real>&, std::size_t);                        \
  template Conv4dGrads<Real> conv4d_backward(const Tensor<Real>&, const Tensor<Real>&,           \
                                             const Tensor<Real>&, std::size_t, bool);            \
  template Tensor<Real> lrelu_forward(const Tensor<Real>&, Real);                                \
  template Tensor<Real> lrelu_backward(const Tensor<Real>&, const Tensor<Real>&, Real);          \
  template AgbnStats agbn_statistics(const Tensor<Real>&);                                       \
  template Tensor<Real> agbn_apply(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&, \
                                   const std::vector<double>&, const std::vector<double>&,       \
                                   double);                                                      \
  template AgbnGrads<Real> agbn_backward(const Tensor<Real>&, const Tensor<Real>&,               \
                                         const std::vector<double>&, const std::vector<double>&, \
                                         double, const Tensor<Real>&, bool);                     \
  template Tensor<Real> pixel_shuffle(const Tensor<Real>&, std::size_t);                         \
  template Tensor<Real> pixel_unshuffle(const Tensor<Real>&, std::size_t);                       \
  template Tensor<Real> angular_interp_forward(const Tensor<Real>&, std::size_t, std::size_t);   \
  template Tensor<Real> angular_interp_backward(const Tensor<Real>&, std::size_t, std::size_t);

HROLF_INSTANTIATE_OPS(float)
HROLF_INSTANTIATE_OPS(double)

#undef HROLF_INSTANTIATE_OPS

}  // namespace ops
}  // namespace hrolf
