#include <algorithm>

#include "sapgan/errors.hpp"
#include "sapgan/kernels/kernels.hpp"
#include "sapgan/tensor/ops.hpp"

namespace sapgan::ops {

using detail::Node;

namespace {

struct Plane {
  std::size_t channels, height, width;
};

struct Window {
  std::size_t kh, kw, stride, pad;
  std::size_t out_h, out_w;  // positions the kernel visits on the padded plane
};

// col[(c*kh + i)*kw + j][oh*out_w + ow] = x[c][oh*s - p + i][ow*s - p + j] (zero outside).
template <class T>
void im2col(const T* x, Plane p, Window w, T* col) {
  const std::size_t cols = w.out_h * w.out_w;
  for (std::size_t c = 0; c < p.channels; ++c)
    for (std::size_t i = 0; i < w.kh; ++i)
      for (std::size_t j = 0; j < w.kw; ++j) {
        T* row = col + ((c * w.kh + i) * w.kw + j) * cols;
        for (std::size_t oh = 0; oh < w.out_h; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * w.stride + i) - static_cast<std::ptrdiff_t>(w.pad);
          T* dst = row + oh * w.out_w;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(p.height)) {
            std::fill_n(dst, w.out_w, T{0});
            continue;
          }
          const T* src = x + (c * p.height + static_cast<std::size_t>(ih)) * p.width;
          for (std::size_t ow = 0; ow < w.out_w; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * w.stride + j) - static_cast<std::ptrdiff_t>(w.pad);
            dst[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(p.width)) ? T{0} : src[iw];
          }
        }
      }
}

// Adjoint of im2col: scatter-add columns back into the plane.
template <class T>
void col2im(const T* col, Plane p, Window w, T* x) {
  const std::size_t cols = w.out_h * w.out_w;
  for (std::size_t c = 0; c < p.channels; ++c)
    for (std::size_t i = 0; i < w.kh; ++i)
      for (std::size_t j = 0; j < w.kw; ++j) {
        const T* row = col + ((c * w.kh + i) * w.kw + j) * cols;
        for (std::size_t oh = 0; oh < w.out_h; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * w.stride + i) - static_cast<std::ptrdiff_t>(w.pad);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(p.height)) continue;
          T* dst = x + (c * p.height + static_cast<std::size_t>(ih)) * p.width;
          for (std::size_t ow = 0; ow < w.out_w; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * w.stride + j) - static_cast<std::ptrdiff_t>(w.pad);
            if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(p.width)) dst[iw] += row[oh * w.out_w + ow];
          }
        }
      }
}

void check_window(std::size_t h, std::size_t w, std::size_t kh, std::size_t kw, ConvGeometry g, const char* op) {
  if (g.stride < 1) throw ShapeError(std::string(op) + ": stride must be >= 1");
  if (kh > h + 2 * g.padding || kw > w + 2 * g.padding)
    throw ShapeError(std::string(op) + ": kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " larger than padded input " + std::to_string(h + 2 * g.padding) + "x" +
                     std::to_string(w + 2 * g.padding));
}

template <class T>
void check_bias(const std::optional<BasicTensor<T>>& bias, std::size_t channels, const char* op) {
  if (bias && (bias->rank() != 1 || bias->dim(0) != channels))
    throw ShapeError(std::string(op) + ": bias " + to_string(bias->shape()) + " must be [" +
                     std::to_string(channels) + "]");
}

template <class T>
void add_bias(std::vector<T>& out, std::span<const T> bias, std::size_t n, std::size_t c, std::size_t hw) {
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch) {
      T* p = out.data() + (s * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) p[i] += bias[ch];
    }
}

template <class T>
void bias_grad(Node<T>& bias, const std::vector<T>& dout, std::size_t n, std::size_t c, std::size_t hw) {
  auto& g = bias.ensure_grad();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* p = dout.data() + (s * c + ch) * hw;
      T acc = 0;
      for (std::size_t i = 0; i < hw; ++i) acc += p[i];
      g[ch] += acc;
    }
}

}  // namespace

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const OptionalBias<T>& bias, ConvGeometry geom) {
  if (input.rank() != 4 || weight.rank() != 4)
    throw ShapeError("conv2d: expected 4-d input and weight, got " + to_string(input.shape()) + " and " +
                     to_string(weight.shape()));
  if (input.dim(1) != weight.dim(1))
    throw ShapeError("conv2d: input has " + std::to_string(input.dim(1)) + " channels but weight " +
                     to_string(weight.shape()) + " expects " + std::to_string(weight.dim(1)));
  const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  check_window(h, w, kh, kw, geom, "conv2d");
  check_bias(bias, cout, "conv2d");
  const Plane in_plane{cin, h, w};
  const Window win{kh, kw, geom.stride, geom.padding, (h + 2 * geom.padding - kh) / geom.stride + 1,
                   (w + 2 * geom.padding - kw) / geom.stride + 1};
  const std::size_t kdim = cin * kh * kw, ohw = win.out_h * win.out_w;

  const auto& k = kernels::active<T>();
  std::vector<T> out(n * cout * ohw, T{0});
  std::vector<T> col(kdim * ohw);
  for (std::size_t s = 0; s < n; ++s) {
    im2col(input.data().data() + s * cin * h * w, in_plane, win, col.data());
    k.gemm_nn(cout, ohw, kdim, weight.data().data(), col.data(), out.data() + s * cout * ohw);
  }
  if (bias) add_bias<T>(out, bias->data(), n, cout, ohw);

  auto rule = [=](Node<T>& self) {
    const auto& kt = kernels::active<T>();
    const auto& xv = self.inputs[0]->data;
    const auto& wv = self.inputs[1]->data;
    auto* xn = self.inputs[0]->requires_grad ? self.inputs[0].get() : nullptr;
    auto* wn = self.inputs[1]->requires_grad ? self.inputs[1].get() : nullptr;
    std::vector<T> scratch(kdim * ohw);
    for (std::size_t s = 0; s < n; ++s) {
      const T* dout = self.grad.data() + s * cout * ohw;
      if (wn) {
        im2col(xv.data() + s * cin * h * w, in_plane, win, scratch.data());
        kt.gemm_nt(cout, kdim, ohw, dout, scratch.data(), wn->ensure_grad().data());
      }
      if (xn) {
        std::fill(scratch.begin(), scratch.end(), T{0});
        kt.gemm_tn(kdim, ohw, cout, wv.data(), dout, scratch.data());
        col2im(scratch.data(), in_plane, win, xn->ensure_grad().data() + s * cin * h * w);
      }
    }
    if (self.inputs.size() > 2 && self.inputs[2]->requires_grad) bias_grad(*self.inputs[2], self.grad, n, cout, ohw);
  };
  Shape shape{n, cout, win.out_h, win.out_w};
  if (bias) return make_result<T>(std::move(shape), std::move(out), {input, weight, *bias}, "conv2d", rule);
  return make_result<T>(std::move(shape), std::move(out), {input, weight}, "conv2d", rule);
}

template <class T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                const OptionalBias<T>& bias, ConvGeometry geom) {
  if (input.rank() != 4 || weight.rank() != 4)
    throw ShapeError("conv_transpose2d: expected 4-d input and weight, got " + to_string(input.shape()) + " and " +
                     to_string(weight.shape()));
  if (input.dim(1) != weight.dim(0))
    throw ShapeError("conv_transpose2d: input has " + std::to_string(input.dim(1)) + " channels but weight " +
                     to_string(weight.shape()) + " expects " + std::to_string(weight.dim(0)));
  if (geom.stride < 1) throw ShapeError("conv_transpose2d: stride must be >= 1");
  const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
  const auto oh_signed = static_cast<std::ptrdiff_t>((h - 1) * geom.stride + kh) - 2 * static_cast<std::ptrdiff_t>(geom.padding);
  const auto ow_signed = static_cast<std::ptrdiff_t>((w - 1) * geom.stride + kw) - 2 * static_cast<std::ptrdiff_t>(geom.padding);
  if (oh_signed < 1 || ow_signed < 1)
    throw ShapeError("conv_transpose2d: padding " + std::to_string(geom.padding) + " leaves no output for input " +
                     to_string(input.shape()) + " and kernel " + to_string(weight.shape()));
  check_bias(bias, cout, "conv_transpose2d");
  const std::size_t oh = static_cast<std::size_t>(oh_signed), ow = static_cast<std::size_t>(ow_signed);
  // The output plane plays the role of conv2d's input; the input plane is the window grid.
  const Plane out_plane{cout, oh, ow};
  const Window win{kh, kw, geom.stride, geom.padding, h, w};
  const std::size_t kdim = cout * kh * kw, hw = h * w;

  const auto& k = kernels::active<T>();
  std::vector<T> out(n * cout * oh * ow, T{0});
  std::vector<T> col(kdim * hw);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(col.begin(), col.end(), T{0});
    k.gemm_tn(kdim, hw, cin, weight.data().data(), input.data().data() + s * cin * hw, col.data());
    col2im(col.data(), out_plane, win, out.data() + s * cout * oh * ow);
  }
  if (bias) add_bias<T>(out, bias->data(), n, cout, oh * ow);

  auto rule = [=](Node<T>& self) {
    const auto& kt = kernels::active<T>();
    const auto& xv = self.inputs[0]->data;
    const auto& wv = self.inputs[1]->data;
    auto* xn = self.inputs[0]->requires_grad ? self.inputs[0].get() : nullptr;
    auto* wn = self.inputs[1]->requires_grad ? self.inputs[1].get() : nullptr;
    std::vector<T> scratch(kdim * hw);
    for (std::size_t s = 0; s < n; ++s) {
      if (!xn && !wn) break;
      im2col(self.grad.data() + s * cout * oh * ow, out_plane, win, scratch.data());
      if (xn) kt.gemm_nn(cin, hw, kdim, wv.data(), scratch.data(), xn->ensure_grad().data() + s * cin * hw);
      if (wn) kt.gemm_nt(cin, kdim, hw, xv.data() + s * cin * hw, scratch.data(), wn->ensure_grad().data());
    }
    if (self.inputs.size() > 2 && self.inputs[2]->requires_grad) bias_grad(*self.inputs[2], self.grad, n, cout, oh * ow);
  };
  Shape shape{n, cout, oh, ow};
  if (bias) return make_result<T>(std::move(shape), std::move(out), {input, weight, *bias}, "conv_transpose2d", rule);
  return make_result<T>(std::move(shape), std::move(out), {input, weight}, "conv_transpose2d", rule);
}

template BasicTensor<float> conv2d(const BasicTensor<float>&, const BasicTensor<float>&,
                                   const std::optional<BasicTensor<float>>&, ConvGeometry);
template BasicTensor<double> conv2d(const BasicTensor<double>&, const BasicTensor<double>&,
                                    const std::optional<BasicTensor<double>>&, ConvGeometry);
template BasicTensor<float> conv_transpose2d(const BasicTensor<float>&, const BasicTensor<float>&,
                                             const std::optional<BasicTensor<float>>&, ConvGeometry);
template BasicTensor<double> conv_transpose2d(const BasicTensor<double>&, const BasicTensor<double>&,
                                              const std::optional<BasicTensor<double>>&, ConvGeometry);

}  // namespace sapgan::ops
