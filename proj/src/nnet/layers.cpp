#include "candlenet/nnet/layers.hpp"

#include "candlenet/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace candlenet::nnet {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view text) {
  for (auto k : {LayerKind::dense, LayerKind::conv, LayerKind::relu, LayerKind::dropout,
                 LayerKind::flatten, LayerKind::softmax}) {
    if (to_string(k) == text) return k;
  }
  throw FormatError("unknown layer kind '" + std::string(text) + "'");
}

namespace {

void check_batch(const Tensor& in, const Shape& expected) {
  Shape s = in.shape();
  if (s.empty() || Shape(s.begin() + 1, s.end()) != expected) {
    throw ShapeError("layer expects " + shape_string(expected) + " per sample, got " +
                     shape_string(s));
  }
}

Shape batched(std::size_t n, const Shape& per_sample) {
  Shape s{n};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

// Eight interleaved partial sums combined pairwise: a fixed order, so the
// result is bit-stable, and wide enough for the compiler to vectorize.
double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// Uniform fan-in scaling suited to ReLU units (He et al.).
void fan_in_uniform(Tensor& w, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (double& v : w.values()) v = u(rng);
}

// Fully connected. Weight stored [inputs, units] so the inner loops run over
// contiguous units.
class Dense final : public Layer {
 public:
  Dense(const Shape& in, std::size_t units) : Layer(in), units_(units) {
    if (in.size() != 1) throw ShapeError("dense layer needs a flat input, got " + shape_string(in));
    if (units == 0) throw ShapeError("dense layer needs at least one unit");
    output_shape_ = {units};
    params_[0] = {"weight", Tensor({in[0], units}), Tensor({in[0], units})};
    params_[1] = {"bias", Tensor({units}), Tensor({units})};
  }

  LayerSpec spec() const override { return LayerSpec::dense(units_); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  std::span<Parameter> parameters() override { return params_; }
  std::span<const Parameter> parameters() const override { return params_; }

  void initialize(std::mt19937_64& rng) override {
    fan_in_uniform(params_[0].value, input_shape_[0], rng);
    params_[1].value.fill(0.0);
  }

  void forward(const Tensor& in, Tensor& out, Mode, LayerState&, std::mt19937_64&) const override {
    check_batch(in, input_shape_);
    const std::size_t n = in.batch();
    out.resize({n, units_});
    std::size_t s = 0;
    for (; s + kBlock <= n; s += kBlock) forward_block<kBlock>(in, out, s);
    for (; s < n; ++s) forward_block<1>(in, out, s);
  }

  void backward(const Tensor& in, const Tensor&, const Tensor& grad_out, Tensor* grad_in,
                const LayerState&) override {
    const std::size_t n = in.batch();
    if (grad_in) grad_in->resize(in.shape());
    std::size_t s = 0;
    for (; s + kBlock <= n; s += kBlock) backward_block<kBlock>(in, grad_out, grad_in, s);
    for (; s < n; ++s) backward_block<1>(in, grad_out, grad_in, s);
  }

 private:
  // Samples are processed in small blocks so each weight row is loaded once
  // per block. Every sample still accumulates over inputs in index order, so
  // results match one-at-a-time evaluation exactly.
  static constexpr std::size_t kBlock = 4;

  template <std::size_t B>
  void forward_block(const Tensor& in, Tensor& out, std::size_t s0) const {
    const std::size_t nin = input_shape_[0], nu = units_;
    const double* __restrict w = params_[0].value.data();
    const double* __restrict b = params_[1].value.data();
    const double* x[B];
    double* __restrict y[B];
    for (std::size_t k = 0; k < B; ++k) {
      x[k] = in.data() + (s0 + k) * nin;
      y[k] = out.data() + (s0 + k) * nu;
      std::copy_n(b, nu, y[k]);
    }
    for (std::size_t i = 0; i < nin; ++i) {
      const double* __restrict wi = w + i * nu;
      for (std::size_t k = 0; k < B; ++k) {
        const double xi = x[k][i];
        double* __restrict yk = y[k];
        for (std::size_t u = 0; u < nu; ++u) yk[u] += wi[u] * xi;
      }
    }
  }

  template <std::size_t B>
  void backward_block(const Tensor& in, const Tensor& grad_out, Tensor* grad_in, std::size_t s0) {
    const std::size_t nin = input_shape_[0], nu = units_;
    double* __restrict gw = params_[0].grad.data();
    double* __restrict gb = params_[1].grad.data();
    const double* __restrict w = params_[0].value.data();
    const double* x[B];
    const double* g[B];
    for (std::size_t k = 0; k < B; ++k) {
      x[k] = in.data() + (s0 + k) * nin;
      g[k] = grad_out.data() + (s0 + k) * nu;
    }
    for (std::size_t k = 0; k < B; ++k) {
      for (std::size_t u = 0; u < nu; ++u) gb[u] += g[k][u];
    }
    for (std::size_t i = 0; i < nin; ++i) {
      double* __restrict gwi = gw + i * nu;
      for (std::size_t k = 0; k < B; ++k) {
        const double xi = x[k][i];
        const double* __restrict gk = g[k];
        for (std::size_t u = 0; u < nu; ++u) gwi[u] += gk[u] * xi;
      }
      if (grad_in) {
        const double* wi = w + i * nu;
        for (std::size_t k = 0; k < B; ++k) grad_in->data()[(s0 + k) * nin + i] = dot(wi, g[k], nu);
      }
    }
  }

  std::size_t units_;
  std::array<Parameter, 2> params_;
};

// Full-height convolution over a [rows, width] input with causal zero padding:
// output column t sees input columns t-width+1 .. t, so the output keeps the
// input width and never reads later columns.
class Conv final : public Layer {
 public:
  Conv(const Shape& in, std::size_t filters, std::size_t width)
      : Layer(in), filters_(filters), width_(width) {
    if (in.size() != 2) throw ShapeError("conv layer needs a [rows, width] input, got " + shape_string(in));
    if (filters == 0 || width == 0 || width > in[1]) {
      throw ShapeError("conv filter does not fit input " + shape_string(in));
    }
    output_shape_ = {filters, in[1]};
    params_[0] = {"weight", Tensor({filters, in[0], width}), Tensor({filters, in[0], width})};
    params_[1] = {"bias", Tensor({filters}), Tensor({filters})};
  }

  LayerSpec spec() const override { return LayerSpec::conv(filters_, width_); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv>(*this); }
  std::span<Parameter> parameters() override { return params_; }
  std::span<const Parameter> parameters() const override { return params_; }

  void initialize(std::mt19937_64& rng) override {
    fan_in_uniform(params_[0].value, input_shape_[0] * width_, rng);
    params_[1].value.fill(0.0);
  }

  void forward(const Tensor& in, Tensor& out, Mode, LayerState&, std::mt19937_64&) const override {
    check_batch(in, input_shape_);
    const std::size_t n = in.batch(), rows = input_shape_[0], cols = input_shape_[1];
    out.resize({n, filters_, cols});
    const double* w = params_[0].value.data();
    const double* b = params_[1].value.data();
    for (std::size_t s = 0; s < n; ++s) {
      const double* x = in.data() + s * rows * cols;
      for (std::size_t f = 0; f < filters_; ++f) {
        double* y = out.data() + (s * filters_ + f) * cols;
        std::fill_n(y, cols, b[f]);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* xr = x + r * cols;
          for (std::size_t j = 0; j < width_; ++j) {
            const double wv = w[(f * rows + r) * width_ + j];
            const std::size_t shift = width_ - 1 - j;
            for (std::size_t t = shift; t < cols; ++t) y[t] += wv * xr[t - shift];
          }
        }
      }
    }
  }

  void backward(const Tensor& in, const Tensor&, const Tensor& grad_out, Tensor* grad_in,
                const LayerState&) override {
    const std::size_t n = in.batch(), rows = input_shape_[0], cols = input_shape_[1];
    double* gw = params_[0].grad.data();
    double* gb = params_[1].grad.data();
    const double* w = params_[0].value.data();
    if (grad_in) {
      grad_in->resize(in.shape());
      grad_in->fill(0.0);
    }
    for (std::size_t s = 0; s < n; ++s) {
      const double* x = in.data() + s * rows * cols;
      for (std::size_t f = 0; f < filters_; ++f) {
        const double* g = grad_out.data() + (s * filters_ + f) * cols;
        double bsum = 0.0;
        for (std::size_t t = 0; t < cols; ++t) bsum += g[t];
        gb[f] += bsum;
        for (std::size_t r = 0; r < rows; ++r) {
          const double* xr = x + r * cols;
          double* gxr = grad_in ? grad_in->data() + s * rows * cols + r * cols : nullptr;
          for (std::size_t j = 0; j < width_; ++j) {
            const std::size_t k = (f * rows + r) * width_ + j;
            const std::size_t shift = width_ - 1 - j;
            double acc = 0.0;
            for (std::size_t t = shift; t < cols; ++t) acc += g[t] * xr[t - shift];
            gw[k] += acc;
            if (gxr) {
              const double wv = w[k];
              for (std::size_t t = shift; t < cols; ++t) gxr[t - shift] += wv * g[t];
            }
          }
        }
      }
    }
  }

 private:
  std::size_t filters_;
  std::size_t width_;
  std::array<Parameter, 2> params_;
};

class Relu final : public Layer {
 public:
  explicit Relu(const Shape& in) : Layer(in) { output_shape_ = in; }
  LayerSpec spec() const override { return LayerSpec::relu(); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

  void forward(const Tensor& in, Tensor& out, Mode, LayerState&, std::mt19937_64&) const override {
    check_batch(in, input_shape_);
    out.resize(in.shape());
    const double* x = in.data();
    double* y = out.data();
    for (std::size_t i = 0; i < in.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  }

  void backward(const Tensor& in, const Tensor&, const Tensor& grad_out, Tensor* grad_in,
                const LayerState&) override {
    if (!grad_in) return;
    grad_in->resize(in.shape());
    const double* x = in.data();
    const double* g = grad_out.data();
    double* gx = grad_in->data();
    for (std::size_t i = 0; i < in.size(); ++i) gx[i] = x[i] > 0.0 ? g[i] : 0.0;
  }
};

// Inverted dropout: kept units are scaled by 1/(1-rate) in training so the
// predict pass is the identity.
class Dropout final : public Layer {
 public:
  Dropout(const Shape& in, double rate) : Layer(in), rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ShapeError("dropout rate must lie in [0, 1)");
    output_shape_ = in;
  }
  LayerSpec spec() const override { return LayerSpec::dropout(rate_); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

  void forward(const Tensor& in, Tensor& out, Mode mode, LayerState& state,
               std::mt19937_64& rng) const override {
    check_batch(in, input_shape_);
    out.resize(in.shape());
    if (mode == Mode::predict) {
      std::copy_n(in.data(), in.size(), out.data());
      return;
    }
    if (state.frozen) {
      if (state.mask.shape() != in.shape()) throw ShapeError("frozen dropout mask does not fit batch");
    } else {
      state.mask.resize(in.shape());
      // Each 64-bit draw decides two units: a unit is kept when its 32-bit
      // half falls below keep · 2^32.
      const double keep = 1.0 - rate_;
      const double scale = 1.0 / keep;
      const auto cut = static_cast<std::uint64_t>(std::ldexp(keep, 32));
      auto mask = state.mask.values();
      for (std::size_t i = 0; i < mask.size(); i += 2) {
        const std::uint64_t bits = rng();
        mask[i] = (bits >> 32) < cut ? scale : 0.0;
        if (i + 1 < mask.size()) mask[i + 1] = (bits & 0xffffffffULL) < cut ? scale : 0.0;
      }
    }
    const double* x = in.data();
    const double* m = state.mask.data();
    double* y = out.data();
    for (std::size_t i = 0; i < in.size(); ++i) y[i] = x[i] * m[i];
  }

  void backward(const Tensor& in, const Tensor&, const Tensor& grad_out, Tensor* grad_in,
                const LayerState& state) override {
    if (!grad_in) return;
    grad_in->resize(in.shape());
    const double* g = grad_out.data();
    const double* m = state.mask.data();
    double* gx = grad_in->data();
    for (std::size_t i = 0; i < in.size(); ++i) gx[i] = g[i] * m[i];
  }

 private:
  double rate_;
};

class Flatten final : public Layer {
 public:
  explicit Flatten(const Shape& in) : Layer(in) { output_shape_ = {shape_size(in)}; }
  LayerSpec spec() const override { return LayerSpec::flatten(); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

  void forward(const Tensor& in, Tensor& out, Mode, LayerState&, std::mt19937_64&) const override {
    check_batch(in, input_shape_);
    out.resize(batched(in.batch(), output_shape_));
    std::copy_n(in.data(), in.size(), out.data());
  }

  void backward(const Tensor& in, const Tensor&, const Tensor& grad_out, Tensor* grad_in,
                const LayerState&) override {
    if (!grad_in) return;
    grad_in->resize(in.shape());
    std::copy_n(grad_out.data(), grad_out.size(), grad_in->data());
  }
};

class Softmax final : public Layer {
 public:
  explicit Softmax(const Shape& in) : Layer(in) {
    if (in.size() != 1) throw ShapeError("softmax needs a flat input, got " + shape_string(in));
    output_shape_ = in;
  }
  LayerSpec spec() const override { return LayerSpec::softmax(); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Softmax>(*this); }

  void forward(const Tensor& in, Tensor& out, Mode, LayerState&, std::mt19937_64&) const override {
    check_batch(in, input_shape_);
    out.resize(in.shape());
    const std::size_t k = input_shape_[0];
    for (std::size_t s = 0; s < in.batch(); ++s) {
      const double* x = in.data() + s * k;
      double* y = out.data() + s * k;
      const double mx = *std::max_element(x, x + k);
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        y[i] = std::exp(x[i] - mx);
        sum += y[i];
      }
      for (std::size_t i = 0; i < k; ++i) y[i] /= sum;
    }
  }

  // Jacobian-vector product: dx = p * (g - <g, p>).
  void backward(const Tensor& in, const Tensor& out, const Tensor& grad_out, Tensor* grad_in,
                const LayerState&) override {
    if (!grad_in) return;
    grad_in->resize(in.shape());
    const std::size_t k = input_shape_[0];
    for (std::size_t s = 0; s < in.batch(); ++s) {
      const double* p = out.data() + s * k;
      const double* g = grad_out.data() + s * k;
      double* gx = grad_in->data() + s * k;
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += g[i] * p[i];
      for (std::size_t i = 0; i < k; ++i) gx[i] = p[i] * (g[i] - dot);
    }
  }
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input_shape) {
  switch (spec.kind) {
    case LayerKind::dense: return std::make_unique<Dense>(input_shape, spec.units);
    case LayerKind::conv: return std::make_unique<Conv>(input_shape, spec.filters, spec.width);
    case LayerKind::relu: return std::make_unique<Relu>(input_shape);
    case LayerKind::dropout: return std::make_unique<Dropout>(input_shape, spec.rate);
    case LayerKind::flatten: return std::make_unique<Flatten>(input_shape);
    case LayerKind::softmax: return std::make_unique<Softmax>(input_shape);
  }
  throw ShapeError("unknown layer kind");
}

}  // namespace candlenet::nnet
