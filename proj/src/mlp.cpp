#include "syncgrid/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "syncgrid/errors.hpp"
#include "syncgrid/rng.hpp"

namespace syncgrid {

Mlp Mlp::init(const std::vector<int>& sizes, uint64_t seed, double scale) {
  if (sizes.size() < 2) throw ContractError("mlp needs at least two layer sizes");
  for (int s : sizes) {
    if (s < 1) throw ContractError("layer sizes must be positive");
  }
  Mlp mlp;
  mlp.sizes_ = sizes;
  int total = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    mlp.offsets_.push_back(total);
    total += sizes[l + 1] * sizes[l] + sizes[l + 1];
  }
  mlp.params_.assign(total, 0.0);

  Rng rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = scale / std::sqrt(static_cast<double>(sizes[l]));
    double* w = mlp.params_.data() + mlp.weight_offset(static_cast<int>(l));
    for (int k = 0; k < sizes[l + 1] * sizes[l]; ++k) w[k] = rng.range(-bound, bound);
    // biases stay zero
  }
  return mlp;
}

int Mlp::weight_offset(int layer) const { return offsets_[layer]; }

int Mlp::bias_offset(int layer) const {
  return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
}

std::vector<double> Mlp::forward(const std::vector<double>& x) const {
  Trace scratch;
  return forward_cached(x, scratch);
}

std::vector<double> Mlp::forward_cached(const std::vector<double>& x, Trace& trace) const {
  if (static_cast<int>(x.size()) != input_size()) throw ContractError("input size mismatch");
  const int n_layers = static_cast<int>(sizes_.size()) - 1;
  trace.acts.assign(n_layers + 1, {});
  trace.acts[0] = x;
  for (int l = 0; l < n_layers; ++l) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    const std::vector<double>& a = trace.acts[l];
    std::vector<double>& y = trace.acts[l + 1];
    y.assign(n_out, 0.0);
    for (int o = 0; o < n_out; ++o) {
      double z = b[o];
      const double* row = w + o * n_in;
      for (int i = 0; i < n_in; ++i) z += row[i] * a[i];
      y[o] = (l + 1 < n_layers && z < 0.0) ? 0.0 : z;  // rectifier on hidden layers
    }
  }
  return trace.acts.back();
}

void Mlp::backward(const Trace& trace, const std::vector<double>& upstream,
                   std::vector<double>& grad) const {
  if (static_cast<int>(upstream.size()) != output_size())
    throw ContractError("upstream gradient size mismatch");
  if (static_cast<int>(grad.size()) != n_params()) throw ContractError("gradient buffer mismatch");
  const int n_layers = static_cast<int>(sizes_.size()) - 1;

  std::vector<double> delta = upstream;
  std::vector<double> prev;
  for (int l = n_layers - 1; l >= 0; --l) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    const std::vector<double>& a = trace.acts[l];

    // Hidden activations are rectified; a stored zero means the unit was
    // clamped and passes no gradient.
    if (l < n_layers - 1) {
      const std::vector<double>& out = trace.acts[l + 1];
      for (int o = 0; o < n_out; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }

    for (int o = 0; o < n_out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* grow = gw + o * n_in;
      for (int i = 0; i < n_in; ++i) grow[i] += d * a[i];
    }

    if (l > 0) {
      prev.assign(n_in, 0.0);
      for (int o = 0; o < n_out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + o * n_in;
        for (int i = 0; i < n_in; ++i) prev[i] += d * row[i];
      }
      delta.swap(prev);
    }
  }
}

void AdamState::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw ContractError("optimizer state shape mismatch");
  t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t k = 0; k < params.size(); ++k) {
    m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
    v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
    const double mhat = m[k] / bc1;
    const double vhat = v[k] / bc2;
    params[k] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

namespace {

constexpr char kMagic[6] = {'S', 'G', 'M', 'L', 'P', '1'};

void put_u32(std::FILE* f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  if (std::fwrite(b, 1, 4, f) != 4) throw IoError("write failed");
}

uint32_t get_u32(std::FILE* f) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw IoError("truncated parameter file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::FILE* f, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
  if (std::fwrite(b, 1, 8, f) != 8) throw IoError("write failed");
}

double get_f64(std::FILE* f) {
  unsigned char b[8];
  if (std::fread(b, 1, 8, f) != 8) throw IoError("truncated parameter file");
  uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<uint64_t>(b[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

void save_mlp(const Mlp& mlp, const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path + " for writing");
  if (std::fwrite(kMagic, 1, 6, f.get()) != 6) throw IoError("write failed");
  put_u32(f.get(), static_cast<uint32_t>(mlp.sizes().size()));
  for (int s : mlp.sizes()) put_u32(f.get(), static_cast<uint32_t>(s));
  for (double p : mlp.params()) put_f64(f.get(), p);
}

Mlp load_mlp(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);
  char magic[6];
  if (std::fread(magic, 1, 6, f.get()) != 6 || std::memcmp(magic, kMagic, 6) != 0)
    throw IoError("not a SGMLP1 parameter file: " + path);
  const uint32_t n_sizes = get_u32(f.get());
  if (n_sizes < 2 || n_sizes > 64) throw IoError("corrupt layer header");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(get_u32(f.get()));
  Mlp mlp = Mlp::init(sizes, 0, 0.0);
  for (double& p : mlp.params()) p = get_f64(f.get());
  return mlp;
}

}  // namespace syncgrid
