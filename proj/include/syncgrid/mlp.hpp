#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace syncgrid {

// Fully connected network with rectifier hidden units and a linear output.
// Parameters live in one flat vector (per layer: weights row-major out x in,
// then biases), which keeps copying, serialization, optimizer state and
// finite-difference probing trivial.
class Mlp {
 public:
  Mlp() = default;

  // Deterministic initialization: weights uniform in +-scale/sqrt(fan_in),
  // biases zero.
  static Mlp init(const std::vector<int>& sizes, uint64_t seed, double scale = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int n_params() const { return static_cast<int>(params_.size()); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Pure forward pass.
  std::vector<double> forward(const std::vector<double>& x) const;

  // Cached activations of one forward pass, for backprop.
  struct Trace {
    std::vector<std::vector<double>> acts;  // acts[0] = input, then post-activation
  };
  std::vector<double> forward_cached(const std::vector<double>& x, Trace& trace) const;

  // Accumulates exact reverse-mode gradients of upstream . output into
  // `grad` (flat, same layout as params).
  void backward(const Trace& trace, const std::vector<double>& upstream,
                std::vector<double>& grad) const;

 private:
  int weight_offset(int layer) const;
  int bias_offset(int layer) const;

  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<int> offsets_;  // per layer: weight offset (bias follows weights)
};

// Adaptive-moment optimizer state for one flat parameter vector.
struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(int n_params, double learning_rate = 5e-4)
      : lr(learning_rate), m(n_params, 0.0), v(n_params, 0.0) {}

  // One bias-corrected update; mutates params in place.
  void step(std::vector<double>& params, const std::vector<double>& grad);
};

// Flat binary parameter file: magic "SGMLP1", little-endian u32 layer count
// and layer sizes, then float64 parameters in layer order.
void save_mlp(const Mlp& mlp, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace syncgrid
