#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "syncgrid/errors.hpp"
#include "syncgrid/mlp.hpp"
#include "syncgrid/rng.hpp"

using namespace syncgrid;

namespace {

// Central finite differences of a scalar loss with respect to every
// parameter; the independent oracle for backward().
std::vector<double> finite_diff(Mlp& mlp, const std::vector<double>& x,
                                const std::vector<double>& target, double h = 1e-5) {
  auto loss = [&]() {
    const auto y = mlp.forward(x);
    double total = 0.0;
    for (size_t k = 0; k < y.size(); ++k) total += (y[k] - target[k]) * (y[k] - target[k]);
    return 0.5 * total;
  };
  std::vector<double> grad(mlp.n_params());
  for (int k = 0; k < mlp.n_params(); ++k) {
    const double save = mlp.params()[k];
    mlp.params()[k] = save + h;
    const double up = loss();
    mlp.params()[k] = save - h;
    const double down = loss();
    mlp.params()[k] = save;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a[k]), std::abs(b[k]), 1e-6});
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("initialization") {
  SUBCASE("same seed gives identical parameters") {
    const Mlp a = Mlp::init({4, 8, 3}, 77);
    const Mlp b = Mlp::init({4, 8, 3}, 77);
    CHECK(a.params() == b.params());
    const Mlp c = Mlp::init({4, 8, 3}, 78);
    CHECK(a.params() != c.params());
  }

  SUBCASE("parameter count") {
    const Mlp mlp = Mlp::init({4, 8, 3}, 1);
    CHECK(mlp.n_params() == 4 * 8 + 8 + 8 * 3 + 3);
  }

  SUBCASE("zero scale leaves only biases") {
    const Mlp mlp = Mlp::init({3, 4, 2}, 5, 0.0);
    const auto y = mlp.forward({1.0, -2.0, 3.0});
    for (double v : y) CHECK(v == doctest::Approx(0.0));
  }

  SUBCASE("bad shapes") {
    CHECK_THROWS_AS(Mlp::init({4}, 0), ContractError);
    CHECK_THROWS_AS(Mlp::init({4, 0, 2}, 0), ContractError);
  }
}

TEST_CASE("forward") {
  SUBCASE("single linear layer") {
    Mlp mlp = Mlp::init({2, 2}, 0, 0.0);
    // W = [[1, 2], [3, 4]], b = [0.5, -0.5]
    mlp.params() = {1.0, 2.0, 3.0, 4.0, 0.5, -0.5};
    const auto y = mlp.forward({1.0, 1.0});
    CHECK(y[0] == doctest::Approx(3.5));
    CHECK(y[1] == doctest::Approx(6.5));
  }

  SUBCASE("hidden rectifier clamps") {
    Mlp mlp = Mlp::init({1, 1, 1}, 0, 0.0);
    // hidden: w=1 b=0; output: w=1 b=0
    mlp.params() = {1.0, 0.0, 1.0, 0.0};
    CHECK(mlp.forward({2.0})[0] == doctest::Approx(2.0));
    CHECK(mlp.forward({-2.0})[0] == doctest::Approx(0.0));
  }

  SUBCASE("purity: repeated calls are bitwise equal") {
    const Mlp mlp = Mlp::init({6, 16, 4}, 9);
    Rng rng(3);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.range(-1, 1);
    const auto y1 = mlp.forward(x);
    const auto y2 = mlp.forward(x);
    CHECK(y1 == y2);
  }

  SUBCASE("input size mismatch") {
    const Mlp mlp = Mlp::init({3, 2}, 0);
    CHECK_THROWS_AS(mlp.forward({1.0}), ContractError);
  }
}

TEST_CASE("backward matches finite differences") {
  SUBCASE("linear layer identity dW = g x^T") {
    Mlp mlp = Mlp::init({3, 2}, 0, 0.0);
    mlp.params() = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.0, 0.0};
    const std::vector<double> x = {1.0, -2.0, 0.5};
    Mlp::Trace trace;
    mlp.forward_cached(x, trace);
    std::vector<double> grad(mlp.n_params(), 0.0);
    const std::vector<double> upstream = {2.0, -1.0};
    mlp.backward(trace, upstream, grad);
    // weight rows: g[o] * x[i]
    CHECK(grad[0] == doctest::Approx(2.0 * 1.0));
    CHECK(grad[1] == doctest::Approx(2.0 * -2.0));
    CHECK(grad[2] == doctest::Approx(2.0 * 0.5));
    CHECK(grad[3] == doctest::Approx(-1.0 * 1.0));
    CHECK(grad[5] == doctest::Approx(-1.0 * 0.5));
    // biases equal upstream
    CHECK(grad[6] == doctest::Approx(2.0));
    CHECK(grad[7] == doctest::Approx(-1.0));
  }

  SUBCASE("clamped unit passes no gradient") {
    Mlp mlp = Mlp::init({1, 1, 1}, 0, 0.0);
    mlp.params() = {1.0, 0.0, 1.0, 0.0};  // hidden w=1,b=0; out w=1,b=0
    Mlp::Trace trace;
    mlp.forward_cached({-3.0}, trace);
    std::vector<double> grad(mlp.n_params(), 0.0);
    mlp.backward(trace, {1.0}, grad);
    CHECK(grad[0] == doctest::Approx(0.0));  // hidden weight
    CHECK(grad[1] == doctest::Approx(0.0));  // hidden bias
  }

  SUBCASE("20 random networks under 1e-4 relative error") {
    Rng rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
      const int in = 2 + rng.below_int(5);
      const int hidden = 4 + rng.below_int(12);
      const int out = 1 + rng.below_int(4);
      Mlp mlp = Mlp::init({in, hidden, hidden, out}, 1000 + trial);
      std::vector<double> x(in), target(out);
      for (auto& v : x) v = rng.range(-2, 2);
      for (auto& v : target) v = rng.range(-2, 2);

      Mlp::Trace trace;
      const auto y = mlp.forward_cached(x, trace);
      std::vector<double> upstream(out);
      for (int k = 0; k < out; ++k) upstream[k] = y[k] - target[k];
      std::vector<double> grad(mlp.n_params(), 0.0);
      mlp.backward(trace, upstream, grad);

      const auto fd = finite_diff(mlp, x, target);
      CHECK(max_rel_error(grad, fd) < 1e-4);
    }
  }
}

TEST_CASE("optimizer") {
  SUBCASE("zero gradients leave parameters unchanged") {
    Mlp mlp = Mlp::init({2, 3, 1}, 4);
    const auto before = mlp.params();
    AdamState opt(mlp.n_params(), 0.1);
    opt.step(mlp.params(), std::vector<double>(mlp.n_params(), 0.0));
    CHECK(mlp.params() == before);
  }

  SUBCASE("descends on a quadratic") {
    // f(w) = w^2 from w = 1, one step with lr 0.1
    std::vector<double> w = {1.0};
    AdamState opt(1, 0.1);
    opt.step(w, {2.0 * w[0]});
    CHECK(std::abs(w[0]) < 1.0);
  }

  SUBCASE("fits a tiny regression batch") {
    Mlp mlp = Mlp::init({2, 16, 1}, 11);
    AdamState opt(mlp.n_params(), 1e-2);
    const std::vector<std::vector<double>> xs = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
    const std::vector<double> ys = {0.3, -0.7, 0.9, 0.1};
    double loss = 0.0;
    for (int it = 0; it < 500; ++it) {
      std::vector<double> grad(mlp.n_params(), 0.0);
      loss = 0.0;
      for (size_t k = 0; k < xs.size(); ++k) {
        Mlp::Trace trace;
        const auto y = mlp.forward_cached(xs[k], trace);
        const double err = y[0] - ys[k];
        loss += err * err / xs.size();
        mlp.backward(trace, {2.0 * err / xs.size()}, grad);
      }
      opt.step(mlp.params(), grad);
    }
    CHECK(loss < 1e-3);
  }

  SUBCASE("deterministic trajectories") {
    auto run = [] {
      Mlp mlp = Mlp::init({2, 8, 1}, 3);
      AdamState opt(mlp.n_params(), 1e-3);
      for (int it = 0; it < 50; ++it) {
        Mlp::Trace trace;
        const auto y = mlp.forward_cached({0.5, -0.5}, trace);
        std::vector<double> grad(mlp.n_params(), 0.0);
        mlp.backward(trace, {y[0] - 1.0}, grad);
        opt.step(mlp.params(), grad);
      }
      return mlp.params();
    };
    CHECK(run() == run());
  }
}

TEST_CASE("parameter file round trip") {
  const std::string path = "/tmp/syncgrid_test_mlp.net";
  const Mlp mlp = Mlp::init({5, 12, 7}, 2024);
  save_mlp(mlp, path);
  const Mlp loaded = load_mlp(path);
  CHECK(loaded.sizes() == mlp.sizes());
  CHECK(loaded.params() == mlp.params());
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_mlp("/tmp/does_not_exist.net"), IoError);
}
