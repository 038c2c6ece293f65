#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "sgp/common.hpp"

namespace sgp {

// ============================================================================
// Dense feed-forward network: tanh hidden layers, identity output.
// Weights are row-major (out x in). Small enough that everything is plain
// double vectors; gradients share the parameter layout.
// ============================================================================

struct ParamBlock {
  std::vector<std::vector<double>> weights;  // per layer, out*in row-major
  std::vector<std::vector<double>> biases;   // per layer, out

  void fill(double v) {
    for (auto& w : weights) std::fill(w.begin(), w.end(), v);
    for (auto& b : biases) std::fill(b.begin(), b.end(), v);
  }

  void add_scaled(const ParamBlock& other, double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += s * other.weights[l][i];
      for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += s * other.biases[l][i];
    }
  }

  void scale(double s) {
    for (auto& w : weights)
      for (auto& v : w) v *= s;
    for (auto& b : biases)
      for (auto& v : b) v *= s;
  }
};

struct DenseNetwork {
  std::vector<std::size_t> layer_sizes;  // [input, hidden..., output]
  ParamBlock params;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
      n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    return n;
  }

  // Xavier-uniform initialization scaled by fan-in/fan-out; seeded.
  static DenseNetwork create(std::vector<std::size_t> sizes, Rng& rng) {
    if (sizes.size() < 2) throw InvalidArgumentError("DenseNetwork: need >= 2 layer sizes");
    for (std::size_t s : sizes)
      if (s == 0) throw InvalidArgumentError("DenseNetwork: zero layer size");
    DenseNetwork net;
    net.layer_sizes = std::move(sizes);
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
      const std::size_t fan_in = net.layer_sizes[l];
      const std::size_t fan_out = net.layer_sizes[l + 1];
      const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::vector<double> w(fan_in * fan_out);
      for (auto& v : w) v = rng.uniform(-r, r);
      net.params.weights.push_back(std::move(w));
      net.params.biases.emplace_back(fan_out, 0.0);
    }
    return net;
  }

  static DenseNetwork zeros(std::vector<std::size_t> sizes) {
    Rng rng(0);
    DenseNetwork net = create(std::move(sizes), rng);
    net.params.fill(0.0);
    return net;
  }

  ParamBlock zero_gradients() const {
    ParamBlock g;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      g.weights.emplace_back(params.weights[l].size(), 0.0);
      g.biases.emplace_back(params.biases[l].size(), 0.0);
    }
    return g;
  }
};

// Post-activation values per layer; activations[0] is the input.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;
};

inline std::vector<double> forward(const DenseNetwork& net, std::span<const double> input,
                                   ForwardTrace* trace = nullptr) {
  if (input.size() != net.input_size())
    throw InvalidArgumentError("forward: input size mismatch");
  std::vector<double> act(input.begin(), input.end());
  if (trace) {
    trace->activations.clear();
    trace->activations.push_back(act);
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in = net.layer_sizes[l];
    const std::size_t out = net.layer_sizes[l + 1];
    const auto& w = net.params.weights[l];
    const auto& b = net.params.biases[l];
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      const double* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * act[i];
      next[o] = (l + 1 < net.layer_count()) ? std::tanh(z) : z;
    }
    act = std::move(next);
    if (trace) trace->activations.push_back(act);
  }
  return act;
}

// Exact analytic backward pass. Accumulates parameter gradients (+=) into
// `grads` and returns the gradient with respect to the input.
inline std::vector<double> backward(const DenseNetwork& net, const ForwardTrace& trace,
                                    std::span<const double> upstream, ParamBlock& grads) {
  if (trace.activations.size() != net.layer_count() + 1)
    throw InvalidArgumentError("backward: trace does not match network");
  if (upstream.size() != net.output_size())
    throw InvalidArgumentError("backward: upstream size mismatch");
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const std::size_t in = net.layer_sizes[l];
    const std::size_t out = net.layer_sizes[l + 1];
    const auto& act_in = trace.activations[l];
    const auto& act_out = trace.activations[l + 1];
    // Through tanh on hidden layers: tanh' = 1 - a^2 with a = post-activation.
    if (l + 1 < net.layer_count())
      for (std::size_t o = 0; o < out; ++o) delta[o] *= 1.0 - act_out[o] * act_out[o];
    auto& gw = grads.weights[l];
    auto& gb = grads.biases[l];
    std::vector<double> prev(in, 0.0);
    const auto& w = net.params.weights[l];
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += delta[o];
      double* grow = gw.data() + o * in;
      const double* wrow = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += delta[o] * act_in[i];
        prev[i] += delta[o] * wrow[i];
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

// ============================================================================
// Adam
// ============================================================================

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step_count = 0;
  ParamBlock m, v;

  static AdamState create(const DenseNetwork& net, const AdamConfig& config = {}) {
    AdamState s;
    s.lr = config.lr;
    s.beta1 = config.beta1;
    s.beta2 = config.beta2;
    s.eps = config.eps;
    s.m = net.zero_gradients();
    s.v = net.zero_gradients();
    return s;
  }
};

inline void adam_step(DenseNetwork& net, const ParamBlock& grads, AdamState& state) {
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                    const std::vector<double>& g) {
    if (p.size() != g.size()) throw InvalidArgumentError("adam_step: gradient shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  };
  for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
    update(net.params.weights[l], state.m.weights[l], state.v.weights[l], grads.weights[l]);
    update(net.params.biases[l], state.m.biases[l], state.v.biases[l], grads.biases[l]);
  }
  for (const auto& w : net.params.weights)
    for (double x : w)
      if (!std::isfinite(x)) throw Error("adam_step: parameters diverged");
}

// ============================================================================
// Serialization (exact double round-trip via JSON)
// ============================================================================

inline nlohmann::json net_to_json(const DenseNetwork& net) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes;
  j["weights"] = net.params.weights;
  j["biases"] = net.params.biases;
  return j;
}

inline DenseNetwork net_from_json(const nlohmann::json& j) {
  DenseNetwork net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  net.params.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  net.params.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  if (net.layer_sizes.size() < 2 || net.params.weights.size() != net.layer_count() ||
      net.params.biases.size() != net.layer_count())
    throw ParseError("network checkpoint: inconsistent shapes");
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (net.params.weights[l].size() != net.layer_sizes[l] * net.layer_sizes[l + 1] ||
        net.params.biases[l].size() != net.layer_sizes[l + 1])
      throw ParseError("network checkpoint: layer shape mismatch");
  }
  return net;
}

}  // namespace sgp
