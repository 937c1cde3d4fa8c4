#include "stconv/net/network.hpp"

#include <map>
#include <utility>

#include "stconv/nn/conv3d.hpp"
#include "stconv/nn/pool.hpp"

namespace stconv::net {

namespace detail {

class Module {
 public:
  virtual ~Module() = default;
  virtual Tensor forward(const Tensor& x, nn::Mode mode, const Executor& ex) = 0;
  virtual Tensor backward(const Tensor& grad, const Executor& ex) = 0;
  virtual void collect(std::vector<nn::Parameter*>&) {}
  virtual void collect_buffers(std::vector<std::pair<std::string, Tensor*>>&) {}

 protected:
  static void require_cache(bool present, const std::string& name) {
    require(present, ErrorCode::invalid_config,
            name + ": backward requires a preceding train-mode forward pass");
  }
};

}  // namespace detail

namespace {

using detail::Module;

std::unique_ptr<Module> make_module(const LayerSpec& spec, Rng& rng);

class Sequence : public Module {
 public:
  Sequence(const std::vector<LayerSpec>& specs, Rng& rng) {
    for (const auto& s : specs) modules_.push_back(make_module(s, rng));
  }
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor& ex) override {
    Tensor y = x;
    for (auto& m : modules_) y = m->forward(y, mode, ex);
    return y;
  }
  Tensor backward(const Tensor& grad, const Executor& ex) override {
    Tensor g = grad;
    for (auto it = modules_.rbegin(); it != modules_.rend(); ++it) g = (*it)->backward(g, ex);
    return g;
  }
  void collect(std::vector<nn::Parameter*>& out) override {
    for (auto& m : modules_) m->collect(out);
  }
  void collect_buffers(std::vector<std::pair<std::string, Tensor*>>& out) override {
    for (auto& m : modules_) m->collect_buffers(out);
  }
  bool empty() const { return modules_.empty(); }

 private:
  std::vector<std::unique_ptr<Module>> modules_;
};

// Moves parameter values into an op's parameter struct for the duration of a call.
template <typename Params>
class Lend {
 public:
  Lend(Params& params, nn::Parameter& weight, nn::Parameter* bias)
      : params_(params), weight_(weight), bias_(bias) {
    params_.weights = std::move(weight_.value);
    if (bias_) params_.bias = std::move(bias_->value);
  }
  ~Lend() {
    weight_.value = std::move(params_.weights);
    if (bias_) bias_->value = std::move(params_.bias);
  }
  Lend(const Lend&) = delete;
  Lend& operator=(const Lend&) = delete;

 private:
  Params& params_;
  nn::Parameter& weight_;
  nn::Parameter* bias_;
};

class Conv3dModule : public Module {
 public:
  Conv3dModule(const LayerSpec& spec, Rng& rng) : name_(spec.name) {
    const nn::Conv3dGeometry g{spec.in_channels, spec.out_channels, spec.kernel, spec.stride,
                               spec.padding};
    auto p = nn::Conv3dParams::initialized(g, spec.bias, rng);
    geometry_ = g;
    weight_ = {spec.name + ".weight", std::move(p.weights), {}, {}};
    if (spec.bias) bias_ = {spec.name + ".bias", std::move(p.bias), {}, {}};
    has_bias_ = spec.bias;
  }
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor& ex) override {
    nn::Conv3dParams p{geometry_, {}, {}};
    Lend lend(p, weight_, has_bias_ ? &bias_ : nullptr);
    if (mode == nn::Mode::train) input_ = x;
    return nn::conv3d_forward(x, p, ex);
  }
  Tensor backward(const Tensor& grad, const Executor& ex) override {
    require_cache(!input_.empty(), name_);
    nn::Conv3dGrads g;
    {
      nn::Conv3dParams p{geometry_, {}, {}};
      Lend lend(p, weight_, has_bias_ ? &bias_ : nullptr);
      g = nn::conv3d_backward(input_, p, grad, ex);
    }
    weight_.accumulate(g.weights);
    if (has_bias_) bias_.accumulate(g.bias);
    return std::move(g.input);
  }
  void collect(std::vector<nn::Parameter*>& out) override {
    out.push_back(&weight_);
    if (has_bias_) out.push_back(&bias_);
  }

 private:
  std::string name_;
  nn::Conv3dGeometry geometry_;
  nn::Parameter weight_, bias_;
  bool has_bias_ = false;
  Tensor input_;
};

class BatchNormModule : public Module {
 public:
  explicit BatchNormModule(const LayerSpec& spec) : name_(spec.name) {
    state_ = nn::BatchNormState::identity(spec.out_channels);
    gamma_ = {spec.name + ".gamma", state_.gamma, {}, {}};
    beta_ = {spec.name + ".beta", state_.beta, {}, {}};
  }
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor&) override {
    state_.gamma = gamma_.value;
    state_.beta = beta_.value;
    if (mode == nn::Mode::train) {
      has_cache_ = true;
      return nn::batchnorm_forward(x, state_, mode, &cache_);
    }
    return nn::batchnorm_forward(x, state_, mode);
  }
  Tensor backward(const Tensor& grad, const Executor&) override {
    require_cache(has_cache_, name_);
    auto g = nn::batchnorm_backward(grad, state_, cache_);
    gamma_.accumulate(g.gamma);
    beta_.accumulate(g.beta);
    return std::move(g.input);
  }
  void collect(std::vector<nn::Parameter*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  void collect_buffers(std::vector<std::pair<std::string, Tensor*>>& out) override {
    out.emplace_back(name_ + ".running_mean", &state_.running_mean);
    out.emplace_back(name_ + ".running_var", &state_.running_var);
  }

 private:
  std::string name_;
  nn::BatchNormState state_;
  nn::BatchNormCache cache_;
  bool has_cache_ = false;
  nn::Parameter gamma_, beta_;
};

class ReluModule : public Module {
 public:
  explicit ReluModule(std::string name) : name_(std::move(name)) {}
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor&) override {
    if (mode == nn::Mode::train) input_ = x;
    return nn::relu_forward(x);
  }
  Tensor backward(const Tensor& grad, const Executor&) override {
    require_cache(!input_.empty(), name_);
    return nn::relu_backward(input_, grad);
  }

 private:
  std::string name_;
  Tensor input_;
};

class MaxPoolModule : public Module {
 public:
  explicit MaxPoolModule(const LayerSpec& spec) : spec_(spec) {}
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor&) override {
    auto r = nn::maxpool3d_forward(x, spec_.kernel, spec_.stride, spec_.padding);
    if (mode == nn::Mode::train) {
      argmax_ = std::move(r.argmax);
      input_shape_ = x.shape();
    }
    return std::move(r.output);
  }
  Tensor backward(const Tensor& grad, const Executor&) override {
    require_cache(!input_shape_.empty(), spec_.name);
    return nn::maxpool3d_backward(grad, argmax_, input_shape_);
  }

 private:
  LayerSpec spec_;
  std::vector<std::uint64_t> argmax_;
  Shape input_shape_;
};

class GlobalPoolModule : public Module {
 public:
  explicit GlobalPoolModule(std::string name) : name_(std::move(name)) {}
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor&) override {
    if (mode == nn::Mode::train) input_shape_ = x.shape();
    return nn::global_avg_pool_forward(x);
  }
  Tensor backward(const Tensor& grad, const Executor&) override {
    require_cache(!input_shape_.empty(), name_);
    return nn::global_avg_pool_backward(grad, input_shape_);
  }

 private:
  std::string name_;
  Shape input_shape_;
};

class LinearModule : public Module {
 public:
  LinearModule(const LayerSpec& spec, Rng& rng) : name_(spec.name) {
    auto p = nn::LinearParams::initialized(spec.in_channels, spec.out_channels, rng);
    weight_ = {spec.name + ".weight", std::move(p.weights), {}, {}};
    bias_ = {spec.name + ".bias", std::move(p.bias), {}, {}};
  }
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor& ex) override {
    nn::LinearParams p;
    Lend lend(p, weight_, &bias_);
    if (mode == nn::Mode::train) input_ = x;
    return nn::fully_connected_forward(x, p, ex);
  }
  Tensor backward(const Tensor& grad, const Executor& ex) override {
    require_cache(!input_.empty(), name_);
    nn::LinearGrads g;
    {
      nn::LinearParams p;
      Lend lend(p, weight_, &bias_);
      g = nn::fully_connected_backward(input_, p, grad, ex);
    }
    weight_.accumulate(g.weights);
    bias_.accumulate(g.bias);
    return std::move(g.input);
  }
  void collect(std::vector<nn::Parameter*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  std::string name_;
  nn::Parameter weight_, bias_;
  Tensor input_;
};

class SoftmaxModule : public Module {
 public:
  explicit SoftmaxModule(std::string name) : name_(std::move(name)) {}
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor&) override {
    Tensor y = nn::softmax(x);
    if (mode == nn::Mode::train) probs_ = y;
    return y;
  }
  Tensor backward(const Tensor& grad, const Executor&) override {
    require_cache(!probs_.empty(), name_);
    return nn::softmax_backward(probs_, grad);
  }

 private:
  std::string name_;
  Tensor probs_;
};

class ResidualModule : public Module {
 public:
  ResidualModule(const LayerSpec& spec, Rng& rng)
      : name_(spec.name), body_(spec.body, rng), shortcut_(spec.shortcut, rng) {}
  Tensor forward(const Tensor& x, nn::Mode mode, const Executor& ex) override {
    Tensor main = body_.forward(x, mode, ex);
    Tensor side = shortcut_.empty() ? x : shortcut_.forward(x, mode, ex);
    Tensor sum = add(main, side);
    if (mode == nn::Mode::train) sum_ = sum;
    return nn::relu_forward(sum);
  }
  Tensor backward(const Tensor& grad, const Executor& ex) override {
    require_cache(!sum_.empty(), name_);
    Tensor g = nn::relu_backward(sum_, grad);
    Tensor gx = body_.backward(g, ex);
    Tensor gs = shortcut_.empty() ? g : shortcut_.backward(g, ex);
    return add(gx, gs);
  }
  void collect(std::vector<nn::Parameter*>& out) override {
    body_.collect(out);
    shortcut_.collect(out);
  }
  void collect_buffers(std::vector<std::pair<std::string, Tensor*>>& out) override {
    body_.collect_buffers(out);
    shortcut_.collect_buffers(out);
  }

 private:
  std::string name_;
  Sequence body_;
  Sequence shortcut_;
  Tensor sum_;
};

std::unique_ptr<Module> make_module(const LayerSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case LayerKind::conv3d: return std::make_unique<Conv3dModule>(spec, rng);
    case LayerKind::conv2p1d: return std::make_unique<Sequence>(spec.body, rng);
    case LayerKind::maxpool3d: return std::make_unique<MaxPoolModule>(spec);
    case LayerKind::batchnorm: return std::make_unique<BatchNormModule>(spec);
    case LayerKind::relu: return std::make_unique<ReluModule>(spec.name);
    case LayerKind::fc: return std::make_unique<LinearModule>(spec, rng);
    case LayerKind::softmax: return std::make_unique<SoftmaxModule>(spec.name);
    case LayerKind::residual_block: return std::make_unique<ResidualModule>(spec, rng);
    case LayerKind::global_avg_pool: return std::make_unique<GlobalPoolModule>(spec.name);
  }
  fail(ErrorCode::invalid_config, "unknown layer kind for " + spec.name);
}

}  // namespace

Network::Network(NetSpec spec, Rng& rng) : spec_(std::move(spec)) {
  output_shape(spec_);  // validates the whole chain
  for (const auto& l : spec_.layers) layers_.push_back(make_module(l, rng));
}

Network::~Network() = default;
Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;

Tensor Network::run(const Tensor& input, nn::Mode mode, std::size_t stop) {
  Shape expected = spec_.input.sample_shape();
  expected.insert(expected.begin(), input.rank() ? input.dim(0) : 0);
  require(input.shape() == expected, ErrorCode::shape_mismatch,
          spec_.name + " expects input N x " + shape_to_string(spec_.input.sample_shape()) +
              ", got " + shape_to_string(input.shape()));
  Tensor x = input;
  for (std::size_t i = 0; i < stop; ++i) x = layers_[i]->forward(x, mode, executor());
  if (mode == nn::Mode::train) last_stop_ = stop;
  return x;
}

Tensor Network::forward(const Tensor& input, nn::Mode mode) {
  return run(input, mode, layers_.size());
}

Tensor Network::logits(const Tensor& input, nn::Mode mode) {
  std::size_t stop = layers_.size();
  if (stop > 0 && spec_.layers.back().kind == LayerKind::softmax) --stop;
  return run(input, mode, stop);
}

Tensor Network::forward_to(const Tensor& input, std::string_view layer, nn::Mode mode) {
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    if (spec_.layers[i].name == layer) return run(input, mode, i + 1);
  }
  fail(ErrorCode::invalid_config, spec_.name + " has no top-level layer " + std::string(layer));
}

Tensor Network::backward(const Tensor& grad_out) {
  require(last_stop_ > 0, ErrorCode::invalid_config,
          "backward requires a preceding train-mode forward pass");
  Tensor g = grad_out;
  for (std::size_t i = last_stop_; i-- > 0;) g = layers_[i]->backward(g, executor());
  return g;
}

std::vector<nn::Parameter*> Network::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& m : layers_) m->collect(out);
  return out;
}

void Network::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

std::vector<NamedTensor> Network::state() const {
  std::vector<NamedTensor> out;
  std::vector<nn::Parameter*> params;
  std::vector<std::pair<std::string, Tensor*>> buffers;
  for (auto& m : layers_) {
    m->collect(params);
    m->collect_buffers(buffers);
  }
  for (auto* p : params) out.push_back({p->name, p->value});
  for (auto& [name, t] : buffers) out.push_back({name, *t});
  return out;
}

void Network::load_state(const std::vector<NamedTensor>& entries) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : entries) {
    require(by_name.emplace(e.name, &e.tensor).second, ErrorCode::format,
            "duplicate checkpoint entry " + e.name);
  }
  std::vector<std::pair<std::string, Tensor*>> targets;
  std::vector<nn::Parameter*> params;
  for (auto& m : layers_) {
    m->collect(params);
    m->collect_buffers(targets);
  }
  for (auto* p : params) targets.emplace_back(p->name, &p->value);
  require(targets.size() == entries.size(), ErrorCode::format,
          "checkpoint has " + std::to_string(entries.size()) + " entries, network expects " +
              std::to_string(targets.size()));
  for (auto& [name, t] : targets) {
    auto it = by_name.find(name);
    require(it != by_name.end(), ErrorCode::format, "checkpoint is missing " + name);
    require(it->second->shape() == t->shape(), ErrorCode::format,
            "checkpoint entry " + name + " has shape " + shape_to_string(it->second->shape()) +
                ", expected " + shape_to_string(t->shape()));
  }
  for (auto& [name, t] : targets) *t = *by_name.at(name);
  for (auto* p : params) {
    p->grad = Tensor();
    p->velocity = Tensor();
  }
}

}  // namespace stconv::net
