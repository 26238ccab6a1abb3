#include "irr/core/params.hpp"

#include <atomic>
#include <cmath>

#include "irr/core/ops.hpp"

namespace irr::core {
namespace {
std::atomic<std::uint64_t> next_set_id{1};
}

ParameterSet::ParameterSet(std::string name) : name_(std::move(name)), id_(next_set_id++) {}

void ParameterSet::add(const std::string& key, Tensor init) {
  if (index_.count(key)) throw InvalidArgument("duplicate parameter key '" + key + "' in " + name_);
  if (!init.all_finite()) throw InvalidArgument("non-finite initial value for " + name_ + "." + key);
  index_.emplace(key, tensors_.size());
  keys_.push_back(key);
  tensors_.push_back(std::move(init));
}

bool ParameterSet::contains(std::string_view key) const {
  return index_.count(std::string(key)) != 0;
}

std::size_t ParameterSet::index_of(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) {
    throw InvalidArgument("parameter '" + std::string(key) + "' not found in block " + name_);
  }
  return it->second;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

std::shared_ptr<ParameterSet> ParameterRegistry::create(const std::string& name) {
  if (find(name)) throw InvalidArgument("block '" + name + "' already registered");
  sets_.push_back(std::make_shared<ParameterSet>(name));
  return sets_.back();
}

std::shared_ptr<ParameterSet> ParameterRegistry::find(std::string_view name) const {
  for (const auto& s : sets_)
    if (s->name() == name) return s;
  return nullptr;
}

std::size_t ParameterRegistry::parameter_count() const {
  std::size_t n = 0;
  for (const auto& s : sets_) n += s->parameter_count();
  return n;
}

std::map<std::string, std::size_t> ParameterRegistry::breakdown() const {
  std::map<std::string, std::size_t> out;
  for (const auto& s : sets_) out[s->name()] = s->parameter_count();
  return out;
}

const Var& ParamBinding::get(const ParameterSet& set, std::size_t index) {
  auto& vars = vars_[&set];
  if (vars.empty()) {
    vars.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) vars.push_back(Var::leaf(set.tensor(i), track_));
  }
  if (index >= vars.size()) throw InvalidArgument("parameter index out of range in " + set.name());
  return vars[index];
}

Gradients ParamBinding::gradients() const {
  Gradients out;
  for (const auto& [set, vars] : vars_) {
    auto& grads = out[set->name()];
    for (const Var& v : vars) grads.push_back(v.grad());
  }
  return out;
}

void add_conv(ParameterSet& set, const std::string& prefix, int in, int out, int kernel, Rng& rng,
              double gain) {
  if (in < 1 || out < 1 || kernel < 1) throw InvalidArgument("add_conv: invalid dimensions");
  Tensor w({out, in, kernel, kernel});
  const double bound = gain * std::sqrt(6.0 / (1.01 * in * kernel * kernel));
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  set.add(prefix + ".weight", std::move(w));
  set.add(prefix + ".bias", Tensor({out}, 0.0));
}

Var apply_conv(ParamBinding& binding, const ParameterSet& set, const std::string& prefix,
               const Var& x, int stride) {
  const Var& w = binding.get(set, prefix + ".weight");
  const Var& b = binding.get(set, prefix + ".bias");
  const int k = w.value().dim(2);
  return conv2d(x, w, b, stride, k / 2);
}

}  // namespace irr::core
