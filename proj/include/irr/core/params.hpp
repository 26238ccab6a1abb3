#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "irr/core/autodiff.hpp"
#include "irr/core/random.hpp"

namespace irr::core {

/// Named weights of one network block.
///
/// Each instance carries a process-unique id, so a block that is applied many
/// times is observably the same object everywhere it is used.
class ParameterSet {
 public:
  explicit ParameterSet(std::string name);

  const std::string& name() const { return name_; }
  std::uint64_t id() const { return id_; }

  void add(const std::string& key, Tensor init);
  bool contains(std::string_view key) const;
  std::size_t index_of(std::string_view key) const;

  std::size_t size() const { return tensors_.size(); }
  const std::string& key(std::size_t i) const { return keys_[i]; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  Tensor& tensor(std::string_view key) { return tensors_[index_of(key)]; }
  const Tensor& tensor(std::string_view key) const { return tensors_[index_of(key)]; }

  /// Number of scalar parameters.
  std::size_t parameter_count() const;

 private:
  std::string name_;
  std::uint64_t id_;
  std::vector<std::string> keys_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Owns every ParameterSet of a model, keyed by block name. A block is
/// registered exactly once no matter how often it is applied.
class ParameterRegistry {
 public:
  std::shared_ptr<ParameterSet> create(const std::string& name);
  std::shared_ptr<ParameterSet> find(std::string_view name) const;

  const std::vector<std::shared_ptr<ParameterSet>>& sets() const { return sets_; }
  std::size_t parameter_count() const;
  /// Parameter count per block name, sorted by name.
  std::map<std::string, std::size_t> breakdown() const;

 private:
  std::vector<std::shared_ptr<ParameterSet>> sets_;
};

/// Per-block, per-tensor gradients keyed by block name.
using Gradients = std::map<std::string, std::vector<Tensor>>;

/// Binds parameter tensors to graph leaves for one forward pass and records
/// which blocks were applied, in order.
class ParamBinding {
 public:
  struct Use {
    std::string role;
    const ParameterSet* set;
  };

  explicit ParamBinding(bool track_gradients = true) : track_(track_gradients) {}

  const Var& get(const ParameterSet& set, std::size_t index);
  const Var& get(const ParameterSet& set, std::string_view key) {
    return get(set, set.index_of(key));
  }

  void note_use(std::string role, const ParameterSet& set) {
    uses_.push_back({std::move(role), &set});
  }
  const std::vector<Use>& uses() const { return uses_; }

  /// Gradients of every bound block after backward(); unreached tensors are zero.
  Gradients gradients() const;

 private:
  bool track_;
  std::unordered_map<const ParameterSet*, std::vector<Var>> vars_;
  std::vector<Use> uses_;
};

// Convolution layers stored in a ParameterSet as "<prefix>.weight" / "<prefix>.bias".

/// (k*k*in + 1) * out.
constexpr std::size_t conv_parameter_count(int in, int out, int kernel) {
  return (static_cast<std::size_t>(kernel) * kernel * in + 1) * static_cast<std::size_t>(out);
}

/// He-uniform weights scaled by `gain`, zero bias.
void add_conv(ParameterSet& set, const std::string& prefix, int in, int out, int kernel, Rng& rng,
              double gain = 1.0);

/// Applies the stored convolution with "same" padding (kernel / 2).
Var apply_conv(ParamBinding& binding, const ParameterSet& set, const std::string& prefix,
               const Var& x, int stride = 1);

}  // namespace irr::core
