// Named parameter collections with deterministic iteration order, plus the
// shared fan-in uniform initializer.
#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tfgan/rng.hpp"
#include "tfgan/tensor.hpp"

namespace tfgan {

template <typename S>
class ModelParams {
 public:
  Tensor<S>& add(const std::string& name, Tensor<S> t) {
    check(index_.find(name) == index_.end(), "ModelParams: duplicate parameter '" + name + "'");
    t.set_requires_grad(true);
    index_.emplace(name, items_.size());
    items_.emplace_back(name, std::move(t));
    return items_.back().second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<S>& at(const std::string& name) {
    auto it = index_.find(name);
    check(it != index_.end(), "ModelParams: unknown parameter '" + name + "'");
    return items_[it->second].second;
  }

  const Tensor<S>& at(const std::string& name) const {
    auto it = index_.find(name);
    check(it != index_.end(), "ModelParams: unknown parameter '" + name + "'");
    return items_[it->second].second;
  }

  // Insertion order; serialization and the optimizer iterate through this.
  const std::vector<std::pair<std::string, Tensor<S>>>& items() const { return items_; }
  std::vector<std::pair<std::string, Tensor<S>>>& items() { return items_; }

  size_t size() const { return items_.size(); }

  int64_t parameter_count() const {
    int64_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
  }

  void zero_grads() {
    for (auto& [name, t] : items_) t.zero_grad();
  }

 private:
  std::vector<std::pair<std::string, Tensor<S>>> items_;
  std::unordered_map<std::string, size_t> index_;
};

// Uniform init in +-sqrt(1/fan_in).
template <typename S>
Tensor<S> uniform_fan_in(Rng& rng, Shape shape, int64_t fan_in) {
  check(fan_in >= 1, "uniform_fan_in: fan_in must be >= 1");
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  Tensor<S> t = Tensor<S>::zeros(std::move(shape));
  auto d = t.mutable_data();
  for (size_t i = 0; i < d.size(); ++i) d[i] = static_cast<S>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace tfgan
