// Reverse-mode autodiff core: dense row-major tensors plus a tape-style
// graph. Ops (ops.hpp) record nodes on the innermost active Graph; backward
// walks the tape in reverse insertion order and accumulates gradients into
// the persistent grad buffers of requires-grad leaves.
#pragma once

#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "tfgan/common.hpp"

namespace tfgan {

template <typename S>
class Graph;

// Value-semantic tensor. Copies share the immutable data buffer and, for
// leaves, the grad buffer; ops always allocate fresh output buffers.
template <typename S>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<S>>(static_cast<size_t>(numel_of(t.shape_)), S(0));
    return t;
  }

  static Tensor full(Shape shape, S value) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.data_->begin(), t.data_->end(), value);
    return t;
  }

  static Tensor scalar(S value) { return full({}, value); }

  static Tensor from(Shape shape, std::vector<S> values) {
    check(numel_of(shape) == static_cast<int64_t>(values.size()),
          "Tensor::from: shape " + shape_str(shape) + " does not match " +
              std::to_string(values.size()) + " values");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<S>>(std::move(values));
    return t;
  }

  // Trainable leaf: zero-filled grad buffer attached.
  static Tensor leaf(Shape shape) {
    Tensor t = zeros(std::move(shape));
    t.set_requires_grad(true);
    return t;
  }

  const Shape& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_.at(i); }
  size_t rank() const { return shape_.size(); }
  int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }
  bool defined() const { return data_ != nullptr; }

  std::span<const S> data() const { return {data_->data(), data_->size()}; }
  // In-place mutation is reserved for parameter updates and buffer fills;
  // never mutate a tensor that is recorded on a live graph.
  std::span<S> mutable_data() { return {data_->data(), data_->size()}; }

  S value() const {
    check(numel() == 1, "Tensor::value: tensor is not a scalar, shape " + shape_str(shape_));
    return (*data_)[0];
  }

  bool requires_grad() const { return grad_ != nullptr; }

  void set_requires_grad(bool on) {
    if (on && !grad_) {
      grad_ = std::make_shared<std::vector<S>>(data_->size(), S(0));
    } else if (!on) {
      grad_.reset();
    }
  }

  std::span<const S> grad() const {
    check(grad_ != nullptr, "Tensor::grad: tensor does not require grad");
    return {grad_->data(), grad_->size()};
  }

  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), S(0));
  }

  // Same data, no graph linkage, no grad.
  Tensor detach() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = data_;
    return t;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<S>>(*data_);
    return t;
  }

  int node() const { return node_; }
  const void* graph_tag() const { return graph_tag_; }

  // Used by ops when they record a result on the active graph.
  void bind_node(const Graph<S>* g, int node) {
    graph_tag_ = g;
    node_ = node;
  }

  const std::shared_ptr<std::vector<S>>& data_ptr() const { return data_; }
  const std::shared_ptr<std::vector<S>>& grad_ptr() const { return grad_; }

 private:
  Shape shape_;
  std::shared_ptr<std::vector<S>> data_;
  std::shared_ptr<std::vector<S>> grad_;  // non-null iff requires_grad
  const void* graph_tag_ = nullptr;       // graph the node id belongs to
  int node_ = -1;
};

// Append-only tape. Topological order equals insertion order; backward
// visits nodes in strictly decreasing insertion order. Confined to the
// thread that created it. Graphs nest: the innermost alive Graph records.
template <typename S>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const std::vector<S>&)>;

  Graph() : prev_(current_) { current_ = this; }
  ~Graph() { current_ = prev_; }
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  static Graph* current() { return current_; }

  int emit(std::vector<int> parents, int64_t out_numel, BackwardFn fn) {
    nodes_.push_back(NodeRec{std::move(parents), out_numel, std::move(fn), nullptr});
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Node id for a tensor used as an op input: its own node when it was
  // produced on this graph, a (deduplicated) leaf node when it is a
  // requires-grad leaf, and -1 for constants. Tensors recorded on a
  // different graph act as constants here; gradients cannot cross tapes.
  int input_node(const Tensor<S>& t) {
    if (t.node() >= 0 && t.graph_tag() == this) return t.node();
    if (t.requires_grad()) {
      const void* key = t.grad_ptr().get();
      auto it = leaf_ids_.find(key);
      if (it != leaf_ids_.end()) return it->second;
      nodes_.push_back(NodeRec{{}, t.numel(), nullptr, t.grad_ptr()});
      const int id = static_cast<int>(nodes_.size()) - 1;
      leaf_ids_.emplace(key, id);
      return id;
    }
    return -1;
  }

  // Gradient accumulation buffer for a node, zero-allocated on first touch.
  std::vector<S>& grad_buf(int node) {
    auto& g = grads_[static_cast<size_t>(node)];
    if (g.empty()) g.assign(static_cast<size_t>(nodes_[static_cast<size_t>(node)].numel), S(0));
    return g;
  }

  bool has_grad(int node) const { return !grads_[static_cast<size_t>(node)].empty(); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards. Leaf grads
  // accumulate across calls until the owning tensors are zeroed.
  void backward(const Tensor<S>& loss) {
    check(loss.numel() == 1, "backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
    check(loss.graph_tag() == this && loss.node() >= 0,
          "backward: loss is not recorded on this graph");
    grads_.assign(nodes_.size(), {});
    grad_buf(loss.node())[0] = S(1);
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      auto& g = grads_[static_cast<size_t>(i)];
      if (g.empty()) continue;
      NodeRec& n = nodes_[static_cast<size_t>(i)];
      if (n.leaf_grad) {
        auto& acc = *n.leaf_grad;
        for (size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
      } else if (n.backward) {
        n.backward(*this, g);
      }
      g.clear();  // upstream of node i is fully consumed
      g.shrink_to_fit();
    }
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct NodeRec {
    std::vector<int> parents;
    int64_t numel;
    BackwardFn backward;                        // null for leaves
    std::shared_ptr<std::vector<S>> leaf_grad;  // non-null for leaves
  };

  std::vector<NodeRec> nodes_;
  std::vector<std::vector<S>> grads_;
  std::unordered_map<const void*, int> leaf_ids_;
  Graph* prev_;
  static thread_local Graph* current_;
};

template <typename S>
thread_local Graph<S>* Graph<S>::current_ = nullptr;

}  // namespace tfgan
