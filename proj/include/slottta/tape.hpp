#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "slottta/tensor.hpp"

namespace slottta {

using Var = int;

// Define-by-run reverse-mode tape. One tape plus its tensors form an isolated
// computation context: a tape is rebuilt per forward pass and never shared
// across threads. Nodes are stored in execution order, which is a topological
// order by construction; backward walks it once in reverse.
template <typename T>
class Tape {
 public:
  using BackFn = std::function<void(Tape&, Var)>;

  struct Node {
    Tensor<T> value;
    std::vector<T> grad;  // allocated lazily during backward
    BackFn back;          // empty for leaves and constants
    bool requires_grad = false;
  };

  // Copies a parameter into this context.
  Var leaf(const Tensor<T>& t) {
    check_eval_guard(t);
    Node n;
    n.value.shape = t.shape;
    n.value.data = t.data;
    n.requires_grad = t.requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  Var constant(Tensor<T> t) {
    check_eval_guard(t);
    Node n;
    n.value = std::move(t);
    n.requires_grad = false;
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  Var make(Tensor<T> value, bool requires_grad, BackFn back) {
    if (check_finite_ && !value.all_finite())
      throw InputError("tape: operation produced a non-finite value");
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  const Tensor<T>& value(Var v) const { return nodes_[static_cast<size_t>(v)].value; }
  bool requires_grad(Var v) const { return nodes_[static_cast<size_t>(v)].requires_grad; }

  bool has_grad(Var v) const { return !nodes_[static_cast<size_t>(v)].grad.empty(); }

  const std::vector<T>& grad_ref(Var v) const { return nodes_[static_cast<size_t>(v)].grad; }

  std::vector<T>& grad_buf(Var v) {
    Node& n = nodes_[static_cast<size_t>(v)];
    if (n.grad.empty()) n.grad.assign(n.value.data.size(), T(0));
    return n.grad;
  }

  // Gradient as a shaped tensor (zeros when the node was never reached).
  Tensor<T> grad(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v)];
    Tensor<T> g = Tensor<T>::zeros(n.value.shape);
    if (!n.grad.empty()) g.data = n.grad;
    return g;
  }

  // Populates gradients of every requires_grad node reachable from `loss`.
  // Gradients accumulate additively across shared uses.
  void backward(Var loss) {
    if (loss < 0 || loss >= static_cast<Var>(nodes_.size()))
      throw ContractError("backward: loss was not produced on this tape");
    Node& ln = nodes_[static_cast<size_t>(loss)];
    if (ln.value.numel() != 1)
      throw ContractError("backward: loss must be scalar, got shape " + shape_str(ln.value.shape));
    if (!ln.requires_grad) return;  // constant objective, all gradients are zero
    grad_buf(loss)[0] = T(1);
    for (Var i = loss; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.grad.empty() || !n.back) continue;
      n.back(*this, i);
    }
  }

  size_t size() const { return nodes_.size(); }

  void set_check_finite(bool on) { check_finite_ = on; }
  bool check_finite() const { return check_finite_; }

  // When disabled, tensors tagged eval_only are rejected at entry; used to
  // keep ground-truth masks out of adaptation objectives.
  void set_allow_eval_only(bool allow) { allow_eval_only_ = allow; }
  bool allow_eval_only() const { return allow_eval_only_; }

 private:
  void check_eval_guard(const Tensor<T>& t) const {
    if (t.eval_only && !allow_eval_only_)
      throw ContractError("tape: eval-only tensor used in a guarded computation context");
  }

  std::vector<Node> nodes_;
  bool check_finite_ = false;
  bool allow_eval_only_ = true;
};

}  // namespace slottta
