#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dssn/tensor.hpp"

namespace dssn {

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // empty until something flows into it
    bool requires_grad = false;
    std::string op;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward;

    Tensor<T>& grad_slot()
    {
        if (grad.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

// Handle to a node of a dynamically recorded graph. Copies share the node.
template <typename T>
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

    bool defined() const { return node_ != nullptr; }
    const Tensor<T>& value() const { return node_->value; }
    Tensor<T>& mutable_value() { return node_->value; }
    const Tensor<T>& grad() const { return node_->grad; }
    Tensor<T>& mutable_grad() { return node_->grad; }
    const Shape& shape() const { return node_->value.shape(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const std::string& op() const { return node_->op; }

    Node<T>* node() const { return node_.get(); }
    const std::shared_ptr<Node<T>>& ptr() const { return node_; }

private:
    std::shared_ptr<Node<T>> node_;
};

// Throws NumericError if `value` holds NaN/Inf.
template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = false);

template <typename T>
Var<T> constant(Tensor<T> value)
{
    return leaf(std::move(value), false);
}

// Builds an op node. Throws NumericError if `value` holds NaN/Inf. When no
// parent requires a gradient the node is recorded as a constant.
template <typename T>
Var<T> make_result(std::string op, Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backward);

// Reverse sweep from a scalar output. Gradients accumulate into every
// requires_grad node reachable from `output`.
template <typename T>
void backward(const Var<T>& output);

// Nodes reachable from `output`, parents before children.
template <typename T>
std::vector<Node<T>*> topological_order(const Var<T>& output);

}  // namespace dssn
