#include "dssn/autograd.hpp"

#include <unordered_set>

namespace dssn {

template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad)
{
    if (!value.all_finite()) throw NumericError("leaf: input holds NaN or Inf");
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    node->op = "leaf";
    return Var<T>(std::move(node));
}

template <typename T>
Var<T> make_result(std::string op, Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward)
{
    if (!value.all_finite()) throw NumericError(op + ": produced a non-finite value");
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->op = std::move(op);
    for (const auto& p : parents)
        if (p.requires_grad()) node->requires_grad = true;
    if (node->requires_grad) {
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(p.ptr());
        node->backward = std::move(backward);
    }
    return Var<T>(std::move(node));
}

template <typename T>
std::vector<Node<T>*> topological_order(const Var<T>& output)
{
    std::vector<Node<T>*> order;
    if (!output.defined()) return order;
    std::unordered_set<Node<T>*> seen;
    // Iterative post-order DFS; parent order fixes the visiting order.
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    stack.emplace_back(output.node(), 0);
    seen.insert(output.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p && p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

template <typename T>
void backward(const Var<T>& output)
{
    if (!output.defined()) throw Error("backward: output has no graph node");
    if (output.value().size() != 1)
        throw ShapeError("backward: output must be scalar, got " + output.shape().str());
    if (!output.requires_grad()) return;
    auto order = topological_order(output);
    output.node()->grad_slot()[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
}

template Var<float> leaf(Tensor<float>, bool);
template Var<double> leaf(Tensor<double>, bool);
template Var<float> make_result(std::string, Tensor<float>, std::vector<Var<float>>, std::function<void(Node<float>&)>);
template Var<double> make_result(std::string, Tensor<double>, std::vector<Var<double>>,
                                 std::function<void(Node<double>&)>);
template std::vector<Node<float>*> topological_order(const Var<float>&);
template std::vector<Node<double>*> topological_order(const Var<double>&);
template void backward(const Var<float>&);
template void backward(const Var<double>&);

}  // namespace dssn
