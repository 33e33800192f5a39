#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "himae/tensor.hpp"

namespace himae {

enum class Mode { train, eval };

struct Node;
using Var = std::shared_ptr<Node>;

// One tape entry. Ops allocate a Node holding the forward value plus a
// closure that scatters this node's gradient into its parents. The graph
// is a DAG (child -> parent edges only), freed when the root goes out of
// scope; leaf parameters survive across steps.
struct Node {
    Tensor3 value;
    Tensor3 grad;  // allocated on first use, cleared by zero_grad
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backprop;
    const char* op = "leaf";

    Tensor3& grad_buffer() {
        if (grad.empty()) grad = Tensor3(value.batch, value.channels, value.length);
        return grad;
    }

    // Gradient contribution from upstream; zero tensor when untouched.
    Tensor3 grad_or_zero() const {
        if (!grad.empty()) return grad;
        return Tensor3(value.batch, value.channels, value.length);
    }

    void zero_grad() { grad.data.clear(); grad = Tensor3(); }
};

inline Var make_var(Tensor3 v, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = requires_grad;
    return n;
}

inline Var constant(Tensor3 v) { return make_var(std::move(v), false); }

namespace detail {

// Reverse topological order over the requires_grad subgraph.
inline std::vector<Node*> topo_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    struct Frame {
        Node* n;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    stack.push_back({root});
    visited.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            Node* p = f.n->parents[f.next++].get();
            if (p && p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p});
            }
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }
    return order;  // post-order: parents before children
}

}  // namespace detail

// Reverse-mode sweep from a scalar root. Each reachable node's backprop
// runs exactly once, after all of its consumers.
inline void backward(const Var& loss) {
    if (!loss) throw contract_error("backward: null root");
    if (!loss->value.is_scalar())
        throw contract_error("backward: root must be a scalar");
    if (!loss->requires_grad) return;  // nothing trainable on the path
    auto order = detail::topo_order(loss.get());
    loss->grad_buffer().data[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && !n->grad.empty()) n->backprop(*n);
    }
}

}  // namespace himae
