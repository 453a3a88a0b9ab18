#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coreshape/tensor.hpp"

namespace coreshape {

// Node of a rooted tree whose leaves are the tensor modes. Every non-root
// node owns the edge to its parent; a rank is assigned per edge.
struct TreeNode {
    int id = -1;
    std::vector<int> children; // ids; empty for leaves
    int mode = 0;              // 1-based mode for leaves, 0 for internal nodes
    std::int64_t dim = 0;      // leaf dimension, bound from a tensor shape
    std::vector<int> subset;   // S_v: modes below this node, ascending
};

class TreeTopology {
public:
    // Builds and validates from {"nodes":[{"id":0,"children":[1,2]},
    // {"id":1,"mode":1}, ...]}: unique ids, a single root, every node
    // reachable, leaves exactly the singleton modes 1..N, disjoint child
    // subsets. Throws format_error on violations.
    static TreeTopology from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // Convenience for the ubiquitous flat topology: root 0 with one leaf
    // per mode (ids 1..N, pre-order = mode order).
    static TreeTopology depth_one(int num_modes);

    int root() const { return root_; }
    int num_modes() const { return num_modes_; }
    const TreeNode& node(int id) const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    // Non-root node ids in pre-order (parent before child, children in
    // listed order); fixes the edge ordering used everywhere below.
    const std::vector<int>& edge_nodes() const { return edge_order_; }

    // Attaches leaf dimensions: dims[n-1] is the extent of mode n.
    void bind_dims(const std::vector<std::int64_t>& dims);
    bool dims_bound() const;

    // Row count P_v of the matricization grouping S_v, and its complement
    // side Q_v (saturating products). Requires bound dims.
    std::int64_t rows_of(int id) const;
    std::int64_t cols_of(int id) const;

private:
    std::vector<TreeNode> nodes_; // indexed by position, ids map via index_
    std::vector<int> index_;      // id -> position in nodes_
    std::vector<int> edge_order_;
    int root_ = -1;
    int num_modes_ = 0;
};

// Storage cost of a tree tensor network with the given per-edge ranks
// (aligned with topology.edge_nodes()): each leaf contributes I_v * R_v,
// each internal node (root included) the product of the ranks on all of
// its incident edges. Exact saturating integer arithmetic.
std::int64_t tree_cost(const TreeTopology& topo,
                       const std::vector<std::int64_t>& ranks);

// Instance of the tree packing problem. values[k] belongs to edge
// edge_nodes()[k]; lists are non-increasing and conceptually zero-extended,
// so ranks past a list's length add cost but no objective.
struct TreePackingInstance {
    TreeTopology topology;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> prefix;
    std::int64_t budget = 0;

    static TreePackingInstance create(TreeTopology topology,
                                      std::vector<std::vector<double>> values,
                                      std::int64_t budget);

    // min(P_v, Q_v): the matricization rank bound used as the rank cap.
    std::int64_t rank_cap(std::size_t edge_index) const;
};

double tree_objective(const TreePackingInstance& inst,
                      const std::vector<std::int64_t>& ranks);

struct TreeSolution {
    std::vector<std::int64_t> ranks; // aligned with edge_nodes()
    double objective = 0.0;
    std::int64_t cost = 0;
    double elapsed_ms = 0.0;
};

// Grid search over per-edge geometric grids {ceil((1+eps)^k)} cap the rank
// cap; keeps the best assignment with tree_cost <= budget (ties: first in
// lexicographic enumeration order). Objective >= f* / (1+eps). 0 < eps <= 1.
TreeSolution solve_tree_grid(const TreePackingInstance& inst, double eps);

// Spectra-backed instance: values for edge v are the squared singular
// values of the matricization grouping S_v.
TreePackingInstance tree_instance_from_tensor(const DenseTensor& x,
                                              TreeTopology topology,
                                              std::int64_t budget);

// {"ranks":{"<child-node-id>":R,...},"objective":x,"cost":n,"elapsed_ms":t}
nlohmann::json tree_solution_to_json(const TreeTopology& topo, const TreeSolution& s);

} // namespace coreshape
