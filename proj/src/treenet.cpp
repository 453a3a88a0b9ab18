#include "coreshape/treenet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "coreshape/core_shape.hpp"
#include "coreshape/errors.hpp"
#include "coreshape/packing.hpp"
#include "coreshape/spectra.hpp"

namespace coreshape {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

const TreeNode& TreeTopology::node(int id) const {
    if (id < 0 || id >= static_cast<int>(index_.size()) ||
        index_[static_cast<std::size_t>(id)] < 0)
        throw std::invalid_argument("tree: unknown node id");
    return nodes_[static_cast<std::size_t>(index_[static_cast<std::size_t>(id)])];
}

TreeTopology TreeTopology::from_json(const nlohmann::json& j) {
    TreeTopology t;
    try {
        if (!j.is_object() || !j.contains("nodes") || !j.at("nodes").is_array() ||
            j.at("nodes").empty())
            throw format_error("topology JSON needs a non-empty nodes array");

        int max_id = -1;
        for (const auto& nj : j.at("nodes")) {
            TreeNode node;
            node.id = nj.at("id").get<int>();
            if (node.id < 0) throw format_error("topology: node ids must be >= 0");
            max_id = std::max(max_id, node.id);
            const bool has_children = nj.contains("children");
            const bool has_mode = nj.contains("mode");
            if (has_children == has_mode)
                throw format_error("topology: each node is either internal "
                                   "(children) or a leaf (mode), not both");
            if (has_children) {
                node.children = nj.at("children").get<std::vector<int>>();
                if (node.children.empty())
                    throw format_error("topology: internal nodes need children");
            } else {
                node.mode = nj.at("mode").get<int>();
                if (node.mode < 1) throw format_error("topology: modes are 1-based");
            }
            t.nodes_.push_back(std::move(node));
        }

        t.index_.assign(static_cast<std::size_t>(max_id) + 1, -1);
        for (std::size_t k = 0; k < t.nodes_.size(); ++k) {
            const int id = t.nodes_[k].id;
            if (t.index_[static_cast<std::size_t>(id)] != -1)
                throw format_error("topology: duplicate node id");
            t.index_[static_cast<std::size_t>(id)] = static_cast<int>(k);
        }

        std::vector<bool> is_child(t.index_.size(), false);
        for (const auto& node : t.nodes_)
            for (int cid : node.children) {
                if (cid < 0 || cid >= static_cast<int>(t.index_.size()) ||
                    t.index_[static_cast<std::size_t>(cid)] < 0)
                    throw format_error("topology: child id refers to no node");
                if (is_child[static_cast<std::size_t>(cid)])
                    throw format_error("topology: node has two parents");
                is_child[static_cast<std::size_t>(cid)] = true;
            }
        t.root_ = -1;
        for (const auto& node : t.nodes_)
            if (!is_child[static_cast<std::size_t>(node.id)]) {
                if (t.root_ != -1) throw format_error("topology: multiple roots");
                t.root_ = node.id;
            }
        if (t.root_ == -1) throw format_error("topology: no root (cycle)");

        // pre-order walk: fixes the edge order, computes S_v bottom-up,
        // checks reachability and the subset partition conditions
        std::set<int> seen_modes;
        std::vector<int> visited;
        auto walk = [&](auto&& self, int id) -> void {
            visited.push_back(id);
            auto& node = t.nodes_[static_cast<std::size_t>(
                t.index_[static_cast<std::size_t>(id)])];
            if (id != t.root_) t.edge_order_.push_back(id);
            if (node.children.empty()) {
                if (!seen_modes.insert(node.mode).second)
                    throw format_error("topology: duplicate leaf mode");
                node.subset = {node.mode};
                return;
            }
            std::set<int> merged;
            for (int cid : node.children) {
                self(self, cid);
                const auto& child = t.node(cid);
                for (int m : child.subset)
                    if (!merged.insert(m).second)
                        throw format_error("topology: child subsets overlap");
            }
            node.subset.assign(merged.begin(), merged.end());
        };
        walk(walk, t.root_);
        if (visited.size() != t.nodes_.size())
            throw format_error("topology: unreachable nodes");

        t.num_modes_ = static_cast<int>(seen_modes.size());
        // leaves must be exactly the singletons {1..N}
        for (int m = 1; m <= t.num_modes_; ++m)
            if (!seen_modes.contains(m))
                throw format_error("topology: leaf modes must be exactly 1..N");
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("topology JSON: ") + e.what());
    }
    return t;
}

nlohmann::json TreeTopology::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& node : nodes_) {
        nlohmann::json nj{{"id", node.id}};
        if (node.children.empty())
            nj["mode"] = node.mode;
        else
            nj["children"] = node.children;
        arr.push_back(std::move(nj));
    }
    return nlohmann::json{{"nodes", arr}};
}

TreeTopology TreeTopology::depth_one(int num_modes) {
    if (num_modes < 1)
        throw std::invalid_argument("depth_one: need at least one mode");
    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json root{{"id", 0}};
    std::vector<int> children;
    for (int n = 1; n <= num_modes; ++n) children.push_back(n);
    root["children"] = children;
    nodes.push_back(root);
    for (int n = 1; n <= num_modes; ++n)
        nodes.push_back(nlohmann::json{{"id", n}, {"mode", n}});
    return from_json(nlohmann::json{{"nodes", nodes}});
}

void TreeTopology::bind_dims(const std::vector<std::int64_t>& dims) {
    if (static_cast<int>(dims.size()) != num_modes_)
        throw std::invalid_argument("bind_dims: one dimension per mode required");
    for (std::int64_t d : dims)
        if (d < 1) throw std::invalid_argument("bind_dims: dims must be >= 1");
    for (auto& node : nodes_)
        if (node.children.empty())
            node.dim = dims[static_cast<std::size_t>(node.mode - 1)];
}

bool TreeTopology::dims_bound() const {
    for (const auto& node : nodes_)
        if (node.children.empty() && node.dim < 1) return false;
    return true;
}

std::int64_t TreeTopology::rows_of(int id) const {
    if (!dims_bound()) throw std::invalid_argument("tree: dims not bound");
    std::int64_t p = 1;
    const auto& subset = node(id).subset;
    for (const auto& n : nodes_)
        if (n.children.empty() &&
            std::binary_search(subset.begin(), subset.end(), n.mode))
            p = sat_mul(p, n.dim);
    return p;
}

std::int64_t TreeTopology::cols_of(int id) const {
    if (!dims_bound()) throw std::invalid_argument("tree: dims not bound");
    std::int64_t q = 1;
    const auto& subset = node(id).subset;
    for (const auto& n : nodes_)
        if (n.children.empty() &&
            !std::binary_search(subset.begin(), subset.end(), n.mode))
            q = sat_mul(q, n.dim);
    return q;
}

std::int64_t tree_cost(const TreeTopology& topo,
                       const std::vector<std::int64_t>& ranks) {
    const auto& edges = topo.edge_nodes();
    if (ranks.size() != edges.size())
        throw std::invalid_argument("tree_cost: one rank per edge required");
    for (std::int64_t r : ranks)
        if (r < 1) throw std::invalid_argument("tree_cost: ranks must be >= 1");
    if (!topo.dims_bound())
        throw std::invalid_argument("tree_cost: dims not bound");

    std::size_t max_id = 0;
    for (const auto& node : topo.nodes())
        max_id = std::max(max_id, static_cast<std::size_t>(node.id));
    std::vector<std::int64_t> rank_of(max_id + 1, 1);
    for (std::size_t k = 0; k < edges.size(); ++k)
        rank_of[static_cast<std::size_t>(edges[k])] = ranks[k];
    auto edge_rank = [&](int id) { return rank_of[static_cast<std::size_t>(id)]; };

    std::int64_t total = 0;
    for (const auto& node : topo.nodes()) {
        if (node.children.empty()) {
            total = sat_add(total, sat_mul(node.dim, edge_rank(node.id)));
        } else {
            // node tensor size: product over all incident edges
            std::int64_t prod = 1;
            for (int cid : node.children) prod = sat_mul(prod, edge_rank(cid));
            if (node.id != topo.root()) prod = sat_mul(prod, edge_rank(node.id));
            total = sat_add(total, prod);
        }
    }
    return total;
}

TreePackingInstance TreePackingInstance::create(
    TreeTopology topology, std::vector<std::vector<double>> values,
    std::int64_t budget) {
    if (!topology.dims_bound())
        throw std::invalid_argument("tree instance: dims not bound");
    if (budget < 1)
        throw std::invalid_argument("tree instance: budget must be >= 1");

    TreePackingInstance inst;
    inst.topology = std::move(topology);
    // taken after the move: the parameter's vectors are gone now
    const auto& edges = inst.topology.edge_nodes();
    if (values.size() != edges.size())
        throw std::invalid_argument("tree instance: one values list per edge required");
    inst.budget = budget;
    inst.values = std::move(values);
    inst.prefix.resize(inst.values.size());
    for (std::size_t k = 0; k < inst.values.size(); ++k) {
        auto& v = inst.values[k];
        if (v.empty())
            throw std::invalid_argument("tree instance: empty values list");
        const std::int64_t cap =
            std::min(inst.topology.rows_of(edges[k]), inst.topology.cols_of(edges[k]));
        if (static_cast<std::int64_t>(v.size()) > cap)
            throw std::invalid_argument(
                "tree instance: values list longer than the matricization rank bound");
        double scale = 0.0;
        for (double a : v) {
            if (!std::isfinite(a))
                throw std::invalid_argument("tree instance: values must be finite");
            scale = std::max(scale, std::abs(a));
        }
        const double tol = 1e-12 * scale;
        double running = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < -tol)
                throw std::invalid_argument("tree instance: values must be nonnegative");
            if (i > 0 && v[i] > v[i - 1] + tol)
                throw std::invalid_argument("tree instance: values must be non-increasing");
            running = std::min(running, std::max(v[i], 0.0));
            v[i] = running;
        }
        auto& p = inst.prefix[k];
        p.resize(v.size() + 1);
        p[0] = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) p[i + 1] = p[i] + v[i];
    }
    return inst;
}

std::int64_t TreePackingInstance::rank_cap(std::size_t edge_index) const {
    const int id = topology.edge_nodes().at(edge_index);
    return std::min(topology.rows_of(id), topology.cols_of(id));
}

double tree_objective(const TreePackingInstance& inst,
                      const std::vector<std::int64_t>& ranks) {
    const auto& edges = inst.topology.edge_nodes();
    if (ranks.size() != edges.size())
        throw std::invalid_argument("tree_objective: one rank per edge required");
    double f = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (ranks[k] < 1 || ranks[k] > inst.rank_cap(k))
            throw std::invalid_argument("tree_objective: rank out of range");
        // zero extension: ranks beyond the stored list add nothing
        const auto at = std::min<std::int64_t>(
            ranks[k], static_cast<std::int64_t>(inst.values[k].size()));
        f += inst.prefix[k][static_cast<std::size_t>(at)];
    }
    return f;
}

TreeSolution solve_tree_grid(const TreePackingInstance& inst, double eps) {
    const auto t0 = Clock::now();
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("solve_tree_grid: need 0 < eps <= 1");

    const std::size_t num_edges = inst.topology.edge_nodes().size();
    std::vector<std::int64_t> ones(num_edges, 1);
    if (tree_cost(inst.topology, ones) > inst.budget)
        throw infeasible_error("tree budget below the all-ones cost " +
                               std::to_string(tree_cost(inst.topology, ones)));

    std::vector<std::vector<std::int64_t>> grids(num_edges);
    double tuples = 1.0;
    for (std::size_t k = 0; k < num_edges; ++k) {
        grids[k] = geometric_grid(inst.rank_cap(k), eps);
        tuples *= static_cast<double>(grids[k].size());
    }
    if (tuples > 1e8)
        throw std::invalid_argument("tree grid too large for enumeration");

    std::vector<std::size_t> at(num_edges, 0);
    std::vector<std::int64_t> ranks(num_edges, 1);
    TreeSolution best;
    double best_obj = -1.0;
    while (true) {
        for (std::size_t k = 0; k < num_edges; ++k) ranks[k] = grids[k][at[k]];
        const std::int64_t c = tree_cost(inst.topology, ranks);
        if (c <= inst.budget) {
            const double f = tree_objective(inst, ranks);
            if (f > best_obj) {
                best_obj = f;
                best.ranks = ranks;
                best.objective = f;
                best.cost = c;
            }
        }
        std::size_t k = num_edges;
        while (k > 0 && at[k - 1] + 1 == grids[k - 1].size()) at[--k] = 0;
        if (k == 0) break;
        ++at[k - 1];
    }
    best.elapsed_ms = ms_since(t0);
    return best;
}

TreePackingInstance tree_instance_from_tensor(const DenseTensor& x,
                                              TreeTopology topology,
                                              std::int64_t budget) {
    if (topology.num_modes() != x.order())
        throw std::invalid_argument(
            "tree_instance_from_tensor: topology mode count must match the tensor");
    topology.bind_dims(x.shape());

    const auto edges = topology.edge_nodes();
    std::vector<std::int64_t> ones(edges.size(), 1);
    const std::int64_t floor_cost = tree_cost(topology, ones);
    if (budget < floor_cost)
        throw infeasible_error("tree budget " + std::to_string(budget) +
                               " is below the all-ones cost " +
                               std::to_string(floor_cost));

    std::vector<std::vector<double>> values;
    values.reserve(edges.size());
    for (int id : edges)
        values.push_back(subset_sq_singular_values(x, topology.node(id).subset));
    return TreePackingInstance::create(std::move(topology), std::move(values), budget);
}

nlohmann::json tree_solution_to_json(const TreeTopology& topo, const TreeSolution& s) {
    nlohmann::json ranks = nlohmann::json::object();
    const auto& edges = topo.edge_nodes();
    for (std::size_t k = 0; k < edges.size(); ++k)
        ranks[std::to_string(edges[k])] = s.ranks[k];
    return nlohmann::json{{"ranks", ranks},
                          {"objective", s.objective},
                          {"cost", s.cost},
                          {"elapsed_ms", s.elapsed_ms}};
}

} // namespace coreshape
