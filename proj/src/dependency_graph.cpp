#include "sheetaudit/dependency_graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

namespace sheetaudit {

namespace {

const std::vector<CellAddress> kNoCells;

void insert_sorted(std::vector<CellAddress>& v, const CellAddress& a) {
    auto it = std::lower_bound(v.begin(), v.end(), a);
    if (it == v.end() || *it != a)
        v.insert(it, a);
}

}  // namespace

CellAddress resolve(const CellAddress& ref, const std::string& host_sheet) {
    CellAddress a = ref.location();
    if (a.sheet.empty())
        a.sheet = host_sheet;
    return a;
}

std::size_t DepGraph::add_node(const CellAddress& addr) {
    CellAddress key = addr.location();
    auto [it, inserted] = index_.try_emplace(key, nodes_.size());
    if (inserted) {
        nodes_.push_back(key);
        out_.emplace_back();
        in_.emplace_back();
    }
    return it->second;
}

void DepGraph::add_edge(const CellAddress& precedent, const CellAddress& dependent) {
    std::size_t p = add_node(precedent);
    std::size_t d = add_node(dependent);
    insert_sorted(out_[p], nodes_[d]);
    insert_sorted(in_[d], nodes_[p]);
}

bool DepGraph::contains(const CellAddress& addr) const { return index_.count(addr.location()) > 0; }

std::size_t DepGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& v : out_)
        n += v.size();
    return n;
}

const std::vector<CellAddress>& DepGraph::dependents(const CellAddress& addr) const {
    auto it = index_.find(addr.location());
    return it == index_.end() ? kNoCells : out_[it->second];
}

const std::vector<CellAddress>& DepGraph::precedents(const CellAddress& addr) const {
    auto it = index_.find(addr.location());
    return it == index_.end() ? kNoCells : in_[it->second];
}

DepGraph DepGraph::build(const Workbook& wb) {
    DepGraph g;
    for (const auto& sheet : wb.sheets()) {
        for (const auto& [pos, cell] : sheet.cells()) {
            if (cell.content.kind() != CellKind::Formula)
                continue;
            CellAddress host = sheet.address(pos);
            g.add_node(host);
            ExprPtr ast = cell.content.ast();
            if (!ast)
                continue;
            for (const auto& ref : extract_refs(*ast)) {
                CellAddress first = resolve(ref.first, sheet.name());
                if (!ref.is_range) {
                    g.add_edge(first, host);
                    continue;
                }
                CellAddress last = resolve(ref.last, sheet.name());
                for (const auto& a : expand_range(first, last))
                    g.add_edge(a, host);
            }
        }
    }
    return g;
}

std::vector<std::vector<CellAddress>> find_cycles(const DepGraph& g) {
    const auto& nodes = g.nodes();
    const std::size_t n = nodes.size();
    std::map<CellAddress, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        index[nodes[i]] = i;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& d : g.dependents(nodes[i]))
            adj[i].push_back(index.at(d));

    // Iterative Tarjan.
    constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> order(n, kUnvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    struct Frame {
        std::size_t v;
        std::size_t next;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (order[root] != kUnvisited)
            continue;
        std::vector<Frame> frames{{root, 0}};
        order[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.next < adj[f.v].size()) {
                std::size_t w = adj[f.v][f.next++];
                if (order[w] == kUnvisited) {
                    order[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], order[w]);
                }
                continue;
            }
            std::size_t v = f.v;
            frames.pop_back();
            if (!frames.empty())
                low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            if (low[v] == order[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                components.push_back(std::move(comp));
            }
        }
    }

    std::vector<std::vector<CellAddress>> cycles;
    for (const auto& comp : components) {
        if (comp.size() == 1) {
            std::size_t v = comp[0];
            if (std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end())
                cycles.push_back({nodes[v]});
            continue;
        }
        std::set<std::size_t> members(comp.begin(), comp.end());
        bool simple = true;
        std::map<std::size_t, std::size_t> succ;
        for (std::size_t v : comp) {
            std::size_t inside = 0;
            for (std::size_t w : adj[v]) {
                if (members.count(w)) {
                    ++inside;
                    succ[v] = w;
                }
            }
            simple = simple && inside == 1;
        }
        std::vector<CellAddress> cells;
        if (simple) {
            std::size_t start = *std::min_element(comp.begin(), comp.end(),
                                                  [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
            std::size_t v = start;
            do {
                cells.push_back(nodes[v]);
                v = succ[v];
            } while (v != start);
        } else {
            for (std::size_t v : comp)
                cells.push_back(nodes[v]);
            std::sort(cells.begin(), cells.end());
        }
        cycles.push_back(std::move(cells));
    }
    std::sort(cycles.begin(), cycles.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return cycles;
}

TopoResult topo_order(const DepGraph& g) {
    TopoResult result;
    result.cycles = find_cycles(g);
    std::set<CellAddress> excluded;
    for (const auto& c : result.cycles)
        excluded.insert(c.begin(), c.end());

    std::map<CellAddress, std::size_t> indegree;
    for (const auto& v : g.nodes()) {
        if (excluded.count(v))
            continue;
        std::size_t k = 0;
        for (const auto& p : g.precedents(v))
            if (!excluded.count(p))
                ++k;
        indegree[v] = k;
    }
    std::priority_queue<CellAddress, std::vector<CellAddress>, std::greater<>> ready;
    for (const auto& [v, k] : indegree)
        if (k == 0)
            ready.push(v);
    while (!ready.empty()) {
        CellAddress v = ready.top();
        ready.pop();
        result.order.push_back(v);
        for (const auto& d : g.dependents(v)) {
            auto it = indegree.find(d);
            if (it != indegree.end() && --it->second == 0)
                ready.push(d);
        }
    }
    return result;
}

}  // namespace sheetaudit
