#pragma once

#include <map>
#include <vector>

#include "sheetaudit/address.hpp"
#include "sheetaudit/workbook.hpp"

namespace sheetaudit {

/// Precedent -> dependent edges between cells. Ranges are expanded to one
/// edge per cell; addresses are sheet-qualified with absolute flags cleared.
class DepGraph {
public:
    DepGraph() = default;

    static DepGraph build(const Workbook& wb);

    /// Adds a node if absent; returns its index.
    std::size_t add_node(const CellAddress& addr);
    void add_edge(const CellAddress& precedent, const CellAddress& dependent);

    const std::vector<CellAddress>& nodes() const { return nodes_; }
    bool contains(const CellAddress& addr) const;
    std::size_t edge_count() const;

    /// Sorted, de-duplicated.
    const std::vector<CellAddress>& dependents(const CellAddress& addr) const;
    const std::vector<CellAddress>& precedents(const CellAddress& addr) const;

private:
    std::vector<CellAddress> nodes_;
    std::map<CellAddress, std::size_t> index_;
    std::vector<std::vector<CellAddress>> out_;
    std::vector<std::vector<CellAddress>> in_;
};

/// Resolves an empty sheet name against the host cell's sheet.
CellAddress resolve(const CellAddress& ref, const std::string& host_sheet);

/// Every strongly connected component with two or more cells and every
/// self-loop, each once. Simple cycles are listed in edge order starting at
/// their smallest cell; other components are listed sorted.
std::vector<std::vector<CellAddress>> find_cycles(const DepGraph& g);

struct TopoResult {
    std::vector<CellAddress> order;  // precedents first; cycle members excluded
    std::vector<std::vector<CellAddress>> cycles;
};

TopoResult topo_order(const DepGraph& g);

}  // namespace sheetaudit
