#include "sheetaudit/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include <json.hpp>

namespace sheetaudit {

std::string TaxonomyNode::slug() const {
    std::string out;
    for (char c : label) {
        if (c == ' ' || c == '_')
            out += '-';
        else
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

void TaxonomyTree::add(std::string id, std::string label, std::optional<std::string> parent,
                       std::string description) {
    if (parent)
        nodes_.at(*parent).children.push_back(id);
    else
        root_ = id;
    TaxonomyNode node{id, std::move(label), std::move(parent), {}, std::move(description)};
    nodes_.emplace(std::move(id), std::move(node));
}

TaxonomyTree TaxonomyTree::load_default() {
    TaxonomyTree t;
    t.add("spreadsheet-errors", "Spreadsheet Errors", std::nullopt, "All classified spreadsheet errors.");
    t.add("system", "System-Generated", "spreadsheet-errors",
          "Introduced by the spreadsheet software itself, e.g. implicit century inference for two-digit years.");
    t.add("user", "User-Generated", "spreadsheet-errors", "Committed by people building or using the model.");

    t.add("user.quant", "Quantitative", "user", "Produces wrong computed values.");
    t.add("user.quant.accidental", "Accidental", "user.quant", "Slips and lapses such as mistyping.");
    t.add("user.quant.accidental.developer", "Developer", "user.quant.accidental",
          "Slips by the model builder, mostly in the workings.");
    t.add("user.quant.accidental.developer.omission", "Omission", "user.quant.accidental.developer",
          "A needed input, link or relationship is missing from the workings.");
    t.add("user.quant.accidental.developer.alteration", "Alteration", "user.quant.accidental.developer",
          "An unintended change to an existing model introduces a defect.");
    t.add("user.quant.accidental.developer.duplication", "Duplication", "user.quant.accidental.developer",
          "The same quantity is defined more than once, e.g. a constant repeated across formulas.");
    t.add("user.quant.accidental.end-user", "End-User", "user.quant.accidental",
          "Slips by people who feed or read the model.");
    t.add("user.quant.accidental.end-user.data-inputter", "Data Inputter", "user.quant.accidental.end-user",
          "Enters the input data.");
    t.add("user.quant.accidental.end-user.data-inputter.omission", "Omission",
          "user.quant.accidental.end-user.data-inputter", "Required input left unentered.");
    t.add("user.quant.accidental.end-user.data-inputter.alteration", "Alteration",
          "user.quant.accidental.end-user.data-inputter",
          "Input added or overwritten so that it falls outside the formulas meant to use it.");
    t.add("user.quant.accidental.end-user.data-inputter.duplication", "Duplication",
          "user.quant.accidental.end-user.data-inputter", "Input entered twice or in the wrong place.");
    t.add("user.quant.accidental.end-user.interpreter", "Interpreter", "user.quant.accidental.end-user",
          "Extracts and presents results.");
    t.add("user.quant.accidental.end-user.interpreter.omission", "Omission",
          "user.quant.accidental.end-user.interpreter", "Output elements left out.");
    t.add("user.quant.accidental.end-user.interpreter.alteration", "Alteration",
          "user.quant.accidental.end-user.interpreter", "Output manipulated inconsistently, e.g. a partial sort.");
    t.add("user.quant.accidental.end-user.interpreter.duplication", "Duplication",
          "user.quant.accidental.end-user.interpreter", "Output elements repeated.");

    t.add("user.quant.reasoning", "Reasoning", "user.quant", "The wrong formula is entered on purpose.");
    t.add("user.quant.reasoning.domain", "Domain Knowledge", "user.quant.reasoning",
          "Insufficient understanding of the business problem being modelled.");
    t.add("user.quant.reasoning.domain.real-world", "Real-World Knowledge", "user.quant.reasoning.domain",
          "The wrong algorithm is chosen, e.g. a fixed 365-day year.");
    t.add("user.quant.reasoning.domain.math-representation", "Mathematical Representation",
          "user.quant.reasoning.domain", "The right algorithm is expressed as a wrong formula, e.g. precedence.");
    t.add("user.quant.reasoning.implementation", "Implementation", "user.quant.reasoning",
          "Insufficient command of the spreadsheet package.");
    t.add("user.quant.reasoning.implementation.syntax", "Syntax", "user.quant.reasoning.implementation",
          "The formula text is not accepted by the spreadsheet.");
    t.add("user.quant.reasoning.implementation.logic", "Logic", "user.quant.reasoning.implementation",
          "The formula is accepted but misuses a feature, e.g. relative copies or circular references.");

    t.add("user.qual", "Qualitative", "user", "Degrades model quality without immediately changing values.");
    t.add("user.qual.semantic", "Semantic", "user.qual", "Meaning of data is distorted or ambiguous.");
    t.add("user.qual.semantic.structural", "Structural", "user.qual.semantic",
          "Flawed layout or presentation, e.g. misleading rounding or redundant wrappers.");
    t.add("user.qual.semantic.temporal", "Temporal", "user.qual.semantic", "Reliance on out-of-date data.");
    t.add("user.qual.maintainability", "Maintainability", "user.qual",
          "Hard to update safely, e.g. hard-coded constants in formulas.");
    return t;
}

const TaxonomyTree& TaxonomyTree::default_tree() {
    static const TaxonomyTree tree = load_default();
    return tree;
}

const TaxonomyNode& TaxonomyTree::node(std::string_view id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw LookupError("unknown taxonomy node '" + std::string(id) + "'");
    return it->second;
}

bool TaxonomyTree::contains(std::string_view id) const { return nodes_.find(id) != nodes_.end(); }

bool TaxonomyTree::is_leaf(std::string_view id) const { return node(id).children.empty(); }

std::vector<std::string> TaxonomyTree::ids() const {
    std::vector<std::string> out;
    std::function<void(const std::string&)> walk = [&](const std::string& id) {
        out.push_back(id);
        for (const auto& c : node(id).children)
            walk(c);
    };
    walk(root_);
    return out;
}

std::vector<std::string> TaxonomyTree::leaves() const {
    std::vector<std::string> out;
    for (const auto& id : ids())
        if (node(id).children.empty())
            out.push_back(id);
    return out;
}

std::size_t TaxonomyTree::leaf_count() const { return leaves().size(); }

std::vector<std::string> TaxonomyTree::classify_path(std::string_view id) const {
    std::vector<std::string> path;
    const TaxonomyNode* n = &node(id);
    while (true) {
        path.push_back(n->id);
        if (!n->parent)
            break;
        n = &node(*n->parent);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::string> TaxonomyTree::path_labels(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto& p : classify_path(id))
        out.push_back(node(p).label);
    return out;
}

std::vector<std::string> TaxonomyTree::path_slugs(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto& p : classify_path(id))
        out.push_back(node(p).slug());
    return out;
}

std::string TaxonomyTree::resolve(std::string_view query) const {
    if (contains(query))
        return std::string(query);
    std::vector<std::string> hits;
    for (const auto& [id, n] : nodes_) {
        if (id.size() > query.size() && id.compare(id.size() - query.size(), query.size(), query) == 0 &&
            id[id.size() - query.size() - 1] == '.')
            hits.push_back(id);
    }
    // Slug paths such as "implementation.syntax" or "domain-knowledge.real-world-knowledge".
    if (hits.empty()) {
        for (const auto& [id, n] : nodes_) {
            auto slugs = path_slugs(id);
            std::string joined;
            for (auto it = slugs.rbegin(); it != slugs.rend(); ++it) {
                joined = joined.empty() ? *it : *it + "." + joined;
                if (joined == query) {
                    hits.push_back(id);
                    break;
                }
            }
        }
    }
    if (hits.size() == 1)
        return hits.front();
    if (hits.empty())
        throw LookupError("unknown taxonomy node '" + std::string(query) + "'");
    throw LookupError("ambiguous taxonomy node '" + std::string(query) + "'");
}

TaxonomyTree::Inserted TaxonomyTree::insert_category(std::string_view parent_id, std::string_view label,
                                                     std::string_view description) const {
    const TaxonomyNode& parent = node(parent_id);
    if (label.empty())
        throw TaxonomyError("category label must not be empty");
    TaxonomyNode probe{"", std::string(label), std::nullopt, {}, ""};
    for (const auto& c : parent.children) {
        const TaxonomyNode& sibling = node(c);
        if (sibling.slug() == probe.slug())
            throw TaxonomyError("'" + std::string(label) + "' already exists under '" + parent.id + "'");
    }
    std::string id = parent.id == root_ ? probe.slug() : parent.id + "." + probe.slug();
    if (contains(id))
        throw TaxonomyError("taxonomy id '" + id + "' already in use");
    Inserted result{*this, id};
    result.tree.add(id, std::string(label), parent.id, std::string(description));
    return result;
}

std::string TaxonomyTree::to_text() const {
    std::string out;
    std::function<void(const std::string&, int)> walk = [&](const std::string& id, int depth) {
        const TaxonomyNode& n = node(id);
        out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + n.label + " [" + n.id + "]\n";
        for (const auto& c : n.children)
            walk(c, depth + 1);
    };
    walk(root_, 0);
    return out;
}

std::string TaxonomyTree::to_json() const {
    using nlohmann::ordered_json;
    std::function<ordered_json(const std::string&)> walk = [&](const std::string& id) {
        const TaxonomyNode& n = node(id);
        ordered_json j;
        j["id"] = n.id;
        j["label"] = n.label;
        j["children"] = ordered_json::array();
        for (const auto& c : n.children)
            j["children"].push_back(walk(c));
        return j;
    };
    return walk(root_).dump(2) + "\n";
}

}  // namespace sheetaudit
