#include "mutcausal/dag.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mutcausal/errors.hpp"

namespace mutcausal {

const char* to_string(TripleKind kind) {
    switch (kind) {
    case TripleKind::Chain: return "chain";
    case TripleKind::Fork: return "fork";
    case TripleKind::Collider: return "collider";
    }
    return "?";
}

std::string TraversalPath::to_string() const {
    std::string out = nodes.empty() ? std::string{} : nodes.front();
    for (std::size_t k = 0; k < steps.size(); ++k) {
        out += steps[k] == StepDirection::Forward ? " -> " : " <- ";
        out += nodes[k + 1];
    }
    return out;
}

CausalDag::CausalDag(std::vector<std::string> nodes,
                     const std::vector<std::pair<std::string, std::string>>& edges,
                     std::size_t max_nodes)
    : names_(std::move(nodes)) {
    std::sort(names_.begin(), names_.end());
    if (std::adjacent_find(names_.begin(), names_.end()) != names_.end()) {
        throw DagError(fmt::format("duplicate node name '{}'",
                                   *std::adjacent_find(names_.begin(), names_.end())));
    }
    if (names_.size() > max_nodes) {
        throw NodeLimit(fmt::format("graph has {} nodes; the limit is {}", names_.size(), max_nodes));
    }
    children_.resize(names_.size());
    parents_.resize(names_.size());
    for (const auto& [from, to] : edges) {
        if (!contains(from)) throw UnknownNode(fmt::format("edge {} -> {}: unknown node '{}'", from, to, from));
        if (!contains(to)) throw UnknownNode(fmt::format("edge {} -> {}: unknown node '{}'", from, to, to));
        if (from == to) throw SelfLoop(fmt::format("self-loop on '{}'", from));
        const auto f = index_of(from);
        const auto t = index_of(to);
        if (std::find(children_[f].begin(), children_[f].end(), t) != children_[f].end()) {
            throw DuplicateEdge(fmt::format("duplicate edge {} -> {}", from, to));
        }
        children_[f].push_back(t);
        parents_[t].push_back(f);
    }
    for (auto& c : children_) std::sort(c.begin(), c.end());
    for (auto& p : parents_) std::sort(p.begin(), p.end());

    // Kahn's algorithm: any node left unvisited lies on a directed cycle.
    std::vector<std::size_t> in_degree(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) in_degree[i] = parents_[i].size();
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (in_degree[i] == 0) ready.push_back(i);
    std::size_t visited = 0;
    while (!ready.empty()) {
        const auto i = ready.back();
        ready.pop_back();
        ++visited;
        for (auto c : children_[i])
            if (--in_degree[c] == 0) ready.push_back(c);
    }
    if (visited != names_.size()) {
        std::string on_cycle;
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (in_degree[i] > 0) on_cycle += (on_cycle.empty() ? "" : ", ") + names_[i];
        throw CycleError(fmt::format("edges form a directed cycle through {{{}}}", on_cycle));
    }
}

std::vector<std::pair<std::string, std::string>> CausalDag::edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < names_.size(); ++i)
        for (auto c : children_[i]) out.emplace_back(names_[i], names_[c]);
    return out;
}

bool CausalDag::contains(std::string_view name) const {
    return std::binary_search(names_.begin(), names_.end(), name);
}

std::size_t CausalDag::index_of(std::string_view name) const {
    const auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw UnknownNode(fmt::format("unknown node '{}'", name));
    return static_cast<std::size_t>(it - names_.begin());
}

bool CausalDag::has_edge(std::string_view from, std::string_view to) const {
    const auto& c = children_[index_of(from)];
    return std::binary_search(c.begin(), c.end(), index_of(to));
}

bool CausalDag::adjacent(std::string_view a, std::string_view b) const {
    return has_edge(a, b) || has_edge(b, a);
}

NodeSet CausalDag::parents(std::string_view name) const {
    NodeSet out;
    for (auto p : parents_[index_of(name)]) out.insert(names_[p]);
    return out;
}

NodeSet CausalDag::children(std::string_view name) const {
    NodeSet out;
    for (auto c : children_[index_of(name)]) out.insert(names_[c]);
    return out;
}

NodeSet CausalDag::descendants(std::string_view name) const {
    NodeSet out;
    std::vector<std::size_t> stack{index_of(name)};
    std::vector<bool> seen(names_.size(), false);
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        for (auto c : children_[i]) {
            if (seen[c]) continue;
            seen[c] = true;
            out.insert(names_[c]);
            stack.push_back(c);
        }
    }
    return out;
}

CausalDag build_dag(const std::vector<std::string>& nodes,
                    const std::vector<std::pair<std::string, std::string>>& edges) {
    return CausalDag(nodes, edges);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void require_distinct(std::string_view x, std::string_view y) {
    if (x == y) throw DagError(fmt::format("'{}' given as both endpoints", x), Error::Category::Usage);
}

} // namespace

CausalDag parse_edge_list(std::string_view text) {
    std::vector<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    auto declare = [&](std::string_view name) {
        if (std::find(nodes.begin(), nodes.end(), name) == nodes.end()) nodes.emplace_back(name);
    };
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto arrow = line.find("->");
        if (arrow == std::string_view::npos) {
            if (line.find_first_of(" \t") != std::string_view::npos)
                throw ParseError(fmt::format("line {}: expected 'A -> B' or a single node name", line_no));
            declare(line);
            continue;
        }
        const auto from = trim(line.substr(0, arrow));
        const auto to = trim(line.substr(arrow + 2));
        if (from.empty() || to.empty() || to.find("->") != std::string_view::npos)
            throw ParseError(fmt::format("line {}: expected 'A -> B'", line_no));
        declare(from);
        declare(to);
        edges.emplace_back(std::string(from), std::string(to));
    }
    return CausalDag(std::move(nodes), edges);
}

CausalDag load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open edge list '{}'", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_edge_list(buf.str());
}

std::vector<TraversalPath> enumerate_paths(const CausalDag& dag, std::string_view x, std::string_view y) {
    const auto source = dag.index_of(x);
    const auto target = dag.index_of(y);
    require_distinct(x, y);

    std::vector<TraversalPath> paths;
    std::vector<std::size_t> stack_nodes{source};
    std::vector<StepDirection> stack_steps;
    std::vector<bool> on_path(dag.size(), false);
    on_path[source] = true;

    auto extend = [&](auto&& self, std::size_t at) -> void {
        if (at == target) {
            TraversalPath p;
            for (auto i : stack_nodes) p.nodes.push_back(dag.nodes()[i]);
            p.steps = stack_steps;
            paths.push_back(std::move(p));
            return;
        }
        auto visit = [&](std::size_t next, StepDirection dir) {
            if (on_path[next]) return;
            on_path[next] = true;
            stack_nodes.push_back(next);
            stack_steps.push_back(dir);
            self(self, next);
            stack_steps.pop_back();
            stack_nodes.pop_back();
            on_path[next] = false;
        };
        for (auto c : dag.child_indices(at)) visit(c, StepDirection::Forward);
        for (auto p : dag.parent_indices(at)) visit(p, StepDirection::Backward);
    };
    extend(extend, source);

    std::sort(paths.begin(), paths.end(),
              [](const TraversalPath& a, const TraversalPath& b) {
                  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
                  return a.nodes < b.nodes;
              });
    return paths;
}

TripleKind classify_triple(const CausalDag& dag, std::string_view a, std::string_view b, std::string_view c) {
    if (!dag.adjacent(a, b) || !dag.adjacent(b, c)) {
        throw NotAdjacent(fmt::format("({}, {}, {}) is not a connected triple", a, b, c));
    }
    const bool into_b_from_a = dag.has_edge(a, b);
    const bool into_b_from_c = dag.has_edge(c, b);
    if (into_b_from_a && into_b_from_c) return TripleKind::Collider;
    if (!into_b_from_a && !into_b_from_c) return TripleKind::Fork;
    return TripleKind::Chain;
}

bool is_blocked(const CausalDag& dag, const TraversalPath& path, const NodeSet& conditioning) {
    for (const auto& z : conditioning) dag.index_of(z);
    if (path.nodes.size() < 2 || path.steps.size() + 1 != path.nodes.size())
        throw DagError("malformed path", Error::Category::Usage);
    for (std::size_t k = 0; k < path.steps.size(); ++k) {
        const auto& from = path.nodes[k];
        const auto& to = path.nodes[k + 1];
        const bool ok = path.steps[k] == StepDirection::Forward ? dag.has_edge(from, to) : dag.has_edge(to, from);
        if (!ok) throw NotAdjacent(fmt::format("path step {} does not match the graph", path.to_string()));
    }

    for (std::size_t k = 1; k + 1 < path.nodes.size(); ++k) {
        const auto& node = path.nodes[k];
        const bool collider =
            path.steps[k - 1] == StepDirection::Forward && path.steps[k] == StepDirection::Backward;
        if (collider) {
            if (conditioning.contains(node)) continue;
            const auto desc = dag.descendants(node);
            const bool opened = std::any_of(desc.begin(), desc.end(),
                                            [&](const std::string& d) { return conditioning.contains(d); });
            if (!opened) return true;
        } else if (conditioning.contains(node)) {
            return true;
        }
    }
    return false;
}

std::vector<TraversalPath> backdoor_paths(const CausalDag& dag, std::string_view treatment,
                                          std::string_view outcome) {
    auto paths = enumerate_paths(dag, treatment, outcome);
    std::erase_if(paths, [](const TraversalPath& p) { return !p.starts_backward(); });
    return paths;
}

AdjustmentSets adjustment_sets(const CausalDag& dag, std::string_view treatment, std::string_view outcome) {
    const auto backdoor = backdoor_paths(dag, treatment, outcome);
    const auto forbidden = dag.descendants(treatment);

    std::vector<std::string> candidates;
    for (const auto& n : dag.nodes())
        if (n != treatment && n != outcome) candidates.push_back(n);

    AdjustmentSets out;
    const std::size_t subsets = std::size_t{1} << candidates.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        NodeSet z;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (mask & (std::size_t{1} << i)) z.insert(candidates[i]);
        const bool has_descendant =
            std::any_of(z.begin(), z.end(), [&](const std::string& n) { return forbidden.contains(n); });
        if (has_descendant) continue;
        const bool blocks_all = std::all_of(backdoor.begin(), backdoor.end(),
                                            [&](const TraversalPath& p) { return is_blocked(dag, p, z); });
        if (blocks_all) out.valid.push_back(std::move(z));
    }

    std::sort(out.valid.begin(), out.valid.end(), [](const NodeSet& a, const NodeSet& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    for (const auto& z : out.valid) {
        const bool has_valid_subset = std::any_of(out.minimal.begin(), out.minimal.end(), [&](const NodeSet& m) {
            return std::includes(z.begin(), z.end(), m.begin(), m.end());
        });
        if (!has_valid_subset) out.minimal.push_back(z);
    }
    return out;
}

bool d_separated(const CausalDag& dag, std::string_view x, std::string_view y, const NodeSet& given) {
    const auto paths = enumerate_paths(dag, x, y);
    return std::all_of(paths.begin(), paths.end(), [&](const TraversalPath& p) { return is_blocked(dag, p, given); });
}

} // namespace mutcausal
