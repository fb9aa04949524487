#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mutcausal {

// Path and adjustment-set enumeration is exponential in the node count.
inline constexpr std::size_t kDefaultMaxDagNodes = 20;

enum class StepDirection {
    Forward,  // along the edge: prev -> next
    Backward, // against the edge: prev <- next
};

enum class TripleKind { Chain, Fork, Collider };

const char* to_string(TripleKind kind);

using NodeSet = std::set<std::string>;

// A simple path in the undirected skeleton. steps[k] is the orientation of
// the edge between nodes[k] and nodes[k + 1].
struct TraversalPath {
    std::vector<std::string> nodes;
    std::vector<StepDirection> steps;

    bool starts_backward() const { return !steps.empty() && steps.front() == StepDirection::Backward; }

    // "X <- T -> Y"
    std::string to_string() const;

    friend bool operator==(const TraversalPath&, const TraversalPath&) = default;
};

struct AdjustmentSets {
    std::vector<NodeSet> valid;   // every sufficient set, ordered by (size, names)
    std::vector<NodeSet> minimal; // valid sets with no valid proper subset
};

// Immutable directed acyclic graph over named variables.
class CausalDag {
public:
    CausalDag(std::vector<std::string> nodes,
              const std::vector<std::pair<std::string, std::string>>& edges,
              std::size_t max_nodes = kDefaultMaxDagNodes);

    const std::vector<std::string>& nodes() const { return names_; }
    std::vector<std::pair<std::string, std::string>> edges() const;
    std::size_t size() const { return names_.size(); }

    bool contains(std::string_view name) const;
    bool has_edge(std::string_view from, std::string_view to) const;
    bool adjacent(std::string_view a, std::string_view b) const;

    NodeSet parents(std::string_view name) const;
    NodeSet children(std::string_view name) const;
    // Strict descendants (the node itself excluded).
    NodeSet descendants(std::string_view name) const;

    std::size_t index_of(std::string_view name) const; // throws UnknownNode
    const std::vector<std::size_t>& child_indices(std::size_t i) const { return children_[i]; }
    const std::vector<std::size_t>& parent_indices(std::size_t i) const { return parents_[i]; }

private:
    std::vector<std::string> names_; // sorted
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> parents_;
};

CausalDag build_dag(const std::vector<std::string>& nodes,
                    const std::vector<std::pair<std::string, std::string>>& edges);

// Edge list text: one `A -> B` per line, a bare name declares an isolated
// node, `#` starts a comment.
CausalDag parse_edge_list(std::string_view text);
CausalDag load_edge_list(const std::string& path);

// Every simple path between x and y, shortest first, then by node names.
std::vector<TraversalPath> enumerate_paths(const CausalDag& dag, std::string_view x, std::string_view y);

TripleKind classify_triple(const CausalDag& dag, std::string_view a, std::string_view b, std::string_view c);

bool is_blocked(const CausalDag& dag, const TraversalPath& path, const NodeSet& conditioning);

std::vector<TraversalPath> backdoor_paths(const CausalDag& dag, std::string_view treatment,
                                          std::string_view outcome);

AdjustmentSets adjustment_sets(const CausalDag& dag, std::string_view treatment, std::string_view outcome);

bool d_separated(const CausalDag& dag, std::string_view x, std::string_view y, const NodeSet& given);

} // namespace mutcausal
