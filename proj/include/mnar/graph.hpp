#ifndef MNAR_GRAPH_HPP
#define MNAR_GRAPH_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mnar/errors.hpp"

namespace mnar {

enum class NodeKind {
  Counterfactual,     // underlying variable, e.g. the value had it been measured
  MissIndicator,      // response/measurement indicator
  Proxy,              // observed coarsening, deterministic in its parents
  Context,            // fully observed variable
  FixedIntervention,  // constant half of a split node; only appears in a Swig
};

const char* node_kind_name(NodeKind kind);
NodeKind node_kind_from(const std::string& name);  // ParseError

struct GraphNode {
  std::string name;
  NodeKind kind;
};

struct GraphEdge {
  std::string from;
  std::string to;
  bool deterministic = false;
};

// Immutable labeled DAG. Structural validity (unique names, known
// endpoints, acyclicity) is enforced here; the missing-data conventions
// are layered on by build_mdag.
class Dag {
 public:
  Dag(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  bool has_node(const std::string& name) const;
  std::size_t node_index(const std::string& name) const;  // UnknownNode
  const GraphNode& node(std::size_t i) const { return nodes_[i]; }

  // Adjacency as (neighbour index, deterministic flag).
  const std::vector<std::pair<std::size_t, bool>>& parents(std::size_t i) const {
    return parents_[i];
  }
  const std::vector<std::pair<std::size_t, bool>>& children(std::size_t i) const {
    return children_[i];
  }

  // Indices in a topological order (parents before children).
  const std::vector<std::size_t>& topological_order() const { return topo_; }

  // i together with everything reachable from i along directed edges.
  std::vector<bool> descendants_of(std::size_t i) const;
  std::vector<bool> ancestors_of(const std::vector<std::size_t>& seeds) const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<std::size_t, bool>>> parents_;
  std::vector<std::vector<std::pair<std::size_t, bool>>> children_;
  std::vector<std::size_t> topo_;
};

// Validated missing-data DAG: proxies have exactly one Counterfactual and
// one MissIndicator parent (both edges deterministic), no Counterfactual
// node sits downstream of a MissIndicator or Proxy, and no
// FixedIntervention nodes are present.
Dag build_mdag(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

// Line format, one statement per line, `#` comments:
//   node NAME kind=counterfactual|missind|proxy|context|fixed;
//   edge A -> B;        or        edge A -> B [det];
// m-DAG conventions are enforced unless a fixed node appears (then the
// text is taken to describe an already split graph).
Dag parse_graph_spec(const std::string& text);
std::string graph_spec_text(const Dag& g);

struct DsepResult {
  bool separated;
  // Set when the reachability search crossed a deterministic edge: the
  // verdict is sound for standard d-separation, but determinism can induce
  // extra independences this criterion does not see.
  bool deterministic_warning;
};

// Standard d-separation of A and B given Z. Deterministic edges are
// ordinary edges; FixedIntervention nodes block every path through them.
DsepResult d_separated_ex(const Dag& g,
                          const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const std::vector<std::string>& z);

bool d_separated(const Dag& g,
                 const std::vector<std::string>& a,
                 const std::vector<std::string>& b,
                 const std::vector<std::string>& z);

// Result of node splitting: the graph plus what was fixed and renamed.
struct Swig {
  Dag graph;
  std::map<std::string, std::string> interventions;  // original node -> fixed label
  std::map<std::string, std::string> relabeling;     // original name -> new name
};

// Split each intervened node into a random half (keeping incoming edges,
// keeping its name) and a fixed half named by the supplied label (taking
// all outgoing edges). Nodes downstream of a fixed half are renamed
// "NAME^{l1,l2}" with the labels of their fixed ancestors in topological
// order of the original intervened nodes.
Swig split(const Dag& g, const std::map<std::string, std::string>& interventions);

// The six-node two-stage missingness graph: the underlying outcome drives
// the underlying covariate, the first response indicator depends on the
// underlying covariate, and the second depends on the first indicator and
// the observed outcome proxy. Proxies are deterministic coarsenings.
Dag permutation_mdag();

}  // namespace mnar

#endif  // MNAR_GRAPH_HPP
