#pragma once

#include <optional>
#include <vector>

#include "aclgate/acl_core.hpp"

namespace aclgate {

// Complete bipartite subgraph: every entity can access every document.
// Both id lists are kept sorted in canonical order.
struct Biclique {
  std::vector<EntityId> entities;
  std::vector<DocId> docs;

  std::size_t product() const { return entities.size() * docs.size(); }
  bool operator==(const Biclique&) const = default;
};

struct Thresholds {
  int min_entities = 1;  // tau_E
  int min_docs = 1;      // tau_D

  void validate() const {
    if (min_entities < 1 || min_docs < 1)
      throw UsageError("thresholds must be >= 1");
  }
};

// Bounds for the exact solver; maximum-edge biclique search is NP-complete.
struct SolverCaps {
  int max_entities = 30;
  int max_docs = 100000;
  long node_budget = 5000000;

  void validate() const {
    if (max_entities < 1 || max_docs < 1 || node_budget < 1)
      throw UsageError("solver caps must be positive");
  }
};

// Thrown when the search-node budget runs out; carries the best biclique
// found before the cutoff, if any.
class SolverBudgetExceeded : public ResourceError {
 public:
  SolverBudgetExceeded(const std::string& what, std::optional<Biclique> best)
      : ResourceError(what), best_so_far(std::move(best)) {}

  std::optional<Biclique> best_so_far;
};

// ---- bitset-level cores -------------------------------------------------

// Documents whose ACL contains every entity in `entity_bits`.
Bitset expand_doc_bits(const Bitset& entity_bits, const AclGraph& graph);

// Intersection of the ACLs of every document in `doc_bits`.
Bitset expand_entity_bits(const Bitset& doc_bits, const AclGraph& graph);

// ---- id-level operations ------------------------------------------------

// {D : entity_set subseteq acl(D)}. Entity set must be non-empty.
std::vector<DocId> expand_doc_set(const std::vector<EntityId>& entity_set,
                                  const AclGraph& graph);

// Intersection of the ACLs of the given documents. Doc set must be non-empty
// (the intersection over nothing is rejected rather than defined as the
// entity universe).
std::vector<EntityId> expand_entity_set(const std::vector<DocId>& doc_set,
                                        const AclGraph& graph);

// Linear scan selecting every document whose ACL covers the target set.
// Extensionally identical to expand_doc_set but implemented as an
// independent single pass over the document list.
std::vector<DocId> select_for_target_entities(const AclGraph& graph,
                                              const std::vector<EntityId>& target);

bool is_biclique(const AclGraph& graph, const Biclique& b);

// Both-sided maximality: no entity outside the set reaches every document,
// and no document outside the set is reachable by every entity.
// Precondition: b is a biclique (UsageError otherwise).
bool is_maximal(const AclGraph& graph, const Biclique& b);

// Seeded heuristic: every unique ACL is closed via expand_doc_bits then
// expand_entity_bits; candidates below either threshold are dropped; the
// survivor maximizing |E|*|D| wins, ties broken by canonical entity order
// then canonical document order. `threads` > 1 splits the seed loop; the
// reduction applies the same tie-break, so output is identical to threads=1.
std::optional<Biclique> maximal_biclique_heuristic(const AclGraph& graph,
                                                   const Thresholds& thresholds,
                                                   int threads = 1);

// Branch-and-bound over entity subsets in canonical order. Upper bound per
// subtree: (chosen + remaining entities) * |docs common to chosen|; pruning
// is strict, so all product ties survive and the canonical-least maximum
// biclique is returned. Absent iff the graph has no edge. Throws
// ResourceError when the graph exceeds the caps, SolverBudgetExceeded when
// the node budget runs out.
std::optional<Biclique> exact_maximum_biclique(const AclGraph& graph,
                                               const SolverCaps& caps = {});

// Test oracle: closes every non-empty entity subset and deduplicates, which
// yields exactly the maximal bicliques. Guarded to <= 16 entities.
std::vector<Biclique> enumerate_all_maximal_bicliques(const AclGraph& graph);

}  // namespace aclgate
