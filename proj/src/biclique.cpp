#include "aclgate/biclique.hpp"

#include <algorithm>
#include <thread>

namespace aclgate {

namespace {

struct BitCandidate {
  Bitset entities;
  Bitset docs;
  std::size_t product = 0;
};

// product desc, then canonical entity order, then canonical doc order.
bool better(const BitCandidate& a, const BitCandidate& b) {
  if (a.product != b.product) return a.product > b.product;
  const int ce = lex_compare(a.entities, b.entities);
  if (ce != 0) return ce < 0;
  return lex_compare(a.docs, b.docs) < 0;
}

Biclique to_biclique(const AclGraph& g, const BitCandidate& c) {
  return Biclique{g.entity_ids(c.entities), g.doc_ids(c.docs)};
}

}  // namespace

Bitset expand_doc_bits(const Bitset& entity_bits, const AclGraph& graph) {
  Bitset docs = Bitset::full(graph.doc_count());
  entity_bits.for_each([&](std::size_t e) { docs &= graph.doc_bits(e); });
  return docs;
}

Bitset expand_entity_bits(const Bitset& doc_bits, const AclGraph& graph) {
  Bitset entities = Bitset::full(graph.entity_count());
  doc_bits.for_each([&](std::size_t d) { entities &= graph.acl_bits(d); });
  return entities;
}

std::vector<DocId> expand_doc_set(const std::vector<EntityId>& entity_set,
                                  const AclGraph& graph) {
  if (entity_set.empty()) throw UsageError("expand_doc_set: empty entity set");
  return graph.doc_ids(expand_doc_bits(graph.entity_bits_for(entity_set), graph));
}

std::vector<EntityId> expand_entity_set(const std::vector<DocId>& doc_set,
                                        const AclGraph& graph) {
  if (doc_set.empty()) throw UsageError("expand_entity_set: empty document set");
  return graph.entity_ids(expand_entity_bits(graph.doc_bits_for(doc_set), graph));
}

std::vector<DocId> select_for_target_entities(const AclGraph& graph,
                                              const std::vector<EntityId>& target) {
  if (target.empty()) throw UsageError("select_for_target_entities: empty target");
  const Bitset want = graph.entity_bits_for(target);
  std::vector<DocId> out;
  for (std::size_t d = 0; d < graph.doc_count(); ++d)
    if (want.is_subset_of(graph.acl_bits(d))) out.push_back(graph.documents()[d].id);
  return out;
}

bool is_biclique(const AclGraph& graph, const Biclique& b) {
  const Bitset entities = graph.entity_bits_for(b.entities);
  for (const auto& doc : b.docs) {
    const std::size_t d = graph.doc_index_of(doc);
    if (!entities.is_subset_of(graph.acl_bits(d))) return false;
  }
  return true;
}

bool is_maximal(const AclGraph& graph, const Biclique& b) {
  if (!is_biclique(graph, b))
    throw UsageError("is_maximal: argument is not a biclique");

  const Bitset entities = graph.entity_bits_for(b.entities);
  const Bitset docs = graph.doc_bits_for(b.docs);

  // An addable entity reaches every doc; an addable doc covers every entity.
  // Both closures are supersets of the respective side for any biclique, so
  // maximality is exactly closure == side.
  if (!expand_entity_bits(docs, graph).is_subset_of(entities)) return false;
  if (!expand_doc_bits(entities, graph).is_subset_of(docs)) return false;
  return true;
}

namespace {

std::vector<Bitset> unique_acl_seeds(const AclGraph& graph) {
  std::vector<Bitset> seeds;
  for (std::size_t d = 0; d < graph.doc_count(); ++d) {
    const auto& bits = graph.acl_bits(d);
    if (bits.none()) continue;
    seeds.push_back(bits);
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const Bitset& a, const Bitset& b) { return lex_compare(a, b) < 0; });
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

std::optional<BitCandidate> close_seed(const AclGraph& graph, const Bitset& seed,
                                       const Thresholds& t) {
  BitCandidate c;
  c.docs = expand_doc_bits(seed, graph);
  c.entities = expand_entity_bits(c.docs, graph);
  const std::size_t ne = c.entities.count();
  const std::size_t nd = c.docs.count();
  if (ne < static_cast<std::size_t>(t.min_entities) ||
      nd < static_cast<std::size_t>(t.min_docs))
    return std::nullopt;
  c.product = ne * nd;
  return c;
}

}  // namespace

std::optional<Biclique> maximal_biclique_heuristic(const AclGraph& graph,
                                                   const Thresholds& thresholds,
                                                   int threads) {
  thresholds.validate();
  if (threads < 1) throw UsageError("threads must be >= 1");

  const std::vector<Bitset> seeds = unique_acl_seeds(graph);
  if (seeds.empty()) return std::nullopt;

  const auto reduce_range = [&](std::size_t begin, std::size_t stride)
      -> std::optional<BitCandidate> {
    std::optional<BitCandidate> best;
    for (std::size_t i = begin; i < seeds.size(); i += stride) {
      auto cand = close_seed(graph, seeds[i], thresholds);
      if (cand && (!best || better(*cand, *best))) best = std::move(cand);
    }
    return best;
  };

  std::optional<BitCandidate> best;
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(threads), seeds.size());
  if (nthreads <= 1) {
    best = reduce_range(0, 1);
  } else {
    std::vector<std::optional<BitCandidate>> local(nthreads);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] { local[t] = reduce_range(t, nthreads); });
    for (auto& th : pool) th.join();
    for (auto& cand : local)
      if (cand && (!best || better(*cand, *best))) best = std::move(cand);
  }

  if (!best) return std::nullopt;
  return to_biclique(graph, *best);
}

namespace {

struct ExactSearch {
  const AclGraph& graph;
  long budget;
  long nodes = 0;
  std::optional<BitCandidate> best;

  // Every maximum biclique is closed under both expansions (closing a side
  // would strictly grow the product), so evaluating the closure at each
  // include step visits every maximum candidate; the strict bound keeps all
  // product ties alive for the canonical tie-break.
  void run(std::size_t idx, std::size_t chosen_count, const Bitset& docs) {
    if (++nodes > budget) {
      std::optional<Biclique> partial;
      if (best) partial = to_biclique(graph, *best);
      throw SolverBudgetExceeded(
          "exact solver node budget exhausted after " + std::to_string(nodes - 1) +
              " nodes" + (partial ? " (best so far: product " +
                                        std::to_string(best->product) + ")"
                                  : ""),
          std::move(partial));
    }
    if (idx == graph.entity_count()) return;

    const std::size_t remaining = graph.entity_count() - idx - 1;

    // Include entity idx.
    Bitset next_docs = docs & graph.doc_bits(idx);
    if (next_docs.any()) {
      const std::size_t nd = next_docs.count();

      BitCandidate cand;
      cand.entities = expand_entity_bits(next_docs, graph);
      cand.docs = next_docs;
      cand.product = cand.entities.count() * nd;
      if (!best || better(cand, *best)) best = cand;

      const std::size_t ub = (chosen_count + 1 + remaining) * nd;
      if (remaining > 0 && ub >= best->product)
        run(idx + 1, chosen_count + 1, next_docs);
    }

    // Skip entity idx.
    const std::size_t ub_skip = (chosen_count + remaining) * docs.count();
    if (remaining > 0 && (!best || ub_skip >= best->product))
      run(idx + 1, chosen_count, docs);
  }
};

}  // namespace

std::optional<Biclique> exact_maximum_biclique(const AclGraph& graph,
                                               const SolverCaps& caps) {
  caps.validate();
  if (graph.entity_count() > static_cast<std::size_t>(caps.max_entities))
    throw ResourceError("graph has " + std::to_string(graph.entity_count()) +
                        " entities, exceeding cap " +
                        std::to_string(caps.max_entities));
  if (graph.doc_count() > static_cast<std::size_t>(caps.max_docs))
    throw ResourceError("graph has " + std::to_string(graph.doc_count()) +
                        " documents, exceeding cap " + std::to_string(caps.max_docs));
  if (graph.edge_count() == 0) return std::nullopt;

  ExactSearch search{graph, caps.node_budget};
  search.run(0, 0, Bitset::full(graph.doc_count()));
  if (!search.best) return std::nullopt;
  return to_biclique(graph, *search.best);
}

std::vector<Biclique> enumerate_all_maximal_bicliques(const AclGraph& graph) {
  constexpr std::size_t kMaxEntities = 16;
  if (graph.entity_count() > kMaxEntities)
    throw ResourceError("enumeration oracle limited to " +
                        std::to_string(kMaxEntities) + " entities");

  std::vector<BitCandidate> found;
  const std::size_t n = graph.entity_count();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    Bitset subset(n);
    for (std::size_t e = 0; e < n; ++e)
      if (mask & (std::size_t{1} << e)) subset.set(e);
    Bitset docs = expand_doc_bits(subset, graph);
    if (docs.none()) continue;
    BitCandidate c;
    c.entities = expand_entity_bits(docs, graph);
    c.docs = std::move(docs);
    c.product = c.entities.count() * c.docs.count();
    found.push_back(std::move(c));
  }

  std::sort(found.begin(), found.end(),
            [](const BitCandidate& a, const BitCandidate& b) {
              const int ce = lex_compare(a.entities, b.entities);
              if (ce != 0) return ce < 0;
              return lex_compare(a.docs, b.docs) < 0;
            });
  found.erase(std::unique(found.begin(), found.end(),
                          [](const BitCandidate& a, const BitCandidate& b) {
                            return a.entities == b.entities && a.docs == b.docs;
                          }),
              found.end());

  std::vector<Biclique> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back(to_biclique(graph, c));
  return out;
}

}  // namespace aclgate
