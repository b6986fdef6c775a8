#pragma once

#include <string>
#include <vector>

#include "aclgate/acl_core.hpp"

namespace aclgate {

// Fine-tuned model identity plus its training corpus. The base model is the
// public pre-trained one: no training documents, usable by anyone.
struct ModelCard {
  std::string model_id;
  std::vector<DocId> training_docs;
  bool is_base = false;
};

// Users active in one interaction. All of their permissions must hold before
// content reaches the model. Participants absent from the directory are
// treated as external users: empty closure, wildcard-only access.
struct ParticipantSet {
  std::vector<EntityId> users;  // sorted, unique, non-empty
  EntityId initiator;           // member of users

  static ParticipantSet build(std::vector<EntityId> users, EntityId initiator);
};

struct AccessDecision {
  bool allow = false;
  std::vector<DocId> blocking_docs;  // empty iff allow

  const char* reason() const { return allow ? "authorized" : "missing_docs"; }
};

enum class GateMode { agentic, fully_agentic };

const char* to_string(GateMode mode);

struct GateEntry {
  DocId doc;
  std::vector<EntityId> blocking_users;  // sorted
};

// One line of the append-only audit trail; timestamp-free for determinism.
struct AuditRecord {
  std::string op;
  std::vector<EntityId> participants;
  DocId doc;
  std::string decision;  // allow | exclude | consent_pending | consent_granted
  std::vector<EntityId> blocking;
};

// Partition of the candidate list. consent_required is populated only in
// agentic mode; fully agentic excludes instead.
struct GateResult {
  std::vector<DocId> candidates;       // original order, retained for merges
  std::vector<EntityId> participants;  // checked user set
  std::vector<DocId> allowed;
  std::vector<GateEntry> excluded;
  std::vector<GateEntry> consent_required;
  std::vector<AuditRecord> audit;
};

// Users from the universe authorized for every training document of the
// model. Base models admit the whole universe. Sorted output.
std::vector<EntityId> authorized_users_for_model(
    const ModelCard& model, const AclGraph& graph, const Directory& directory,
    const std::vector<EntityId>& user_universe);

// Allow iff the user can access every training document; lists every
// inaccessible training document otherwise.
AccessDecision check_model_access(const EntityId& user, const ModelCard& model,
                                  const AclGraph& graph,
                                  const Directory& directory);

// Among fine-tuned models every participant may use, the one with the most
// training documents (ties by model_id); falls back to the base model.
// Registry must contain exactly one base model (ConfigError otherwise).
ModelCard select_model_for_participants(const std::vector<ModelCard>& registry,
                                        const ParticipantSet& participants,
                                        const AclGraph& graph,
                                        const Directory& directory);

// Keeps a candidate iff every participant can access it; otherwise routes it
// to consent_required (agentic) or excluded (fully agentic). Input order is
// preserved within each list.
GateResult filter_retrieval(const std::vector<DocId>& candidates,
                            const ParticipantSet& participants, GateMode mode,
                            const AclGraph& graph, const Directory& directory);

// Moves the named documents from consent_required to allowed, restoring the
// original candidate order, and logs one consent_granted record each.
// Caller asserts initiator consent. UsageError if a doc is not pending.
GateResult grant_consent(GateResult result, const std::vector<DocId>& doc_ids);

// Access check with external-user semantics: directory users resolve through
// group closure, absent ids get wildcard-only access, group ids are rejected.
bool participant_can_access(const EntityId& user, std::size_t doc_idx,
                            const AclGraph& graph, const Directory& directory);

}  // namespace aclgate
