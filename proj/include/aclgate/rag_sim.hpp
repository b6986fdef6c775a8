#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aclgate/acl_core.hpp"
#include "aclgate/policy_gate.hpp"

namespace aclgate {

// Covert instruction hidden inside attacker-supplied content. `encoding`
// names a registered covert channel: "day_of_month" turns a numeric fact
// into an ordinal date ("7th May"); "word_position" selects a word from a
// fixed list by the fact's last digit.
struct Instruction {
  std::string lookup_key;  // what to retrieve, e.g. a fact label
  std::string encoding;
  std::map<std::string, std::string> params;  // day_of_month: {"month": "May"}
};

struct Email {
  EntityId from;
  std::vector<EntityId> to;
  std::vector<EntityId> cc;
  std::string subject;
  std::string visible_body;
  std::optional<Instruction> hidden_instruction;  // never shown to the user
};

struct MailboxStore {
  EntityId owner;
  std::vector<DocumentMeta> documents;  // all carry ACLs; owner can read all
  std::vector<Email> emails;
};

// Deterministic lexical index: lowercase alphanumeric tokens to posting
// lists of (doc id, term frequency).
class RetrievalIndex {
 public:
  using PostingList = std::vector<std::pair<DocId, int>>;

  const std::map<std::string, PostingList>& postings() const { return postings_; }
  std::size_t term_count() const { return postings_.size(); }

  friend RetrievalIndex index_mailbox(const MailboxStore& store);

 private:
  std::map<std::string, PostingList> postings_;
};

// Lowercase alphanumeric token runs; everything else separates.
std::vector<std::string> tokenize(std::string_view text);

RetrievalIndex index_mailbox(const MailboxStore& store);

// Top-k documents by summed term frequency over the distinct tokens of
// query plus context; zero-score documents are dropped; ties go to the
// smaller doc id.
std::vector<DocId> retrieve(const RetrievalIndex& index,
                            const std::string& query_text,
                            const std::string& context_text, int k);

// Rule-driven generation standing in for the LLM. When the incoming mail
// hides an instruction, the adversary-following rule fires only if the
// instruction's lookup key matches a fact available in the prompt documents;
// otherwise the reply is the neutral template with a fixed default date.
std::string generate_reply(const std::vector<std::string>& prompt_docs,
                           const Email& incoming, bool adversary_active);

struct SecretSpec {
  DocId doc;
  std::string value;                   // e.g. "7"
  std::vector<std::string> encodings;  // registered encoding names
};

enum class ScenarioKind { email, coauthoring };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::email;
  EntityId initiator;
  EntityId adversary;
  std::vector<EntityId> recipients;  // extra recipients of the outgoing reply
  std::vector<DocId> mailbox_docs;
  Email adversary_email;  // from/to filled in from initiator/adversary
  std::string initiator_query;
  SecretSpec secret;
  int k = 3;
  DocId shared_doc;                               // coauthoring only
  std::optional<Instruction> hidden_instruction;  // coauthoring only
};

struct StepRecord {
  int step = 0;
  std::string actor;
  std::string event;
  std::string user_view;  // exactly what the simulated human sees
  nlohmann::ordered_json detail;
};

struct ScenarioTranscript {
  std::vector<StepRecord> steps;
  std::string final_message;  // empty when nothing was delivered
  bool delivered = false;
  bool leak = false;
  GateMode mode = GateMode::agentic;
  bool gate_enabled = false;

  // Line-delimited step records plus a trailing summary object.
  std::string to_jsonl() const;
  nlohmann::ordered_json summary() const;
};

// Figure-of-merit attack flow: adversary email in, initiator query, gated or
// ungated retrieval, rule-driven reply, delivery. In agentic mode the
// simulated initiator approves any draft without a raw secret token.
ScenarioTranscript run_scenario(const ScenarioConfig& scenario,
                                const AclGraph& graph,
                                const Directory& directory, bool gate_enabled,
                                GateMode mode);

// Collaborative-writing variant: the hidden prompt lives in the shared
// document, participants are all its readers, and the revision is always
// published. Gate uses exclusion semantics.
ScenarioTranscript run_coauthoring_scenario(const ScenarioConfig& scenario,
                                            const AclGraph& graph,
                                            const Directory& directory,
                                            bool gate_enabled);

// True iff the delivered message carries the secret raw (value as a whole
// token) or under any of the named covert encodings.
bool detect_leak(const ScenarioTranscript& transcript, const SecretSpec& secret);

}  // namespace aclgate
