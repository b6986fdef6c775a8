#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aclgate/biclique.hpp"
#include "aclgate/ingest.hpp"
#include "aclgate/policy_gate.hpp"
#include "aclgate/rag_sim.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoResult = 3;
constexpr int kExitResource = 4;

bool color_enabled() {
  const char* v = std::getenv("ACL_GATE_COLOR");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

std::string paint(const std::string& text, const char* code) {
  if (!color_enabled()) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

struct CorpusArgs {
  std::string docs;
  std::string directory;
  std::string models;
  bool permissive = false;

  void attach(CLI::App* cmd, bool need_docs = true, bool need_directory = false,
              bool need_models = false) {
    auto* docs_opt = cmd->add_option("--docs", docs, "documents.jsonl path");
    if (need_docs) docs_opt->required();
    auto* dir_opt =
        cmd->add_option("--directory", directory, "directory.jsonl path");
    if (need_directory) dir_opt->required();
    if (need_models)
      cmd->add_option("--models", models, "models.jsonl path")->required();
    cmd->add_flag("--permissive", permissive,
                  "downgrade unknown entity references to warnings");
  }

  aclgate::CorpusBundle load(
      const std::optional<std::string>& scenario = std::nullopt) const {
    std::optional<std::filesystem::path> dir, mod, scen;
    if (!directory.empty()) dir = directory;
    if (!models.empty()) mod = models;
    if (scenario && !scenario->empty()) scen = *scenario;
    aclgate::LoadOptions options;
    options.strict = !permissive;
    auto bundle = aclgate::load_bundle(docs, dir, mod, scen, options);
    for (const auto& w : bundle.warnings)
      std::cerr << paint("warning: ", "33") << w << "\n";
    return bundle;
  }
};

void print_biclique(const std::optional<aclgate::Biclique>& result, bool as_json) {
  if (!result) {
    if (as_json) std::cout << "null\n";
    else std::cout << "no biclique satisfies the constraints\n";
    return;
  }
  if (as_json) {
    ordered_json out;
    out["entities"] = result->entities;
    out["docs"] = result->docs;
    out["product"] = result->product();
    std::cout << out.dump() << "\n";
    return;
  }
  std::cout << "entities:";
  for (const auto& e : result->entities) std::cout << ' ' << e;
  std::cout << "\ndocs:";
  for (const auto& d : result->docs) std::cout << ' ' << d;
  std::cout << "\nproduct: " << result->product() << "\n";
}

ordered_json gate_entries_json(const std::vector<aclgate::GateEntry>& entries) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : entries)
    arr.push_back({{"doc", e.doc}, {"blocking", e.blocking_users}});
  return arr;
}

int run(int argc, char** argv) {
  CLI::App app{"deterministic ACL toolkit: biclique corpus selection, "
               "model/retrieval gating, and an email-assistant attack simulator"};
  app.require_subcommand(1);

  // graph-stats -------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("graph-stats", "corpus and ACL graph counts");
  CorpusArgs stats_args;
  stats_args.attach(stats_cmd);
  bool stats_json = false;
  stats_cmd->add_flag("--json", stats_json, "machine-readable output");

  // select ------------------------------------------------------------------
  auto* select_cmd =
      app.add_subcommand("select", "documents whose ACL covers a target entity set");
  CorpusArgs select_args;
  select_args.attach(select_cmd);
  std::vector<std::string> select_entities;
  select_cmd->add_option("--entities", select_entities, "target entity ids")
      ->required()
      ->delimiter(',');
  bool select_json = false;
  select_cmd->add_flag("--json", select_json, "machine-readable output");

  // maximal -----------------------------------------------------------------
  auto* maximal_cmd =
      app.add_subcommand("maximal", "seeded maximal-biclique heuristic");
  CorpusArgs maximal_args;
  maximal_args.attach(maximal_cmd);
  int tau_e = 1, tau_d = 1, maximal_threads = 1;
  maximal_cmd->add_option("--tau-e", tau_e, "minimum entity count")->required();
  maximal_cmd->add_option("--tau-d", tau_d, "minimum document count")->required();
  maximal_cmd->add_option("--threads", maximal_threads,
                          "seed-loop parallelism (output identical to 1)");
  bool maximal_json = false;
  maximal_cmd->add_flag("--json", maximal_json, "machine-readable output");

  // exact -------------------------------------------------------------------
  auto* exact_cmd =
      app.add_subcommand("exact", "exact maximum-edge biclique (branch and bound)");
  CorpusArgs exact_args;
  exact_args.attach(exact_cmd);
  aclgate::SolverCaps caps;
  exact_cmd->add_option("--max-entities", caps.max_entities, "entity-side cap");
  exact_cmd->add_option("--max-docs", caps.max_docs, "document-side cap");
  exact_cmd->add_option("--node-budget", caps.node_budget, "search-node budget");
  bool exact_json = false;
  exact_cmd->add_flag("--json", exact_json, "machine-readable output");

  // model-authz ---------------------------------------------------------------
  auto* authz_cmd = app.add_subcommand(
      "model-authz", "who may use a fine-tuned model, or check one user");
  CorpusArgs authz_args;
  authz_args.attach(authz_cmd, true, true, true);
  std::string authz_model, authz_user;
  authz_cmd->add_option("--model-id", authz_model, "model to evaluate")->required();
  authz_cmd->add_option("--user", authz_user, "check a single user");
  bool authz_json = false;
  authz_cmd->add_flag("--json", authz_json, "machine-readable output");

  // gate ----------------------------------------------------------------------
  auto* gate_cmd = app.add_subcommand(
      "gate", "filter retrieval candidates against all participants");
  CorpusArgs gate_args;
  gate_args.attach(gate_cmd, true, true);
  std::vector<std::string> gate_participants, gate_candidates;
  std::string gate_mode_str = "fully_agentic", gate_initiator, gate_audit_path;
  gate_cmd->add_option("--participants", gate_participants, "active users")
      ->required()
      ->delimiter(',');
  gate_cmd->add_option("--candidates", gate_candidates, "candidate document ids")
      ->required()
      ->delimiter(',');
  gate_cmd->add_option("--mode", gate_mode_str, "agentic|fully_agentic");
  gate_cmd->add_option("--initiator", gate_initiator,
                       "defaults to the first participant");
  gate_cmd->add_option("--audit", gate_audit_path, "write audit JSONL here");
  bool gate_wallclock = false;
  gate_cmd->add_flag("--audit-wallclock", gate_wallclock,
                     "stamp audit records with wall-clock time");
  bool gate_json = false;
  gate_cmd->add_flag("--json", gate_json, "machine-readable output");

  // simulate ------------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "simulate", "run the email-assistant attack scenario end to end");
  CorpusArgs sim_args;
  sim_args.attach(sim_cmd, true, true);
  std::string sim_scenario, sim_gate_str = "on", sim_mode_str = "agentic", sim_out;
  sim_cmd->add_option("--scenario", sim_scenario, "scenario.json path")->required();
  sim_cmd->add_option("--gate", sim_gate_str, "on|off");
  sim_cmd->add_option("--mode", sim_mode_str, "agentic|fully_agentic");
  sim_cmd->add_option("--out", sim_out, "transcript output path (default stdout)");
  bool sim_json = false;
  sim_cmd->add_flag("--json", sim_json, "machine-readable summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  auto parse_mode = [](const std::string& s) {
    if (s == "agentic") return aclgate::GateMode::agentic;
    if (s == "fully_agentic") return aclgate::GateMode::fully_agentic;
    throw aclgate::UsageError("mode must be 'agentic' or 'fully_agentic'");
  };

  if (stats_cmd->parsed()) {
    const auto bundle = stats_args.load();
    const auto stats = aclgate::graph_stats(bundle.graph);
    if (stats_json) {
      ordered_json out;
      out["documents"] = stats.documents;
      out["entities"] = stats.entities;
      out["edges"] = stats.edges;
      out["unique_acls"] = stats.unique_acls;
      out["empty_acls"] = stats.empty_acls;
      std::cout << out.dump() << "\n";
    } else {
      std::cout << "documents: " << stats.documents << "\n"
                << "entities: " << stats.entities << "\n"
                << "edges: " << stats.edges << "\n"
                << "unique_acls: " << stats.unique_acls << "\n"
                << "empty_acls: " << stats.empty_acls << "\n";
    }
    return kExitOk;
  }

  if (select_cmd->parsed()) {
    const auto bundle = select_args.load();
    const auto docs = aclgate::select_for_target_entities(bundle.graph, select_entities);
    if (select_json) {
      std::cout << ordered_json(docs).dump() << "\n";
    } else {
      for (const auto& d : docs) std::cout << d << "\n";
    }
    return kExitOk;
  }

  if (maximal_cmd->parsed()) {
    const auto bundle = maximal_args.load();
    const aclgate::Thresholds thresholds{tau_e, tau_d};
    const auto result =
        aclgate::maximal_biclique_heuristic(bundle.graph, thresholds, maximal_threads);
    print_biclique(result, maximal_json);
    return result ? kExitOk : kExitNoResult;
  }

  if (exact_cmd->parsed()) {
    const auto bundle = exact_args.load();
    const auto result = aclgate::exact_maximum_biclique(bundle.graph, caps);
    print_biclique(result, exact_json);
    return result ? kExitOk : kExitNoResult;
  }

  if (authz_cmd->parsed()) {
    const auto bundle = authz_args.load();
    const aclgate::ModelCard* model = nullptr;
    for (const auto& m : bundle.models)
      if (m.model_id == authz_model) model = &m;
    if (model == nullptr)
      throw aclgate::DataError("unknown model '" + authz_model + "'");

    if (!authz_user.empty()) {
      const auto decision = aclgate::check_model_access(authz_user, *model,
                                                        bundle.graph,
                                                        bundle.directory);
      if (authz_json) {
        ordered_json out;
        out["model_id"] = model->model_id;
        out["user"] = authz_user;
        out["allow"] = decision.allow;
        out["reason"] = decision.reason();
        out["blocking_docs"] = decision.blocking_docs;
        std::cout << out.dump() << "\n";
      } else if (decision.allow) {
        std::cout << paint("allow", "32") << "\n";
      } else {
        std::cout << paint("deny", "31") << " blocking:";
        for (const auto& d : decision.blocking_docs) std::cout << ' ' << d;
        std::cout << "\n";
      }
      return kExitOk;
    }

    const auto users = aclgate::authorized_users_for_model(
        *model, bundle.graph, bundle.directory, bundle.directory.user_ids());
    if (authz_json) {
      ordered_json out;
      out["model_id"] = model->model_id;
      out["authorized_users"] = users;
      std::cout << out.dump() << "\n";
    } else {
      for (const auto& u : users) std::cout << u << "\n";
    }
    return kExitOk;
  }

  if (gate_cmd->parsed()) {
    const auto bundle = gate_args.load();
    if (gate_initiator.empty()) gate_initiator = gate_participants.front();
    const auto participants =
        aclgate::ParticipantSet::build(gate_participants, gate_initiator);
    const auto result =
        aclgate::filter_retrieval(gate_candidates, participants,
                                  parse_mode(gate_mode_str), bundle.graph,
                                  bundle.directory);
    if (!gate_audit_path.empty()) {
      std::ofstream audit(gate_audit_path);
      if (!audit)
        throw aclgate::DataError("cannot write '" + gate_audit_path + "'");
      audit << aclgate::audit_to_jsonl(result.audit, gate_wallclock);
    }
    if (gate_json) {
      ordered_json out;
      out["allowed"] = result.allowed;
      out["excluded"] = gate_entries_json(result.excluded);
      out["consent_required"] = gate_entries_json(result.consent_required);
      std::cout << out.dump() << "\n";
    } else {
      std::cout << "allowed:";
      for (const auto& d : result.allowed) std::cout << ' ' << d;
      std::cout << "\n";
      auto print_entries = [](const char* label,
                              const std::vector<aclgate::GateEntry>& entries) {
        std::cout << label << ":";
        for (const auto& e : entries) {
          std::cout << ' ' << e.doc << " (blocking:";
          for (const auto& u : e.blocking_users) std::cout << ' ' << u;
          std::cout << ')';
        }
        std::cout << "\n";
      };
      print_entries("excluded", result.excluded);
      print_entries("consent_required", result.consent_required);
    }
    return kExitOk;
  }

  if (sim_cmd->parsed()) {
    if (sim_gate_str != "on" && sim_gate_str != "off")
      throw aclgate::UsageError("--gate must be 'on' or 'off'");
    const bool gate_on = sim_gate_str == "on";
    const auto mode = parse_mode(sim_mode_str);

    const auto bundle = sim_args.load(sim_scenario);
    const auto& scenario = *bundle.scenario;
    const aclgate::ScenarioTranscript transcript =
        scenario.kind == aclgate::ScenarioKind::email
            ? aclgate::run_scenario(scenario, bundle.graph, bundle.directory,
                                    gate_on, mode)
            : aclgate::run_coauthoring_scenario(scenario, bundle.graph,
                                                bundle.directory, gate_on);

    if (!sim_out.empty()) {
      std::ofstream out(sim_out);
      if (!out) throw aclgate::DataError("cannot write '" + sim_out + "'");
      out << transcript.to_jsonl();
    } else {
      std::cout << transcript.to_jsonl();
    }
    if (sim_json) {
      std::cout << transcript.summary().dump() << "\n";
    } else {
      const char* verdict = transcript.leak ? "true" : "false";
      std::cout << "leak: "
                << (transcript.leak ? paint(verdict, "31") : paint(verdict, "32"))
                << "\nmode: " << aclgate::to_string(transcript.mode)
                << "\ngate: " << (transcript.gate_enabled ? "on" : "off") << "\n";
    }
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const aclgate::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const aclgate::SolverBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const aclgate::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const aclgate::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const aclgate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
