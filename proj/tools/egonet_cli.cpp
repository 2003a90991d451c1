// egonet command-line front end: graph generation, layout, task sets, study
// plans, simulated passes, the protocol server and log analysis.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "egonet/agent.hpp"
#include "egonet/analysis.hpp"
#include "egonet/errors.hpp"
#include "egonet/graph.hpp"
#include "egonet/scene.hpp"
#include "egonet/server.hpp"
#include "egonet/study.hpp"
#include "egonet/tasks.hpp"

namespace {

using egonet::InputError;
using json = nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + " is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw egonet::Error("cannot write " + path);
  out << text;
  if (!out) throw egonet::Error("failed writing " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

egonet::Scene load_scene(const std::string& path) { return egonet::scene_from_json(read_json(path)); }

egonet::TaskSet load_tasks(const std::string& path, const egonet::Scene& scene) {
  egonet::TaskSet tasks = egonet::tasks_from_json(read_json(path));
  egonet::validate_tasks(scene.graph(), tasks);
  return tasks;
}

std::atomic<egonet::Server*> g_server{nullptr};

void on_signal(int) {
  if (egonet::Server* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egonet: ego-centric network navigation toolkit"};
  app.require_subcommand(1);

  std::size_t nodes = 0, edges_per_node = 0, participants = 0;
  std::uint64_t seed = 0;
  std::string in_path, out_path, scene_path, tasks_path, condition_name, agent_name, log_dir, logs_dir, csv_path;
  std::string json_path, questionnaire_path;
  int port = 0;

  auto* gen = app.add_subcommand("generate", "Barabási–Albert graph with labels");
  gen->add_option("--nodes", nodes, "node count")->required();
  gen->add_option("--edges-per-node", edges_per_node, "edges added per new node")->required();
  gen->add_option("--seed", seed, "random seed")->required();
  gen->add_option("--out", out_path, "graph JSON to write")->required();

  auto* lay = app.add_subcommand("layout", "3D force-directed layout and scene calibration");
  lay->add_option("--in", in_path, "graph JSON")->required()->check(CLI::ExistingFile);
  lay->add_option("--seed", seed, "layout seed")->required();
  lay->add_option("--out", out_path, "scene JSON to write")->required();

  auto* tsk = app.add_subcommand("tasks", "task set for a scene");
  tsk->add_option("--scene", scene_path, "scene JSON")->required()->check(CLI::ExistingFile);
  tsk->add_option("--seed", seed, "task seed")->required();
  tsk->add_option("--out", out_path, "tasks JSON to write")->required();

  auto* pln = app.add_subcommand("plan", "counterbalanced study plan");
  pln->add_option("--participants", participants, "participant count")->required();
  pln->add_option("--seed", seed, "plan seed")->required();
  pln->add_option("--out", out_path, "plan JSON to write")->required();

  auto* sim = app.add_subcommand("simulate", "one measured pass driven by a scripted agent");
  sim->add_option("--scene", scene_path, "scene JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--tasks", tasks_path, "tasks JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--condition", condition_name, "baseline|highlight|bubble")
      ->required()
      ->check(CLI::IsMember({"baseline", "highlight", "bubble"}));
  sim->add_option("--agent", agent_name, "jumper|flyer (default: the one the condition allows)")
      ->check(CLI::IsMember({"jumper", "flyer"}));
  sim->add_option("--out", out_path, "event log (NDJSON) to write")->required();

  auto* srv = app.add_subcommand("serve", "line-delimited JSON protocol server over TCP");
  srv->add_option("--scene", scene_path, "scene JSON")->required()->check(CLI::ExistingFile);
  srv->add_option("--tasks", tasks_path, "tasks JSON")->required()->check(CLI::ExistingFile);
  srv->add_option("--condition", condition_name, "baseline|highlight|bubble")
      ->required()
      ->check(CLI::IsMember({"baseline", "highlight", "bubble"}));
  srv->add_option("--port", port, std::string("TCP port (default: $") + egonet::kPortEnv + " or " +
                                      std::to_string(egonet::kDefaultPort) + ")")
      ->check(CLI::Range(0, 65535));
  srv->add_option("--log", log_dir, "directory for session logs")->required();

  auto* ana = app.add_subcommand("analyze", "aggregate measured passes from event logs");
  ana->add_option("--logs", logs_dir, "directory of *.ndjson logs")->required();
  ana->add_option("--out-csv", csv_path, "summary CSV to write")->required();
  ana->add_option("--out-json", json_path, "optional JSON report with warnings and settings");
  ana->add_option("--questionnaires", questionnaire_path, "optional CSV of questionnaire responses");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const egonet::Graph g = egonet::generate_ba({nodes, edges_per_node, seed});
      write_json(out_path, egonet::graph_to_json({g, {nodes, edges_per_node, seed}}));
      std::cout << "graph: " << g.node_count() << " nodes, " << g.edge_count() << " edges -> " << out_path << "\n";
    } else if (*lay) {
      egonet::GraphFile file = egonet::graph_from_json(read_json(in_path));
      egonet::LayoutParams params;
      params.seed = seed;
      const egonet::Scene scene = egonet::build_scene(std::move(file), params);
      write_json(out_path, egonet::scene_to_json(scene));
      std::cout << "scene: node radius " << scene.calibration.node_radius << ", fly speed "
                << scene.calibration.max_fly_speed << " -> " << out_path << "\n";
    } else if (*tsk) {
      const egonet::Scene scene = load_scene(scene_path);
      const egonet::TaskSet tasks = egonet::generate_tasks(scene.graph(), scene.positions, seed);
      write_json(out_path, egonet::tasks_to_json(tasks));
      std::cout << "tasks: " << tasks.size() << " -> " << out_path << "\n";
    } else if (*pln) {
      const egonet::StudyPlan plan = egonet::build_plan(participants, seed);
      write_json(out_path, egonet::plan_to_json(plan));
      std::cout << "plan: " << plan.rows.size() << " participants -> " << out_path << "\n";
    } else if (*sim) {
      const egonet::Scene scene = load_scene(scene_path);
      const egonet::TaskSet tasks = load_tasks(tasks_path, scene);
      const auto condition = egonet::parse_condition(condition_name);
      const auto agent = agent_name.empty() ? egonet::agent_for(condition) : egonet::parse_agent(agent_name);
      const egonet::EventLog log = egonet::simulate_pass(scene, tasks, condition, agent);
      log.write(out_path);
      std::cout << "log: " << log.records().size() << " records, pass took "
                << log.records().back().session_seconds << " s -> " << out_path << "\n";
    } else if (*srv) {
      const egonet::Scene scene = load_scene(scene_path);
      egonet::TaskSet tasks = load_tasks(tasks_path, scene);
      egonet::ServerConfig config;
      config.port = srv->count("--port") ? static_cast<std::uint16_t>(port) : egonet::default_port();
      config.log_dir = log_dir;
      egonet::Server server(scene, std::move(tasks), egonet::parse_condition(condition_name), config);
      server.listen();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on 127.0.0.1:" << server.port() << ", logs in " << log_dir << std::endl;
      server.run();
      g_server = nullptr;
      std::cout << "stopped after " << server.connections() << " connection(s); log " << server.log_path() << "\n";
    } else if (*ana) {
      const egonet::AnalysisReport report = egonet::analyze_directory(logs_dir);
      for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
      write_text(csv_path, egonet::report_csv(report));
      if (!json_path.empty()) write_json(json_path, egonet::report_json(report));
      if (!questionnaire_path.empty()) {
        std::vector<egonet::EventLog> logs;
        for (const auto& e : std::filesystem::directory_iterator(logs_dir)) {
          if (e.path().extension() == ".ndjson" || e.path().extension() == ".jsonl") {
            try {
              logs.push_back(egonet::EventLog::read(e.path().string()));
            } catch (const egonet::Error&) {
            }
          }
        }
        write_text(questionnaire_path, egonet::questionnaires_csv(logs));
      }
      std::cout << "analysis: " << report.logs_used << " log(s), " << report.rows.size() << " rows -> " << csv_path
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
