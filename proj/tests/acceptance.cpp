// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "egonet/agent.hpp"
#include "egonet/analysis.hpp"
#include "egonet/egoview.hpp"
#include "egonet/graph.hpp"
#include "egonet/protocol.hpp"
#include "egonet/study.hpp"
#include "egonet/tasks.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace egonet;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << "failed: " << what << "; ";
    ok = ok && cond;
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << "exception: " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_seconds > 0 && secs >= budget_seconds) {
    out.ok = false;
    out.detail << "over time budget " << budget_seconds << " s; ";
  }
  if (!out.ok) ++failures;
  std::printf("%s  %-22s %.3f s  %s\n", out.ok ? "PASS" : "FAIL", name.c_str(), secs, out.detail.str().c_str());
  std::fflush(stdout);
}

const TaskResult& result_of(const std::vector<TaskResult>& rs, TaskKind k) {
  for (const TaskResult& r : rs) {
    if (r.kind == k) return r;
  }
  throw std::runtime_error("no " + to_string(k) + " result");
}

std::vector<TimedInput> logged_inputs(const EventLog& log) {
  std::vector<TimedInput> out;
  for (const LogRecord& r : log.records()) {
    if (r.kind == "input") out.push_back({r.session_seconds, input_from_json(r.payload.at("type"), r.payload.at("payload"))});
  }
  return out;
}

// Synthetic log in recorder shape with one measured pass per entry.
EventLog synthetic_log(const std::vector<std::pair<ViewCondition, std::vector<TaskResult>>>& passes) {
  EventLog log;
  double t = 0.0;
  log.append({t, std::nullopt, "session.start", {{"mode", "synthetic"}}});
  for (std::size_t p = 0; p < passes.size(); ++p) {
    log.append({t, std::nullopt, "pass.start",
                {{"pass", p}, {"condition", to_string(passes[p].first)}, {"graph_id", "g"}, {"role", "measured"}}});
    for (std::size_t i = 0; i < passes[p].second.size(); ++i) {
      const TaskResult& r = passes[p].second[i];
      log.append({t, std::nullopt, "task.start", {{"pass", p}, {"index", i}}});
      t += r.completion_time;
      log.append({t, std::nullopt, "task.end", {{"pass", p}, {"index", i}, {"result", result_to_json(r)}}});
    }
    log.append({t, std::nullopt, "pass.end", {{"pass", p}}});
  }
  log.append({t, std::nullopt, "session.end", nlohmann::json::object()});
  return log;
}

}  // namespace

int main() {
  criterion("graph-sizes", 1.0, [](Outcome& o) {
    const Graph small = generate_ba({165, 2, 1});
    const Graph large = generate_ba({415, 2, 1});
    o.detail << "165 -> " << small.edge_count() << " edges, 415 -> " << large.edge_count() << " edges";
    o.require(small.edge_count() == 326, "165 nodes must give 326 edges");
    o.require(large.edge_count() == 826, "415 nodes must give 826 edges");
  });

  criterion("degree-law", 10.0, [](Outcome& o) {
    const Graph g = generate_ba({10000, 2, 2024});
    const double gamma = oracle::fit_degree_exponent(g, 4, 100);
    o.detail << "gamma " << gamma;
    o.require(gamma >= 2.5 && gamma <= 3.5, "gamma in [2.5, 3.5]");
  });

  criterion("fibonacci-sphere", 1.0, [](Outcome& o) {
    const Vec3 c{1.5, -2.0, 0.25};
    const double r = 3.0;
    for (const std::size_t k : {5u, 20u, 50u, 100u}) {
      const auto pts = fibonacci_sphere(k, r, c);
      o.require(pts.size() == k, "k points");
      for (const Vec3& p : pts) o.require(std::abs(distance(p, c) - r) <= 1e-9, "radius within 1e-9");
      const double ideal = std::sqrt(8.0 * std::numbers::pi / (std::sqrt(3.0) * static_cast<double>(k)));
      const double sep = oracle::min_angular_separation(pts, c);
      o.detail << "k=" << k << " sep/ideal " << sep / ideal << "  ";
      o.require(sep >= 0.7 * ideal, "separation >= 0.7 ideal for k=" + std::to_string(k));
    }
  });

  criterion("clipping", 5.0, [](Outcome& o) {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_real_distribution<double> radius(0.1, 2.5);
    std::size_t disagreements = 0, inside = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const Vec3 p0{coord(rng), coord(rng), coord(rng)};
      const Vec3 p1{coord(rng), coord(rng), coord(rng)};
      const Vec3 c{coord(rng) * 0.3, coord(rng) * 0.3, coord(rng) * 0.3};
      const double r = radius(rng);
      for (const auto& [a, b] : clip_edge_to_sphere(p0, p1, c, r)) {
        for (int i = 0; i <= 20; ++i) {
          const Vec3 x = a + (b - a) * (i / 20.0);
          if (distance(x, c) < r - 1e-6) ++inside;
        }
      }
      const auto intervals = outside_intervals(p0, p1, c, r);
      for (int i = 0; i < 200; ++i) {
        const double t = (i + 0.5) / 200.0;
        const double gap = distance(p0 + (p1 - p0) * t, c) - r;
        if (std::abs(gap) <= 1e-6) continue;
        const bool visible = std::any_of(intervals.begin(), intervals.end(),
                                         [&](const auto& iv) { return t >= iv.first && t <= iv.second; });
        if (visible != (gap > 0.0)) ++disagreements;
      }
    }
    o.detail << "10000 cases, " << inside << " points inside, " << disagreements << " oracle disagreements";
    o.require(inside == 0, "no clipped point inside the sphere");
    o.require(disagreements == 0, "matches dense sampling");
  });

  // The large scene is shared by the remaining scene-level criteria; its
  // layout is not part of any single criterion's budget.
  const auto build_t0 = std::chrono::steady_clock::now();
  const fixture::SceneTasks large = fixture::make(415, 1);
  std::printf("# large scene built in %.3f s (415 nodes)\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - build_t0).count());

  criterion("ego-bubble-locality", 5.0, [&](Outcome& o) {
    const Scene& s = large.scene;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
      const NodeId u = static_cast<NodeId>(rng() % s.graph().node_count());
      const EgoViewState v =
          apply_condition(s.graph(), s.positions, ViewCondition::EgoBubble, u, s.bubble_radius_for(u));
      std::set<NodeId> displaced;
      for (const auto& [node, _] : v.displaced_positions) displaced.insert(node);
      const auto nb = s.graph().neighbors(u);
      o.require(displaced == std::set<NodeId>(nb.begin(), nb.end()), "displaced set equals neighbor set");
      const auto eff = effective_positions(v, s.positions);
      for (NodeId w = 0; w < s.positions.size(); ++w) {
        if (displaced.count(w)) continue;
        o.require(std::memcmp(&eff[w], &s.positions[w], sizeof(Vec3)) == 0, "non-neighbors unchanged bitwise");
      }
    }
    o.detail << "100 user nodes";
  });

  criterion("timing-model", 0.0, [&](Outcome& o) {
    double jump = 0.0;
    for (const ViewCondition c : {ViewCondition::EgoHighlight, ViewCondition::EgoBubble}) {
      const auto rs = logged_results(simulate_pass(large.scene, large.tasks, c, AgentKind::Jumper)).at(0).results;
      jump = result_of(rs, TaskKind::FoP).completion_time;
      o.require(std::abs(jump - 15.0) <= 0.1, "jumper 15.0 +- 0.1 s in " + to_string(c));
    }
    const TaskSet ref = fixture::with_reference_fop(large.scene, large.tasks);
    const auto rs = logged_results(simulate_pass(large.scene, ref, ViewCondition::Baseline, AgentKind::Flyer)).at(0).results;
    const double fly = result_of(rs, TaskKind::FoP).completion_time;
    o.detail << "jumper " << jump << " s, flyer " << fly << " s, ratio " << fly / jump;
    o.require(std::abs(fly - 25.0) <= 0.3 * 25.0, "flyer 25 s +- 30%");
    o.require(fly / jump >= 1.5, "ratio >= 1.5");
  });

  criterion("topology-oracles", 10.0, [](Outcome& o) {
    std::size_t pairs = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Graph g = seed % 2 ? oracle::random_connected_graph(50, 10 + seed, seed) : generate_ba({50, 2, seed});
      const auto fw = oracle::floyd_warshall(g);
      for (NodeId u = 0; u < 50; ++u) {
        const auto d = geodesic_distances(g, u);
        for (NodeId v = 0; v < 50; ++v) {
          o.require(d[v] == fw[u][v], "BFS distance equals Floyd-Warshall");
          const auto path = shortest_path(g, u, v);
          o.require(path.size() == static_cast<std::size_t>(fw[u][v]) + 1, "shortest path length");
          o.require(path.front() == u && path.back() == v, "path endpoints");
          for (std::size_t i = 0; i + 1 < path.size(); ++i) o.require(g.has_edge(path[i], path[i + 1]), "path edges");
          if (u < v) {
            o.require(common_neighbors(g, u, v) == oracle::brute_common_neighbors(g, u, v), "common neighbors");
            ++pairs;
          }
        }
      }
    }
    o.detail << "50 graphs, " << pairs << " pairs";
  });

  criterion("scoring-examples", 0.0, [](Outcome& o) {
    const auto fcn = score_fcn({1, 3}, {1, 2});
    o.require(fcn.correctness_rate == 0.5 && fcn.miss_rate == 0.5 && fcn.false_positive_rate == 0.5, "FCN (0.5, 0.5, 0.5)");
    const auto fcn_all = score_fcn({1, 2}, {1, 2});
    o.require(fcn_all.correctness_rate == 1 && fcn_all.miss_rate == 0 && fcn_all.false_positive_rate == 0, "FCN (1, 0, 0)");
    const auto fcn_none = score_fcn({}, {1, 2});
    o.require(fcn_none.correctness_rate == 0 && fcn_none.miss_rate == 1 && fcn_none.false_positive_rate == 0, "FCN (0, 1, 0)");
    o.require(score_end(40, 40).judgement_error == 0.0, "END exact");
    o.require(score_end(30, 40).judgement_error == 0.25 && score_end(30, 40).signed_error < 0, "END 0.25 under");
    o.require(score_end(0, 40).judgement_error == 1.0, "END 0 -> 1.0");
    const Graph g(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 4}});
    const std::vector<NodeId> truth{0, 1, 2, 3, 4};
    const auto exact = score_fip(truth, g, truth);
    o.require(exact.path_correct && *exact.path_deviation == 1.0, "FiP (true, 1.0)");
    const auto detour = score_fip({0, 5, 6, 7, 8, 9, 4}, g, truth);
    o.require(detour.path_correct && *detour.path_deviation == 1.5, "FiP (true, 1.5)");
    const auto broken = score_fip({0, 2, 3, 4}, g, truth);
    o.require(!broken.path_correct && !broken.path_deviation, "FiP (false, undefined)");
    const Ray ray{{0, 0, 0}, {0, 0, -1}};
    o.require(std::abs(score_so(ray, {0, 0, -4})) < 1e-12, "SO 0");
    o.require(std::abs(score_so(ray, {2, 0, 0}) - 90.0) < 1e-12, "SO 90");
    o.require(std::abs(score_so(ray, {0, 0, 3}) - 180.0) < 1e-12, "SO 180");
    o.detail << "FCN, END, FiP, SO examples";
  });

  criterion("study-plan", 0.0, [](Outcome& o) {
    for (const std::size_t n : {3u, 25u}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StudyPlan p = build_plan(n, seed);
        std::set<std::pair<ViewCondition, int>> pairs;
        for (std::size_t i = 0; i < 3; ++i) {
          std::set<ViewCondition> rc, cc;
          std::set<int> rg, cg;
          for (std::size_t j = 0; j < 3; ++j) {
            rc.insert(p.square[i][j].condition);
            cc.insert(p.square[j][i].condition);
            rg.insert(p.square[i][j].graph);
            cg.insert(p.square[j][i].graph);
            pairs.insert({p.square[i][j].condition, p.square[i][j].graph});
          }
          o.require(rc.size() == 3 && cc.size() == 3 && rg.size() == 3 && cg.size() == 3, "Latin property");
        }
        o.require(pairs.size() == 9, "orthogonality");
        o.require(p.rows.size() == n, "one row per participant");
        for (const PlanRow& r : p.rows) {
          o.require(r.cells == std::vector<PlanCell>(p.square[r.participant % 3].begin(), p.square[r.participant % 3].end()),
                    "rows cycle through the square");
        }
      }
    }
    const StudyMaterial m = prepare_material(42);
    const StudyPlan plan = build_plan(3, 42);
    std::size_t passes = 0;
    for (const PlanRow& row : plan.rows) {
      const EventLog log = EventLog::from_ndjson(run_session(row, m, SessionMode::SimulatedAgent).to_ndjson());
      const auto logged = logged_results(log);
      o.require(logged.size() == 6, "six passes per session");
      o.require(replay(log, m.lookup()) == logged, "replay reproduces logged TaskResults");
      passes += logged.size();
    }
    o.detail << "participants 3 and 25 x 10 seeds; " << passes << " simulated passes replayed";
  });

  criterion("analysis", 0.0, [](Outcome& o) {
    const std::vector<double> fin{10, 12, 11, 13, 100};
    const std::vector<double> fop{1, 2, 3, 4, 10};
    std::vector<EventLog> logs;
    for (std::size_t i = 0; i < 5; ++i) {
      TaskResult a, b;
      a.kind = TaskKind::FiN;
      a.completion_time = fin[i];
      b.kind = TaskKind::FoP;
      b.completion_time = fop[i];
      logs.push_back(synthetic_log({{ViewCondition::Baseline, {a}}, {ViewCondition::EgoBubble, {b}}}));
    }
    const AnalysisReport rep = analyze(logs);
    const auto find = [&](const std::string& task) -> const ReportRow& {
      for (const ReportRow& r : rep.rows) {
        if (r.task == task && r.measure == "completion_time") return r;
      }
      throw std::runtime_error("missing row " + task);
    };
    // Hand-computed: 100 s is beyond Q3 + 1.5 IQR of the log times; 10 s is not.
    const ReportRow& a = find("FiN");
    const ReportRow& b = find("FoP");
    o.require(a.kept == 4 && std::abs(a.mean - 11.5) < 1e-9 && std::abs(a.median - 11.5) < 1e-9, "FiN mean/median 11.5");
    o.require(b.kept == 5 && std::abs(b.mean - 4.0) < 1e-9 && std::abs(b.median - 3.0) < 1e-9, "FoP mean 4, median 3");
    const auto f = filter_outliers({1, 2, 3, 4, 100});
    o.require(f.kept == std::vector<double>{1, 2, 3, 4}, "{1,2,3,4,100} drops 100");
    o.detail << "FiN " << a.mean << "/" << a.median << ", FoP " << b.mean << "/" << b.median;
  });

  criterion("protocol", 0.0, [&](Outcome& o) {
    std::mt19937_64 rng(9);
    std::size_t roundtrips = 0;
    // Client side: every input kind, randomized.
    for (int i = 0; i < 2400; ++i) {
      Input in;
      switch (i % 12) {
        case 0: in = FlyInput{std::uniform_real_distribution<double>(-1, 1)(rng), 0.5}; break;
        case 1: in = HeadInput{Quat::look_along({1.0 + i, 2.0, -3.0})}; break;
        case 2: in = PointerInput{Ray{{1.0 * i, 2, 3}, normalized(Vec3{1, 1.0 * i, -1})}}; break;
        case 3: in = SelectAction{static_cast<NodeId>(rng() % 415)}; break;
        case 4: in = DeselectAction{static_cast<NodeId>(rng() % 415)}; break;
        case 5: in = JumpAction{static_cast<NodeId>(rng() % 415)}; break;
        case 6: in = BookmarkAction{static_cast<NodeId>(i % 415)}; break;
        case 7: in = SwitchViewAction{}; break;
        case 8: in = SubmitAction{TaskKind::FiP, std::nullopt, {1, 2, static_cast<NodeId>(i)}, std::nullopt}; break;
        case 9: in = SubmitAction{TaskKind::END, static_cast<long long>(i), {}, std::nullopt}; break;
        case 10: in = Questionnaire{Instrument::SSQ, std::vector<int>(16, i % 4)}; break;
        default: in = Questionnaire{Instrument::TLX, {1, 2, 3, 4, 5, i % 101}}; break;
      }
      const ClientMessage cm = i % 100 == 0 ? ClientMessage{Hello{"viewer-" + std::to_string(i)}} : ClientMessage{in};
      const Message m = client_message(cm, static_cast<std::uint64_t>(i), 0.1 * i);
      const Message back = decode(encode(m));
      o.require(back == m && parse_client_message(back) == cm, "client roundtrip");
      ++roundtrips;
    }
    // Engine equivalence: a protocol session fed the agent's inputs, with
    // server ticks interleaved, ends in the bare engine's state.
    for (const ViewCondition c : {ViewCondition::Baseline, ViewCondition::EgoHighlight, ViewCondition::EgoBubble}) {
      PassEngine bare(large.scene, large.tasks, c);
      EventLog ref_log;
      PassRecorder rec(bare, ref_log, {0, c, "scene", PassRole::Measured});
      drive_agent(rec, agent_for(c), 0.0);

      ProtocolSession session(large.scene, large.tasks, c, {0, c, "scene", PassRole::Measured});
      for (const Message& m : session.start(0.0)) {
        o.require(parse_server_message(decode(encode(m))) == parse_server_message(m), "server roundtrip");
        ++roundtrips;
      }
      double t = 0.0;
      std::uint64_t seq = 1;
      for (const TimedInput& in : logged_inputs(ref_log)) {
        for (const Message& m : session.tick(t + (in.time - t) * 0.5)) {
          o.require(parse_server_message(decode(encode(m))) == parse_server_message(m), "server roundtrip");
          ++roundtrips;
        }
        for (const Message& m : session.handle(decode(encode(client_message(in.input, seq++, in.time))))) {
          o.require(m.type != "error", "no protocol errors");
          o.require(parse_server_message(decode(encode(m))) == parse_server_message(m), "server roundtrip");
          ++roundtrips;
        }
        t = in.time;
      }
      o.require(session.engine().state() == bare.state(), "engine-equivalent final state (" + to_string(c) + ")");
      const SceneLookup lookup = [&](const std::string&) -> const Scene& { return large.scene; };
      o.require(replay(session.log(), lookup).at(0).results == bare.state().results, "session log replays");
    }
    o.detail << roundtrips << " message roundtrips, 3 equivalence replays";
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
