#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "egonet/agent.hpp"
#include "egonet/errors.hpp"
#include "egonet/protocol.hpp"
#include "egonet/server.hpp"
#include "egonet/study.hpp"
#include "fixtures.hpp"

using namespace egonet;

namespace {

double coord(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(-1e3, 1e3)(rng); }
Vec3 rvec(std::mt19937_64& rng) { return {coord(rng), coord(rng), coord(rng)}; }
NodeId rnode(std::mt19937_64& rng) { return static_cast<NodeId>(rng() % 500); }

Input random_input(std::mt19937_64& rng) {
  const TaskKind kinds[] = {TaskKind::FCN, TaskKind::END, TaskKind::FiP, TaskKind::SO_OD, TaskKind::SO_DD};
  switch (rng() % 12) {
    case 0: return TickInput{};
    case 1: return FlyInput{coord(rng) / 1e3, coord(rng) / 1e3};
    case 2: return HeadInput{Quat::look_along(rvec(rng))};
    case 3: return PointerInput{Ray{rvec(rng), normalized(rvec(rng))}};
    case 4: return SelectAction{rnode(rng)};
    case 5: return DeselectAction{rnode(rng)};
    case 6: return JumpAction{rnode(rng)};
    case 7: return BookmarkAction{rnode(rng)};
    case 8: return SwitchViewAction{};
    case 9: {
      SubmitAction s{kinds[rng() % 5], std::nullopt, {}, std::nullopt};
      if (rng() % 2) s.estimate = static_cast<long long>(rng() % 100);
      for (std::size_t i = rng() % 6; i > 0; --i) s.path.push_back(rnode(rng));
      if (rng() % 2) s.ray = Ray{rvec(rng), normalized(rvec(rng))};
      return s;
    }
    case 10: {
      Questionnaire q{Instrument::SSQ, {}};
      for (int i = 0; i < 16; ++i) q.items.push_back(static_cast<int>(rng() % 4));
      return q;
    }
    default: {
      Questionnaire q{Instrument::TLX, {}};
      for (int i = 0; i < 6; ++i) q.items.push_back(static_cast<int>(rng() % 101));
      return q;
    }
  }
}

ServerMessage random_server_message(std::mt19937_64& rng, const Scene& scene) {
  switch (rng() % 7) {
    case 0:
      return SceneInit{graph_to_json(scene.graph_file), scene.positions, scene.calibration.node_radius,
                       static_cast<ViewCondition>(rng() % 3), scene.overview, 8};
    case 1: {
      const NodeId u = static_cast<NodeId>(rng() % scene.graph().node_count());
      return ViewStateMsg{apply_condition(scene.graph(), scene.positions, ViewCondition::EgoBubble, u,
                                          scene.bubble_radius_for(u))};
    }
    case 2: {
      AnimUpdate a{Pose{rvec(rng), Quat::look_along(rvec(rng)), Ray{rvec(rng), normalized(rvec(rng))}},
                   std::uniform_real_distribution<double>(0, 1)(rng),
                   {}};
      for (int i = 0; i < 5; ++i) a.moved[rnode(rng)] = rvec(rng);
      return a;
    }
    case 3: return TaskPrompt{rng() % 8, nlohmann::json{{"kind", "FoP"}, {"path", {1, 2, 3, 4, 5}}, {"anchor", nullptr}}};
    case 4: {
      TaskResult r;
      r.kind = TaskKind::SO_DD;
      r.completion_time = coord(rng);
      r.ray = Ray{rvec(rng), normalized(rvec(rng))};
      r.angle_deviation_degrees = std::abs(coord(rng)) / 10;
      return TaskComplete{rng() % 8, r};
    }
    case 5: return HudInfo{rng() % 8, 8, rng() % 2 == 0, std::abs(coord(rng)), rng() % 5, {rnode(rng), rnode(rng)}, rng() % 2 == 0};
    default: {
      ErrorMsg e{"bad thing " + std::to_string(rng()), std::nullopt};
      if (rng() % 2) e.ref_seq = rng();
      return e;
    }
  }
}

std::vector<TimedInput> logged_inputs(const EventLog& log) {
  std::vector<TimedInput> out;
  for (const LogRecord& r : log.records()) {
    if (r.kind == "input") out.push_back({r.session_seconds, input_from_json(r.payload.at("type"), r.payload.at("payload"))});
  }
  return out;
}

std::vector<TaskResult> completed(const std::vector<Message>& msgs) {
  std::vector<TaskResult> out;
  for (const Message& m : msgs) {
    if (m.type == "task.complete") out.push_back(std::get<TaskComplete>(parse_server_message(m)).result);
  }
  return out;
}

}  // namespace

TEST_CASE("client messages round trip through the wire format") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const ClientMessage cm = (i % 50 == 0) ? ClientMessage{Hello{"viewer-" + std::to_string(i)}}
                                           : ClientMessage{random_input(rng)};
    const Message m = client_message(cm, rng(), std::abs(coord(rng)));
    const Message back = decode(encode(m));
    CHECK(back == m);
    CHECK(parse_client_message(back) == cm);
    const auto& types = client_message_types();
    CHECK(std::find(types.begin(), types.end(), back.type) != types.end());
  }
}

TEST_CASE("server messages round trip through the wire format") {
  const auto& f = fixture::small();
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const ServerMessage sm = random_server_message(rng, f.scene);
    const Message m = server_message(sm, rng(), std::abs(coord(rng)));
    const Message back = decode(encode(m));
    CHECK(back == m);
    CHECK(parse_server_message(back) == sm);
    const auto& types = server_message_types();
    CHECK(std::find(types.begin(), types.end(), back.type) != types.end());
  }
}

TEST_CASE("malformed messages raise protocol errors") {
  CHECK_THROWS_AS(decode("{not json"), ProtocolError);
  CHECK_THROWS_AS(decode("[1,2]"), ProtocolError);
  CHECK_THROWS_AS(decode("{\"seq\":1}"), ProtocolError);
  CHECK_THROWS_AS(decode("{\"type\":\"tick\",\"payload\":3}"), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(decode("{\"type\":\"action.warp\"}")), ProtocolError);
  CHECK_THROWS_AS(parse_client_message(decode("{\"type\":\"input.fly\",\"payload\":{\"axis_x\":1}}")), ProtocolError);
  CHECK_THROWS_AS(parse_server_message(decode("{\"type\":\"hud.info\"}")), ProtocolError);
}

TEST_CASE("a protocol session matches the bare engine input for input") {
  const auto& f = fixture::small();
  std::mt19937_64 rng(5);
  for (const ViewCondition c : {ViewCondition::Baseline, ViewCondition::EgoHighlight, ViewCondition::EgoBubble}) {
    const EventLog reference = simulate_pass(f.scene, f.tasks, c, agent_for(c));
    const auto inputs = logged_inputs(reference);
    const auto expected = logged_results(reference).at(0).results;

    ProtocolSession session(f.scene, f.tasks, c, {0, c, "scene", PassRole::Measured});
    std::vector<Message> sent = session.start(0.0);
    CHECK(sent.at(0).type == "scene.init");
    double t = 0.0;
    std::uint64_t seq = 1;
    for (const TimedInput& in : inputs) {
      // Server ticks at arbitrary moments in between.
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
        t += (in.time - t) * std::uniform_real_distribution<double>(0, 1)(rng);
        for (Message& m : session.tick(t)) sent.push_back(std::move(m));
      }
      for (Message& m : session.handle(decode(encode(client_message(in.input, seq++, in.time))))) {
        CHECK(m.type != "error");
        sent.push_back(std::move(m));
      }
      t = in.time;
    }
    CHECK(session.finished());
    CHECK(session.engine().state().results == expected);
    CHECK(completed(sent) == expected);
    // Sequence numbers strictly increase.
    for (std::size_t i = 1; i < sent.size(); ++i) CHECK(sent[i].seq > sent[i - 1].seq);

    // The session's own log replays to the same results.
    session.close(t);
    const SceneLookup lookup = [&](const std::string&) -> const Scene& { return f.scene; };
    CHECK(replay(session.log(), lookup).at(0).results == expected);
    CHECK(logged_results(session.log()).at(0).results == expected);
  }
}

TEST_CASE("ticks that finish a jump are logged so replays see them") {
  const auto& f = fixture::small();
  ProtocolSession session(f.scene, f.tasks, ViewCondition::EgoBubble, {0, ViewCondition::EgoBubble, "scene", PassRole::Measured});
  session.start(0.0);
  const NodeId from = *f.tasks[0].anchor;
  NodeId to = f.scene.graph().neighbors(from)[0];
  if (to == *f.tasks[0].target) to = f.scene.graph().neighbors(from)[1];
  session.handle(client_message(Input{JumpAction{to}}, 1, 1.0));
  const auto before = session.log().records().size();
  const auto mid = session.tick(2.0);
  CHECK(session.log().records().size() == before);  // nothing happened yet
  REQUIRE(mid.size() == 1);
  CHECK(mid[0].type == "anim.update");
  const auto anim = std::get<AnimUpdate>(parse_server_message(mid[0]));
  CHECK(anim.progress == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(anim.moved.empty());

  const auto done = session.tick(4.5);
  CHECK(session.log().records().size() == before + 1);
  bool saw_view = false;
  for (const Message& m : done) saw_view |= m.type == "view.state";
  CHECK(saw_view);
  CHECK(session.engine().state().user_node == to);
}

TEST_CASE("rejected messages come back as errors naming their seq") {
  const auto& f = fixture::small();
  ProtocolSession session(f.scene, f.tasks, ViewCondition::EgoHighlight, {0, ViewCondition::EgoHighlight, "scene", PassRole::Measured});
  CHECK(session.handle(client_message(Input{TickInput{}}, 1, 0.0)).at(0).type == "error");
  session.start(0.0);
  const auto log_size = session.log().records().size();

  const auto r1 = session.handle(client_message(Input{FlyInput{0, 1}}, 41, 1.0));
  REQUIRE(r1.size() == 1);
  const auto e1 = std::get<ErrorMsg>(parse_server_message(r1[0]));
  CHECK(e1.ref_seq == 41u);
  CHECK(e1.message.find("baseline") != std::string::npos);

  const auto r2 = session.handle(client_message(Input{SubmitAction{TaskKind::END, -3, {}, std::nullopt}}, 42, 1.0));
  CHECK(std::get<ErrorMsg>(parse_server_message(r2.at(0))).ref_seq == 42u);

  Message garbage{"action.select", 43, 1.0, {{"node", "seven"}}};
  CHECK(std::get<ErrorMsg>(parse_server_message(session.handle(garbage).at(0))).ref_seq == 43u);

  session.handle(client_message(Input{TickInput{}}, 44, 5.0));
  const auto r3 = session.handle(client_message(Input{SelectAction{0}}, 45, 2.0));
  CHECK(r3.at(0).type == "error");

  CHECK(session.log().records().size() == log_size);

  const auto hello = session.handle(client_message(Hello{"again"}, 46, 6.0));
  CHECK(hello.at(0).type == "scene.init");
  bool prompt = false;
  for (const Message& m : hello) prompt |= m.type == "task.prompt";
  CHECK(prompt);
}

TEST_CASE("the TCP server speaks line-delimited JSON and writes a log") {
  const auto& f = fixture::small();
  const auto dir = std::filesystem::temp_directory_path() / "egonet_server_test";
  std::filesystem::remove_all(dir);
  ServerConfig config;
  config.port = 0;
  config.log_dir = dir.string();
  Server server(f.scene, f.tasks, ViewCondition::EgoBubble, config);
  server.listen();
  REQUIRE(server.port() != 0);
  std::thread runner([&] { server.run(); });

  const auto connect_client = [&] {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(server.port());
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    return fd;
  };
  const auto send_line = [](int fd, const Message& m) {
    const std::string line = encode(m) + "\n";
    REQUIRE(::send(fd, line.data(), line.size(), 0) == static_cast<ssize_t>(line.size()));
  };
  std::string buffer;
  // Reads until a message of the wanted type arrives (or 5 s pass).
  const auto wait_for = [&](int fd, const std::string& type) -> std::optional<Message> {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (std::chrono::steady_clock::now() < deadline) {
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        const Message m = decode(buffer.substr(0, nl));
        buffer.erase(0, nl + 1);
        if (m.type == type) return m;
      }
      pollfd pfd{fd, POLLIN, 0};
      if (::poll(&pfd, 1, 50) > 0) {
        char buf[65536];
        const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0) break;
        buffer.append(buf, static_cast<std::size_t>(n));
      }
    }
    return std::nullopt;
  };

  int fd = connect_client();
  send_line(fd, client_message(Hello{"test"}, 1, 0.0));
  const auto init = wait_for(fd, "scene.init");
  REQUIRE(init.has_value());
  CHECK(std::get<SceneInit>(parse_server_message(*init)).positions.size() == f.scene.positions.size());

  send_line(fd, client_message(Input{FlyInput{0, 1}}, 2, 0.0));
  const auto err = wait_for(fd, "error");
  REQUIRE(err.has_value());
  CHECK(std::get<ErrorMsg>(parse_server_message(*err)).ref_seq == 2u);

  // Completing FiN survives a reconnect: the new client sees the next prompt.
  send_line(fd, client_message(Input{SelectAction{*f.tasks[0].target}}, 3, 0.0));
  const auto done = wait_for(fd, "task.complete");
  REQUIRE(done.has_value());
  ::close(fd);

  buffer.clear();
  fd = connect_client();
  send_line(fd, client_message(Hello{"test"}, 1, 0.0));
  const auto prompt = wait_for(fd, "task.prompt");
  REQUIRE(prompt.has_value());
  CHECK(std::get<TaskPrompt>(parse_server_message(*prompt)).index == 1);
  ::close(fd);

  server.stop();
  runner.join();
  CHECK(server.connections() == 2);
  const EventLog log = EventLog::read(server.log_path());
  CHECK(log.records().front().kind == "session.start");
  CHECK(log.records().back().kind == "session.end");
  REQUIRE(logged_results(log).at(0).results.size() == 1);
  CHECK(log.records().front().wall_time.has_value());
  std::filesystem::remove_all(dir);
}

TEST_CASE("default port comes from the environment") {
  ::unsetenv(kPortEnv);
  CHECK(default_port() == kDefaultPort);
  ::setenv(kPortEnv, "9123", 1);
  CHECK(default_port() == 9123);
  ::setenv(kPortEnv, "http", 1);
  CHECK_THROWS_AS(default_port(), ParameterError);
  ::setenv(kPortEnv, "70000", 1);
  CHECK_THROWS_AS(default_port(), ParameterError);
  ::unsetenv(kPortEnv);
}
