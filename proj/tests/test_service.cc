#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "mnsim/text.hpp"

namespace mnsim::svc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() / fmt::format("mnsim-{}-{}-{}", info->test_suite_name(), info->name(), ::getpid());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Events, TextRoundTripsThroughDescribeAndJson) {
  const char* text =
      "# comment\n"
      "fail-link 3.ROUTER1 4.ROUTER2\n"
      "restore-link 3.ROUTER1 4.ROUTER2\n"
      "fail-router 5.ROUTER3\n"
      "restore-router 5.ROUTER3\n"
      "\n"
      "hijack 2 6.0.0.0/8 more-specific\n"
      "hijack 2 6.0.0.0/8\n"
      "withdraw 2\n"
      "withdraw 2 6.0.0.0/9\n"
      "announce 6 6.0.0.0/9\n"
      "mitigate 6\n"
      "converge\n"
      "snapshot after-hijack\n"
      "grade all default\n"
      "grade 3 strict\n";
  auto events = parse_events(text);
  ASSERT_EQ(events.size(), 14u);
  std::vector<std::string> lines;
  for (auto line : mnsim::text::lines(text))
    if (!line.empty() && line[0] != '#') lines.emplace_back(line);
  for (size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(describe(events[i]), lines[i]);
    auto j = event_to_json(events[i]);
    EXPECT_EQ(event_to_json(parse_event_json(j)), j);
  }
  EXPECT_FALSE(is_mutating(events[10]));
  EXPECT_FALSE(is_mutating(events[11]));
  EXPECT_FALSE(is_mutating(events[12]));
  EXPECT_TRUE(is_mutating(events[0]));
}

TEST(Events, ApplyReadsScriptRelativeToBase) {
  auto dir = scratch_dir();
  std::ofstream(dir / "r1.cfg") << "router ospf\n";
  auto events = parse_events("apply 3 ROUTER1 r1.cfg\n", dir);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(std::get<ApplyConfig>(events[0]).script, "router ospf\n");
  EXPECT_THROW(parse_events("apply 3 ROUTER1 missing.cfg\n", dir), EventError);
}

TEST(Events, MalformedInputThrows) {
  for (const char* bad : {"explode 3\n", "fail-link 3.ROUTER1\n", "hijack x 1.0.0.0/8\n", "hijack 2 1.0.0.1/8\n",
                          "withdraw\n", "grade\n", "fail-router ROUTER1\n"})
    EXPECT_THROW(parse_events(bad), EventError) << bad;
  EXPECT_THROW(parse_event_json("{"), EventError);
  EXPECT_THROW(parse_event_json(R"({"type":"teleport"})"), EventError);
  EXPECT_THROW(parse_event_json(R"({"type":"mitigate"})"), EventError);
}

TEST(Events, ApplyToUnknownThingsThrows) {
  Network net(topo::generate_reference_topology(1, 6));
  EXPECT_THROW(apply_event(net, FailLink{{1, "ROUTER1"}, {2, "ROUTER9"}}), EventError);
  EXPECT_THROW(apply_event(net, FailRouter{{77, "ROUTER1"}}), EventError);
  EXPECT_THROW(apply_event(net, ApplyConfig{1, "NOPE", "router ospf\n"}), EventError);
}

TEST(Scenario, ReferenceScenarioPasses) {
  auto dir = scratch_dir();
  write_reference_scenario(topo::generate_reference_topology(1, 6), dir);
  EXPECT_TRUE(fs::exists(dir / "topology.txt"));
  EXPECT_TRUE(fs::exists(dir / "rubrics" / "default.rubric"));
  auto r = run_scenario(dir);
  EXPECT_EQ(r.exit_code(), 0) << fmt::format("{}", fmt::join(r.log, "\n"));
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.grades_passed());
  EXPECT_FALSE(r.grades.empty());
  EXPECT_TRUE(fs::exists(dir / "out" / "matrices" / "000.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "snapshots" / "final" / "matrix.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "log.txt"));
  size_t grade_files = 0;
  for (const auto& e : fs::directory_iterator(dir / "out" / "grades")) grade_files += e.path().extension() == ".json";
  EXPECT_EQ(grade_files, r.grades.size());
}

TEST(Scenario, EmptyConfigsFailGradesWithExitOne) {
  auto dir = scratch_dir();
  write_reference_scenario(topo::generate_reference_topology(1, 6), dir);
  fs::remove_all(dir / "configs");
  auto r = run_scenario(dir);
  EXPECT_EQ(r.exit_code(), 1);
  EXPECT_FALSE(r.grades_passed());
}

TEST(Scenario, LinkFailureShowsInTheMatrix) {
  auto dir = scratch_dir();
  auto spec = topo::generate_reference_topology(1, 6);
  write_reference_scenario(spec, dir);
  // Cut every link of the last stub.
  auto stub = spec.ases.back().asn;
  std::string events;
  for (const auto& l : spec.links)
    if (l.a.asn == stub || l.b.asn == stub) events += fmt::format("fail-link {} {}\n", l.a.str(), l.b.str());
  events += "snapshot cut\n";
  std::ofstream(dir / "events.txt") << events;
  auto r = run_scenario(dir);
  auto s = *r.matrix.index_of(stub);
  for (size_t i = 0; i < r.matrix.asns.size(); ++i)
    if (i != s) {
      EXPECT_FALSE(r.matrix.green(i, s));
    }
  EXPECT_TRUE(r.matrix.green(s, s));
  auto diag = json::parse(std::ifstream(dir / "out" / "snapshots" / "cut" / "diagnosis.json"));
  bool missing = false;
  for (const auto& f : diag["findings"]) missing |= f["code"] == "MissingEbgp" && f["asn"] == stub;
  EXPECT_TRUE(missing);
}

TEST(Scenario, MissingTopologyThrows) {
  auto dir = scratch_dir();
  EXPECT_ANY_THROW(run_scenario(dir));
}

class ShellTest : public ::testing::Test {
 protected:
  void SetUp() override {
    net_ = std::make_unique<Network>(testing::reference_network(1, 6));
    asn_ = testing::first_transit(*net_);
  }
  std::unique_ptr<Network> net_;
  uint32_t asn_ = 0;
};

TEST_F(ShellTest, NavigatesAndShows) {
  Shell sh(*net_, asn_);
  EXPECT_EQ(sh.prompt(), fmt::format("AS{}> ", asn_));
  EXPECT_EQ(sh.execute("goto ROUTER1"), "");
  EXPECT_EQ(sh.prompt(), "ROUTER1# ");
  EXPECT_NE(sh.execute("show ip bgp").find(net_->plan().ases.at(asn_).as_prefix.str()), std::string::npos);
  EXPECT_NE(sh.execute("show ip route").find("O "), std::string::npos);
  EXPECT_NE(sh.execute("ping " + net_->plan().ases.at(asn_).loopbacks.at("ROUTER2").str()).find("success"),
            std::string::npos);
  EXPECT_EQ(sh.execute("exit"), "");
  EXPECT_EQ(sh.prompt(), fmt::format("AS{}> ", asn_));
  sh.execute("exit");
  EXPECT_TRUE(sh.finished());
}

TEST_F(ShellTest, ConfigLinesApplyLiveAndStaleViewsAreRefused) {
  Shell sh(*net_, asn_);
  sh.execute(fmt::format("goto {}.ROUTER2", asn_));
  sh.execute("interface lo");
  EXPECT_EQ(sh.prompt(), "ROUTER2(config-if)# ");
  EXPECT_EQ(sh.context().interface, "lo");
  sh.execute("shutdown");
  ASSERT_EQ(sh.mutations().size(), 2u);
  EXPECT_TRUE(net_->device(net_->id(asn_, "ROUTER2")).config.interfaces.at("lo").shutdown);
  EXPECT_NE(sh.execute("show ip route").find("converge"), std::string::npos);
  EXPECT_NE(sh.execute("show running-config").find("shutdown"), std::string::npos);
  sh.execute("converge");
  EXPECT_FALSE(net_->stale());
  EXPECT_NE(sh.execute("bogus words").find("%"), std::string::npos);
}

TEST_F(ShellTest, OtherAsesAreOffLimits) {
  Shell sh(*net_, asn_);
  uint32_t other = asn_ == 1 ? 2 : 1;
  EXPECT_THROW(sh.execute(fmt::format("goto {} ROUTER1", other)), PermissionDenied);
  EXPECT_THROW(sh.execute(fmt::format("goto {}.ROUTER1", other)), PermissionDenied);
  EXPECT_FALSE(sh.device());
  uint32_t auto_as = 0;
  for (const auto& as : net_->spec().ases)
    if (as.auto_configured) auto_as = as.asn;
  ASSERT_NE(auto_as, 0u);
  EXPECT_THROW(Shell(*net_, auto_as), PermissionDenied);
}

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<Service>(testing::reference_network(1, 6));
    port_ = service_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    asn_ = testing::first_transit(*service_->state()->net);
  }
  void TearDown() override { service_->stop(); }
  httplib::Headers bearer(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
  uint32_t asn_ = 0;
};

TEST_F(Http, ReadEndpoints) {
  auto m = client_->Get("/matrix");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->status, 200);
  auto mj = json::parse(m->body);
  EXPECT_EQ(mj["asns"].size(), 6u);

  auto d = client_->Get("/matrix/diagnosis");
  ASSERT_TRUE(d);
  EXPECT_TRUE(json::parse(d->body)["findings"].empty());

  auto h = client_->Get("/matrix/history");
  ASSERT_TRUE(h);
  EXPECT_GE(json::parse(h->body)["history"].size(), 1u);

  auto t = client_->Get("/topology");
  ASSERT_TRUE(t);
  auto tj = json::parse(t->body);
  EXPECT_EQ(tj["nodes"].size(), 7u);  // six ASes and one IXP
  EXPECT_FALSE(tj["edges"].empty());

  auto lg = client_->Get(fmt::format("/lg/{}/ROUTER1/bgp", asn_));
  ASSERT_TRUE(lg);
  EXPECT_EQ(lg->status, 200);
  EXPECT_NE(lg->get_header_value("Content-Type").find("text/plain"), std::string::npos);

  auto p = client_->Get(fmt::format("/path?src={}&dst={}", asn_, 6));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->status, 200);
  auto pj = json::parse(p->body);
  EXPECT_EQ(pj["asns"].front(), asn_);
  EXPECT_TRUE(pj["valley_free"].get<bool>());
}

TEST_F(Http, ReadErrors) {
  EXPECT_EQ(client_->Get(fmt::format("/lg/{}/ROUTER1/arp", asn_))->status, 404);
  EXPECT_EQ(client_->Get(fmt::format("/lg/{}/NOPE/bgp", asn_))->status, 404);
  EXPECT_EQ(client_->Get("/lg/x/ROUTER1/bgp")->status, 400);
  EXPECT_EQ(client_->Get("/path?src=1")->status, 400);
  EXPECT_EQ(client_->Get("/path?src=1&dst=99")->status, 404);
}

TEST_F(Http, ConfigAuthorization) {
  auto path = fmt::format("/as/{}/device/ROUTER1/config", asn_);
  EXPECT_EQ(client_->Post(path, "router ospf\n", "text/plain")->status, 401);
  EXPECT_EQ(client_->Post(path, bearer("deadbeef"), "router ospf\n", "text/plain")->status, 401);
  uint32_t other = asn_ == 1 ? 2 : 1;
  EXPECT_EQ(client_->Post(path, bearer(service_->token(other)), "router ospf\n", "text/plain")->status, 403);
  EXPECT_EQ(client_->Post(fmt::format("/as/{}/device/NOPE/config", asn_), bearer(service_->token(asn_)), "x\n",
                          "text/plain")
                ->status,
            404);
  auto ok = client_->Post(path, bearer(service_->token(asn_)), "interface lo\n bogus\n", "text/plain");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  auto j = json::parse(ok->body);
  EXPECT_EQ(j["applied"], 1);
  ASSERT_EQ(j["diagnostics"].size(), 1u);
  EXPECT_EQ(j["diagnostics"][0]["line"], 2);
  EXPECT_EQ(j["diagnostics"][0]["severity"], "warning");  // unknown verbs are skipped
  EXPECT_TRUE(j["converged"].get<bool>());
}

// Every token may configure its own AS and no other.
TEST_F(Http, TokensAreIsolatedPerAs) {
  auto asns = service_->state()->net->asns();
  for (auto owner : asns)
    for (auto target : asns) {
      auto r = client_->Post(fmt::format("/as/{}/device/ROUTER1/config?defer=1", target), bearer(service_->token(owner)),
                             "! nothing\n", "text/plain");
      ASSERT_TRUE(r);
      EXPECT_EQ(r->status, owner == target ? 200 : 403) << owner << " -> " << target;
    }
}

TEST_F(Http, EventsNeedInstructor) {
  auto body = R"({"type":"converge"})";
  EXPECT_EQ(client_->Post("/event", body, "application/json")->status, 401);
  EXPECT_EQ(client_->Post("/event", bearer(service_->token(asn_)), body, "application/json")->status, 403);
  auto r = client_->Post("/event", bearer(service_->instructor_token()), body, "application/json");
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(client_->Post("/event", bearer(service_->instructor_token()), R"({"type":"snapshot","tag":"x"})",
                          "application/json")
                ->status,
            400);
  EXPECT_EQ(client_->Post("/event", bearer(service_->instructor_token()), "nope", "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/event", bearer(service_->instructor_token()), R"({"type":"fail-router","router":"9.ROUTER1"})",
                          "application/json")
                ->status,
            404);
}

TEST_F(Http, GradeAndLinkFailureEvents) {
  auto g = client_->Post("/event", bearer(service_->instructor_token()), R"({"type":"grade"})", "application/json");
  ASSERT_TRUE(g);
  auto reports = json::parse(g->body)["reports"];
  ASSERT_FALSE(reports.empty());
  for (const auto& r : reports) EXPECT_EQ(r["score"], r["max_score"]);

  const auto& spec = service_->state()->net->spec();
  auto stub = spec.ases.back().asn;
  for (const auto& l : spec.links) {
    if (l.a.asn != stub && l.b.asn != stub) continue;
    json ev{{"type", "fail-link"}, {"a", l.a.str()}, {"b", l.b.str()}};
    auto r = client_->Post("/event?defer=1", bearer(service_->instructor_token()), ev.dump(), "application/json");
    ASSERT_EQ(r->status, 200);
    EXPECT_TRUE(json::parse(r->body)["deferred"].get<bool>());
  }
  // Deferred events are not visible until a converge.
  auto before = json::parse(client_->Get("/matrix")->body);
  auto r = client_->Post("/event", bearer(service_->instructor_token()), R"({"type":"converge"})", "application/json");
  ASSERT_EQ(r->status, 200);
  auto after = json::parse(client_->Get("/matrix")->body);
  EXPECT_NE(before["cells"], after["cells"]);
  auto diag = json::parse(client_->Get("/matrix/diagnosis")->body);
  EXPECT_FALSE(diag["findings"].empty());
  EXPECT_GE(json::parse(client_->Get("/matrix/history")->body)["history"].size(), 2u);
}

TEST_F(Http, ConcurrentWritersAndReaders) {
  auto asns = service_->state()->net->asns();
  std::atomic<int> failures = 0;
  std::atomic<bool> done = false;
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", port_);
    while (!done) {
      auto r = c.Get("/matrix");
      if (!r || r->status != 200 || json::parse(r->body)["asns"].size() != asns.size()) ++failures;
    }
  });
  std::vector<std::thread> writers;
  for (auto asn : asns) {
    writers.emplace_back([&, asn] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < 3; ++i) {
        auto r = c.Post(fmt::format("/as/{}/device/ROUTER1/config", asn), bearer(service_->token(asn)),
                        fmt::format("ip route 99.{}.{}.0/24 via {}\n", asn, i,
                                    service_->state()->net->plan().ases.at(asn).loopbacks.at("ROUTER2").str()),
                        "text/plain");
        if (!r || r->status != 200) ++failures;
      }
    });
  }
  for (auto& w : writers) w.join();
  done = true;
  reader.join();
  EXPECT_EQ(failures, 0);
  auto net = service_->state()->net;
  for (auto asn : asns)
    EXPECT_EQ(net->device(net->id(asn, "ROUTER1")).config.static_routes.size(), 3u) << asn;
}

TEST(Service, RefreshThreadFillsHistory) {
  ServiceOptions opt;
  opt.refresh_ms = 20;
  opt.history = 4;
  Service s(testing::reference_network(1, 4), opt);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  auto j = json::parse(s.history().body);
  EXPECT_EQ(j["history"].size(), 4u);
  s.stop();
}

}  // namespace
}  // namespace mnsim::svc
