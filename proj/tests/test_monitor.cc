#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"

namespace mnsim::mon {
namespace {

ConnectivityMatrix all_green(std::vector<uint32_t> asns) {
  ConnectivityMatrix m;
  m.asns = std::move(asns);
  m.cells.assign(m.asns.size(), std::vector<MatrixCell>(m.asns.size(), MatrixCell{true, dp::Outcome::Delivered}));
  return m;
}

void red(ConnectivityMatrix& m, size_t i, size_t j) { m.cells[i][j] = MatrixCell{false, dp::Outcome::NoRoute}; }

std::vector<std::tuple<uint32_t, FindingCode, std::optional<uint32_t>>> summary(const Diagnosis& d) {
  std::vector<std::tuple<uint32_t, FindingCode, std::optional<uint32_t>>> out;
  for (const auto& f : d.findings) out.emplace_back(f.asn, f.code, f.other);
  return out;
}

TEST(Diagnose, AllGreenHasNoFindings) { EXPECT_TRUE(diagnose(all_green({1, 2, 3})).findings.empty()); }

TEST(Diagnose, RedDiagonalIsIntraDomainFault) {
  auto m = all_green({1, 2, 3});
  red(m, 1, 1);
  auto d = diagnose(m);
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].asn, 2u);
  EXPECT_EQ(d.findings[0].code, FindingCode::IntraDomainFault);
  EXPECT_EQ(d.findings[0].evidence, (std::vector<std::pair<uint32_t, uint32_t>>{{2, 2}}));
}

TEST(Diagnose, RedColumnIsMissingEbgp) {
  auto m = all_green({1, 2, 3, 4});
  for (size_t i : {0, 1, 3}) red(m, i, 2);
  auto d = diagnose(m);
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].asn, 3u);
  EXPECT_EQ(d.findings[0].code, FindingCode::MissingEbgp);
  EXPECT_EQ(d.findings[0].evidence.size(), 3u);
}

TEST(Diagnose, OneWayCellIsPolicyAsymmetryOfTheReachingAs) {
  auto m = all_green({1, 2, 3, 4});
  red(m, 3, 0);  // 4 cannot reach 1, 1 reaches 4
  auto d = diagnose(m);
  using T = std::tuple<uint32_t, FindingCode, std::optional<uint32_t>>;
  EXPECT_EQ(summary(d), (std::vector<T>{{1, FindingCode::PolicyAsymmetry, 4}}));
}

TEST(Diagnose, AsymmetryExplainedByOtherRulesIsNotRepeated) {
  auto m = all_green({1, 2, 3});
  for (size_t i : {0, 1}) red(m, i, 2);  // column of 3 red
  auto d = diagnose(m);
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].code, FindingCode::MissingEbgp);

  auto m2 = all_green({1, 2, 3});
  red(m2, 1, 1);
  red(m2, 1, 0);  // 2 is broken inside; its red row toward 1 is explained
  auto d2 = diagnose(m2);
  ASSERT_EQ(d2.findings.size(), 1u);
  EXPECT_EQ(d2.findings[0].code, FindingCode::IntraDomainFault);
}

TEST(Diagnose, JsonListsFindings) {
  auto m = all_green({1, 2, 3});
  red(m, 1, 0);
  auto j = nlohmann::json::parse(diagnose(m).to_json());
  ASSERT_EQ(j["findings"].size(), 1u);
  EXPECT_EQ(j["findings"][0]["code"], "PolicyAsymmetry");
  EXPECT_EQ(j["findings"][0]["asn"], 1);
  EXPECT_EQ(j["findings"][0]["other"], 2);
  EXPECT_EQ(j["findings"][0]["evidence"][0], nlohmann::json::array({2, 1}));
}

TEST(ValleyFree, LabelSequences) {
  const std::string up = "customer->provider", down = "provider->customer", peer = "peer", ixp = "ixp";
  EXPECT_TRUE(is_valley_free({}));
  EXPECT_TRUE(is_valley_free({up, up, peer, down, down}));
  EXPECT_TRUE(is_valley_free({up, ixp, down}));
  EXPECT_TRUE(is_valley_free({down, down}));
  EXPECT_TRUE(is_valley_free({up, up}));
  EXPECT_FALSE(is_valley_free({down, up}));
  EXPECT_FALSE(is_valley_free({peer, peer}));
  EXPECT_FALSE(is_valley_free({peer, up}));
  EXPECT_FALSE(is_valley_free({ixp, peer}));
  EXPECT_FALSE(is_valley_free({down, peer}));
}

TEST(Matrix, IntraPhaseIsExactlyTheDiagonal) {
  Network net(topo::generate_reference_topology(1, 6));
  testing::configure_all(net, ConfigPhase::Intra);
  converge_all(net);
  auto m = connectivity_matrix(net);
  for (size_t i = 0; i < m.asns.size(); ++i)
    for (size_t j = 0; j < m.asns.size(); ++j) {
      // Auto-configured ASes are on the full configuration from the start.
      bool both_auto = net.spec().ases[i].auto_configured && net.spec().ases[j].auto_configured;
      if (i == j) EXPECT_TRUE(m.green(i, j)) << i;
      else if (!both_auto) EXPECT_FALSE(m.green(i, j)) << i << " " << j;
    }
}

class Full : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { net_ = new Network(testing::reference_network(2, 10)); }
  static void TearDownTestSuite() { delete net_; }
  static Network* net_;
};
Network* Full::net_ = nullptr;

TEST_F(Full, MatrixIsGreenAndDiagnosisEmpty) {
  auto m = connectivity_matrix(*net_);
  for (size_t i = 0; i < m.asns.size(); ++i)
    for (size_t j = 0; j < m.asns.size(); ++j) EXPECT_TRUE(m.green(i, j)) << m.asns[i] << " " << m.asns[j];
  EXPECT_TRUE(diagnose(m).findings.empty());
  auto j = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(j["asns"].size(), 20u);
  auto grid = render_matrix(m);
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '#'), 400);
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '.'), 0);
}

TEST_F(Full, EveryAsPathIsValleyFree) {
  for (auto a : net_->asns())
    for (auto b : net_->asns()) {
      auto p = as_path_between(*net_, a, b);
      EXPECT_EQ(p.outcome, dp::Outcome::Delivered);
      EXPECT_TRUE(p.valley_free) << p.to_json();
      EXPECT_FALSE(p.diverted);
      ASSERT_FALSE(p.asns.empty());
      EXPECT_EQ(p.asns.front(), a);
      EXPECT_EQ(p.asns.back(), b);
      EXPECT_EQ(p.labels.size(), p.asns.size() - 1);
      EXPECT_EQ(p.valley_free, is_valley_free(p.labels));
    }
}

TEST_F(Full, RunningConfigViewParsesBack) {
  for (DeviceId id = 0; id < net_->device_count(); ++id) {
    const auto& dev = net_->device(id);
    auto text = looking_glass(*net_, dev.asn, dev.name, View::RunningConfig);
    EXPECT_EQ(conf::parse_config(dev.kind, text), dev.config) << dev.label();
  }
}

TEST_F(Full, LookingGlassViews) {
  auto t = testing::first_transit(*net_);
  auto bgp = looking_glass(*net_, t, "ROUTER1", View::Bgp);
  EXPECT_NE(bgp.find(net_->plan().ases.at(net_->asns().front()).as_prefix.str()), std::string::npos);
  auto route = looking_glass(*net_, t, "ROUTER1", View::Route);
  EXPECT_NE(route.find("O "), std::string::npos);
  EXPECT_NE(route.find("B "), std::string::npos);
  EXPECT_FALSE(looking_glass(*net_, t, "S1", View::SpanningTree).empty());
  EXPECT_THROW(looking_glass(*net_, t, "NOPE", View::Route), std::out_of_range);
  for (const char* v : {"route", "bgp", "ospf", "spanning-tree", "running-config"}) {
    auto parsed = parse_view(v);
    ASSERT_TRUE(parsed);
    EXPECT_STREQ(to_string(*parsed), v);
  }
  EXPECT_FALSE(parse_view("arp"));
}

TEST(Asymmetry, InvertedExportIsAttributedToTheMisconfiguredAs) {
  Network net(topo::generate_reference_topology(2, 10));
  testing::configure_all(net, ConfigPhase::Full);
  auto t = testing::first_transit(net);
  testing::invert_export_policy(net, t);
  converge_all(net);
  auto d = diagnose(connectivity_matrix(net));
  ASSERT_FALSE(d.findings.empty());
  for (const auto& f : d.findings) {
    EXPECT_EQ(f.code, FindingCode::PolicyAsymmetry);
    EXPECT_EQ(f.asn, t);
  }
}

TEST(Asymmetry, BrokenIgpIsIntraDomainFault) {
  Network net(topo::generate_reference_topology(1, 6));
  testing::configure_all(net, ConfigPhase::Full);
  auto t = testing::first_transit(net);
  for (auto id : net.devices_in(t))
    if (net.device(id).kind == DeviceKind::Router)
      ASSERT_TRUE(conf::load_config_script(net, t, net.device(id).name, "no router ospf\n", true).diagnostics.empty());
  converge_all(net);
  auto d = diagnose(connectivity_matrix(net));
  bool found = false;
  for (const auto& f : d.findings) found |= f.asn == t && f.code == FindingCode::IntraDomainFault;
  EXPECT_TRUE(found) << d.to_json();
}

}  // namespace
}  // namespace mnsim::mon
