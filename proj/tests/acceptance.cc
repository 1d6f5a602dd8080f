// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace mnsim {
namespace {

// Tolerances.
constexpr double kBuild20Seconds = 30;
constexpr double kBuild60Seconds = 600;
constexpr double kValleySeconds = 60;
constexpr double kHijackRedirectFraction = 0.8;
constexpr size_t kLargeAses = 60;
constexpr size_t kLargeIxps = 7;
constexpr int kDecisionSets = 1000;
constexpr int kIgpGraphs = 1000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(std::string why) {
    if (pass) detail.clear();
    if (!detail.empty()) detail += "; ";
    pass = false;
    detail += why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

size_t green_cells(const mon::ConnectivityMatrix& m) {
  size_t n = 0;
  for (size_t i = 0; i < m.asns.size(); ++i)
    for (size_t j = 0; j < m.asns.size(); ++j) n += m.green(i, j);
  return n;
}

Outcome reference_end_to_end() {
  Outcome out;
  std::vector<std::string> parts;
  for (auto [regions, per, limit] : {std::tuple{2u, 10u, kBuild20Seconds}, std::tuple{6u, 10u, kBuild60Seconds}}) {
    auto t0 = std::chrono::steady_clock::now();
    auto net = testing::reference_network(regions, per);
    auto m = mon::connectivity_matrix(net);
    double s = seconds_since(t0);
    size_t n = m.asns.size();
    bool converged = derived(net).bgp.report.converged;
    parts.push_back(fmt::format("{} ASes, {} IXPs, converged={}, green {}/{}, {:.2f}s", n, net.spec().ixps.size(),
                                converged, green_cells(m), n * n, s));
    if (!converged) out.fail(fmt::format("{} ASes did not converge", n));
    if (green_cells(m) != n * n) out.fail(fmt::format("{} ASes: {} red cells", n, n * n - green_cells(m)));
    if (s >= limit) out.fail(fmt::format("{} ASes took {:.1f}s (limit {}s)", n, s, limit));
    if (regions == 6 && (n != kLargeAses || net.spec().ixps.size() != kLargeIxps))
      out.fail(fmt::format("expected {} ASes and {} IXPs", kLargeAses, kLargeIxps));
  }
  if (out.pass) out.detail = fmt::format("{}", fmt::join(parts, " | "));
  return out;
}

Outcome degree_constraints() {
  Outcome out;
  size_t checked = 0;
  for (unsigned regions = 1; regions <= 6; ++regions)
    for (unsigned per : {4u, 6u, 8u, 10u}) {
      auto spec = topo::generate_reference_topology(regions, per);
      std::map<uint32_t, std::array<size_t, 3>> rel;  // customers, providers, peers
      std::map<uint32_t, std::set<uint32_t>> ixps;
      for (const auto& l : spec.links) {
        switch (l.rel) {
          case topo::Relationship::AProviderOfB: rel[l.a.asn][0]++, rel[l.b.asn][1]++; break;
          case topo::Relationship::BProviderOfA: rel[l.b.asn][0]++, rel[l.a.asn][1]++; break;
          case topo::Relationship::Peer: rel[l.a.asn][2]++, rel[l.b.asn][2]++; break;
        }
      }
      for (const auto& x : spec.ixps)
        for (const auto& m : x.members) ixps[m.asn].insert(x.id);
      for (const auto& as : spec.ases) {
        if (as.role != topo::Role::Transit) continue;
        ++checked;
        auto r = rel[as.asn];
        if (r[0] != 2 || r[1] != 2 || r[2] != 1 || ixps[as.asn].size() != 1)
          out.fail(fmt::format("({},{}) AS {}: {} customers, {} providers, {} peers, {} IXPs", regions, per, as.asn, r[0],
                               r[1], r[2], ixps[as.asn].size()));
      }
    }
  if (checked == 0) out.fail("no transit ASes generated");
  if (out.pass) out.detail = fmt::format("{} transit ASes over 24 generated topologies", checked);
  return out;
}

Outcome phase_progression() {
  Outcome out;
  auto spec = topo::generate_reference_topology(2, 10);
  // Every AS starts unconfigured so phase 1 covers all of them.
  for (auto& as : spec.ases) as.auto_configured = false;
  Network net(spec);
  testing::configure_all(net, ConfigPhase::Intra);
  converge_all(net);
  auto m1 = mon::connectivity_matrix(net);
  for (size_t i = 0; i < m1.asns.size(); ++i)
    for (size_t j = 0; j < m1.asns.size(); ++j)
      if (m1.green(i, j) != (i == j)) out.fail(fmt::format("phase 1 cell {}->{} wrong", m1.asns[i], m1.asns[j]));

  testing::configure_all(net, ConfigPhase::Full);
  converge_all(net);
  auto m2 = mon::connectivity_matrix(net);
  size_t n = m2.asns.size();
  if (green_cells(m2) != n * n) out.fail(fmt::format("phase 2: {} red cells", n * n - green_cells(m2)));

  auto t = testing::first_transit(net);
  testing::invert_export_policy(net, t);
  converge_all(net);
  auto m3 = mon::connectivity_matrix(net);
  auto d = mon::diagnose(m3);
  bool expected = !d.findings.empty();
  for (const auto& f : d.findings) expected &= f.code == mon::FindingCode::PolicyAsymmetry && f.asn == t;
  if (!expected) out.fail(fmt::format("phase 3 diagnosis: {}", d.to_json()));

  size_t goldens = 0;
  for (auto [name, m] : {std::pair{"phase1_matrix.json", &m1}, {"phase2_matrix.json", &m2}, {"phase3_matrix.json", &m3}}) {
    auto err = testing::check_golden(name, m->to_json());
    if (err.empty()) ++goldens;
    else out.fail(err);
  }
  if (out.pass)
    out.detail = fmt::format("diagonal {0}/{0}, full {1}/{1}, {2} PolicyAsymmetry finding(s) for AS {3}, {4}/3 goldens",
                             n, n * n, d.findings.size(), t, goldens);
  return out;
}

Outcome valley_free() {
  Outcome out;
  auto net = testing::reference_network(2, 10);
  auto t0 = std::chrono::steady_clock::now();
  size_t pairs = 0, bad = 0;
  for (auto a : net.asns())
    for (auto b : net.asns()) {
      auto p = mon::as_path_between(net, a, b);
      ++pairs;
      if (p.outcome != dp::Outcome::Delivered || !p.valley_free || !mon::is_valley_free(p.labels)) {
        if (bad++ < 3) out.fail(p.to_json());
      }
    }
  double s = seconds_since(t0);
  if (bad) out.fail(fmt::format("{} violating paths", bad));
  if (s >= kValleySeconds) out.fail(fmt::format("enumeration took {:.1f}s", s));
  if (out.pass) out.detail = fmt::format("0 violations over {} ordered pairs in {:.2f}s", pairs, s);
  return out;
}

Outcome decision_oracle() {
  Outcome out;
  std::mt19937 rng(2024);
  const std::vector<Ipv4> hops = {Ipv4(10, 0, 0, 1), Ipv4(10, 0, 0, 2), Ipv4(10, 0, 0, 3), Ipv4(10, 9, 9, 9)};
  int agree = 0;
  for (int i = 0; i < kDecisionSets; ++i) {
    std::map<Ipv4, uint32_t> igp = {{hops[0], rng() % 3}, {hops[1], rng() % 3}, {hops[2], rng() % 3}};
    std::vector<bgp::BgpRoute> cands;
    for (size_t n = 1 + rng() % 6; cands.size() < n;) cands.push_back(bgp::random_route(rng, hops));
    auto got = bgp::best_route(cands, [&](Ipv4 a) -> std::optional<uint32_t> {
      auto it = igp.find(a);
      if (it == igp.end()) return std::nullopt;
      return it->second;
    });
    auto want = bgp::decide(cands, igp);
    bool same = got.has_value() == want.has_value() && (!got || (got->index == want->index && got->step == want->step));
    agree += same;
  }
  if (agree != kDecisionSets) out.fail(fmt::format("{}/{} sets agree", agree, kDecisionSets));
  else out.detail = fmt::format("{0}/{0} sets agree", kDecisionSets);
  return out;
}

Outcome stp_oracle() {
  Outcome out;
  std::mt19937 rng(7);
  const uint32_t priorities[] = {4096, 8192, 32768};
  size_t graphs = 0, agree = 0;
  for (size_t n = 1; n <= 5; ++n) {
    std::vector<std::pair<size_t, size_t>> all;
    for (size_t a = 0; a < n; ++a)
      for (size_t b = a + 1; b < n; ++b) all.push_back({a, b});
    for (uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
      std::vector<std::pair<size_t, size_t>> edges;
      for (size_t i = 0; i < all.size(); ++i)
        if (mask & (1u << i)) edges.push_back(all[i]);
      if (!l2::connected(n, edges)) continue;
      std::vector<l2::BridgeId> bridges;
      for (size_t s = 0; s < n; ++s) bridges.push_back({priorities[rng() % 3], static_cast<uint32_t>(s + 1)});
      auto g = l2::make_graph(bridges, edges);
      auto t = l2::compute_spanning_tree(g);
      auto x = l2::bpdu_oracle(g);
      size_t root = std::min_element(bridges.begin(), bridges.end()) - bridges.begin();
      ++graphs;
      agree += t.root == root && t.root_cost == x.cost && t.root_edge == x.root_edge && t.role_a == x.role_a &&
               t.role_b == x.role_b && t.active_edges().size() == n - 1;
    }
  }
  if (agree != graphs) out.fail(fmt::format("{}/{} graphs agree", agree, graphs));
  else out.detail = fmt::format("{0}/{0} connected graphs on <= 5 switches agree", graphs);
  return out;
}

Outcome hijack() {
  Outcome out;
  auto net = testing::reference_network(2, 10);
  auto asns = net.asns();
  auto attacker = asns.front();
  auto victim = asns.back();
  auto vp = net.plan().ases.at(victim).as_prefix;
  auto before = mon::connectivity_matrix(net);

  auto rec = bgp::inject_hijack(net, attacker, vp, true);
  converge_all(net);
  auto during = mon::connectivity_matrix(net);
  size_t sampled = 0, redirected = 0, flipped = 0;
  auto col = *during.index_of(victim);
  for (size_t i = 0; i < asns.size(); ++i) {
    auto src = asns[i];
    if (src == attacker || src == victim) continue;
    ++sampled;
    auto p = mon::as_path_between(net, src, victim);
    redirected += !p.asns.empty() && p.asns.back() == attacker;
    flipped += before.green(i, col) && !during.green(i, col);
  }
  double fraction = sampled ? static_cast<double>(redirected) / static_cast<double>(sampled) : 0;
  if (fraction < kHijackRedirectFraction && flipped == 0)
    out.fail(fmt::format("only {}/{} traces redirected and no cell flipped", redirected, sampled));

  auto rubric = [](uint32_t who, const Prefix& p) {
    return grade::parse_rubric(fmt::format("check h HijackReport weight=5 attacker={} prefix={}\n", who, p.str()));
  };
  bool truth = grade::run_rubric(net, victim, rubric(attacker, vp)).all_passed();
  bool wrong_attacker = grade::run_rubric(net, victim, rubric(asns[1], vp)).all_passed();
  bool wrong_prefix = grade::run_rubric(net, victim, rubric(attacker, Prefix::from_string("99.0.0.0/8"))).all_passed();
  if (!truth || wrong_attacker || wrong_prefix)
    out.fail(fmt::format("HijackReport: truth={} wrong-attacker={} wrong-prefix={}", truth, wrong_attacker, wrong_prefix));

  bgp::mitigate_hijack(net, victim, rec);
  converge_all(net);
  size_t restored = 0;
  for (auto src : asns) {
    if (src == attacker || src == victim) continue;
    auto p = mon::as_path_between(net, src, victim);
    restored += p.outcome == dp::Outcome::Delivered && !p.diverted && p.asns.back() == victim;
  }
  if (restored != sampled) out.fail(fmt::format("mitigation restored {}/{} traces", restored, sampled));

  auto clean = testing::reference_network(2, 10);
  if (grade::run_rubric(clean, victim, rubric(attacker, vp)).all_passed())
    out.fail("HijackReport passes without a hijack");

  if (out.pass)
    out.detail = fmt::format("{}/{} traces redirected ({:.0f}%), {} cells flipped, {}/{} restored, report iff truth",
                             redirected, sampled, 100 * fraction, flipped, restored, sampled);
  return out;
}

Outcome round_trips() {
  Outcome out;
  size_t topologies = 0, configs = 0;
  for (unsigned regions = 1; regions <= 3; ++regions)
    for (unsigned per : {4u, 6u, 10u}) {
      auto spec = topo::generate_reference_topology(regions, per);
      ++topologies;
      if (topo::parse_topology_spec(topo::render_topology_spec(spec)) != spec)
        out.fail(fmt::format("topology ({},{}) does not round-trip", regions, per));
      for (auto phase : {ConfigPhase::Intra, ConfigPhase::Full}) {
        Network net(spec);
        testing::configure_all(net, phase);
        for (DeviceId id = 0; id < net.device_count(); ++id) {
          const auto& dev = net.device(id);
          ++configs;
          auto text = conf::render_running_config(dev.kind, dev.label(), dev.config);
          if (conf::parse_config(dev.kind, text) != dev.config) out.fail(fmt::format("{} does not round-trip", dev.label()));
        }
      }
    }
  auto a = testing::looking_glass_dump(testing::reference_network(2, 10));
  auto b = testing::looking_glass_dump(testing::reference_network(2, 10));
  if (a != b) out.fail("two converge runs produced different looking-glass dumps");
  if (out.pass)
    out.detail = fmt::format("{} topologies, {} device configs, looking-glass dumps identical ({} bytes)", topologies,
                             configs, a.size());
  return out;
}

Outcome ecmp() {
  Outcome out;
  auto text = testing::single_as_topology({"A", "B", "C", "D"}, {{"A", "B"}, {"B", "D"}, {"A", "C"}, {"C", "D"}});
  Network net(topo::parse_topology_spec(text));
  apply_reference_config(net, 1, ConfigPhase::Intra);
  converge_all(net);
  auto src = net.id(1, host_name("A"));
  auto dst = net.plan().ases.at(1).loopbacks.at("D");
  std::set<std::string> second;
  for (uint64_t f = 0; f < 16; ++f) {
    auto t = dp::trace(net, src, dst, f);
    if (t.outcome != dp::Outcome::Delivered || t.hops.size() < 3) {
      out.fail(fmt::format("flow {} not delivered", f));
      continue;
    }
    second.insert(net.device(t.hops[2].device).name);
  }
  if (second != std::set<std::string>{"B", "C"}) out.fail(fmt::format("flows used {}", fmt::join(second, ",")));

  std::mt19937 rng(31);
  int agree = 0;
  for (int i = 0; i < kIgpGraphs; ++i) {
    auto g = igp::random_graph(rng, 1 + rng() % 8);
    agree += igp::compute_igp(g) == igp::brute_force(g);
  }
  if (agree != kIgpGraphs) out.fail(fmt::format("IGP agrees on {}/{} graphs", agree, kIgpGraphs));
  if (out.pass) out.detail = fmt::format("flows 0..15 use B and C; IGP matches brute force on {0}/{0} graphs", kIgpGraphs);
  return out;
}

}  // namespace
}  // namespace mnsim

int main() {
  using namespace mnsim;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"reference-end-to-end", reference_end_to_end},
      {"degree-constraints", degree_constraints},
      {"phase-progression", phase_progression},
      {"valley-free", valley_free},
      {"decision-oracle", decision_oracle},
      {"stp-oracle", stp_oracle},
      {"hijack", hijack},
      {"round-trips", round_trips},
      {"ecmp", ecmp},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(fmt::format("exception: {}", e.what()));
    }
    failed += !o.pass;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
