#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mnsim/service.hpp"
#include "mnsim/text.hpp"

namespace mnsim::svc {

using nlohmann::json;

namespace {

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(const std::string& msg) { throw EventError(msg); }

uint32_t parse_asn(std::string_view s) {
  auto n = text::to_number<uint32_t>(s);
  if (!n || *n == 0) fail(fmt::format("malformed AS number '{}'", s));
  return *n;
}

Prefix parse_prefix(std::string_view s) {
  auto p = Prefix::parse(s);
  if (!p) fail(fmt::format("malformed prefix '{}'", s));
  return *p;
}

topo::RouterRef parse_ref(std::string_view s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos || dot + 1 == s.size()) fail(fmt::format("expected <asn>.<router>, got '{}'", s));
  return {parse_asn(s.substr(0, dot)), std::string(s.substr(dot + 1))};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void arity(const std::vector<std::string_view>& tok, size_t lo, size_t hi) {
  if (tok.size() < lo || tok.size() > hi) fail(fmt::format("wrong number of arguments to '{}'", tok[0]));
}

Event parse_line(const std::vector<std::string_view>& tok, const std::filesystem::path& base) {
  auto kw = tok[0];
  if (kw == "apply") {
    arity(tok, 4, 4);
    return ApplyConfig{parse_asn(tok[1]), std::string(tok[2]), read_file(base / std::string(tok[3]))};
  }
  if (kw == "fail-link" || kw == "restore-link") {
    arity(tok, 3, 3);
    if (kw == "fail-link") return FailLink{parse_ref(tok[1]), parse_ref(tok[2])};
    return RestoreLink{parse_ref(tok[1]), parse_ref(tok[2])};
  }
  if (kw == "fail-router") {
    arity(tok, 2, 2);
    return FailRouter{parse_ref(tok[1])};
  }
  if (kw == "restore-router") {
    arity(tok, 2, 2);
    return RestoreRouter{parse_ref(tok[1])};
  }
  if (kw == "hijack") {
    arity(tok, 3, 4);
    bool more = tok.size() == 4;
    if (more && tok[3] != "more-specific") fail(fmt::format("unexpected '{}'", tok[3]));
    return Hijack{parse_asn(tok[1]), parse_prefix(tok[2]), more};
  }
  if (kw == "withdraw") {
    arity(tok, 2, 3);
    Withdraw w{parse_asn(tok[1]), std::nullopt};
    if (tok.size() == 3) w.prefix = parse_prefix(tok[2]);
    return w;
  }
  if (kw == "announce") {
    arity(tok, 3, 3);
    return Announce{parse_asn(tok[1]), parse_prefix(tok[2])};
  }
  if (kw == "mitigate") {
    arity(tok, 2, 2);
    return Mitigate{parse_asn(tok[1])};
  }
  if (kw == "converge") {
    arity(tok, 1, 1);
    return Converge{};
  }
  if (kw == "snapshot") {
    arity(tok, 2, 2);
    auto tag = std::string(tok[1]);
    if (tag.find('/') != std::string::npos || tag == "." || tag == "..") fail(fmt::format("bad snapshot tag '{}'", tag));
    return Snapshot{tag};
  }
  if (kw == "grade") {
    arity(tok, 2, 3);
    Grade g{tok[1] == "all" ? 0 : parse_asn(tok[1]), "default"};
    if (tok.size() == 3) g.rubric = std::string(tok[2]);
    return g;
  }
  fail(fmt::format("unknown event '{}'", kw));
}

json ref_json(const topo::RouterRef& r) { return r.str(); }

topo::RouterRef ref_of(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) fail(fmt::format("missing '{}'", key));
  return parse_ref(j[key].get<std::string>());
}

uint32_t asn_of(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) fail(fmt::format("missing '{}'", key));
  return j[key].get<uint32_t>();
}

std::string string_of(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) fail(fmt::format("missing '{}'", key));
  return j[key].get<std::string>();
}

}  // namespace

std::vector<Event> parse_events(std::string_view text, const std::filesystem::path& base) {
  std::vector<Event> out;
  auto all = text::lines(text);
  for (size_t n = 0; n < all.size(); ++n) {
    auto line = text::trim(all[n]);
    if (line.empty() || line.front() == '#') continue;
    try {
      out.push_back(parse_line(text::tokens(line), base));
    } catch (const EventError& e) {
      throw EventError(fmt::format("events line {}: {}", n + 1, e.what()));
    }
  }
  return out;
}

Event parse_event_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!j.is_object()) fail("event must be a JSON object");
  auto type = string_of(j, "type");
  if (type == "apply") return ApplyConfig{asn_of(j, "asn"), string_of(j, "device"), string_of(j, "script")};
  if (type == "fail-link") return FailLink{ref_of(j, "a"), ref_of(j, "b")};
  if (type == "restore-link") return RestoreLink{ref_of(j, "a"), ref_of(j, "b")};
  if (type == "fail-router") return FailRouter{ref_of(j, "router")};
  if (type == "restore-router") return RestoreRouter{ref_of(j, "router")};
  if (type == "hijack")
    return Hijack{asn_of(j, "attacker"), parse_prefix(string_of(j, "prefix")), j.value("more_specific", false)};
  if (type == "withdraw") {
    Withdraw w{asn_of(j, "asn"), std::nullopt};
    if (j.contains("prefix")) w.prefix = parse_prefix(string_of(j, "prefix"));
    return w;
  }
  if (type == "announce") return Announce{asn_of(j, "asn"), parse_prefix(string_of(j, "prefix"))};
  if (type == "mitigate") return Mitigate{asn_of(j, "victim")};
  if (type == "converge") return Converge{};
  if (type == "snapshot") return Snapshot{string_of(j, "tag")};
  if (type == "grade") return Grade{j.contains("asn") ? asn_of(j, "asn") : 0, j.value("rubric", std::string("default"))};
  fail(fmt::format("unknown event type '{}'", type));
}

std::string event_to_json(const Event& event) {
  json j = std::visit(
      Overloaded{
          [](const ApplyConfig& e) { return json{{"type", "apply"}, {"asn", e.asn}, {"device", e.device}, {"script", e.script}}; },
          [](const FailLink& e) { return json{{"type", "fail-link"}, {"a", ref_json(e.a)}, {"b", ref_json(e.b)}}; },
          [](const RestoreLink& e) { return json{{"type", "restore-link"}, {"a", ref_json(e.a)}, {"b", ref_json(e.b)}}; },
          [](const FailRouter& e) { return json{{"type", "fail-router"}, {"router", ref_json(e.router)}}; },
          [](const RestoreRouter& e) { return json{{"type", "restore-router"}, {"router", ref_json(e.router)}}; },
          [](const Hijack& e) {
            return json{{"type", "hijack"}, {"attacker", e.attacker}, {"prefix", e.prefix.str()}, {"more_specific", e.more_specific}};
          },
          [](const Withdraw& e) {
            json j{{"type", "withdraw"}, {"asn", e.asn}};
            if (e.prefix) j["prefix"] = e.prefix->str();
            return j;
          },
          [](const Announce& e) { return json{{"type", "announce"}, {"asn", e.asn}, {"prefix", e.prefix.str()}}; },
          [](const Mitigate& e) { return json{{"type", "mitigate"}, {"victim", e.victim}}; },
          [](const Converge&) { return json{{"type", "converge"}}; },
          [](const Snapshot& e) { return json{{"type", "snapshot"}, {"tag", e.tag}}; },
          [](const Grade& e) {
            json j{{"type", "grade"}, {"rubric", e.rubric}};
            if (e.asn) j["asn"] = e.asn;
            return j;
          },
      },
      event);
  return j.dump();
}

std::string describe(const Event& event) {
  return std::visit(
      Overloaded{
          [](const ApplyConfig& e) { return fmt::format("apply {} {}", e.asn, e.device); },
          [](const FailLink& e) { return fmt::format("fail-link {} {}", e.a.str(), e.b.str()); },
          [](const RestoreLink& e) { return fmt::format("restore-link {} {}", e.a.str(), e.b.str()); },
          [](const FailRouter& e) { return fmt::format("fail-router {}", e.router.str()); },
          [](const RestoreRouter& e) { return fmt::format("restore-router {}", e.router.str()); },
          [](const Hijack& e) {
            return fmt::format("hijack {} {}{}", e.attacker, e.prefix.str(), e.more_specific ? " more-specific" : "");
          },
          [](const Withdraw& e) { return fmt::format("withdraw {}{}", e.asn, e.prefix ? " " + e.prefix->str() : ""); },
          [](const Announce& e) { return fmt::format("announce {} {}", e.asn, e.prefix.str()); },
          [](const Mitigate& e) { return fmt::format("mitigate {}", e.victim); },
          [](const Converge&) { return std::string("converge"); },
          [](const Snapshot& e) { return fmt::format("snapshot {}", e.tag); },
          [](const Grade& e) {
            return fmt::format("grade {} {}", e.asn ? std::to_string(e.asn) : std::string("all"), e.rubric);
          },
      },
      event);
}

bool is_mutating(const Event& event) {
  return !std::holds_alternative<Snapshot>(event) && !std::holds_alternative<Grade>(event) &&
         !std::holds_alternative<Converge>(event);
}

namespace {

size_t link_segment(const Network& net, const topo::RouterRef& a, const topo::RouterRef& b) {
  auto seg = net.find_link(a, b);
  if (!seg) fail(fmt::format("no link between {} and {}", a.str(), b.str()));
  return *seg;
}

DeviceId router(const Network& net, const topo::RouterRef& r) {
  auto id = net.find(r.asn, r.router);
  if (!id) fail(fmt::format("no device {}", r.str()));
  return *id;
}

void require_as(const Network& net, uint32_t asn) {
  if (!net.spec().find_as(asn)) fail(fmt::format("no AS {}", asn));
}

}  // namespace

std::vector<std::string> apply_event(Network& net, const Event& event) {
  std::vector<std::string> out;
  auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  };
  std::visit(Overloaded{
                 [&](const ApplyConfig& e) {
                   if (!net.find(e.asn, e.device)) fail(fmt::format("no device {}.{}", e.asn, e.device));
                   auto r = conf::load_config_script(net, e.asn, e.device, e.script);
                   for (const auto& d : r.diagnostics)
                     out.push_back(fmt::format("{}.{} line {}:{}: {}", e.asn, e.device, d.line, d.column, d.message));
                 },
                 [&](const FailLink& e) { net.set_segment_up(link_segment(net, e.a, e.b), false); },
                 [&](const RestoreLink& e) { net.set_segment_up(link_segment(net, e.a, e.b), true); },
                 [&](const FailRouter& e) { net.set_device_failed(router(net, e.router), true); },
                 [&](const RestoreRouter& e) { net.set_device_failed(router(net, e.router), false); },
                 [&](const Hijack& e) {
                   require_as(net, e.attacker);
                   guard([&] { bgp::inject_hijack(net, e.attacker, e.prefix, e.more_specific); });
                 },
                 [&](const Withdraw& e) {
                   require_as(net, e.asn);
                   std::vector<Prefix> prefixes;
                   if (e.prefix) {
                     prefixes.push_back(*e.prefix);
                   } else {
                     for (const auto& h : net.hijacks())
                       if (h.attacker == e.asn) prefixes.insert(prefixes.end(), h.announced.begin(), h.announced.end());
                   }
                   guard([&] {
                     for (const auto& p : prefixes)
                       for (auto& w : bgp::withdraw_prefix(net, e.asn, p)) out.push_back(std::move(w));
                   });
                 },
                 [&](const Announce& e) {
                   require_as(net, e.asn);
                   guard([&] {
                     for (auto& w : bgp::originate_prefix(net, e.asn, e.prefix)) out.push_back(std::move(w));
                   });
                 },
                 [&](const Mitigate& e) {
                   require_as(net, e.victim);
                   const auto& own = net.plan().ases.at(e.victim).as_prefix;
                   auto records = net.hijacks();
                   size_t answered = 0;
                   for (const auto& h : records) {
                     if (!own.contains(h.victim_prefix)) continue;
                     guard([&] { bgp::mitigate_hijack(net, e.victim, h); });
                     ++answered;
                   }
                   if (answered == 0) out.push_back(fmt::format("no recorded hijack of AS {}'s prefixes", e.victim));
                 },
                 [](const Converge&) {},
                 [](const Snapshot&) {},
                 [](const Grade&) {},
             },
             event);
  return out;
}

}  // namespace mnsim::svc
