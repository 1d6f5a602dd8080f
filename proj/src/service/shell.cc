#include <fmt/format.h>

#include "mnsim/service.hpp"
#include "mnsim/text.hpp"

namespace mnsim::svc {

namespace {

constexpr const char* kHelp =
    "commands:\n"
    "  goto <device> | goto <asn> <device>   enter a device of this AS\n"
    "  show ip bgp | show ip route | show ip ospf | show spanning-tree | show running-config\n"
    "  converge                              recompute L2, IGP, BGP and forwarding\n"
    "  matrix                                this AS's row and column of the matrix\n"
    "  ping <address> | traceroute <address>\n"
    "  end                                   leave configuration sub-modes\n"
    "  exit                                  leave a sub-mode, the device, then the session\n"
    "inside a device, any other line is a configuration command.\n";

}  // namespace

Shell::Shell(Network& net, uint32_t asn) : net_(net), asn_(asn) {
  const auto* as = net.spec().find_as(asn);
  if (!as) throw std::out_of_range(fmt::format("unknown AS {}", asn));
  if (as->auto_configured) throw PermissionDenied(fmt::format("AS {} is not student-operated", asn));
}

std::string Shell::prompt() const {
  if (!device_) return fmt::format("AS{}> ", asn_);
  const auto& name = net_.device(*device_).name;
  switch (context_.mode) {
    case conf::Mode::Global: return name + "# ";
    case conf::Mode::Interface: return name + "(config-if)# ";
    case conf::Mode::RouterOspf:
    case conf::Mode::RouterBgp: return name + "(config-router)# ";
    case conf::Mode::RouteMapEntry: return name + "(config-route-map)# ";
  }
  return name + "# ";
}

std::string Shell::execute(std::string_view raw) {
  auto line = text::trim(raw);
  if (line.empty()) return {};
  auto words = text::tokens(line);
  auto cmd = words[0];

  if (cmd == "help" || cmd == "?") return kHelp;
  if (cmd == "goto") {
    std::string name;
    uint32_t asn = asn_;
    if (words.size() == 3) {
      auto n = text::to_number<uint32_t>(words[1]);
      if (!n) return fmt::format("% bad AS number '{}'\n", words[1]);
      asn = *n;
      name = std::string(words[2]);
    } else if (words.size() == 2) {
      name = std::string(words[1]);
      if (auto dot = name.find('.'); dot != std::string::npos) {
        if (auto n = text::to_number<uint32_t>(std::string_view(name).substr(0, dot))) {
          asn = *n;
          name = name.substr(dot + 1);
        }
      }
    } else {
      return "% usage: goto <device>\n";
    }
    if (asn != asn_) throw PermissionDenied(fmt::format("AS {} session cannot access AS {}", asn_, asn));
    auto id = net_.find(asn, name);
    if (!id) return fmt::format("% no device {} in AS {}\n", name, asn);
    device_ = *id;
    context_ = {};
    return {};
  }
  if (cmd == "exit" || cmd == "quit") {
    if (device_ && context_.mode != conf::Mode::Global) {
      context_ = {};
    } else if (device_) {
      device_.reset();
    } else {
      finished_ = true;
    }
    return {};
  }
  if (cmd == "end") {
    context_ = {};
    return {};
  }
  if (cmd == "configure") return {};  // `configure terminal`: configuration is always live
  if (cmd == "show") return show(words);
  if (cmd == "converge") {
    auto r = converge_all(net_);
    return fmt::format("converged {} after {} rounds, round {}\n", r.converged ? "yes" : "no", r.rounds, net_.epoch());
  }
  if (cmd == "matrix") return local_matrix();
  if (cmd == "ping" || cmd == "traceroute") {
    if (words.size() != 2) return fmt::format("% usage: {} <address>\n", cmd);
    return probe(cmd == "ping", words[1]);
  }

  if (!device_) return fmt::format("% unknown command '{}'; use 'goto <device>' to configure a device\n", cmd);
  auto& dev = net_.device(*device_);
  try {
    auto parsed = conf::parse_command_line(dev.kind, line, context_);
    conf::apply_command(net_.mutable_device(*device_).config, parsed);
    context_ = parsed.next_context();
    mutations_.push_back(fmt::format("{} {}", dev.label(), parsed.render()));
  } catch (const conf::ParseError& e) {
    return fmt::format("% {} (column {})\n", e.what(), e.column());
  } catch (const conf::SemanticError& e) {
    return fmt::format("% {}\n", e.what());
  }
  return {};
}

std::string Shell::show(const std::vector<std::string_view>& words) {
  std::vector<std::string> rest(words.begin() + 1, words.end());
  if (!rest.empty() && rest[0] == "ip") rest.erase(rest.begin());
  std::optional<mon::View> view;
  auto what = text::join(rest, " ");
  if (what == "bgp") view = mon::View::Bgp;
  else if (what == "route") view = mon::View::Route;
  else if (what == "ospf" || what == "ospf route") view = mon::View::Ospf;
  else if (what == "spanning-tree") view = mon::View::SpanningTree;
  else if (what == "running-config") view = mon::View::RunningConfig;
  if (!view) return fmt::format("% unknown view '{}'\n", what);
  if (!device_) return "% no device selected; use 'goto <device>'\n";
  if (*view != mon::View::RunningConfig && net_.stale())
    return "% configuration changed since the last converge; run 'converge'\n";
  const auto& dev = net_.device(*device_);
  return mon::looking_glass(net_, dev.asn, dev.name, *view);
}

std::string Shell::probe(bool ping, std::string_view target) {
  auto addr = Ipv4::parse(target);
  if (!addr) return fmt::format("% bad address '{}'\n", target);
  if (net_.stale()) return "% configuration changed since the last converge; run 'converge'\n";
  auto src = device_ ? device_ : net_.probe_host(asn_);
  if (!src) return "% no source device\n";
  if (!ping) return dp::render_trace(net_, dp::trace(net_, *src, *addr));
  auto r = dp::ping(net_, *src, *addr);
  if (!r.success) return fmt::format("ping {} from {}: failed ({})\n", addr->str(), net_.device(*src).label(),
                                     dp::to_string(r.reason));
  return fmt::format("ping {} from {}: success, rtt {:.3f} ms\n", addr->str(), net_.device(*src).label(),
                     r.rtt_us / 1000.0);
}

std::string Shell::local_matrix() {
  if (net_.stale()) return "% configuration changed since the last converge; run 'converge'\n";
  auto m = mon::connectivity_matrix(net_);
  auto self = m.index_of(asn_);
  if (!self) return "% AS not in the matrix\n";
  std::string row, col, head;
  for (size_t j = 0; j < m.asns.size(); ++j) {
    head += fmt::format("{:>4}", m.asns[j]);
    row += fmt::format("{:>4}", m.green(*self, j) ? "#" : ".");
    col += fmt::format("{:>4}", m.green(j, *self) ? "#" : ".");
  }
  return fmt::format("matrix round {}\n      {}\n  to  {}\n  from{}\n", m.round, head, row, col);
}

}  // namespace mnsim::svc
