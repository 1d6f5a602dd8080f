#include <random>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "mnsim/service.hpp"
#include "mnsim/text.hpp"

namespace mnsim::svc {

using nlohmann::json;

namespace {

std::string random_token(std::mt19937_64& rng) {
  return fmt::format("{:016x}{:016x}", rng(), rng());
}

Response error(int status, const std::string& message) {
  return {status, "application/json", json{{"error", message}}.dump()};
}

Response text(std::string body) { return {200, "text/plain; charset=utf-8", std::move(body)}; }

std::optional<uint32_t> number(const std::string& s) { return text::to_number<uint32_t>(s); }

std::optional<std::string> bearer(const std::string& header) {
  constexpr std::string_view kPrefix = "Bearer ";
  if (!text::starts_with(header, kPrefix)) return std::nullopt;
  return std::string(text::trim(std::string_view(header).substr(kPrefix.size())));
}

const char* link_kind(topo::Relationship r) { return r == topo::Relationship::Peer ? "peer" : "provider-customer"; }

}  // namespace

Service::Service(Network net, ServiceOptions options) : options_(options), working_(std::move(net)) {
  std::mt19937_64 rng(std::random_device{}());
  for (auto asn : working_.asns()) tokens_[asn] = random_token(rng);
  instructor_token_ = random_token(rng);
  std::lock_guard lock(writer_);
  converge_all(working_, options_.max_rounds);
  publish();
  if (options_.refresh_ms > 0) refresh_thread_ = std::thread([this] { refresh_loop(); });
}

Service::~Service() { stop(); }

const std::string& Service::token(uint32_t asn) const { return tokens_.at(asn); }

std::shared_ptr<const Service::State> Service::state() const {
  std::lock_guard lock(state_mu_);
  return state_;
}

void Service::publish() {
  auto s = std::make_shared<State>();
  s->net = std::make_shared<const Network>(working_);
  s->matrix = mon::connectivity_matrix(*s->net);
  s->diagnosis = mon::diagnose(s->matrix);
  std::lock_guard lock(state_mu_);
  history_.push_back(s->matrix);
  while (history_.size() > options_.history) history_.pop_front();
  state_ = std::move(s);
}

void Service::refresh_loop() {
  std::unique_lock lock(refresh_mu_);
  while (!stopping_) {
    if (refresh_cv_.wait_for(lock, std::chrono::milliseconds(options_.refresh_ms), [this] { return stopping_; })) break;
    auto s = state();
    auto m = mon::connectivity_matrix(*s->net);
    std::lock_guard state_lock(state_mu_);
    history_.push_back(std::move(m));
    while (history_.size() > options_.history) history_.pop_front();
  }
}

Response Service::matrix() const { return {200, "application/json", state()->matrix.to_json()}; }

Response Service::diagnosis() const { return {200, "application/json", state()->diagnosis.to_json()}; }

Response Service::history() const {
  json list = json::array();
  {
    std::lock_guard lock(state_mu_);
    for (const auto& m : history_) list.push_back(json::parse(m.to_json()));
  }
  return {200, "application/json", json{{"history", std::move(list)}}.dump()};
}

Response Service::looking_glass(const std::string& asn, const std::string& device, const std::string& view) const {
  auto n = number(asn);
  auto v = mon::parse_view(view);
  if (!n) return error(400, fmt::format("bad AS number '{}'", asn));
  if (!v) return error(404, fmt::format("unknown view '{}'", view));
  auto s = state();
  if (!s->net->find(*n, device)) return error(404, fmt::format("no device {}.{}", asn, device));
  return text(mon::looking_glass(*s->net, *n, device, *v));
}

Response Service::path(const std::string& src, const std::string& dst) const {
  auto a = number(src), b = number(dst);
  if (!a || !b) return error(400, "src and dst must be AS numbers");
  auto s = state();
  if (!s->net->spec().find_as(*a) || !s->net->spec().find_as(*b)) return error(404, "unknown AS");
  return {200, "application/json", mon::as_path_between(*s->net, *a, *b).to_json()};
}

Response Service::topology() const {
  auto s = state();
  const auto& net = *s->net;
  const auto& spec = net.spec();
  json nodes = json::array(), edges = json::array();
  for (const auto& as : spec.ases)
    nodes.push_back({{"id", as.asn},
                     {"kind", "as"},
                     {"role", topo::to_string(as.role)},
                     {"region", as.region},
                     {"auto_configured", as.auto_configured}});
  for (const auto& x : spec.ixps) nodes.push_back({{"id", x.id}, {"kind", "ixp"}});
  std::vector<bool> up(spec.links.size(), true);
  for (const auto& seg : net.segments())
    if (seg.spec_link) up[*seg.spec_link] = seg.up;
  for (size_t i = 0; i < spec.links.size(); ++i) {
    const auto& l = spec.links[i];
    bool b_provider = l.rel == topo::Relationship::BProviderOfA;
    const auto& first = b_provider ? l.b : l.a;
    const auto& second = b_provider ? l.a : l.b;
    edges.push_back({{"a", first.asn}, {"b", second.asn}, {"kind", link_kind(l.rel)}, {"up", up[i]}});
  }
  for (const auto& x : spec.ixps)
    for (const auto& m : x.members) edges.push_back({{"a", m.asn}, {"b", x.id}, {"kind", "ixp"}, {"up", true}});
  return {200, "application/json", json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}}.dump()};
}

Response Service::post_config(const std::string& asn, const std::string& device, const std::string& authorization,
                              const std::string& body, bool defer) {
  auto n = number(asn);
  if (!n) return error(400, fmt::format("bad AS number '{}'", asn));
  auto tok = bearer(authorization);
  if (!tok) return error(401, "missing bearer token");
  auto it = tokens_.find(*n);
  bool allowed = *tok == instructor_token_ || (it != tokens_.end() && *tok == it->second);
  if (!allowed) {
    bool known = std::any_of(tokens_.begin(), tokens_.end(), [&](const auto& kv) { return kv.second == *tok; });
    return error(known ? 403 : 401, known ? fmt::format("token may not configure AS {}", *n) : "unknown token");
  }

  std::lock_guard lock(writer_);
  if (!working_.find(*n, device)) return error(404, fmt::format("no device {}.{}", *n, device));
  auto r = conf::load_config_script(working_, *n, device, body);
  json diags = json::array();
  for (const auto& d : r.diagnostics)
    diags.push_back({{"line", d.line},
                     {"column", d.column},
                     {"severity", d.severity == conf::Diagnostic::Severity::Error ? "error" : "warning"},
                     {"message", d.message}});
  json out{{"applied", r.applied}, {"diagnostics", std::move(diags)}, {"deferred", defer}};
  if (!defer) {
    auto report = converge_all(working_, options_.max_rounds);
    publish();
    out["converged"] = report.converged;
  }
  out["round"] = state()->matrix.round;
  return {200, "application/json", out.dump()};
}

Response Service::post_event(const std::string& authorization, const std::string& body, bool defer) {
  auto tok = bearer(authorization);
  if (!tok) return error(401, "missing bearer token");
  if (*tok != instructor_token_) return error(403, "events need the instructor token");
  Event event;
  try {
    event = parse_event_json(body);
  } catch (const EventError& e) {
    return error(400, e.what());
  }
  if (std::holds_alternative<Snapshot>(event)) return error(400, "snapshot events are only valid in scenarios");
  if (const auto* g = std::get_if<Grade>(&event)) {
    if (g->rubric != "default") return error(400, "only the default rubric is available over HTTP");
    auto s = state();
    json reports = json::array();
    for (const auto& as : s->net->spec().ases) {
      if (g->asn ? as.asn != g->asn : as.auto_configured) continue;
      reports.push_back(json::parse(grade::run_rubric(*s->net, as.asn, grade::default_rubric()).to_json()));
    }
    if (reports.empty()) return error(404, fmt::format("no AS {}", g->asn));
    return {200, "application/json", json{{"reports", std::move(reports)}}.dump()};
  }

  std::lock_guard lock(writer_);
  std::vector<std::string> messages;
  try {
    messages = apply_event(working_, event);
  } catch (const EventError& e) {
    return error(404, e.what());
  }
  json out{{"event", describe(event)}, {"messages", messages}, {"deferred", defer}};
  if (!defer || std::holds_alternative<Converge>(event)) {
    auto report = converge_all(working_, options_.max_rounds);
    publish();
    out["converged"] = report.converged;
    out["deferred"] = false;
  }
  out["round"] = state()->matrix.round;
  return {200, "application/json", out.dump()};
}

void Service::install_routes(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto guarded = [send](auto fn) {
    return [send, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, fn(req));
      } catch (const std::out_of_range& e) {
        send(res, error(404, e.what()));
      } catch (const std::invalid_argument& e) {
        send(res, error(400, e.what()));
      } catch (const std::exception& e) {
        send(res, error(500, e.what()));
      }
    };
  };
  auto defer = [](const httplib::Request& req) { return req.get_param_value("defer") == "1"; };

  server.Get("/matrix", guarded([this](const httplib::Request&) { return matrix(); }));
  server.Get("/matrix/diagnosis", guarded([this](const httplib::Request&) { return diagnosis(); }));
  server.Get("/matrix/history", guarded([this](const httplib::Request&) { return history(); }));
  server.Get("/topology", guarded([this](const httplib::Request&) { return topology(); }));
  server.Get(R"(/lg/([^/]+)/([^/]+)/([^/]+))", guarded([this](const httplib::Request& req) {
               return looking_glass(req.matches[1], req.matches[2], req.matches[3]);
             }));
  server.Get("/path", guarded([this](const httplib::Request& req) {
               return path(req.get_param_value("src"), req.get_param_value("dst"));
             }));
  server.Post(R"(/as/([^/]+)/device/([^/]+)/config)", guarded([this, defer](const httplib::Request& req) {
                return post_config(req.matches[1], req.matches[2], req.get_header_value("Authorization"), req.body,
                                   defer(req));
              }));
  server.Post("/event", guarded([this, defer](const httplib::Request& req) {
                return post_event(req.get_header_value("Authorization"), req.body, defer(req));
              }));
}

void Service::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_);
  if (!server_->listen(host, port)) throw std::runtime_error(fmt::format("cannot listen on {}:{}", host, port));
}

int Service::start(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_);
  int port = server_->bind_to_any_port(host);
  if (port < 0) throw std::runtime_error(fmt::format("cannot bind {}", host));
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  {
    std::lock_guard lock(refresh_mu_);
    stopping_ = true;
  }
  refresh_cv_.notify_all();
  if (refresh_thread_.joinable()) refresh_thread_.join();
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace mnsim::svc
