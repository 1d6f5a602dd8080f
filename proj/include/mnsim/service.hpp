#pragma once

// Operator surface: scenario events and the scenario runner, the per-AS
// session shell, and the HTTP service.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "mnsim/grader.hpp"

namespace httplib {
class Server;
}

namespace mnsim::svc {

// Events. A link is named by its two router endpoints, intra- or inter-AS.
struct ApplyConfig {
  uint32_t asn = 0;
  std::string device;
  std::string script;
};
struct FailLink {
  topo::RouterRef a, b;
};
struct RestoreLink {
  topo::RouterRef a, b;
};
struct FailRouter {
  topo::RouterRef router;
};
struct RestoreRouter {
  topo::RouterRef router;
};
struct Hijack {
  uint32_t attacker = 0;
  Prefix prefix;
  bool more_specific = false;
};
// Without a prefix: withdraws everything the AS announced in hijacks.
struct Withdraw {
  uint32_t asn = 0;
  std::optional<Prefix> prefix;
};
struct Announce {
  uint32_t asn = 0;
  Prefix prefix;
};
// The victim answers every recorded hijack of one of its prefixes.
struct Mitigate {
  uint32_t victim = 0;
};
struct Converge {};
struct Snapshot {
  std::string tag;
};
// asn 0 grades every student-operated AS. rubric "default" is built in.
struct Grade {
  uint32_t asn = 0;
  std::string rubric = "default";
};

using Event = std::variant<ApplyConfig, FailLink, RestoreLink, FailRouter, RestoreRouter, Hijack, Withdraw, Announce,
                           Mitigate, Converge, Snapshot, Grade>;

class EventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One event per line:
//   apply <asn> <device> <script-file>      (path relative to `base`)
//   fail-link <asn>.<router> <asn>.<router>
//   restore-link <asn>.<router> <asn>.<router>
//   fail-router <asn>.<router>
//   restore-router <asn>.<router>
//   hijack <attacker> <prefix> [more-specific]
//   withdraw <asn> [prefix]
//   announce <asn> <prefix>
//   mitigate <victim>
//   converge
//   snapshot <tag>
//   grade <asn|all> [rubric]
// Blank lines and `#` comments are skipped. Throws EventError.
std::vector<Event> parse_events(std::string_view text, const std::filesystem::path& base = {});
Event parse_event_json(std::string_view json);
std::string event_to_json(const Event& event);
std::string describe(const Event& event);
bool is_mutating(const Event& event);

// Applies a mutating event; returns diagnostics. Throws EventError when the
// event names something that does not exist.
std::vector<std::string> apply_event(Network& net, const Event& event);

struct ScenarioOptions {
  std::filesystem::path out;  // default <dir>/out
  size_t max_rounds = bgp::kDefaultMaxRounds;
};

struct ScenarioResult {
  bool converged = true;
  bgp::ConvergenceReport last_report;
  std::vector<grade::GradeReport> grades;
  mon::ConnectivityMatrix matrix;  // after the last event
  std::vector<std::string> log;

  bool grades_passed() const;
  // 0 when converged and every grade passed, 1 otherwise.
  int exit_code() const;
};

// Directory layout: topology.txt, configs/<asn>/<device>.cfg, events.txt,
// rubrics/*.rubric. Writes snapshots, matrices and grade reports under out.
// Throws EventError or topo::TopologyError for a malformed scenario.
ScenarioResult run_scenario(const std::filesystem::path& dir, const ScenarioOptions& options = {});

// Loads every <dir>/<asn>/<device>.cfg in path order; returns diagnostics.
std::vector<std::string> load_config_dir(Network& net, const std::filesystem::path& dir);

// A scenario directory for `spec` with reference configs for every AS and an
// event list that snapshots and grades every student-operated AS.
void write_reference_scenario(const topo::TopologySpec& spec, const std::filesystem::path& dir);

// Writes the matrix, its diagnosis and every looking-glass view under `dir`.
void write_snapshot(const Network& net, const std::filesystem::path& dir);

class PermissionDenied : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A student session bound to one AS.
class Shell {
 public:
  Shell(Network& net, uint32_t asn);

  // Executes one line and returns its output. Throws PermissionDenied when
  // the line addresses another AS.
  std::string execute(std::string_view line);

  bool finished() const { return finished_; }
  std::string prompt() const;
  const std::vector<std::string>& mutations() const { return mutations_; }
  std::optional<DeviceId> device() const { return device_; }
  const conf::Context& context() const { return context_; }

 private:
  std::string show(const std::vector<std::string_view>& words);
  std::string probe(bool ping, std::string_view target);
  std::string local_matrix();

  Network& net_;
  uint32_t asn_;
  std::optional<DeviceId> device_;
  conf::Context context_;
  bool finished_ = false;
  std::vector<std::string> mutations_;
};

struct ServiceOptions {
  uint32_t refresh_ms = 0;   // 0: the matrix is only recomputed after mutations
  size_t history = 32;       // matrices kept for /matrix/history
  size_t max_rounds = bgp::kDefaultMaxRounds;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Single writer over a working network; readers get the last converged
// snapshot and are never blocked by a converge.
class Service {
 public:
  explicit Service(Network net, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const std::string& token(uint32_t asn) const;  // throws std::out_of_range
  const std::string& instructor_token() const { return instructor_token_; }

  struct State {
    std::shared_ptr<const Network> net;
    mon::ConnectivityMatrix matrix;
    mon::Diagnosis diagnosis;
  };
  std::shared_ptr<const State> state() const;

  Response matrix() const;
  Response diagnosis() const;
  Response history() const;
  Response looking_glass(const std::string& asn, const std::string& device, const std::string& view) const;
  Response path(const std::string& src, const std::string& dst) const;
  Response topology() const;
  // `authorization` is the raw header value.
  Response post_config(const std::string& asn, const std::string& device, const std::string& authorization,
                       const std::string& body, bool defer);
  Response post_event(const std::string& authorization, const std::string& body, bool defer);

  // Blocks until stop(). Throws std::runtime_error on bind failure.
  void listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread.
  int start(const std::string& host = "127.0.0.1");
  void stop();

 private:
  void publish();  // requires writer_
  void refresh_loop();
  void install_routes(httplib::Server& server);

  ServiceOptions options_;
  Network working_;
  mutable std::mutex writer_;
  mutable std::mutex state_mu_;
  std::shared_ptr<const State> state_;
  std::deque<mon::ConnectivityMatrix> history_;
  std::map<uint32_t, std::string> tokens_;
  std::string instructor_token_;

  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::thread refresh_thread_;
  std::mutex refresh_mu_;
  std::condition_variable refresh_cv_;
  bool stopping_ = false;
};

}  // namespace mnsim::svc
