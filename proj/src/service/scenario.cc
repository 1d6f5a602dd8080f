#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mnsim/service.hpp"
#include "mnsim/text.hpp"

namespace mnsim::svc {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw EventError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << content;
}

std::vector<mon::View> views_for(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::Router: return {mon::View::Route, mon::View::Ospf, mon::View::Bgp, mon::View::RunningConfig};
    case DeviceKind::RouteServer: return {mon::View::Bgp, mon::View::RunningConfig};
    case DeviceKind::Switch: return {mon::View::SpanningTree, mon::View::RunningConfig};
    case DeviceKind::Host: return {mon::View::Route, mon::View::RunningConfig};
  }
  return {};
}

std::string report_text(const bgp::ConvergenceReport& r) {
  std::string out = fmt::format("converged {} after {} rounds\n", r.converged ? "yes" : "no", r.rounds);
  for (const auto& p : r.churning) out += fmt::format("churning {}\n", p.str());
  for (const auto& d : r.diagnostics) out += fmt::format("diagnostic {}\n", d);
  return out;
}

}  // namespace

std::vector<std::string> load_config_dir(Network& net, const fs::path& dir) {
  std::vector<std::string> log;
  if (!fs::exists(dir)) return log;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto asn_text = f.parent_path().filename().string();
    auto asn = text::to_number<uint32_t>(asn_text);
    if (!asn) throw EventError(fmt::format("{}: directory name is not an AS number", f.string()));
    auto device = f.stem().string();
    if (!net.find(*asn, device)) throw EventError(fmt::format("{}: no device {}.{}", f.string(), *asn, device));
    auto r = conf::load_config_script(net, *asn, device, read_file(f));
    for (const auto& d : r.diagnostics)
      log.push_back(fmt::format("config {}.{} line {}:{}: {}", *asn, device, d.line, d.column, d.message));
  }
  return log;
}

void write_reference_scenario(const topo::TopologySpec& spec, const fs::path& dir) {
  write_file(dir / "topology.txt", topo::render_topology_spec(spec));
  Network net(spec);
  for (const auto& as : spec.ases)
    for (const auto& [device, script] : generate_reference_config(net, as.asn, ConfigPhase::Full))
      write_file(dir / "configs" / std::to_string(as.asn) / (device + ".cfg"), script);
  write_file(dir / "rubrics" / "default.rubric", grade::default_rubric_text());
  write_file(dir / "events.txt", "snapshot final\ngrade all default\n");
}

bool ScenarioResult::grades_passed() const {
  return std::all_of(grades.begin(), grades.end(), [](const grade::GradeReport& g) { return g.all_passed(); });
}

int ScenarioResult::exit_code() const { return converged && grades_passed() ? 0 : 1; }

void write_snapshot(const Network& net, const fs::path& dir) {
  auto m = mon::connectivity_matrix(net);
  write_file(dir / "matrix.json", m.to_json() + "\n");
  write_file(dir / "matrix.txt", mon::render_matrix(m));
  write_file(dir / "diagnosis.json", mon::diagnose(m).to_json() + "\n");
  for (DeviceId id = 0; id < net.device_count(); ++id) {
    const auto& dev = net.device(id);
    std::string out;
    for (auto v : views_for(dev.kind)) {
      out += fmt::format("=== {} ===\n", mon::to_string(v));
      out += mon::looking_glass(net, dev.asn, dev.name, v);
    }
    write_file(dir / "lg" / std::to_string(dev.asn) / (dev.name + ".txt"), out);
  }
}

ScenarioResult run_scenario(const fs::path& dir, const ScenarioOptions& options) {
  ScenarioResult result;
  auto out = options.out.empty() ? dir / "out" : options.out;
  for (const char* sub : {"matrices", "snapshots", "grades"}) fs::remove_all(out / sub);
  fs::create_directories(out);

  auto spec = topo::parse_topology_spec(read_file(dir / "topology.txt"));
  auto net = instantiate(spec);
  result.log = load_config_dir(net, dir / "configs");
  std::vector<Event> events;
  if (fs::exists(dir / "events.txt")) events = parse_events(read_file(dir / "events.txt"), dir);
  if (events.empty()) events.push_back(Snapshot{"final"});

  auto rubric = [&](const std::string& name) {
    auto file = dir / "rubrics" / (name + ".rubric");
    if (fs::exists(file)) return grade::parse_rubric(read_file(file));
    if (name == "default") return grade::default_rubric();
    throw EventError(fmt::format("no rubric '{}'", name));
  };

  auto converge = [&](size_t seq) {
    result.last_report = converge_all(net, options.max_rounds);
    result.matrix = mon::connectivity_matrix(net);
    write_file(out / "matrices" / fmt::format("{:03}.json", seq), result.matrix.to_json() + "\n");
    if (result.last_report.converged) return true;
    result.converged = false;
    result.log.push_back(fmt::format("did not converge after {} rounds", result.last_report.rounds));
    write_file(out / "convergence.txt", report_text(result.last_report));
    return false;
  };

  bool ok = converge(0);
  for (size_t i = 0; ok && i < events.size(); ++i) {
    const auto& e = events[i];
    const auto seq = i + 1;
    result.log.push_back(fmt::format("[{}] {}", seq, describe(e)));
    for (auto& msg : apply_event(net, e)) result.log.push_back("  " + msg);
    if (is_mutating(e) || std::holds_alternative<Converge>(e)) {
      ok = converge(seq);
      continue;
    }
    if (const auto* s = std::get_if<Snapshot>(&e)) {
      write_snapshot(net, out / "snapshots" / s->tag);
    } else if (const auto* g = std::get_if<Grade>(&e)) {
      auto r = rubric(g->rubric);
      std::vector<uint32_t> targets;
      if (g->asn) {
        if (!net.spec().find_as(g->asn)) throw EventError(fmt::format("no AS {}", g->asn));
        targets.push_back(g->asn);
      } else {
        for (const auto& as : net.spec().ases)
          if (!as.auto_configured) targets.push_back(as.asn);
      }
      for (auto asn : targets) {
        auto report = grade::run_rubric(net, asn, r);
        auto base = out / "grades" / fmt::format("{:03}-{}-AS{}", seq, g->rubric, asn);
        write_file(base.string() + ".json", report.to_json() + "\n");
        write_file(base.string() + ".txt", report.to_text());
        result.log.push_back(fmt::format("  AS {}: {}/{}", asn, report.score, report.max_score));
        result.grades.push_back(std::move(report));
      }
    }
  }

  std::string log;
  for (const auto& l : result.log) log += l + "\n";
  write_file(out / "log.txt", log);
  return result;
}

}  // namespace mnsim::svc
