// mininet-sim: command-line front end.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mnsim/service.hpp"

using namespace mnsim;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct NetworkArgs {
  std::string topology;
  std::string configs;
  bool reference = false;
  unsigned regions = 2;
  unsigned per_region = 10;

  void add(CLI::App* app) {
    app->add_option("--topology", topology, "topology file (default: generated reference topology)");
    app->add_option("--configs", configs, "directory of <asn>/<device>.cfg scripts");
    app->add_flag("--reference", reference, "configure every AS with the reference configuration");
    app->add_option("--regions", regions, "regions of the generated topology")->check(CLI::Range(1u, 12u));
    app->add_option("--per-region", per_region, "ASes per region of the generated topology")->check(CLI::Range(4u, 10u));
  }

  Network load() const {
    return load(topology.empty() ? topo::generate_reference_topology(regions, per_region)
                                 : topo::parse_topology_spec(read_file(topology)));
  }

  Network load(const topo::TopologySpec& spec) const {
    auto net = instantiate(spec);
    if (reference)
      for (auto asn : net.asns()) apply_reference_config(net, asn, ConfigPhase::Full);
    if (!configs.empty())
      for (const auto& msg : svc::load_config_dir(net, configs)) std::cerr << msg << "\n";
    return net;
  }
};

void print_report(const bgp::ConvergenceReport& r) {
  fmt::print("converged: {} after {} rounds\n", r.converged ? "yes" : "no", r.rounds);
  for (const auto& p : r.churning) fmt::print("churning: {}\n", p.str());
}

int cmd_build(const std::string& file, const NetworkArgs& args, bool show_matrix) {
  auto spec = topo::parse_topology_spec(read_file(file));
  auto net = args.load(spec);
  size_t transit = 0;
  for (const auto& as : spec.ases) transit += as.role == topo::Role::Transit;
  fmt::print("{} ASes ({} transit), {} IXPs, {} inter-AS links, {} devices, {} segments\n", spec.ases.size(), transit,
             spec.ixps.size(), spec.links.size(), net.device_count(), net.segments().size());
  auto report = converge_all(net);
  print_report(report);
  const auto& d = derived(net);
  for (const auto& msg : d.diagnostics) fmt::print("diagnostic: {}\n", msg);
  if (show_matrix) fmt::print("{}", mon::render_matrix(mon::connectivity_matrix(net)));
  return report.converged ? 0 : 1;
}

int cmd_run(const std::string& dir, const std::string& out) {
  svc::ScenarioOptions opt;
  if (!out.empty()) opt.out = out;
  auto r = svc::run_scenario(dir, opt);
  for (const auto& l : r.log) fmt::print("{}\n", l);
  size_t green = 0;
  for (size_t i = 0; i < r.matrix.asns.size(); ++i)
    for (size_t j = 0; j < r.matrix.asns.size(); ++j) green += r.matrix.green(i, j);
  fmt::print("matrix: {}/{} green; grades: {}; exit {}\n", green, r.matrix.asns.size() * r.matrix.asns.size(),
             r.grades_passed() ? "pass" : "fail", r.exit_code());
  return r.exit_code();
}

int cmd_shell(uint32_t asn, const NetworkArgs& args) {
  auto net = args.load();
  converge_all(net);
  svc::Shell shell(net, asn);
  bool tty = isatty(fileno(stdin));
  std::string line;
  while (!shell.finished()) {
    if (tty) std::cout << shell.prompt() << std::flush;
    if (!std::getline(std::cin, line)) break;
    try {
      std::cout << shell.execute(line);
    } catch (const svc::PermissionDenied& e) {
      std::cout << "% permission denied: " << e.what() << "\n";
    }
  }
  for (const auto& m : shell.mutations()) std::cerr << "mutation: " << m << "\n";
  return 0;
}

svc::Service* g_service = nullptr;

int cmd_serve(const std::string& host, int port, uint32_t refresh_ms, const NetworkArgs& args) {
  svc::ServiceOptions opt;
  opt.refresh_ms = refresh_ms;
  svc::Service service(args.load(), opt);
  fmt::print("instructor token: {}\n", service.instructor_token());
  for (auto asn : service.state()->net->asns()) fmt::print("AS {} token: {}\n", asn, service.token(asn));
  fmt::print("listening on http://{}:{}\n", host, port);
  std::fflush(stdout);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  service.listen(host, port);
  g_service = nullptr;
  return 0;
}

int cmd_grade(uint32_t asn, const std::string& rubric_file, bool as_json, const NetworkArgs& args) {
  auto rubric = rubric_file.empty() ? grade::default_rubric() : grade::parse_rubric(read_file(rubric_file));
  auto net = args.load();
  converge_all(net);
  auto report = grade::run_rubric(net, asn, rubric);
  fmt::print("{}", as_json ? report.to_json() + "\n" : report.to_text());
  return report.all_passed() ? 0 : 1;
}

int cmd_generate(unsigned regions, unsigned per_region, const std::string& out) {
  auto spec = topo::generate_reference_topology(regions, per_region);
  if (out.empty()) {
    fmt::print("{}", topo::render_topology_spec(spec));
    return 0;
  }
  svc::write_reference_scenario(spec, out);
  fmt::print("wrote scenario with {} ASes to {}\n", spec.ases.size(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic mini-Internet emulator"};
  app.require_subcommand(1);

  NetworkArgs net_args;

  auto* build = app.add_subcommand("build", "validate a topology, converge it and report");
  std::string build_file;
  bool build_matrix = false;
  build->add_option("topology-file", build_file)->required()->check(CLI::ExistingFile);
  build->add_option("--configs", net_args.configs, "directory of <asn>/<device>.cfg scripts");
  build->add_flag("--reference", net_args.reference, "configure every AS with the reference configuration");
  build->add_flag("--matrix", build_matrix, "print the connectivity matrix");

  auto* run = app.add_subcommand("run", "run a scenario directory");
  std::string run_dir, run_out;
  run->add_option("scenario-dir", run_dir)->required()->check(CLI::ExistingDirectory);
  run->add_option("--out", run_out, "output directory (default: <scenario-dir>/out)");

  auto* shell = app.add_subcommand("shell", "interactive session bound to one AS");
  uint32_t shell_as = 0;
  shell->add_option("--as", shell_as)->required();
  net_args.add(shell);

  auto* serve = app.add_subcommand("serve", "HTTP API");
  int port = 8080;
  uint32_t refresh_ms = 0;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port)->required();
  serve->add_option("--host", host);
  serve->add_option("--refresh-ms", refresh_ms, "matrix refresh interval, 0 = after mutations only");
  NetworkArgs serve_args;
  serve_args.add(serve);

  auto* grade_cmd = app.add_subcommand("grade", "grade one AS against a rubric");
  uint32_t grade_as = 0;
  std::string rubric;
  bool json = false;
  grade_cmd->add_option("--as", grade_as)->required();
  grade_cmd->add_option("--rubric", rubric, "rubric file (default: built-in rubric)")->check(CLI::ExistingFile);
  grade_cmd->add_flag("--json", json);
  NetworkArgs grade_args;
  grade_args.add(grade_cmd);

  auto* generate = app.add_subcommand("generate", "generate a reference topology or scenario");
  unsigned regions = 2, per_region = 10;
  std::string gen_out;
  generate->add_option("--regions", regions)->check(CLI::Range(1u, 12u));
  generate->add_option("--per-region", per_region)->check(CLI::Range(4u, 10u));
  generate->add_option("--out", gen_out, "write a scenario directory instead of printing the topology");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build(build_file, net_args, build_matrix);
    if (*run) return cmd_run(run_dir, run_out);
    if (*shell) return cmd_shell(shell_as, net_args);
    if (*serve) return cmd_serve(host, port, refresh_ms, serve_args);
    if (*grade_cmd) return cmd_grade(grade_as, rubric, json, grade_args);
    if (*generate) return cmd_generate(regions, per_region, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
