#pragma once

// Per-AS auto-grading against a rubric of checks.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mnsim/monitor.hpp"

namespace mnsim::grade {

enum class CheckKind {
  Addressing,
  L2Isolation,
  StpPattern,
  IntraReach,
  Ecmp,
  SessionsUp,
  PolicyLocalPref,
  PolicyExport,
  HijackReport,
};

std::optional<CheckKind> parse_kind(std::string_view name);
const char* to_string(CheckKind kind);

struct Check {
  std::string id;
  CheckKind kind = CheckKind::Addressing;
  double weight = 1;
  std::map<std::string, std::string> params;
};

struct Rubric {
  std::vector<Check> checks;
};

class RubricError : public std::runtime_error {
 public:
  RubricError(size_t line, const std::string& message);
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// `check <id> <kind> weight=<n> [key=value...]`, `#` comments.
Rubric parse_rubric(std::string_view text);
std::string render_rubric(const Rubric& rubric);

// Every kind that needs no scenario-specific parameters, with the
// 300/200/100 local-preference convention.
const char* default_rubric_text();
Rubric default_rubric();

struct CheckResult {
  std::string id;
  CheckKind kind = CheckKind::Addressing;
  double weight = 0;
  bool pass = false;
  std::vector<std::string> evidence;
  std::vector<std::string> skipped;
};

struct GradeReport {
  uint32_t asn = 0;
  std::vector<CheckResult> checks;
  double score = 0;  // sum of the weights of passed checks
  double max_score = 0;

  bool all_passed() const;
  std::string to_json() const;
  std::string to_text() const;
};

// Needs a converged network.
GradeReport run_rubric(const Network& net, uint32_t asn, const Rubric& rubric);
CheckResult run_check(const Network& net, uint32_t asn, const Check& check);

// Forwarding AS paths, over all ordered AS pairs, that are not valley-free.
std::vector<mon::AsPath> check_valley_free(const Network& net);

}  // namespace mnsim::grade
