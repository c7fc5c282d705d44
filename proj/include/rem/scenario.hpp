#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rem/model.hpp"
#include "rem/sim.hpp"

namespace rem {

inline constexpr int kScenarioSchemaVersion = 1;

// Raised for unreadable, malformed or invalid scenario files. The CLI maps
// every kind to exit code 2.
class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { io, parse, validation };

  ScenarioError(Kind kind, std::string message, std::vector<std::string> violations = {})
      : std::runtime_error(std::move(message)), kind_(kind), violations_(std::move(violations)) {}

  Kind kind() const { return kind_; }
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  Kind kind_;
  std::vector<std::string> violations_;
};

// Scenario files are JSON with // comments allowed. Unknown keys are errors.
// A link with hops may omit per_byte_time/fixed_latency; they are then summed
// from its direct segments.
Scenario parse_scenario(std::string_view text, std::string_view source = "<memory>");
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_text(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

Calibration parse_calibration(std::string_view text);
std::string calibration_to_text(const Calibration& c);

enum class ReportFormat { csv, table };

// csv columns: case_label, deploy_s, proc_resp_s, makespan_s, excluded_nodes
std::string emit_report(const std::vector<SimReport>& reports, ReportFormat format);

enum class SweepAxis { num_objects, object_bytes };

struct SweepPoint {
  double value = 0.0;
  std::vector<SimReport> reports;
};

// Clones the scenario per value, overriding #D or byte_d, and compares the
// cases at each point. The base scenario is never modified.
std::vector<SweepPoint> sweep(const Scenario& s, SweepAxis axis, const std::vector<double>& values,
                              const std::vector<std::string>& case_tokens,
                              const SimOptions& options = {});

// Sweep CSV: the report columns prefixed with the axis name.
std::string emit_sweep_report(const std::vector<SweepPoint>& points, SweepAxis axis,
                              ReportFormat format);

std::string_view to_string(SweepAxis axis);

}  // namespace rem
