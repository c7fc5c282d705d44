#include "rem/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rem {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw ScenarioError(ScenarioError::Kind::parse, message);
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) fail(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(where + ": unknown key '" + key + "'");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number()) fail(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::uint64_t byte_count(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  fail(where + "." + key + ": expected a non-negative integer byte count");
}

std::int64_t integer(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_integer()) fail(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) fail(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_array()) fail(where + "." + key + ": expected an array");
  return v;
}

std::string indexed(const char* name, std::size_t i) {
  return std::string(name) + "[" + std::to_string(i) + "]";
}

NodeProfile read_node(const json& j, const std::string& where) {
  check_keys(j, {"node_id", "kind", "cpu_benchmark", "cores_available", "ram_total", "disk_read",
                 "disk_write"},
             where);
  NodeProfile n;
  n.node_id = text(j, "node_id", where);
  const auto kind = text(j, "kind", where);
  const auto parsed = parse_node_kind(kind);
  if (!parsed) fail(where + ".kind: unknown node kind '" + kind + "'");
  n.kind = *parsed;
  n.cpu_benchmark = number(j, "cpu_benchmark", where);
  const auto cores = integer(j, "cores_available", where);
  if (cores < 0 || cores > 1 << 20) fail(where + ".cores_available: out of range");
  n.cores_available = static_cast<int>(cores);
  n.ram_total = byte_count(j, "ram_total", where);
  n.disk_read = number(j, "disk_read", where);
  n.disk_write = number(j, "disk_write", where);
  return n;
}

DynamicContext read_context(const json& j, const std::string& where) {
  check_keys(j, {"node_id", "cpu_usage", "ram_used", "sampled_at"}, where);
  DynamicContext c;
  c.node_id = text(j, "node_id", where);
  c.cpu_usage = number(j, "cpu_usage", where);
  c.ram_used = byte_count(j, "ram_used", where);
  c.sampled_at = j.contains("sampled_at") ? number(j, "sampled_at", where) : 0.0;
  return c;
}

struct RawLink {
  LinkPath path;
  bool needs_composition = false;
  std::string where;
};

RawLink read_link(const json& j, const std::string& where) {
  check_keys(j, {"from", "to", "per_byte_time", "fixed_latency", "hops"}, where);
  RawLink raw;
  raw.where = where;
  auto& l = raw.path;
  l.from = text(j, "from", where);
  l.to = text(j, "to", where);
  if (j.contains("hops")) {
    const auto& hops = array(j, "hops", where);
    for (std::size_t i = 0; i < hops.size(); ++i) {
      if (!hops[i].is_string()) fail(where + "." + indexed("hops", i) + ": expected a string");
      l.hops.push_back(hops[i].get<std::string>());
    }
  }
  const bool has_rate = j.contains("per_byte_time");
  const bool has_latency = j.contains("fixed_latency");
  if (!l.hops.empty() && !has_rate && !has_latency) {
    raw.needs_composition = true;
    return raw;
  }
  l.per_byte_time = number(j, "per_byte_time", where);
  l.fixed_latency = has_latency ? number(j, "fixed_latency", where) : 0.0;
  return raw;
}

RequestSpec read_request(const json& j, const std::string& where) {
  check_keys(j, {"byte_alg", "byte_mdl", "byte_desc", "byte_d", "num_objects", "receiver",
                 "requester"},
             where);
  RequestSpec r;
  r.byte_alg = byte_count(j, "byte_alg", where);
  r.byte_mdl = byte_count(j, "byte_mdl", where);
  r.byte_desc = byte_count(j, "byte_desc", where);
  r.byte_d = byte_count(j, "byte_d", where);
  r.num_objects = integer(j, "num_objects", where);
  r.receiver = text(j, "receiver", where);
  r.requester = text(j, "requester", where);
  return r;
}

Calibration read_calibration(const json& j, const std::string& where) {
  check_keys(j, {"t_upk_mdl", "t_upk_alg", "t_pk_mdl", "t_pk_alg", "t_pk_d", "t_upk_d", "t_pk_o1",
                 "t_proc1", "t_upk_o1", "out_bytes_per_object"},
             where);
  Calibration c;
  c.t_upk_mdl = number(j, "t_upk_mdl", where);
  c.t_upk_alg = number(j, "t_upk_alg", where);
  c.t_pk_mdl = number(j, "t_pk_mdl", where);
  c.t_pk_alg = number(j, "t_pk_alg", where);
  c.t_pk_d = number(j, "t_pk_d", where);
  c.t_upk_d = number(j, "t_upk_d", where);
  c.t_pk_o1 = number(j, "t_pk_o1", where);
  c.t_proc1 = number(j, "t_proc1", where);
  c.t_upk_o1 = number(j, "t_upk_o1", where);
  c.out_bytes_per_object = byte_count(j, "out_bytes_per_object", where);
  return c;
}

ResourceWeights read_weights(const json& arr, const std::string& where) {
  ResourceWeights w;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto at = where + "[" + std::to_string(i) + "]";
    check_keys(arr[i], {"resource", "weight"}, at);
    const auto name = text(arr[i], "resource", at);
    const auto kind = parse_resource_kind(name);
    if (!kind) fail(at + ".resource: unknown resource kind '" + name + "'");
    w.entries.push_back({*kind, number(arr[i], "weight", at)});
  }
  return w;
}

json calibration_json(const Calibration& c) {
  return json{{"t_upk_mdl", c.t_upk_mdl}, {"t_upk_alg", c.t_upk_alg},
              {"t_pk_mdl", c.t_pk_mdl},   {"t_pk_alg", c.t_pk_alg},
              {"t_pk_d", c.t_pk_d},       {"t_upk_d", c.t_upk_d},
              {"t_pk_o1", c.t_pk_o1},     {"t_proc1", c.t_proc1},
              {"t_upk_o1", c.t_upk_o1},   {"out_bytes_per_object", c.out_bytes_per_object}};
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    fail(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string join_excluded(const std::set<NodeId>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ';';
    out += id;
  }
  return out;
}

using Row = std::vector<std::string>;

std::string render(const Row& header, const std::vector<Row>& rows, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    auto line = [&](const Row& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << "  ";
      // Label columns left-aligned, numbers right-aligned.
      const bool left = header[i] == "case_label" || header[i] == "excluded_nodes";
      out << (left ? std::left : std::right) << std::setw(static_cast<int>(width[i])) << r[i];
    }
    out << '\n';
  };
  line(header);
  Row rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
  return out.str();
}

Row report_row(const SimReport& r) {
  return {r.case_label, fixed6(r.deploy_s), fixed6(r.proc_resp_s), fixed6(r.makespan),
          join_excluded(r.excluded)};
}

const Row kReportHeader{"case_label", "deploy_s", "proc_resp_s", "makespan_s", "excluded_nodes"};

}  // namespace

Scenario parse_scenario(std::string_view text_in, std::string_view source) {
  const json root = parse_json(text_in, source);
  const std::string src(source);
  check_keys(root, {"schema_version", "delegator", "nodes", "contexts", "links", "request",
                    "calibration", "weights"},
             src);
  const auto version = integer(root, "schema_version", src);
  if (version != kScenarioSchemaVersion)
    fail(src + ": unsupported schema_version " + std::to_string(version));

  Scenario s;
  s.delegator = text(root, "delegator", src);
  const auto& nodes = array(root, "nodes", src);
  for (std::size_t i = 0; i < nodes.size(); ++i) s.nodes.push_back(read_node(nodes[i], indexed("nodes", i)));
  const auto& contexts = array(root, "contexts", src);
  for (std::size_t i = 0; i < contexts.size(); ++i)
    s.contexts.push_back(read_context(contexts[i], indexed("contexts", i)));

  std::vector<RawLink> raw;
  const auto& links = array(root, "links", src);
  for (std::size_t i = 0; i < links.size(); ++i) raw.push_back(read_link(links[i], indexed("links", i)));
  for (const auto& r : raw) {
    if (!r.needs_composition) s.links.push_back(r.path);
  }
  for (const auto& r : raw) {
    if (!r.needs_composition) continue;
    auto composed = compose_path(s, r.path.from, r.path.hops, r.path.to);
    if (!composed) fail(r.where + ": cannot sum hop segments, a direct segment is missing");
    s.links.push_back(*composed);
  }

  s.request = read_request(field(root, "request", src), "request");
  s.calibration = read_calibration(field(root, "calibration", src), "calibration");
  s.weights = read_weights(array(root, "weights", src), "weights");

  auto violations = validate_scenario(s);
  if (!violations.empty()) {
    std::string msg = src + ": scenario is invalid:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ScenarioError(ScenarioError::Kind::validation, msg, std::move(violations));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(ScenarioError::Kind::io, "cannot read scenario file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto content = buf.str();
  if (content.find_first_not_of(" \t\r\n") == std::string::npos)
    fail(path.string() + ":1:1: parse error: empty scenario file");
  return parse_scenario(content, path.string());
}

std::string scenario_to_text(const Scenario& s) {
  json root;
  root["schema_version"] = kScenarioSchemaVersion;
  root["delegator"] = s.delegator;
  root["nodes"] = json::array();
  for (const auto& n : s.nodes) {
    root["nodes"].push_back({{"node_id", n.node_id},
                             {"kind", std::string(to_string(n.kind))},
                             {"cpu_benchmark", n.cpu_benchmark},
                             {"cores_available", n.cores_available},
                             {"ram_total", n.ram_total},
                             {"disk_read", n.disk_read},
                             {"disk_write", n.disk_write}});
  }
  root["contexts"] = json::array();
  for (const auto& c : s.contexts) {
    root["contexts"].push_back({{"node_id", c.node_id},
                                {"cpu_usage", c.cpu_usage},
                                {"ram_used", c.ram_used},
                                {"sampled_at", c.sampled_at}});
  }
  root["links"] = json::array();
  for (const auto& l : s.links) {
    root["links"].push_back({{"from", l.from},
                             {"to", l.to},
                             {"per_byte_time", l.per_byte_time},
                             {"fixed_latency", l.fixed_latency},
                             {"hops", l.hops}});
  }
  const auto& r = s.request;
  root["request"] = {{"byte_alg", r.byte_alg},   {"byte_mdl", r.byte_mdl},
                     {"byte_desc", r.byte_desc}, {"byte_d", r.byte_d},
                     {"num_objects", r.num_objects}, {"receiver", r.receiver},
                     {"requester", r.requester}};
  root["calibration"] = calibration_json(s.calibration);
  root["weights"] = json::array();
  for (const auto& w : s.weights.entries) {
    root["weights"].push_back({{"resource", std::string(to_string(w.resource))}, {"weight", w.weight}});
  }
  return root.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError(ScenarioError::Kind::io, "cannot write '" + path.string() + "'");
  out << scenario_to_text(s);
}

Calibration parse_calibration(std::string_view text_in) {
  return read_calibration(parse_json(text_in, "<calibration>"), "calibration");
}

std::string calibration_to_text(const Calibration& c) { return calibration_json(c).dump(2) + "\n"; }

std::string emit_report(const std::vector<SimReport>& reports, ReportFormat format) {
  if (reports.empty()) throw std::invalid_argument("no reports to emit");
  std::vector<Row> rows;
  for (const auto& r : reports) rows.push_back(report_row(r));
  return render(kReportHeader, rows, format);
}

std::string_view to_string(SweepAxis axis) {
  return axis == SweepAxis::num_objects ? "num_objects" : "object_bytes";
}

std::vector<SweepPoint> sweep(const Scenario& s, SweepAxis axis, const std::vector<double>& values,
                              const std::vector<std::string>& case_tokens,
                              const SimOptions& options) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (double v : values) {
    if (!(v > 0.0) || std::floor(v) != v)
      throw std::invalid_argument("sweep values must be positive integers");
  }
  if (case_tokens.empty()) throw std::invalid_argument("sweep needs at least one case");
  std::vector<Case> cases;
  for (const auto& t : case_tokens) cases.push_back(parse_case(s, t));

  std::vector<SweepPoint> points(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  const auto count = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      Scenario point = s;
      if (axis == SweepAxis::num_objects) {
        point.request.num_objects = static_cast<std::int64_t>(values[i]);
      } else {
        point.request.byte_d = static_cast<Bytes>(values[i]);
      }
      points[i].value = values[i];
      points[i].reports = compare_serial(point, cases, options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

std::string emit_sweep_report(const std::vector<SweepPoint>& points, SweepAxis axis,
                              ReportFormat format) {
  if (points.empty()) throw std::invalid_argument("no sweep points to emit");
  Row header{std::string(to_string(axis))};
  header.insert(header.end(), kReportHeader.begin(), kReportHeader.end());
  std::vector<Row> rows;
  for (const auto& p : points) {
    char value[64];
    std::snprintf(value, sizeof value, "%.0f", p.value);
    for (const auto& r : p.reports) {
      Row row{value};
      auto rest = report_row(r);
      row.insert(row.end(), rest.begin(), rest.end());
      rows.push_back(std::move(row));
    }
  }
  return render(header, rows, format);
}

}  // namespace rem
