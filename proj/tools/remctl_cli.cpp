#include "remctl_cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "rem/assign.hpp"
#include "rem/epnet/deployer.hpp"
#include "rem/epnet/worker.hpp"
#include "rem/scenario.hpp"
#include "rem/sim.hpp"

namespace remctl {

namespace {

using namespace rem;
namespace ep = rem::epnet;

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested = true; }

// Input problems the user can fix by changing the command line or files.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

FormulaVariant parse_variant(const std::string& s) {
  return s == "literal" ? FormulaVariant::literal : FormulaVariant::time_inverted;
}

UplinkMode parse_uplink(const std::string& s) {
  return s == "parallel" ? UplinkMode::parallel : UplinkMode::serialized;
}

ReportFormat parse_format(const std::string& s) {
  return s == "table" ? ReportFormat::table : ReportFormat::csv;
}

ep::Buffer random_bytes(std::size_t n, std::mt19937_64& rng) {
  ep::Buffer b(n);
  std::size_t i = 0;
  while (i < n) {
    std::uint64_t word = rng();
    for (int k = 0; k < 8 && i < n; ++k, ++i) {
      b[i] = static_cast<std::uint8_t>(word);
      word >>= 8;
    }
  }
  return b;
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

std::string policy_name(const AssignmentPolicy& p) {
  struct {
    std::string operator()(const RemGreedy& r) const { return "REM over " + join(r.candidates, ","); }
    std::string operator()(const LocalOnly&) const { return "local only"; }
    std::string operator()(const Mono& m) const { return "migrate all to " + m.target; }
    std::string operator()(const EqualSplit& e) const { return "equal split over " + join(e.participants, ","); }
  } v;
  return std::visit(v, p);
}

void print_plan(const Plan& plan, bool verbose, std::ostream& out) {
  out << "node\twp\twt_s\n";
  for (const auto& [id, wp] : plan.assignments) {
    const auto it = plan.estimates.find(id);
    out << id << '\t' << wp << '\t' << fixed6(it == plan.estimates.end() ? 0.0 : it->second) << '\n';
  }
  out << "predicted_makespan_s\t" << fixed6(plan.predicted_makespan) << '\n';
  std::vector<std::string> excluded(plan.excluded.begin(), plan.excluded.end());
  out << "excluded\t" << (excluded.empty() ? "-" : join(excluded, ";")) << '\n';
  if (!verbose) return;
  for (const auto& step : plan.trace) {
    out << "step " << step.step_index << " -> " << step.chosen << "\t";
    std::vector<std::string> wts;
    for (const auto& [id, wt] : step.wt_before) wts.push_back(id + "=" + fixed6(wt));
    out << join(wts, " ") << '\n';
  }
}

struct Globals {
  std::uint64_t seed = 1;
  bool verbose = false;
  std::string formula = "inverted";
  std::string uplink = "serialized";

  SimOptions sim() const { return SimOptions{parse_uplink(uplink), parse_variant(formula)}; }
};

void log_verbose(const Globals& g, std::ostream& err, const std::string& line) {
  if (g.verbose) err << line << '\n';
}

std::vector<Case> resolve_cases(const Scenario& s, const std::vector<std::string>& tokens, bool power_set) {
  if (power_set) return power_set_cases(s);
  std::vector<Case> cases;
  if (tokens.empty()) {
    for (const auto& id : s.node_ids()) cases.push_back(parse_case(s, id));
    cases.push_back(parse_case(s, subset_label(s, s.node_ids())));
    cases.push_back(parse_case(s, "REM"));
    return cases;
  }
  for (const auto& t : tokens) cases.push_back(parse_case(s, t));
  return cases;
}

std::map<NodeId, ep::Endpoint> parse_worker_addresses(const std::vector<std::string>& specs) {
  std::map<NodeId, ep::Endpoint> out;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--worker expects ID=host:port, got '" + spec + "'");
    try {
      out[spec.substr(0, eq)] = ep::Endpoint::parse(spec.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  return out;
}

ep::Endpoint parse_endpoint(const std::string& text) {
  try {
    return ep::Endpoint::parse(text);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

struct SizeOverrides {
  std::int64_t objects = 0;
  std::uint64_t object_bytes = 0;
  std::uint64_t alg_bytes = 0;
  std::uint64_t mdl_bytes = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--objects", objects, "Number of data objects (default: the scenario's)");
    cmd->add_option("--object-bytes", object_bytes, "Size of one data object in bytes");
    cmd->add_option("--alg-bytes", alg_bytes, "Size of the program archive in bytes");
    cmd->add_option("--mdl-bytes", mdl_bytes, "Size of the modules archive in bytes");
  }
  void apply(RequestSpec& r) const {
    if (objects > 0) r.num_objects = objects;
    if (object_bytes > 0) r.byte_d = object_bytes;
    if (alg_bytes > 0) r.byte_alg = alg_bytes;
    if (mdl_bytes > 0) r.byte_mdl = mdl_bytes;
  }
};

ep::PackageSource synthetic_source(const RequestSpec& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ep::PackageSource src;
  src.alg = random_bytes(r.byte_alg, rng);
  src.mdl = random_bytes(r.byte_mdl, rng);
  for (std::int64_t i = 0; i < r.num_objects; ++i) src.objects.push_back(random_bytes(r.byte_d, rng));
  return src;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plan, simulate and deploy edge process requests with REM assignment", "remctl"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice (synthetic data, executor jitter)")
      ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Print the assignment trace and progress logs");
  app.add_option("--formula", g.formula, "Capability scaling: inverted (durations) or literal")
      ->check(CLI::IsMember({"inverted", "literal"}))
      ->capture_default_str();
  app.add_option("--uplink", g.uplink, "Simulated delegator uplink: serialized or parallel")
      ->check(CLI::IsMember({"serialized", "parallel"}))
      ->capture_default_str();

  std::string scenario_path;
  std::string format = "csv";
  std::string out_path;

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Compute the assignment for one policy");
  std::string policy = "REM";
  bool with_optimal = false;
  std::uint64_t cap = 5'000'000;
  plan_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  plan_cmd->add_option("--policy", policy, "Case token: REM, A.<ids>, a single id, or several ids")
      ->capture_default_str();
  plan_cmd->add_flag("--optimal", with_optimal, "Also print the exhaustive optimum over the same nodes");
  plan_cmd->add_option("--cap", cap, "Largest split count the exhaustive search may visit")
      ->capture_default_str();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate one case and print per-worker spans");
  std::string case_token = "REM";
  std::string sim_format = "table";
  sim_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  sim_cmd->add_option("--case", case_token, "Case token")->capture_default_str();
  sim_cmd->add_option("--format", sim_format, "csv or table")
      ->check(CLI::IsMember({"csv", "table"}))
      ->capture_default_str();
  sim_cmd->add_option("--out", out_path, "Write to this file instead of stdout");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Simulate several cases and emit one row per case");
  std::vector<std::string> case_tokens;
  bool power_set = false;
  cmp_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  cmp_cmd->add_option("--cases", case_tokens, "Comma-separated case tokens (default: each node, all nodes, REM)")
      ->delimiter(',');
  cmp_cmd->add_flag("--power-set", power_set, "Every subset of nodes, as equal split and as REM");
  cmp_cmd->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}))->capture_default_str();
  cmp_cmd->add_option("--out", out_path, "Write to this file instead of stdout");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Compare cases while varying object count or size");
  std::string axis = "object-bytes";
  std::vector<double> values;
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--axis", axis, "num-objects or object-bytes")
      ->check(CLI::IsMember({"num-objects", "object-bytes"}))
      ->capture_default_str();
  sweep_cmd->add_option("--values", values, "Comma-separated axis values (default 5..25 objects or 1..5 MB)")
      ->delimiter(',');
  sweep_cmd->add_option("--cases", case_tokens, "Comma-separated case tokens")->delimiter(',');
  sweep_cmd->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}))->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "Write to this file instead of stdout");

  // serve-worker
  auto* serve_cmd = app.add_subcommand("serve-worker", "Run a worker daemon in the foreground");
  std::string bind = "127.0.0.1:0";
  std::string node_id = "local";
  int cores = 0;
  std::int64_t busy_us = 1000;
  double jitter = 0.0;
  double duration = 0.0;
  serve_cmd->add_option("--bind", bind, "Listen address host:port (port 0 picks one)")->capture_default_str();
  serve_cmd->add_option("--node-id", node_id, "Worker node id")->capture_default_str();
  serve_cmd->add_option("--scenario", scenario_path, "Take the advertised profile and context from this scenario");
  serve_cmd->add_option("--cores", cores, "Packages executed in parallel (default: profile cores or 1)");
  serve_cmd->add_option("--busy-us", busy_us, "Busy-work per data object in microseconds")->capture_default_str();
  serve_cmd->add_option("--jitter", jitter, "Relative busy-work jitter in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  serve_cmd->add_option("--duration", duration, "Stop after this many seconds (0 runs until interrupted)")
      ->capture_default_str();

  // deploy
  auto* deploy_cmd = app.add_subcommand("deploy", "Plan a case and deploy it to running worker daemons");
  std::vector<std::string> worker_specs;
  std::string listen = "127.0.0.1:0";
  bool sequential = false;
  std::int64_t ack_timeout_ms = 0;
  double wait_s = 60.0;
  SizeOverrides deploy_sizes;
  deploy_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  deploy_cmd->add_option("--case", case_token, "Case token")->capture_default_str();
  deploy_cmd->add_option("--worker", worker_specs, "Worker daemon as ID=host:port (repeatable)")->required();
  deploy_cmd->add_option("--listen", listen, "Where workers send outputs, host:port")->capture_default_str();
  deploy_cmd->add_flag("--sequential", sequential, "Contact workers one after another");
  deploy_cmd->add_option("--ack-timeout-ms", ack_timeout_ms,
                         "ACK deadline (default: EPNET_ACK_TIMEOUT_MS or 10000)");
  deploy_cmd->add_option("--wait", wait_s, "Seconds to wait for all outputs")->capture_default_str();
  deploy_sizes.add_to(deploy_cmd);

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "Measure the local timings with a one-object trial");
  std::string worker_addr;
  int trials = 2;
  double bound = 0.5;
  SizeOverrides cal_sizes;
  cal_cmd->add_option("--worker", worker_addr, "Local worker daemon host:port")->required();
  cal_cmd->add_option("--scenario", scenario_path, "Take default package sizes from this scenario");
  cal_cmd->add_option("--trials", trials, "Number of trials; the first is reported")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cal_cmd->add_option("--bound", bound, "Relative disagreement between trials that raises a warning")
      ->capture_default_str();
  cal_cmd->add_option("--out", out_path, "Write the calibration to this file instead of stdout");
  cal_sizes.add_to(cal_cmd);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (plan_cmd->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const Case c = parse_case(s, policy);
      const Plan plan = make_plan(s, c.policy, parse_variant(g.formula));
      out << "policy\t" << c.label << " (" << policy_name(c.policy) << ")\n";
      out << "objects\t" << s.request.num_objects << '\n';
      print_plan(plan, g.verbose, out);
      if (with_optimal) {
        const Plan best = brute_force_optimal(s, plan.candidates, cap, parse_variant(g.formula));
        out << "\noptimal split over " << join(best.candidates, ",") << '\n';
        print_plan(best, false, out);
      }
      return kOk;
    }

    if (sim_cmd->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const Case c = parse_case(s, case_token);
      const SimReport r = simulate(s, make_plan(s, c.policy, parse_variant(g.formula)), g.sim(), c.label);
      std::ostringstream text;
      const bool csv = sim_format == "csv";
      const char* sep = csv ? "," : "\t";
      text << "worker" << sep << "objects" << sep << "queue_wait_s" << sep << "deploy_s" << sep
           << "proc_resp_s" << sep << "finish_s\n";
      for (const auto& id : r.dispatch_order) {
        const auto& w = r.per_worker.at(id);
        text << id << sep << w.objects << sep << fixed6(w.queue_wait) << sep << fixed6(w.deploy_span) << sep
             << fixed6(w.proc_resp_span) << sep << fixed6(w.finish_at) << '\n';
      }
      if (!csv) {
        text << "case\t" << r.case_label << "\nuplink\t" << g.uplink << "\ncritical\t" << r.critical_worker
             << "\nmakespan_s\t" << fixed6(r.makespan) << '\n';
      }
      write_output(text.str(), out_path, out);
      return kOk;
    }

    if (cmp_cmd->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const auto reports = compare(s, resolve_cases(s, case_tokens, power_set), g.sim());
      write_output(emit_report(reports, parse_format(format)), out_path, out);
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const SweepAxis ax = axis == "num-objects" ? SweepAxis::num_objects : SweepAxis::object_bytes;
      if (values.empty()) {
        values = ax == SweepAxis::num_objects ? std::vector<double>{5, 10, 15, 20, 25}
                                              : std::vector<double>{1e6, 2e6, 3e6, 4e6, 5e6};
      }
      std::vector<std::string> tokens = case_tokens;
      if (tokens.empty()) {
        for (const auto& c : resolve_cases(s, {}, false)) tokens.push_back(c.label);
      }
      const auto points = sweep(s, ax, values, tokens, g.sim());
      write_output(emit_sweep_report(points, ax, parse_format(format)), out_path, out);
      return kOk;
    }

    if (serve_cmd->parsed()) {
      ep::WorkerConfig cfg;
      cfg.bind = parse_endpoint(bind);
      cfg.profile.node_id = node_id;
      cfg.profile.cpu_benchmark = 1000.0;
      cfg.profile.ram_total = 1'000'000'000;
      cfg.profile.disk_read = cfg.profile.disk_write = 100e6;
      if (!scenario_path.empty()) {
        const Scenario s = load_scenario(scenario_path);
        const auto* p = s.find_node(node_id);
        const auto* ctx = s.find_context(node_id);
        if (!p || !ctx) throw InputError("node '" + node_id + "' is not in " + scenario_path);
        cfg.profile = *p;
        cfg.context = *ctx;
      }
      cfg.context.node_id = node_id;
      cfg.cores = cores > 0 ? cores : std::max(1, cfg.profile.cores_available);
      cfg.executor.busy_per_object = std::chrono::microseconds(busy_us);
      cfg.executor.jitter = jitter;
      cfg.executor.seed = g.seed;
      cfg.log_to_stderr = true;
      ep::WorkerDaemon daemon(cfg);
      daemon.start();
      out << "listening " << daemon.endpoint().to_string() << std::endl;
      g_stop_requested = false;
      std::signal(SIGINT, on_stop_signal);
      std::signal(SIGTERM, on_stop_signal);
      const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration);
      while (!g_stop_requested && (duration <= 0.0 || std::chrono::steady_clock::now() < until))
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      daemon.stop();
      const auto st = daemon.stats();
      log_verbose(g, err,
                  "accepted " + std::to_string(st.deploys_accepted) + " packages, executed " +
                      std::to_string(st.objects_executed) + " objects");
      return kOk;
    }

    if (deploy_cmd->parsed()) {
      Scenario s = load_scenario(scenario_path);
      deploy_sizes.apply(s.request);
      const auto workers = parse_worker_addresses(worker_specs);
      const Case c = parse_case(s, case_token);
      const Plan plan = make_plan(s, c.policy, parse_variant(g.formula));
      const ep::PackageSource source = synthetic_source(s.request, g.seed);

      ep::OutputReceiver receiver(parse_endpoint(listen));
      receiver.start();
      ep::DeployOptions opts;
      opts.concurrent = !sequential;
      if (ack_timeout_ms > 0) opts.ack_timeout = std::chrono::milliseconds(ack_timeout_ms);
      log_verbose(g, err, "outputs go to " + receiver.endpoint().to_string());
      ep::DeliveryLog log;
      try {
        log = ep::deploy(plan, s, source, workers, receiver.endpoint(), opts);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }

      std::size_t expected = 0;
      for (const auto& e : log.entries)
        if (e.ok) expected += e.object_indices.size();
      const bool all_arrived =
          receiver.wait_for_objects(expected, std::chrono::milliseconds(static_cast<std::int64_t>(wait_s * 1000)));
      receiver.stop();

      std::size_t verified = 0, mismatched = 0;
      for (const auto& r : receiver.received()) {
        for (std::size_t k = 0; k < r.message.outputs.size(); ++k) {
          const auto idx = static_cast<std::size_t>(r.message.object_indices[k]);
          if (idx < source.objects.size() && r.message.outputs[k] == ep::toy_transform(source.objects[idx]))
            ++verified;
          else
            ++mismatched;
        }
      }

      out << "worker\taddress\tobjects\tpack_s\tsend_s\tack_s\tstatus\n";
      for (const auto& e : log.entries) {
        out << e.node_id << '\t' << e.address.to_string() << '\t' << e.object_indices.size() << '\t'
            << fixed6(log.offset(e.pack_end)) << '\t' << fixed6(log.offset(e.send_end)) << '\t'
            << fixed6(log.offset(e.ack_at)) << '\t' << (e.ok ? "ok" : "failed: " + e.error) << '\n';
      }
      out << "outputs\t" << verified << " verified, " << mismatched << " mismatched, " << expected
          << " expected\n";
      return log.all_ok() && all_arrived && mismatched == 0 && verified == expected ? kOk : kNetworkError;
    }

    if (cal_cmd->parsed()) {
      RequestSpec r;
      r.byte_alg = 1203;
      r.byte_mdl = 1'000'000;
      r.byte_d = 65536;
      if (!scenario_path.empty()) r = load_scenario(scenario_path).request;
      cal_sizes.apply(r);
      r.num_objects = 1;
      const ep::PackageSource sample = synthetic_source(r, g.seed);
      const ep::Endpoint worker = parse_endpoint(worker_addr);
      std::vector<Calibration> results;
      for (int t = 0; t < trials; ++t) results.push_back(ep::calibrate_local(worker, sample));
      for (std::size_t t = 1; t < results.size(); ++t) {
        for (const auto& w : ep::compare_calibrations(results.front(), results[t], bound))
          err << "warning: trial " << t + 1 << ": " << w << '\n';
      }
      write_output(calibration_to_text(results.front()), out_path, out);
      return kOk;
    }
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) err << "  " << v << '\n';
    return kInputError;
  } catch (const ep::NetError& e) {
    err << "network error: " << e.what() << '\n';
    return kNetworkError;
  } catch (const ep::ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kNetworkError;
  } catch (const std::exception& e) {
    // Everything else (bad case tokens, domain errors, oversized searches)
    // comes from user input.
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

}  // namespace remctl
