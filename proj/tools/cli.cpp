// Copyright 2026 The JITAI Bandit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "jitai/analytics.hpp"
#include "jitai/domain.hpp"
#include "jitai/http.hpp"
#include "jitai/ingest.hpp"
#include "jitai/jsonl.hpp"
#include "jitai/policies.hpp"
#include "jitai/service.hpp"
#include "jitai/simulator.hpp"
#include "jitai/stats.hpp"

#ifndef JITAI_VERSION
#define JITAI_VERSION "0.0.0"
#endif
#ifndef JITAI_DATA_DIR
#define JITAI_DATA_DIR "data"
#endif

namespace jitai::cli {
namespace {

namespace fs = std::filesystem;

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string data_path(const char* name) { return (fs::path(JITAI_DATA_DIR) / name).string(); }

InterventionCatalog read_catalog(const std::string& path) {
  auto in = open_input(path);
  return load_catalog(in);
}

// A prior table (csv) or survey tallies (jsonl), chosen by which flag is set.
PriorMatrix read_priors(const InterventionCatalog& catalog, const std::string& table, const std::string& tallies) {
  if (!tallies.empty()) {
    auto in = open_input(tallies);
    return elicit_priors(catalog, load_tallies(in));
  }
  auto in = open_input(table);
  return read_prior_table(in, catalog);
}

Json read_json_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationFailure(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("failed to write " + path.string());
}

struct Manifest {
  std::string subcommand;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json extra = Json::object();

  void write(const fs::path& path) const {
    Json doc{{"subcommand", subcommand},
             {"config", config.empty() ? Json(nullptr) : Json(config)},
             {"seed", seed ? Json(*seed) : Json(nullptr)},
             {"inputs", inputs},
             {"outputs", outputs},
             {"engine_version", JITAI_VERSION}};
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    write_text(path, doc.dump(2) + "\n");
  }
};

// ---- elicit-priors ----------------------------------------------------------

struct ElicitArgs {
  std::string tallies;
  std::string catalog = data_path("catalog.jsonl");
  std::string out = "priors.csv";
  std::string jsonl_out;
  double threshold = 0.4;
  double cap = 0.025;
};

int run_elicit(const ElicitArgs& a, std::ostream& out) {
  const auto catalog = read_catalog(a.catalog);
  auto in = open_input(a.tallies);
  const auto tallies = load_tallies(in);
  const PriorMatrix priors = elicit_priors(catalog, tallies, ElicitationParams{a.threshold, a.cap});

  {
    auto f = open_output(a.out);
    write_prior_table(f, priors);
  }
  Manifest m{"elicit-priors", "", std::nullopt, {a.catalog, a.tallies}, {a.out}};
  if (!a.jsonl_out.empty()) {
    auto f = open_output(a.jsonl_out);
    write_prior_jsonl(f, priors);
    m.outputs.push_back(a.jsonl_out);
  }
  m.extra = Json{{"threshold", a.threshold}, {"cap_adjustment", a.cap}};
  m.write(a.out + ".manifest.json");

  std::size_t excluded = 0;
  for (ActivityContext ctx : kActivityContexts) {
    if (!priors.has_context(ctx)) continue;
    for (const auto& id : priors.arm_order()) {
      if (auto e = priors.get(ctx, id); e && e->excluded) ++excluded;
    }
  }
  out << "wrote " << a.out << " (" << tallies.size() << " tallies, " << excluded << " excluded)\n";
  return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string policy;
  std::string priors_mode;
  std::string catalog = data_path("catalog.jsonl");
  std::string priors = data_path("prior_table.csv");
  std::string tallies;
  std::string truth;
  std::string out_dir = "sim_out";
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  SimulationDocument doc = parse_simulation_document(read_json_file(a.config));
  if (a.seed) doc.config.seed = *a.seed;
  if (!a.policy.empty()) doc.config.policy = parse_policy(a.policy);
  if (!a.priors_mode.empty()) doc.config.priors_mode = parse_priors_mode(a.priors_mode);
  doc.config.validate();

  const auto catalog = read_catalog(a.catalog);
  const PriorMatrix priors = read_priors(catalog, a.priors, a.tallies);
  const PriorMatrix truth_table = a.truth.empty() ? priors : read_priors(catalog, a.truth, "");
  const UserModel model = build_user_model(truth_table, doc.profile, doc.activity_weights, doc.social_weights);
  const Trajectory traj = run_simulation(doc.config, model, priors);

  const fs::path dir(a.out_dir);
  Manifest m{"simulate", a.config, doc.config.seed, {a.config, a.catalog, a.tallies.empty() ? a.priors : a.tallies}, {}};
  if (!a.truth.empty()) m.inputs.push_back(a.truth);
  {
    auto f = open_output(dir / "trajectory.jsonl");
    write_trajectory_jsonl(f, traj);
  }
  {
    auto f = open_output(dir / "summary.csv");
    write_summary_csv(f, doc.config, traj.summary);
  }
  write_text(dir / "summary.json", summary_to_json(traj.summary).dump(2) + "\n");
  m.outputs = {(dir / "trajectory.jsonl").string(), (dir / "summary.csv").string(), (dir / "summary.json").string()};
  if (doc.profile.kind == ResponseProfile::Kind::Simple) {
    const auto regret = compute_regret(traj, model, priors);
    std::string csv = "t,cumulative_regret\n";
    char buf[64];
    for (std::size_t i = 0; i < regret.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.9f\n", i + 1, regret[i]);
      csv += buf;
    }
    write_text(dir / "regret.csv", csv);
    m.outputs.push_back((dir / "regret.csv").string());
  }
  m.extra = Json{{"resolved_config", simulation_document_to_json(doc)}};
  m.write(dir / "manifest.json");

  char line[160];
  std::snprintf(line, sizeof line, "%s seed=%llu decisions=%llu responded=%llu average_reward=%.4f\n",
                to_string(doc.config.policy).c_str(), static_cast<unsigned long long>(doc.config.seed),
                static_cast<unsigned long long>(traj.summary.decisions),
                static_cast<unsigned long long>(traj.summary.responded), traj.summary.average_reward);
  out << line;
  return kExitOk;
}

// ---- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> logs;
  std::string places = data_path("places.jsonl");
  std::string apps = data_path("app_categories.jsonl");
  std::string out = "features.jsonl";
  std::string rejects;
};

int run_ingest(const IngestArgs& a, std::ostream& out) {
  FeatureCatalogs catalogs;
  {
    auto in = open_input(a.places);
    catalogs.places = load_places(in);
  }
  {
    auto in = open_input(a.apps);
    catalogs.apps = load_app_catalog(in);
  }
  std::vector<fs::path> files(a.logs.begin(), a.logs.end());
  const EventStore store = parse_logs(files);
  const auto rows = derive_all(store, catalogs);
  {
    auto f = open_output(a.out);
    for (const auto& r : rows) f << feature_row_to_json(r).dump() << '\n';
  }
  Manifest m{"ingest", "", std::nullopt, a.logs, {a.out}};
  m.inputs.push_back(a.places);
  m.inputs.push_back(a.apps);
  const std::string rejects_path = a.rejects.empty() ? a.out + ".rejects.jsonl" : a.rejects;
  {
    auto f = open_output(rejects_path);
    write_rejects_jsonl(f, store.rejects);
  }
  m.outputs.push_back(rejects_path);
  m.extra = Json{{"rows", rows.size()}, {"rejects", store.rejects.size()}, {"users", store.users.size()}};
  m.write(a.out + ".manifest.json");
  out << "wrote " << rows.size() << " feature rows to " << a.out << " (" << store.rejects.size() << " rejects)\n";
  return kExitOk;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string features;
  std::vector<std::string> groups;
  std::string out_dir = "report";
  double alpha = 0.05;
  bool no_continuity = false;
};

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  auto in = open_input(a.features);
  const auto rows = load_feature_rows(in);
  std::vector<std::string> groups = a.groups;
  if (groups.empty()) {
    // Every feature that has a value somewhere.
    for (auto name : feature_names()) {
      if (!group_rows(rows, name).empty()) groups.emplace_back(name);
    }
  }
  const Report report = build_report(rows, groups, ReportOptions{a.alpha, !a.no_continuity});
  const std::string text = render_text(report);
  const fs::path dir(a.out_dir);
  write_text(dir / "report.txt", text);
  write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
  write_text(dir / "groups.csv", report_csv(report));
  Manifest m{"analyze", "", std::nullopt, {a.features},
             {(dir / "report.txt").string(), (dir / "report.json").string(), (dir / "groups.csv").string()}};
  m.extra = Json{{"groups", groups}, {"alpha", a.alpha}, {"continuity_correction", !a.no_continuity}};
  m.write(dir / "manifest.json");
  out << text;
  return kExitOk;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string config;
  std::string catalog = data_path("catalog.jsonl");
  std::string priors = data_path("prior_table.csv");
  std::string tallies;
  std::optional<int> port;
  std::string event_log;
  std::string snapshot;
};

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }

int run_serve(const ServeArgs& a, std::ostream& out) {
  ServiceConfig config;
  if (!a.config.empty()) config = service_config_from_json(read_json_file(a.config));
  apply_env_overrides(config);
  if (a.port) config.port = *a.port;
  if (!a.event_log.empty()) config.event_log = a.event_log;
  if (!a.snapshot.empty()) config.snapshot = a.snapshot;
  config.validate();

  const auto catalog = read_catalog(a.catalog);
  PriorMatrix priors = read_priors(catalog, a.priors, a.tallies);
  Engine engine(catalog, std::move(priors), config);

  std::optional<Json> snap;
  if (config.snapshot && fs::exists(*config.snapshot)) snap = read_json_file(config.snapshot->string());
  std::vector<Json> events;
  if (config.event_log) events = read_event_log(*config.event_log);
  engine.recover(snap, events);

  std::optional<EventLogFile> log;
  if (config.event_log) {
    log.emplace(*config.event_log);
    engine.set_sink([&log](const Json& e) { log->append(e); });
    Manifest m{"serve", a.config, config.seed, {a.catalog, a.tallies.empty() ? a.priors : a.tallies},
               {config.event_log->string()}};
    m.extra = Json{{"service_config", service_config_to_json(config)}};
    m.write(config.event_log->string() + ".manifest.json");
  }

  HttpService http(engine);
  const int port = http.bind(config.host, config.port);
  out << "listening on " << config.host << ':' << port << " (seq " << engine.seq() << ")" << std::endl;

  g_stop.store(false);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&http] {
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    http.stop();
  });
  http.listen();
  g_stop.store(true);
  watcher.join();

  if (config.snapshot) write_text(*config.snapshot, engine.snapshot().dump() + "\n");
  out << "stopped at seq " << engine.seq() << std::endl;
  return kExitOk;
}

const char* kSchemas = R"(Schemas (one JSON object per line unless noted):
  catalog        {"id","name","category":"PA|MR|CA|ESE"}
  tallies        {"context","intervention_id","yes","total"}
  prior table    CSV: intervention,<10 context columns>; '*' suffix marks excluded
  sim config     JSON: {days, schedule:["HH:MM"], users, seed, policy, priors_mode,
                 prior_strength, max_decisions, start_date, utc_offset_minutes,
                 profile:{kind:simple|ternary|with_misses, not_feasible_share, miss_probability},
                 activity_weights:{context:w}, social_weights:{social:w}}
  sensor logs    {"stream":"battery|screen|activity|app_usage|call|gps|notification","user","ts",...}
  places         {"type":"place","name","lat","lon","category"} | {"type":"campus","polygon":[[lat,lon],...]}
  app catalog    {"package","category"}
  feature rows   flat object of notification fields plus feature tokens (null when absent)
  service config JSON: {policy, priors_mode, prior_strength, seed, timeout_minutes, bank_mode,
                 host, port, event_log, snapshot}
Exit codes: 0 success, 1 validation failure, 2 runtime failure.
)";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-aware intervention bandit toolkit", "jitai"};
  app.footer(kSchemas);
  app.set_version_flag("--version", JITAI_VERSION);
  app.require_subcommand(1);

  ElicitArgs ea;
  auto* elicit = app.add_subcommand("elicit-priors", "Survey tallies to a prior matrix");
  elicit->add_option("--tallies", ea.tallies, "Survey tallies (jsonl)")->required()->check(CLI::ExistingFile);
  elicit->add_option("--catalog", ea.catalog, "Intervention catalog (jsonl)")->capture_default_str()->check(CLI::ExistingFile);
  elicit->add_option("--out", ea.out, "Prior table (csv)")->capture_default_str();
  elicit->add_option("--jsonl", ea.jsonl_out, "Also write the matrix as jsonl");
  elicit->add_option("--threshold", ea.threshold, "Exclusion threshold")->capture_default_str();
  elicit->add_option("--cap-adjustment", ea.cap, "Reduction applied to unanimous Yes")->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a policy against a synthetic user");
  sim->add_option("--config", sa.config, "Simulation config (json)")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", sa.seed, "Override the config seed");
  sim->add_option("--policy", sa.policy, "thompson | random | uniform | epsilon_greedy:E | decaying_epsilon:E0:D");
  sim->add_option("--priors-mode", sa.priors_mode, "informed | uninformed");
  sim->add_option("--catalog", sa.catalog, "Intervention catalog")->capture_default_str()->check(CLI::ExistingFile);
  auto* prior_opt = sim->add_option("--priors", sa.priors, "Prior table (csv)")->capture_default_str()->check(CLI::ExistingFile);
  sim->add_option("--tallies", sa.tallies, "Elicit priors from tallies instead")->check(CLI::ExistingFile)->excludes(prior_opt);
  sim->add_option("--truth", sa.truth, "Ground-truth P(Yes) table (csv); defaults to the priors")->check(CLI::ExistingFile);
  sim->add_option("--out-dir", sa.out_dir, "Output directory")->capture_default_str();

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Sensor logs to feature rows");
  ingest->add_option("--logs", ia.logs, "Log files (jsonl)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--places", ia.places, "Places table")->capture_default_str()->check(CLI::ExistingFile);
  ingest->add_option("--apps", ia.apps, "App category catalog")->capture_default_str()->check(CLI::ExistingFile);
  ingest->add_option("--out", ia.out, "Feature rows (jsonl)")->capture_default_str();
  ingest->add_option("--rejects", ia.rejects, "Rejected records (jsonl); defaults next to --out");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Receptivity report over feature rows");
  analyze->add_option("--features", aa.features, "Feature rows (jsonl)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--group", aa.groups, "Grouping feature (repeatable); default: every populated feature");
  analyze->add_option("--out-dir", aa.out_dir, "Output directory")->capture_default_str();
  analyze->add_option("--alpha", aa.alpha, "Significance level for flags")->capture_default_str();
  analyze->add_flag("--no-continuity-correction", aa.no_continuity, "Plain normal approximation for Mann-Whitney");

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Start the HTTP decision service");
  serve->add_option("--config", va.config, "Service config (json)")->check(CLI::ExistingFile);
  serve->add_option("--catalog", va.catalog, "Intervention catalog")->capture_default_str()->check(CLI::ExistingFile);
  auto* serve_priors = serve->add_option("--priors", va.priors, "Prior table (csv)")->capture_default_str()->check(CLI::ExistingFile);
  serve->add_option("--tallies", va.tallies, "Elicit priors from tallies instead")->check(CLI::ExistingFile)->excludes(serve_priors);
  serve->add_option("--port", va.port, "Port (0 picks a free one)");
  serve->add_option("--event-log", va.event_log, "Append-only event log (jsonl)");
  serve->add_option("--snapshot", va.snapshot, "Snapshot loaded at start and written at shutdown");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << JITAI_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub) {
      err << "run 'jitai " << sub->get_name() << " --help' for usage\n";
    }
    return kExitValidation;
  }

  try {
    if (*elicit) return run_elicit(ea, out);
    if (*sim) return run_simulate(sa, out);
    if (*ingest) return run_ingest(ia, out);
    if (*analyze) return run_analyze(aa, out);
    if (*serve) return run_serve(va, out);
  } catch (const ValidationFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const PolicyError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const AnalyticsError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ServiceError& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ServiceErrorCode::Validation || e.code() == ServiceErrorCode::Schema ? kExitValidation
                                                                                              : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace jitai::cli
