#include "safecase/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "safecase/capability.hpp"
#include "safecase/casefile.hpp"
#include "safecase/certificate.hpp"
#include "safecase/config.hpp"
#include "safecase/gsn.hpp"
#include "safecase/qrn.hpp"
#include "safecase/tabfile.hpp"
#include "safecase/verifier.hpp"

namespace safecase::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Io {
  bool json = false;
  std::ostringstream out;
  std::ostringstream err;
};

std::string load(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

template <class F>
auto input(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

Rational number(const std::string& text, const std::string& what) {
  return input(what, [&] { return Rational::parse(text); });
}

void emit(Io& io, const json& j) { io.out << j.dump(2) << "\n"; }

int cmd_validate(Io& io, const std::string& path) {
  casefile::ParseResult r = casefile::parse_casefile(load(path));
  if (!r.ok()) {
    for (const auto& e : r.errors) io.err << casefile::format_error(e, path) << "\n";
    if (io.json) {
      json errors = json::array();
      for (const auto& e : r.errors)
        errors.push_back({{"code", e.code}, {"line", e.span.line}, {"column", e.span.column}, {"message", e.message}});
      emit(io, {{"ok", false}, {"errors", errors}});
    }
    return kExitVerdict;
  }
  std::vector<std::string> undeveloped = gsn::undeveloped_report(r.structure);
  if (io.json) {
    emit(io, {{"ok", true},
              {"nodes", r.structure.nodes.size()},
              {"edges", r.structure.edges.size()},
              {"root", r.structure.root},
              {"undeveloped", undeveloped}});
  } else {
    io.out << "ok: " << r.structure.nodes.size() << " nodes, " << r.structure.edges.size() << " edges\n";
    for (const auto& id : undeveloped) io.out << "undeveloped: " << id << "\n";
  }
  return kExitOk;
}

int cmd_budget(Io& io, const std::string& exposure, const std::string& norm) {
  Rational e = number(exposure, "--exposure");
  Rational n = number(norm, "--norm");
  Rational b = input("budget", [&] { return qrn::impact_budget(e, n); });
  if (io.json) {
    emit(io, {{"exposure_h", e.to_string()}, {"norm_h", n.to_string()}, {"budget", b.to_string()}});
  } else {
    io.out << b << "\n";
  }
  return kExitOk;
}

int cmd_allocate(Io& io, const std::string& budget, const std::vector<std::string>& parts) {
  qrn::Allocation a;
  a.budget = number(budget, "--budget");
  for (const std::string& part : parts) {
    auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--part expects name=probability, got '" + part + "'");
    std::string name = part.substr(0, eq);
    if (!a.parts.emplace(name, number(part.substr(eq + 1), "--part " + name)).second)
      throw UsageError("part '" + name + "' given twice");
  }
  qrn::AllocationVerdict v = input("allocation", [&] { return qrn::check_allocation(a); });
  if (io.json) {
    emit(io, {{"pass", v.pass},
              {"budget", a.budget.to_string()},
              {"total", v.total.to_string()},
              {"excess", v.excess.to_string()}});
  } else {
    io.out << (v.pass ? "PASS" : "FAIL") << " total " << v.total << " budget " << a.budget << "\n";
  }
  if (!v.pass) {
    io.err << "allocation exceeds budget " << a.budget << " by excess " << v.excess << "\n";
    return kExitVerdict;
  }
  return kExitOk;
}

int cmd_admissible(Io& io, const std::string& cap_path, const std::string& exp_path, const std::string& norms_path,
                   const std::string& road, const std::vector<std::string>& speeds) {
  auto cap = input(cap_path, [&] { return qrn::CapabilityTable::parse(load(cap_path)); });
  auto exposure = input(exp_path, [&] { return qrn::ExposureTable::parse(load(exp_path)); });
  auto norms = input(norms_path, [&] { return qrn::RiskNormTable::parse(load(norms_path)); });
  auto colon = road.find(':');
  if (colon == std::string::npos) throw UsageError("--road expects type:speed, e.g. urban:70");
  auto row = input("--road", [&] {
    return exposure.find(qrn::parse_road_type(road.substr(0, colon)), Rational::parse(road.substr(colon + 1)));
  });
  std::optional<std::vector<Rational>> candidates;
  if (!speeds.empty()) {
    candidates.emplace();
    for (const auto& s : speeds) candidates->push_back(number(s, "--speed"));
  }
  auto result = input("admissible", [&] { return qrn::admissible_speeds(cap, row, norms, candidates); });

  bool all_ok = true;
  json verdicts = json::array();
  for (const auto& v : result.verdicts) {
    all_ok = all_ok && v.admissible;
    json times = json::array();
    for (const auto& t : v.mean_times) times.push_back(t.to_string());
    json entry{{"speed_kmh", v.speed_kmh.to_string()}, {"admissible", v.admissible}, {"mean_times_h", times}};
    if (v.violated_band) {
      const auto& nrow = norms.rows[*v.violated_band];
      entry["violated_band"] = nrow.band.label();
      if (!io.json)
        io.out << v.speed_kmh << " km/h: inadmissible, band " << nrow.band.label() << " mean time "
               << v.mean_times[*v.violated_band].to_string() << " h < norm " << nrow.norm_hours << " h\n";
    } else if (!io.json) {
      io.out << v.speed_kmh << " km/h: admissible\n";
    }
    verdicts.push_back(entry);
  }
  std::string max = result.max_admissible_kmh ? result.max_admissible_kmh->to_string() : "none";
  if (io.json) {
    emit(io, {{"verdicts", verdicts}, {"max_admissible_kmh", max}});
  } else {
    io.out << "max admissible: " << max << (result.max_admissible_kmh ? " km/h" : "") << "\n";
  }
  if (candidates && !all_ok) {
    io.err << "requested speed is not admissible\n";
    return kExitVerdict;
  }
  return kExitOk;
}

scenario::ScenarioParams scenario_from(const std::string& path) {
  return input(path, [&] { return config::parse_scenario(load(path)); });
}

verifier::Grid grid_from(const std::string& spec) {
  std::string text = std::filesystem::is_regular_file(spec) ? load(spec) : spec;
  return input("--grid", [&] { return verifier::parse_grid(text); });
}

json trace_json(const verifier::Counterexample& c) {
  json steps = json::array();
  for (const auto& d : c.disturbances)
    steps.push_back({{"sensor_err_mm", d.sensor_err}, {"act_err_mm_s2", d.act_err.to_string()},
                     {"ped_enters", d.ped_enters}});
  return {{"initial", {{"x_mm", c.initial.x}, {"v_mm_s", c.initial.v}, {"xp_mm", c.initial.xp}}},
          {"disturbances", steps},
          {"collision_step", c.collision_step},
          {"impact_speed_mm_s", c.impact_speed}};
}

int cmd_verify(Io& io, const std::string& scenario_path, const std::string& grid_spec, const std::string& out_path,
               const std::string& trace_path, std::size_t horizon) {
  auto p = scenario_from(scenario_path);
  auto g = grid_from(grid_spec);
  if (p.pass_option) throw UsageError("scenario enables pass_option; pass maneuvers are never certified");
  verifier::SearchOptions options;
  options.horizon = horizon;
  auto r = input("verify", [&] { return verifier::verify_closed_loop(p, g, options); });

  if (r.certificate && !out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + out_path + "'");
    f << certificate::encode(*r.certificate);
  }
  if (r.counterexample && !trace_path.empty()) {
    std::ofstream f(trace_path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + trace_path + "'");
    f << trace_json(*r.counterexample).dump(2) << "\n";
  }
  if (io.json) {
    json j{{"verdict", verifier::to_string(r.outcome)}, {"speeds_checked", r.speeds_checked}, {"reason", r.reason}};
    if (r.certificate) j["digest"] = r.certificate->digest;
    if (r.certificate && !out_path.empty()) j["certificate"] = out_path;
    if (r.counterexample) j["counterexample"] = trace_json(*r.counterexample);
    emit(io, j);
  } else {
    io.out << verifier::render_report(r, p);
  }
  if (r.outcome != verifier::Outcome::Certified) {
    io.err << "not certified: " << r.reason << "\n";
    return kExitVerdict;
  }
  return kExitOk;
}

int cmd_check_cert(Io& io, const std::string& cert_path, const std::string& scenario_path) {
  std::string bytes = load(cert_path);
  auto p = scenario_from(scenario_path);
  certificate::CheckVerdict v = certificate::check_certificate_bytes(bytes, p);
  if (io.json) {
    json j{{"valid", v.valid}, {"code", v.code}, {"message", v.message}};
    if (v.cell) j["cell"] = *v.cell;
    if (v.speed) j["speed_mm_s"] = *v.speed;
    emit(io, j);
  } else {
    io.out << (v.valid ? "VALID" : "INVALID " + v.code) << "\n";
  }
  if (!v.valid) {
    io.err << cert_path << ": " << v.code;
    if (v.cell) io.err << " at cell " << *v.cell;
    io.err << ": " << v.message << "\n";
    return kExitVerdict;
  }
  return kExitOk;
}

int cmd_capability(Io& io, const std::string& scenario_path, const std::string& incidents_path,
                   const std::vector<std::string>& speeds, const std::string& norms_path) {
  auto p = scenario_from(scenario_path);
  auto model = input(incidents_path, [&] { return capability::parse_incidents(load(incidents_path)); });
  auto norms = norms_path.empty() ? qrn::RiskNormTable::pedestrian_defaults()
                                  : input(norms_path, [&] { return qrn::RiskNormTable::parse(load(norms_path)); });
  std::vector<Rational> v;
  for (const auto& s : speeds) v.push_back(number(s, "--speeds"));
  auto table = input("capability", [&] { return capability::capability_table(p, v, model, norms); });
  if (io.json) {
    json rows = json::array();
    for (const auto& [speed, probs] : table.by_speed) {
      json bands = json::object();
      for (std::size_t b = 0; b < table.bands.size(); ++b) bands[table.bands[b].label()] = probs[b].to_string();
      rows.push_back({{"speed_kmh", speed.to_string()}, {"bands", bands}});
    }
    emit(io, {{"capability", rows}});
  } else {
    io.out << table.render();
  }
  return kExitOk;
}

int cmd_export(Io& io, const std::string& format, const std::string& path) {
  casefile::ParseResult r = casefile::parse_casefile(load(path));
  if (!r.ok()) {
    for (const auto& e : r.errors) io.err << casefile::format_error(e, path) << "\n";
    return kExitVerdict;
  }
  io.out << (format == "dot" ? casefile::render_dot(r.structure) : casefile::render_json(r.structure));
  return kExitOk;
}

int cmd_evidence(Io& io, const std::string& path, const std::string& scenario_path) {
  casefile::ParseResult r = casefile::parse_casefile(load(path));
  if (!r.ok()) {
    for (const auto& e : r.errors) io.err << casefile::format_error(e, path) << "\n";
    return kExitVerdict;
  }
  std::optional<scenario::ScenarioParams> expected;
  if (!scenario_path.empty()) expected = scenario_from(scenario_path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();

  bool ok = true;
  json results = json::array();
  for (const gsn::Node& n : r.structure.canonical().nodes) {
    if (n.kind != gsn::NodeKind::Solution) continue;
    std::string status;
    std::string detail;
    if (!n.evidence) {
      status = "MISSING";
      detail = "no evidence reference";
    } else {
      std::filesystem::path cert = base / *n.evidence;
      std::ifstream f(cert, std::ios::binary);
      if (!f) {
        status = "MISSING";
        detail = "cannot open " + cert.string();
      } else {
        std::stringstream ss;
        ss << f.rdbuf();
        std::string bytes = ss.str();
        certificate::CheckVerdict v;
        try {
          scenario::ScenarioParams p = expected ? *expected : certificate::decode(bytes).params;
          v = certificate::check_certificate_bytes(bytes, p);
        } catch (const certificate::DecodeError& e) {
          v = certificate::CheckVerdict{false, std::string(certificate::codes::kMalformed), {}, {}, e.what()};
        }
        status = v.valid ? "VALID" : "INVALID " + v.code;
        detail = v.message;
      }
    }
    bool good = status == "VALID";
    ok = ok && good;
    if (!good) io.err << n.id << ": " << status << ": " << detail << "\n";
    if (io.json) {
      results.push_back({{"solution", n.id}, {"evidence", n.evidence.value_or("")}, {"status", status},
                         {"detail", detail}});
    } else {
      io.out << n.id << " " << n.evidence.value_or("-") << " " << status << "\n";
    }
  }
  if (io.json) emit(io, {{"ok", ok}, {"solutions", results}});
  return ok ? kExitOk : kExitVerdict;
}

}  // namespace

CommandOutcome run(const std::vector<std::string>& args) {
  Io io;
  CLI::App app{"safecase: GSN safety cases, risk norms and closed-loop braking proofs", "safecase"};
  app.set_version_flag("--version", SAFECASE_VERSION);
  app.add_flag("--json", io.json, "Write JSON summaries to stdout");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string file;
  auto* validate = app.add_subcommand("validate", "Parse and validate a .case file");
  validate->add_option("file", file, "Case file")->required();

  std::string exposure, norm;
  auto* budget = app.add_subcommand("budget", "Impact budget min(1, exposure / norm)");
  budget->add_option("--exposure", exposure, "Exposure, hours between incidents")->required();
  budget->add_option("--norm", norm, "Risk norm, hours between accidents")->required();

  std::string budget_p;
  std::vector<std::string> parts;
  auto* allocate = app.add_subcommand("allocate", "Check that component probabilities fit a budget");
  allocate->add_option("--budget", budget_p, "Budget probability")->required();
  allocate->add_option("--part", parts, "name=probability, repeatable")->allow_extra_args(false);

  std::string cap_path, exp_path, norms_path, road;
  std::vector<std::string> speeds;
  auto* admissible = app.add_subcommand("admissible", "Admissible speeds for a road");
  admissible->add_option("--capability", cap_path, "Capability table")->required();
  admissible->add_option("--exposure", exp_path, "Exposure table")->required();
  admissible->add_option("--norms", norms_path, "Risk norm table")->required();
  admissible->add_option("--road", road, "type:speed, e.g. urban:70")->required();
  admissible->add_option("--speed", speeds, "Only judge these speeds (km/h); exit 1 if any is inadmissible")
      ->delimiter(',');

  std::string scenario_path, grid_spec, out_path, trace_path;
  std::size_t horizon = 600;
  auto* verify = app.add_subcommand("verify", "Verify the closed loop and write a certificate");
  verify->add_option("--scenario", scenario_path, "scenario.cfg")->required();
  verify->add_option("--grid", grid_spec, "Grid file or 'd_max=100 m, d_step=0.5 m, v_max=35 m/s, v_step=0.25 m/s'")
      ->required();
  verify->add_option("--out", out_path, "Certificate output path");
  verify->add_option("--trace", trace_path, "Counterexample output path (JSON)");
  verify->add_option("--horizon", horizon, "Search horizon in steps")->check(CLI::PositiveNumber);

  std::string cert_path;
  auto* check = app.add_subcommand("check-cert", "Re-check a certificate against a scenario");
  check->add_option("certificate", cert_path, "Certificate file")->required();
  check->add_option("--scenario", scenario_path, "scenario.cfg")->required();

  std::string incidents_path, cap_norms;
  std::vector<std::string> cap_speeds;
  auto* capability_cmd = app.add_subcommand("capability", "Impact-speed capability table");
  capability_cmd->add_option("--scenario", scenario_path, "scenario.cfg")->required();
  capability_cmd->add_option("--incidents", incidents_path, "Incident model")->required();
  capability_cmd->add_option("--speeds", cap_speeds, "Initial speeds in km/h, comma separated")
      ->required()
      ->delimiter(',');
  capability_cmd->add_option("--norms", cap_norms, "Risk norm table defining the bands");

  std::string format;
  auto* export_cmd = app.add_subcommand("export", "Export a case as DOT or JSON");
  export_cmd->add_option("--format", format, "dot or json")->required()->check(CLI::IsMember({"dot", "json"}));
  export_cmd->add_option("file", file, "Case file")->required();

  std::string evidence_scenario;
  auto* evidence = app.add_subcommand("evidence", "Check every Solution's certificate");
  evidence->add_option("file", file, "Case file")->required();
  evidence->add_option("--scenario", evidence_scenario, "Check certificates against this scenario");

  CommandOutcome outcome;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    int rc = app.exit(e, out, err);
    outcome.out = out.str();
    outcome.err = err.str();
    outcome.code = rc == 0 ? kExitOk : kExitUsage;
    if (rc != 0 && outcome.err.find("Run with --help") == std::string::npos) outcome.err += app.help();
    return outcome;
  }

  try {
    if (validate->parsed()) {
      outcome.code = cmd_validate(io, file);
    } else if (budget->parsed()) {
      outcome.code = cmd_budget(io, exposure, norm);
    } else if (allocate->parsed()) {
      outcome.code = cmd_allocate(io, budget_p, parts);
    } else if (admissible->parsed()) {
      outcome.code = cmd_admissible(io, cap_path, exp_path, norms_path, road, speeds);
    } else if (verify->parsed()) {
      outcome.code = cmd_verify(io, scenario_path, grid_spec, out_path, trace_path, horizon);
    } else if (check->parsed()) {
      outcome.code = cmd_check_cert(io, cert_path, scenario_path);
    } else if (capability_cmd->parsed()) {
      outcome.code = cmd_capability(io, scenario_path, incidents_path, cap_speeds, cap_norms);
    } else if (export_cmd->parsed()) {
      outcome.code = cmd_export(io, format, file);
    } else if (evidence->parsed()) {
      outcome.code = cmd_evidence(io, file, evidence_scenario);
    }
  } catch (const UsageError& e) {
    io.err << "error: " << e.what() << "\n";
    outcome.code = kExitUsage;
  } catch (const std::exception& e) {
    io.err << "internal error: " << e.what() << "\n";
    outcome.code = kExitInternal;
  }
  outcome.out = io.out.str();
  outcome.err = io.err.str();
  return outcome;
}

}  // namespace safecase::cli
