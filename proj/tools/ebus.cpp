// Copyright 2026 The ebus-dispatch Authors
//
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

// ebus: solve, compare, validate and export electric bus day plans.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ebus/branch_and_bound.hpp"
#include "ebus/fleet.hpp"
#include "ebus/milp.hpp"
#include "ebus/oracle.hpp"
#include "ebus/report.hpp"
#include "ebus/schedule.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNoIncumbent = 3;
constexpr int kExitUsage = 64;
constexpr int kExitBadInstance = 65;
constexpr int kExitSoftware = 70;

// Raised to leave a subcommand with a specific exit code.
struct Exit {
  int code;
};

struct Options {
  std::string instance;
  std::string out;
  std::string rates;
  std::string solar;
  std::string schedule;
  std::string series;
  std::string kind;
  bool quiet = false;
  bool no_solar = false;
  double gap = 0.0;
  double time_limit = -1.0;
  long node_limit = -1;
  std::uint64_t seed = 0;
  int trips = 60;
  int step_minutes = 5;
  double peak_kw = 1000.0;
};

void say(const Options& opt, const std::string& line) {
  if (!opt.quiet) std::cout << line << '\n';
}

// Loads and checks the instance. With `solving` set, an instance whose
// only defect is more simultaneous trips than buses is reported as
// infeasible rather than malformed.
ebus::FleetInstance load(const Options& opt, bool solving = false) {
  ebus::FleetInstance inst;
  try {
    inst = ebus::load_instance(opt.instance);
    if (!opt.rates.empty()) inst.rates = ebus::load_rates(opt.rates);
    if (!opt.solar.empty()) inst.solar = ebus::load_solar(opt.solar, inst.grid);
  } catch (const ebus::InstanceError& e) {
    std::cerr << "instance error: " << e.what() << '\n';
    throw Exit{kExitBadInstance};
  }
  if (opt.no_solar) inst = ebus::without_solar(std::move(inst));
  const std::vector<std::string> defects = ebus::validate_instance(inst);
  if (!defects.empty() && solving &&
      ebus::coverage_defects(inst).size() == defects.size()) {
    std::cout << "infeasible:\n";
    for (const std::string& d : defects) std::cout << "  " << d << '\n';
    throw Exit{kExitInfeasible};
  }
  if (!defects.empty()) {
    std::cerr << "instance defects:\n";
    for (const std::string& d : defects) std::cerr << "  " << d << '\n';
    throw Exit{kExitBadInstance};
  }
  if (!opt.quiet) {
    for (const std::string& w : ebus::charge_increment_warnings(inst)) {
      std::cerr << "warning: " << w << '\n';
    }
  }
  return inst;
}

ebus::SolveConfig solve_config(const Options& opt) {
  ebus::SolveConfig config;
  config.rel_gap_tol = opt.gap;
  config.time_limit = opt.time_limit;
  config.node_limit = opt.node_limit;
  if (!opt.quiet) {
    config.progress = [](const ebus::Progress& p) {
      std::fprintf(stderr, "  nodes %ld  incumbent %.6f  bound %.6f  %.1fs\n",
                   p.nodes, p.incumbent, p.bound, p.seconds);
    };
  }
  return config;
}

int status_exit(ebus::MipStatus status) {
  switch (status) {
    case ebus::MipStatus::kOptimal:
    case ebus::MipStatus::kFeasibleGap:
      return kExitOk;
    case ebus::MipStatus::kInfeasible:
      return kExitInfeasible;
    case ebus::MipStatus::kLimitHit:
      return kExitNoIncumbent;
    case ebus::MipStatus::kUnbounded:
    case ebus::MipStatus::kNumericalFailure:
      break;
  }
  return kExitSoftware;
}

void print_violations(const ebus::ValidationReport& report) {
  for (const ebus::Violation& v : report.violations) {
    std::cout << ebus::to_string(v.family) << ": " << v.message << '\n';
  }
}

std::string describe(const ebus::ScenarioResult& r) {
  std::ostringstream os;
  os << r.label << ": " << r.status;
  if (r.has_plan()) os << "  cost " << r.cost;
  if (r.label != ebus::kBaselineLabel) {
    os << "  bound " << r.bound << "  nodes " << r.nodes << "  " << r.seconds
       << "s";
  }
  if (!r.note.empty()) os << "  (" << r.note << ")";
  return os.str();
}

int cmd_solve(const Options& opt) {
  const ebus::FleetInstance inst = load(opt, true);
  const std::string label =
      opt.no_solar ? ebus::kNoSolarLabel : ebus::kWithSolarLabel;
  ebus::ScenarioResult base = ebus::run_baseline(inst);
  std::optional<ebus::Schedule> seed;
  if (base.has_plan() && base.validation.ok()) seed = base.schedule;
  const ebus::ScenarioResult result =
      ebus::run_milp(label, inst, solve_config(opt), seed);
  ebus::write_scenario(opt.out, "", inst, result);
  say(opt, describe(result));
  if (result.has_plan() && !result.validation.ok()) {
    print_violations(result.validation);
    return kExitViolations;
  }
  return status_exit(result.mip_status);
}

int cmd_compare(const Options& opt) {
  const ebus::FleetInstance inst = load(opt, true);
  const std::vector<ebus::ScenarioResult> results =
      ebus::run_compare(inst, solve_config(opt));
  const std::string table = ebus::comparison_table(results);
  if (!opt.out.empty()) {
    for (const ebus::ScenarioResult& r : results) {
      const ebus::FleetInstance& used =
          r.label == ebus::kWithSolarLabel ? inst : ebus::without_solar(inst);
      ebus::write_scenario(opt.out, r.label + "_", used, r);
    }
    ebus::write_file_atomic(fs::path(opt.out) / "compare.txt", table);
    ebus::write_file_atomic(fs::path(opt.out) / "compare.json",
                            ebus::comparison_json(results).dump(2) + "\n");
  }
  if (!opt.quiet) {
    std::cout << table;
    for (const ebus::ScenarioResult& r : results) {
      if (!r.has_plan()) continue;
      std::cout << r.label << ": " << ebus::charge_in_solar_hours(inst, *r.schedule)
                << " kWh charged during solar hours\n";
    }
  }
  int code = kExitOk;
  for (const ebus::ScenarioResult& r : results) {
    if (r.has_plan() && !r.validation.ok()) {
      std::cout << r.label << " plan violations:\n";
      print_violations(r.validation);
      code = std::max(code, kExitViolations);
    }
    if (r.label != ebus::kBaselineLabel) {
      const int c = status_exit(r.mip_status);
      if (c != kExitOk && (code == kExitOk || code == kExitViolations)) {
        code = c;
      }
    }
  }
  return code;
}

int cmd_baseline(const Options& opt) {
  const ebus::FleetInstance inst = load(opt, true);
  const ebus::ScenarioResult result = ebus::run_baseline(inst);
  ebus::write_scenario(opt.out, "", inst, result);
  say(opt, describe(result));
  if (!result.has_plan()) return kExitInfeasible;
  if (!result.validation.ok()) {
    print_violations(result.validation);
    return kExitViolations;
  }
  return kExitOk;
}

int cmd_validate(const Options& opt) {
  const ebus::FleetInstance inst = load(opt);
  ebus::Schedule sched;
  try {
    std::ifstream is(opt.schedule);
    if (!is) throw ebus::ParseError("cannot open " + opt.schedule);
    sched = ebus::read_schedule_csv(is, inst);
    if (opt.series.empty()) {
      ebus::settle_power(inst, sched);
    } else {
      std::ifstream ss(opt.series);
      if (!ss) throw ebus::ParseError("cannot open " + opt.series);
      ebus::read_series_csv(ss, inst, sched);
    }
  } catch (const ebus::InstanceError& e) {
    std::cerr << "schedule error: " << e.what() << '\n';
    return kExitBadInstance;
  }
  const ebus::ValidationReport report = ebus::validate(inst, sched);
  if (!report.ok()) {
    print_violations(report);
    return kExitViolations;
  }
  std::ostringstream os;
  os << "valid  cost " << ebus::cost_of(inst, sched);
  say(opt, os.str());
  return kExitOk;
}

int cmd_export_mps(const Options& opt) {
  const ebus::FleetInstance inst = load(opt);
  const ebus::MpsExport mps = ebus::export_mps(ebus::assemble(inst));
  ebus::write_file_atomic(opt.out, mps.text);
  if (!mps.name_map.empty()) {
    ebus::write_file_atomic(opt.out + ".names", mps.name_map);
  }
  say(opt, "wrote " + opt.out);
  return kExitOk;
}

void save_json(const std::string& path, const nlohmann::json& doc) {
  ebus::write_file_atomic(path, doc.dump(2) + "\n");
}

int cmd_generate(const Options& opt) {
  const ebus::TimeGrid grid = ebus::make_time_grid(opt.step_minutes);
  if (opt.kind == "rates") {
    ebus::FleetInstance inst;
    inst.rates = ebus::table_i_rates();
    save_json(opt.out, {{"rates", ebus::to_json(inst)["rates"]}});
  } else if (opt.kind == "routes") {
    save_json(opt.out, ebus::routes_to_json(ebus::marguerite_routes()));
  } else if (opt.kind == "solar") {
    save_json(opt.out,
              {{"solar_kw", ebus::bell_solar(grid, opt.peak_kw).kw}});
  } else if (opt.kind == "fleet") {
    ebus::save_instance(ebus::marguerite_instance(), opt.out);
  } else if (opt.kind == "desk") {
    ebus::save_instance(ebus::desk_scale_instance(opt.seed, opt.trips),
                        opt.out);
  } else if (opt.kind == "tiny") {
    ebus::InstanceGenConfig cfg;
    cfg.solar = ebus::SolarProfile::kBell;
    ebus::save_instance(ebus::gen_instance(cfg, opt.seed).instance, opt.out);
  }
  say(opt, "wrote " + opt.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electric bus route assignment and charge scheduling"};
  app.require_subcommand(1);
  Options opt;
  app.add_flag("--quiet", opt.quiet, "Suppress progress and summaries");

  auto instance_opts = [&](CLI::App* sub) {
    sub->add_option("--instance", opt.instance, "Instance JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--rates", opt.rates, "Replace the instance rates")
        ->check(CLI::ExistingFile);
    sub->add_option("--solar", opt.solar, "Replace the solar forecast")
        ->check(CLI::ExistingFile);
    sub->add_flag("--no-solar", opt.no_solar, "Force g(t) = 0");
    sub->add_flag("--quiet", opt.quiet, "Suppress progress and summaries");
  };
  auto solver_opts = [&](CLI::App* sub) {
    sub->add_option("--gap", opt.gap, "Relative gap tolerance")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--time-limit", opt.time_limit, "Seconds per solve")
        ->check(CLI::PositiveNumber);
    sub->add_option("--node-limit", opt.node_limit, "Nodes per solve")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve the MILP");
  instance_opts(solve);
  solver_opts(solve);
  solve->add_option("--out", opt.out, "Output directory")->required();

  CLI::App* compare =
      app.add_subcommand("compare", "Baseline, no-solar and with-solar costs");
  instance_opts(compare);
  solver_opts(compare);
  compare->add_option("--out", opt.out, "Output directory");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a schedule CSV against the model");
  instance_opts(validate);
  validate->add_option("--schedule", opt.schedule, "Schedule CSV")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--series", opt.series, "Time-series CSV")
      ->check(CLI::ExistingFile);

  CLI::App* baseline =
      app.add_subcommand("baseline", "Charge-on-return status-quo plan");
  instance_opts(baseline);
  baseline->add_option("--out", opt.out, "Output directory")->required();

  CLI::App* mps = app.add_subcommand("export-mps", "Write the MILP as MPS");
  instance_opts(mps);
  mps->add_option("--out", opt.out, "MPS file")->required();

  CLI::App* generate =
      app.add_subcommand("generate", "Write fixtures and synthetic instances");
  generate->add_option("kind", opt.kind, "What to write")
      ->required()
      ->check(CLI::IsMember({"rates", "routes", "solar", "fleet", "desk",
                             "tiny"}));
  generate->add_option("--out", opt.out, "Output file")->required();
  generate->add_option("--seed", opt.seed, "Seed for desk and tiny");
  generate->add_option("--trips", opt.trips, "Trip count for desk")
      ->check(CLI::PositiveNumber);
  generate->add_option("--step-minutes", opt.step_minutes,
                       "Step length for solar");
  generate->add_option("--peak-kw", opt.peak_kw, "Solar peak for solar")
      ->check(CLI::NonNegativeNumber);
  generate->add_flag("--quiet", opt.quiet, "Suppress summaries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(opt);
    if (*compare) return cmd_compare(opt);
    if (*validate) return cmd_validate(opt);
    if (*baseline) return cmd_baseline(opt);
    if (*mps) return cmd_export_mps(opt);
    if (*generate) return cmd_generate(opt);
  } catch (const Exit& e) {
    return e.code;
  } catch (const ebus::InstanceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInstance;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSoftware;
  }
  return kExitUsage;
}
