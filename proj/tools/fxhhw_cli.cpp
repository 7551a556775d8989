// Command-line runner; talks to the pricer only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fxhhw/fxhhw.h"

namespace {

int report_failure(fxhhw_status s) {
  std::fprintf(stderr, "fxhhw: %s: %s\n", fxhhw_status_name(s), fxhhw_last_error());
  return static_cast<int>(s) == 0 ? 1 : static_cast<int>(s);
}

// "exp1".."exp3" select the built-in experiments; anything else is a file path.
fxhhw_status open_config(const std::string& name, fxhhw_config** cfg) {
  if (name == "exp1" || name == "exp2" || name == "exp3") return fxhhw_config_builtin(name.back() - '0', cfg);
  return fxhhw_config_load(name.c_str(), cfg);
}

struct Overrides {
  std::vector<int> grid;
  std::string csv;
  std::string table;
  std::string field;
};

fxhhw_status apply(fxhhw_config* cfg, const Overrides& o) {
  if (o.grid.size() == 4) {
    const fxhhw_status s = fxhhw_config_set_grid(cfg, o.grid.data());
    if (s != FXHHW_OK) return s;
  }
  if (!o.csv.empty() || !o.table.empty() || !o.field.empty())
    return fxhhw_config_set_outputs(cfg, o.csv.c_str(), o.table.c_str(), o.field.c_str());
  return FXHHW_OK;
}

int print_report(fxhhw_report* report) {
  char* table = nullptr;
  const fxhhw_status s = fxhhw_report_table(report, &table);
  if (s != FXHHW_OK) return report_failure(s);
  std::fputs(table, stdout);
  fxhhw_string_free(table);
  return 0;
}

int cmd_run(const std::string& config, const Overrides& o) {
  fxhhw_config* cfg = nullptr;
  fxhhw_status s = open_config(config, &cfg);
  if (s == FXHHW_OK) s = apply(cfg, o);
  if (s != FXHHW_OK) {
    fxhhw_config_free(cfg);
    return report_failure(s);
  }
  fxhhw_report* report = nullptr;
  s = fxhhw_run(cfg, &report, nullptr);
  fxhhw_config_free(cfg);
  if (s != FXHHW_OK) return report_failure(s);
  const int rc = print_report(report);
  fxhhw_report_free(report);
  return rc;
}

int cmd_sweep(const std::string& config, const Overrides& o, const std::string& axis, const std::vector<int>& ladder) {
  fxhhw_config* cfg = nullptr;
  fxhhw_status s = open_config(config, &cfg);
  if (s == FXHHW_OK) s = apply(cfg, o);
  if (s != FXHHW_OK) {
    fxhhw_config_free(cfg);
    return report_failure(s);
  }
  fxhhw_report* report = nullptr;
  s = fxhhw_sweep(cfg, axis.c_str(), ladder.data(), ladder.size(), &report);
  fxhhw_config_free(cfg);
  if (s != FXHHW_OK) return report_failure(s);
  const int rc = print_report(report);
  fxhhw_report_free(report);
  return rc;
}

int cmd_export(const std::string& path, const std::string& slice, const std::vector<double>& at,
               const std::string& out) {
  fxhhw_field* field = nullptr;
  fxhhw_status s = fxhhw_field_load(path.c_str(), &field);
  if (s != FXHHW_OK) return report_failure(s);
  char* csv = nullptr;
  s = fxhhw_field_export_slice(field, slice.c_str(), at.size() == 4 ? at.data() : nullptr, &csv);
  fxhhw_field_free(field);
  if (s != FXHHW_OK) return report_failure(s);
  if (out.empty()) {
    std::fputs(csv, stdout);
  } else {
    std::ofstream f(out, std::ios::binary);
    f << csv;
    if (!f) {
      fxhhw_string_free(csv);
      std::fprintf(stderr, "fxhhw: io_error: cannot write '%s'\n", out.c_str());
      return FXHHW_IO_ERROR;
    }
  }
  fxhhw_string_free(csv);
  return 0;
}

int cmd_show(const std::string& config) {
  fxhhw_config* cfg = nullptr;
  fxhhw_status s = open_config(config, &cfg);
  char* text = nullptr;
  if (s == FXHHW_OK) s = fxhhw_config_to_json(cfg, &text);
  fxhhw_config_free(cfg);
  if (s != FXHHW_OK) return report_failure(s);
  std::printf("%s\n", text);
  fxhhw_string_free(text);
  return 0;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--grid", o.grid, "Override node counts m1,m2,m3,m4")->delimiter(',')->expected(4);
  cmd->add_option("--csv", o.csv, "Write convergence rows as CSV");
  cmd->add_option("--table", o.table, "Write the human-readable report");
  cmd->add_option("--field", o.field, "Write the solved field (JSON, run only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FX-HHW European option pricer (RBF-FD + Krylov / midpoint)"};
  app.set_version_flag("--version", std::string(fxhhw_version()));
  app.require_subcommand(1);

  std::string config;
  Overrides o;
  auto* run = app.add_subcommand("run", "Price one configuration (file path or exp1/exp2/exp3)");
  run->add_option("config", config, "Config file or built-in experiment name")->required();
  add_overrides(run, o);

  std::string axis = "s";
  std::vector<int> ladder;
  auto* sweep = app.add_subcommand("sweep", "Refinement ladder on one axis with ROC estimates");
  sweep->add_option("config", config, "Config file or built-in experiment name")->required();
  sweep->add_option("--axis", axis, "Axis to refine: s, v, rd or rf")->capture_default_str();
  sweep->add_option("--ladder", ladder, "Node counts, e.g. 8,16,32")->delimiter(',')->required();
  add_overrides(sweep, o);

  std::string field_path, slice = "sv", out;
  std::vector<double> at;
  auto* exp = app.add_subcommand("export", "Export a 2D slice of a saved field as CSV");
  exp->add_option("result", field_path, "Field file written by run --field")->required();
  exp->add_option("--slice", slice, "Axis pair: sv, sd, sf, vd, vf or df")->capture_default_str();
  exp->add_option("--at", at, "Fixed point s,v,rd,rf (default: E, v0, rd0, rf0)")->delimiter(',')->expected(4);
  exp->add_option("-o,--output", out, "Output file (default: stdout)");

  auto* show = app.add_subcommand("show-config", "Print the canonical JSON of a configuration");
  show->add_option("config", config, "Config file or built-in experiment name")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config, o);
  if (*sweep) return cmd_sweep(config, o, axis, ladder);
  if (*exp) return cmd_export(field_path, slice, at, out);
  if (*show) return cmd_show(config);
  return 1;
}
