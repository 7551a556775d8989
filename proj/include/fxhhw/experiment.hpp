#pragma once

// Experiment configuration, orchestration and report emission.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fxhhw/integrators.hpp"
#include "fxhhw/mc.hpp"
#include "fxhhw/model.hpp"
#include "fxhhw/pricer.hpp"

namespace fxhhw {

struct OutputPaths {
  std::string csv;     // convergence rows
  std::string table;   // human-readable report
  std::string field;   // solved field (JSON)
  std::string greeks;  // Greeks slice at (rd0, rf0), CSV
};

struct ExperimentConfig {
  std::string name = "custom";
  ModelParams model;
  OptionSpec option;
  PricingConfig pricing;
  InterpolationKind interpolation = InterpolationKind::cubic;
  std::array<std::array<double, 4>, 2> queries{};  // V1 and V2 points
  std::array<std::optional<double>, 2> reference;
  bool lambda_max = false;
  bool greeks = false;
  bool include_timing_in_csv = false;
  bool mc_enabled = false;
  McConfig mc;
  OutputPaths output;
};

/// Parses JSON text; collects every violation and throws one ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON echo; parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& c);
/// FNV-1a 64-bit hash of the canonical echo, hex encoded.
std::string config_hash(const ExperimentConfig& c);

/// Built-in settings of the three published experiments (1, 2 or 3).
ExperimentConfig builtin_experiment(int which);

struct McRow {
  std::array<double, 4> point{};
  McEstimate estimate;
};

struct ExperimentReport {
  std::string name;
  std::string config_echo;
  std::string config_hash;
  std::string method;
  std::string solver;
  std::string boundary;
  std::vector<ConvergenceRow> rows;
  std::vector<std::optional<double>> roc1;  // aligned with rows (empty for the first two)
  std::vector<std::optional<double>> roc2;
  std::optional<double> mean_roc1;
  std::optional<double> mean_roc2;
  std::optional<SpectralReport> spectral;
  std::vector<McRow> mc;
  double total_seconds = 0.0;
  bool include_timing_in_csv = false;
};

/// grid -> assembly -> solve -> interpolate -> metrics. The solved field is
/// returned through field_out when given.
ExperimentReport run_experiment(const ExperimentConfig& config, SolutionField* field_out = nullptr);

/// Refinement ladder on one axis (0..3); at least three strictly increasing sizes.
ExperimentReport run_sweep(const ExperimentConfig& config, int axis, const std::vector<int>& ladder);

int axis_from_string(const std::string& s);

void write_report_csv(std::ostream& os, const ExperimentReport& r);
std::string format_report_table(const ExperimentReport& r);
/// RFC-4180 field quoting.
std::string csv_escape(const std::string& field);

/// Writes the files named in config.output (if any) for a finished run.
void write_outputs(const ExperimentConfig& config, const ExperimentReport& report, const SolutionField* field);

void save_field(const SolutionField& f, const std::string& path);
SolutionField load_field(const std::string& path);
std::string field_to_json(const SolutionField& f);
SolutionField field_from_json(const std::string& text);

struct SliceSpec {
  int axis_x = axis_s;
  int axis_y = axis_v;
  std::array<double, 4> fixed{};  // used on the two remaining axes
};

/// Parses "sv", "sd", "sf", "vd", "vf" or "df" (d = r_d, f = r_f).
SliceSpec slice_from_string(const std::string& s, std::array<double, 4> fixed);

struct SurfacePoint {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

/// One row per node of the two free axes; values interpolated on the fixed axes.
std::vector<SurfacePoint> surface_export(const SolutionField& field, const SliceSpec& spec,
                                         InterpolationKind kind = InterpolationKind::cubic);
void write_surface_csv(std::ostream& os, const SliceSpec& spec, const std::vector<SurfacePoint>& pts);
std::vector<SurfacePoint> read_surface_csv(std::istream& is);

void write_greeks_csv(std::ostream& os, const GreeksSlice& g);

}  // namespace fxhhw
