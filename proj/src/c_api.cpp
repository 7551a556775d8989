#include "fxhhw/fxhhw.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "fxhhw/error.hpp"
#include "fxhhw/experiment.hpp"

struct fxhhw_config {
  fxhhw::ExperimentConfig cfg;
};

struct fxhhw_report {
  fxhhw::ExperimentReport report;
};

struct fxhhw_field {
  fxhhw::SolutionField field;
};

namespace {

thread_local std::string g_last_error;

fxhhw_status fail(fxhhw_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs body, translating C++ exceptions into status codes.
template <class F>
fxhhw_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return FXHHW_OK;
  } catch (const fxhhw::Error& e) {
    return fail(static_cast<fxhhw_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FXHHW_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(FXHHW_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(FXHHW_INTERNAL_ERROR, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw fxhhw::InvalidArgument(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double or_nan(const std::optional<double>& x) { return x ? *x : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

extern "C" {

const char* fxhhw_version(void) { return "0.1.0"; }

const char* fxhhw_last_error(void) { return g_last_error.c_str(); }

const char* fxhhw_status_name(fxhhw_status status) {
  switch (status) {
    case FXHHW_OK: return "ok";
    case FXHHW_INVALID_ARGUMENT: return "invalid_argument";
    case FXHHW_CONFIG_ERROR: return "config_error";
    case FXHHW_MODEL_ERROR: return "model_error";
    case FXHHW_GRID_DEGENERACY: return "grid_degeneracy";
    case FXHHW_CONDITIONING_ERROR: return "conditioning_error";
    case FXHHW_ASSEMBLY_ERROR: return "assembly_error";
    case FXHHW_INSTABILITY: return "instability";
    case FXHHW_RANGE_ERROR: return "range_error";
    case FXHHW_IO_ERROR: return "io_error";
    case FXHHW_KRYLOV_ERROR: return "krylov_error";
    case FXHHW_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

void fxhhw_string_free(char* s) { std::free(s); }

fxhhw_status fxhhw_config_load(const char* path, fxhhw_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new fxhhw_config{fxhhw::load_config(path)};
  });
}

fxhhw_status fxhhw_config_parse(const char* json_text, fxhhw_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new fxhhw_config{fxhhw::parse_config(json_text)};
  });
}

fxhhw_status fxhhw_config_builtin(int which, fxhhw_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fxhhw_config{fxhhw::builtin_experiment(which)};
  });
}

fxhhw_status fxhhw_config_set_grid(fxhhw_config* cfg, const int m[4]) {
  return guarded([&] {
    require(cfg, "cfg");
    require(m, "m");
    for (int a = 0; a < 4; ++a)
      if (m[a] < 4) throw fxhhw::ConfigError("grid sizes must be >= 4");
    for (int a = 0; a < 4; ++a) cfg->cfg.pricing.grid.axis(a).m = m[a];
  });
}

fxhhw_status fxhhw_config_set_outputs(fxhhw_config* cfg, const char* csv, const char* table, const char* field) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.output.csv = csv ? csv : "";
    cfg->cfg.output.table = table ? table : "";
    cfg->cfg.output.field = field ? field : "";
  });
}

fxhhw_status fxhhw_config_to_json(const fxhhw_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(fxhhw::config_to_json(cfg->cfg));
  });
}

void fxhhw_config_free(fxhhw_config* cfg) { delete cfg; }

fxhhw_status fxhhw_run(const fxhhw_config* cfg, fxhhw_report** report_out, fxhhw_field** field_out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(report_out, "report_out");
    auto field = std::make_unique<fxhhw_field>();
    auto report = std::make_unique<fxhhw_report>();
    report->report = fxhhw::run_experiment(cfg->cfg, &field->field);
    fxhhw::write_outputs(cfg->cfg, report->report, &field->field);
    *report_out = report.release();
    if (field_out) *field_out = field.release();
  });
}

fxhhw_status fxhhw_sweep(const fxhhw_config* cfg, const char* axis, const int* ladder, size_t n,
                         fxhhw_report** report_out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(axis, "axis");
    require(report_out, "report_out");
    if (n > 0) require(ladder, "ladder");
    std::vector<int> l(ladder, ladder + n);
    auto report = std::make_unique<fxhhw_report>();
    report->report = fxhhw::run_sweep(cfg->cfg, fxhhw::axis_from_string(axis), l);
    fxhhw::write_outputs(cfg->cfg, report->report, nullptr);
    *report_out = report.release();
  });
}

fxhhw_status fxhhw_report_csv(const fxhhw_report* r, char** out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    std::ostringstream os;
    fxhhw::write_report_csv(os, r->report);
    *out = dup_string(os.str());
  });
}

fxhhw_status fxhhw_report_table(const fxhhw_report* r, char** out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    *out = dup_string(fxhhw::format_report_table(r->report));
  });
}

fxhhw_status fxhhw_report_row_count(const fxhhw_report* r, size_t* out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    *out = r->report.rows.size();
  });
}

fxhhw_status fxhhw_report_row(const fxhhw_report* r, size_t i, fxhhw_row* out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    const auto& rep = r->report;
    if (i >= rep.rows.size()) throw fxhhw::RangeError("row index out of range");
    const auto& row = rep.rows[i];
    for (int a = 0; a < 4; ++a) out->m[a] = row.m[a];
    out->v1 = row.v1;
    out->v2 = row.v2;
    out->eps1 = or_nan(row.eps1);
    out->eps2 = or_nan(row.eps2);
    out->roc1 = i < rep.roc1.size() ? or_nan(rep.roc1[i]) : std::nan("");
    out->roc2 = i < rep.roc2.size() ? or_nan(rep.roc2[i]) : std::nan("");
    out->lambda_max = or_nan(row.lambda_max);
    out->seconds = row.seconds;
  });
}

fxhhw_status fxhhw_report_mean_roc(const fxhhw_report* r, double* roc1, double* roc2) {
  return guarded([&] {
    require(r, "report");
    if (roc1) *roc1 = or_nan(r->report.mean_roc1);
    if (roc2) *roc2 = or_nan(r->report.mean_roc2);
  });
}

void fxhhw_report_free(fxhhw_report* r) { delete r; }

fxhhw_status fxhhw_field_save(const fxhhw_field* f, const char* path) {
  return guarded([&] {
    require(f, "field");
    require(path, "path");
    fxhhw::save_field(f->field, path);
  });
}

fxhhw_status fxhhw_field_load(const char* path, fxhhw_field** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new fxhhw_field{fxhhw::load_field(path)};
  });
}

fxhhw_status fxhhw_field_dims(const fxhhw_field* f, int dims[4]) {
  return guarded([&] {
    require(f, "field");
    require(dims, "dims");
    const auto d = f->field.grid.dims();
    for (int a = 0; a < 4; ++a) dims[a] = d[a];
  });
}

fxhhw_status fxhhw_field_interpolate(const fxhhw_field* f, const double point[4], int cubic, double* out) {
  return guarded([&] {
    require(f, "field");
    require(point, "point");
    require(out, "out");
    *out = fxhhw::interpolate(f->field, {point[0], point[1], point[2], point[3]},
                              cubic ? fxhhw::InterpolationKind::cubic : fxhhw::InterpolationKind::linear);
  });
}

fxhhw_status fxhhw_field_export_slice(const fxhhw_field* f, const char* slice, const double fixed[4],
                                      char** csv_out) {
  return guarded([&] {
    require(f, "field");
    require(slice, "slice");
    require(csv_out, "csv_out");
    std::array<double, 4> at = f->field.anchor;
    if (fixed)
      for (int a = 0; a < 4; ++a) at[a] = fixed[a];
    const auto spec = fxhhw::slice_from_string(slice, at);
    std::ostringstream os;
    fxhhw::write_surface_csv(os, spec, fxhhw::surface_export(f->field, spec));
    *csv_out = dup_string(os.str());
  });
}

void fxhhw_field_free(fxhhw_field* f) { delete f; }

}  // extern "C"
