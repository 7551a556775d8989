#ifndef FXHHW_FXHHW_H
#define FXHHW_FXHHW_H

/* C interface to the FX-HHW option pricer.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every call returns an fxhhw_status; on failure
 * fxhhw_last_error() describes the problem for the calling thread. Strings
 * returned through char** out-parameters are released with fxhhw_string_free. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FXHHW_API __declspec(dllexport)
#else
#define FXHHW_API __attribute__((visibility("default")))
#endif

typedef enum fxhhw_status {
  FXHHW_OK = 0,
  FXHHW_INVALID_ARGUMENT = 1,
  FXHHW_CONFIG_ERROR = 2,
  FXHHW_MODEL_ERROR = 3,
  FXHHW_GRID_DEGENERACY = 4,
  FXHHW_CONDITIONING_ERROR = 5,
  FXHHW_ASSEMBLY_ERROR = 6,
  FXHHW_INSTABILITY = 7,
  FXHHW_RANGE_ERROR = 8,
  FXHHW_IO_ERROR = 9,
  FXHHW_KRYLOV_ERROR = 10,
  FXHHW_INTERNAL_ERROR = 99
} fxhhw_status;

typedef struct fxhhw_config fxhhw_config;
typedef struct fxhhw_report fxhhw_report;
typedef struct fxhhw_field fxhhw_field;

typedef struct fxhhw_row {
  int m[4];
  double v1;
  double v2;
  double eps1; /* NaN when no reference price is configured */
  double eps2;
  double roc1; /* NaN for the first two rows of a sweep and for single runs */
  double roc2;
  double lambda_max; /* NaN unless requested */
  double seconds;
} fxhhw_row;

FXHHW_API const char* fxhhw_version(void);
/* Message of the last failed call on this thread ("" if none). */
FXHHW_API const char* fxhhw_last_error(void);
FXHHW_API const char* fxhhw_status_name(fxhhw_status status);
FXHHW_API void fxhhw_string_free(char* s);

/* Configuration. */
FXHHW_API fxhhw_status fxhhw_config_load(const char* path, fxhhw_config** out);
FXHHW_API fxhhw_status fxhhw_config_parse(const char* json_text, fxhhw_config** out);
/* which = 1, 2 or 3: the bundled settings of the published experiments. */
FXHHW_API fxhhw_status fxhhw_config_builtin(int which, fxhhw_config** out);
FXHHW_API fxhhw_status fxhhw_config_set_grid(fxhhw_config* cfg, const int m[4]);
FXHHW_API fxhhw_status fxhhw_config_set_outputs(fxhhw_config* cfg, const char* csv, const char* table,
                                                const char* field);
FXHHW_API fxhhw_status fxhhw_config_to_json(const fxhhw_config* cfg, char** out);
FXHHW_API void fxhhw_config_free(fxhhw_config* cfg);

/* Runs. field_out may be NULL. Output files named in the config are written. */
FXHHW_API fxhhw_status fxhhw_run(const fxhhw_config* cfg, fxhhw_report** report_out, fxhhw_field** field_out);
/* axis is "s", "v", "rd" or "rf"; ladder holds n >= 3 strictly increasing sizes. */
FXHHW_API fxhhw_status fxhhw_sweep(const fxhhw_config* cfg, const char* axis, const int* ladder, size_t n,
                                   fxhhw_report** report_out);

/* Reports. */
FXHHW_API fxhhw_status fxhhw_report_csv(const fxhhw_report* r, char** out);
FXHHW_API fxhhw_status fxhhw_report_table(const fxhhw_report* r, char** out);
FXHHW_API fxhhw_status fxhhw_report_row_count(const fxhhw_report* r, size_t* out);
FXHHW_API fxhhw_status fxhhw_report_row(const fxhhw_report* r, size_t i, fxhhw_row* out);
FXHHW_API fxhhw_status fxhhw_report_mean_roc(const fxhhw_report* r, double* roc1, double* roc2);
FXHHW_API void fxhhw_report_free(fxhhw_report* r);

/* Solved fields. */
FXHHW_API fxhhw_status fxhhw_field_save(const fxhhw_field* f, const char* path);
FXHHW_API fxhhw_status fxhhw_field_load(const char* path, fxhhw_field** out);
FXHHW_API fxhhw_status fxhhw_field_dims(const fxhhw_field* f, int dims[4]);
/* point = (s, v, rd, rf); cubic != 0 selects spline interpolation, else multilinear. */
FXHHW_API fxhhw_status fxhhw_field_interpolate(const fxhhw_field* f, const double point[4], int cubic,
                                               double* out);
/* slice is "sv", "sd", "sf", "vd", "vf" or "df"; fixed gives the remaining
 * coordinates (entries on the slice axes are ignored). Writes CSV text. */
FXHHW_API fxhhw_status fxhhw_field_export_slice(const fxhhw_field* f, const char* slice, const double fixed[4],
                                                char** csv_out);
FXHHW_API void fxhhw_field_free(fxhhw_field* f);

#ifdef __cplusplus
}
#endif

#endif /* FXHHW_FXHHW_H */
