#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "isolab.h"

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      const char *msg = isolab_last_error_message();                       \
      fprintf(stderr, "check failed: %s (%s)\n", #cond, msg ? msg : "-");  \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  CHECK(isolab_abi_version() == ISOLAB_ABI_VERSION);

  IsolabMetric *metric = NULL;
  CHECK(isolab_metric_schwarzschild(3, 2.0, &metric) == ISOLAB_STATUS_OK);
  double x[3] = {0.0, 0.0, 2.0};
  double g[9];
  CHECK(isolab_metric_components(metric, x, 3, g) == ISOLAB_STATUS_OK);
  CHECK(fabs(g[0] - pow(1.5, 4)) < 1e-14);

  double radius = 0.0;
  CHECK(isolab_horizon_radius(3, 2.0, &radius) == ISOLAB_STATUS_OK);
  CHECK(fabs(radius - 1.0) < 1e-15);
  CHECK(isolab_horizon_radius(3, 0.0, &radius) == ISOLAB_STATUS_NO_HORIZON);
  CHECK(isolab_last_error_message() != NULL);

  IsolabChart *chart = NULL;
  CHECK(isolab_chart_solve(2.0, 3, 100.0, 10.0, 40, &chart) == ISOLAB_STATUS_OK);
  IsolabChartInfo info;
  CHECK(isolab_chart_info(chart, &info) == ISOLAB_STATUS_OK);
  double *s = malloc(info.len * sizeof(double));
  double *u = malloc(info.len * sizeof(double));
  CHECK(isolab_chart_table(chart, s, u, info.len) == ISOLAB_STATUS_OK);
  CHECK(s[0] == info.c && u[0] == info.alpha);
  free(s);
  free(u);
  isolab_chart_free(chart);

  IsolabSurface *surface = NULL;
  CHECK(isolab_cmc_solve(metric, 200.0, NAN, 24, 0, 8, 1e-10, &surface) == ISOLAB_STATUS_OK);
  IsolabSurfaceInfo sinfo;
  CHECK(isolab_surface_info(surface, &sinfo) == ISOLAB_STATUS_OK);
  CHECK(sinfo.sup_u < 1e-10);
  isolab_surface_free(surface);
  isolab_metric_free(metric);

  printf("alpha %.7f\n", info.alpha);
  return 0;
}
