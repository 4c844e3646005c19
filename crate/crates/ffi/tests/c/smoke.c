#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qbackflow.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "check failed at line %d: %s (%s)\n", __LINE__, \
              #cond, qb_last_error_message());                       \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  double ket0[8] = {1, 0, 0, 0, 0, 0, 0, 0};
  double out[8];
  double prob = 0.0;

  QbChannel *phi = NULL;
  CHECK(qb_channel_phi_t(log(2.0) / 2.0, &phi) == QB_STATUS_OK);
  CHECK(qb_channel_len(phi) == 3);
  CHECK(qb_channel_apply(phi, ket0, out) == QB_STATUS_OK);
  CHECK(fabs(out[0] - 0.75) < 1e-12 && fabs(out[6] - 0.25) < 1e-12);

  double residual, choi_min;
  bool passes = false;
  CHECK(qb_channel_validate(phi, &residual, &choi_min, &passes) == QB_STATUS_OK);
  CHECK(passes && residual < 1e-12);

  QbControl *sw = NULL;
  CHECK(qb_control_new(QB_MODE_SWITCH, 1.0, QB_OUTCOME_MINUS, &sw) == QB_STATUS_OK);
  QbChannel *id = NULL;
  CHECK(qb_channel_phi_t(0.0, &id) == QB_STATUS_OK);
  CHECK(qb_control_output(sw, id, id, ket0, out, &prob) == QB_STATUS_POSTSELECTION_IMPOSSIBLE);
  CHECK(strlen(qb_last_error_message()) > 0);

  QbReport *report = NULL;
  CHECK(qb_detect(QB_MODE_PATH, 0.65, 1.0, 1e-2, 12.0, 400, 1e-9, &report) == QB_STATUS_OK);
  CHECK(qb_report_verdict(report));
  CHECK(qb_report_interval_count(report) >= 1);
  double start, end;
  CHECK(qb_report_interval(report, 0, &start, &end) == QB_STATUS_OK);
  CHECK(end > 1.0);

  double threshold;
  CHECK(qb_threshold(QB_MODE_SWITCH, 1.0, &threshold) == QB_STATUS_OK);
  CHECK(fabs(threshold - sqrt(0.4)) < 1e-15);
  CHECK(qb_threshold(QB_MODE_BARE, 1.0, &threshold) == QB_STATUS_INVALID_ARGUMENT);
  CHECK(qb_channel_phi_t(0.5, NULL) == QB_STATUS_NULL_POINTER);

  qb_report_free(report);
  qb_control_free(sw);
  qb_channel_free(id);
  qb_channel_free(phi);
  printf("c smoke ok\n");
  return 0;
}
