#include <math.h>
#include <stdio.h>
#include <string.h>
#include "cic.h"

#define CHECK(x)                                                              \
  do {                                                                        \
    if (!(x)) {                                                               \
      const char *m = cic_last_error_message();                               \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #x, m ? m : ""); \
      return 1;                                                               \
    }                                                                         \
  } while (0)

int main(void) {
  double a_re[4] = {1.0, 3.0, 0.0, -2.0};
  CicMatrix *a = NULL, *e = NULL;
  CHECK(cic_matrix_new(2, 2, a_re, NULL, &a) == CIC_STATUS_OK);
  CHECK(cic_sign(a, &e) == CIC_STATUS_OK);
  double out[4];
  CHECK(cic_matrix_read(e, out, NULL) == CIC_STATUS_OK);
  CHECK(fabs(out[1] - 2.0) < 1e-12 && fabs(out[3] + 1.0) < 1e-12);

  const char *rh = "{\"n\":1,\"m\":1,\"A\":{\"rows\":1,\"cols\":1,\"data\":[[-1.0,0.0]]},"
                   "\"B\":{\"rows\":1,\"cols\":1,\"data\":[[2.0,0.0]]},"
                   "\"C\":{\"rows\":1,\"cols\":1,\"data\":[[2.0,0.0]]},"
                   "\"D\":{\"rows\":1,\"cols\":1,\"data\":[[2.0,0.0]]}}";
  CicRealization *r = NULL;
  CHECK(cic_realization_from_json(rh, &r) == CIC_STATUS_OK);
  int valid = 0;
  CHECK(cic_kyp_verify(r, NULL, 1e-9, &valid) == CIC_STATUS_OK && valid == 1);
  CicMatrix *fs = NULL;
  CHECK(cic_transfer_eval(r, 1.0, 0.0, &fs) == CIC_STATUS_OK);
  CHECK(cic_matrix_read(fs, out, NULL) == CIC_STATUS_OK && fabs(out[0] - 4.0) < 1e-12);

  CicMatrix *bad = NULL;
  CHECK(cic_sign(NULL, &bad) == CIC_STATUS_NULL_POINTER);
  CHECK(strstr(cic_last_error_message(), "null") != NULL);

  cic_matrix_free(fs);
  cic_realization_free(r);
  cic_matrix_free(e);
  cic_matrix_free(a);
  puts("ok");
  return 0;
}
