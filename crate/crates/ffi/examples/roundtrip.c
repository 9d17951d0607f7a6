/* cc -Icrates/ffi/include crates/ffi/examples/roundtrip.c -Ltarget/release -ladrt_ffi */
#include <stdio.h>
#include "adrt.h"

int main(void) {
    int64_t data[16];
    for (int i = 0; i < 16; i++) data[i] = i;

    AdrtImage *f = NULL, *g = NULL, *back = NULL;
    if (adrt_image_from_square_i64(2, data, &f) != ADRT_STATUS_OK ||
        adrt_forward(f, &g) != ADRT_STATUS_OK ||
        adrt_inverse(g, false, 0.0, &back) != ADRT_STATUS_OK) {
        fprintf(stderr, "adrt: %s\n", adrt_last_error());
        return 1;
    }

    AdrtValidation report;
    adrt_validate(g, 0.0, &report);
    int64_t out[16];
    adrt_image_copy_i64(back, out, 16);
    int same = 1;
    for (int i = 0; i < 16; i++) same &= out[i] == data[i];
    printf("valid=%d constraints=%zu round_trip=%d\n", report.passed, report.total, same);

    adrt_image_free(f);
    adrt_image_free(g);
    adrt_image_free(back);
    return same && report.passed ? 0 : 1;
}
