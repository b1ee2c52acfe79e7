#include <math.h>
#include <stdio.h>
#include "lobscale.h"

int main(void) {
    enum { N = 4096 };
    static double x[N];
    if (lob_generate(LOB_SIGNAL_WHITE, 0.5, N, 11, x) != LOB_STATUS_OK) return 10;

    LobCurve *curve = NULL;
    if (lob_fluctuation(x, N, NULL, 0, 1, false, &curve) != LOB_STATUS_OK) return 11;
    LobFit fit;
    if (lob_curve_fit(curve, -INFINITY, INFINITY, false, &fit) != LOB_STATUS_OK) return 12;
    printf("len=%zu alpha=%.12f\n", lob_curve_len(curve), fit.alpha);
    lob_curve_free(curve);

    if (lob_fluctuation(x, N, NULL, 0, 7, false, &curve) != LOB_STATUS_INVALID_ARGUMENT) return 13;
    if (curve != NULL || lob_last_error() == NULL) return 14;
    printf("error=%s\n", lob_last_error());

    double a[4] = {1, 2, 3, 4}, b[4] = {2, 4, 6, 8};
    LobCorrelation c;
    if (lob_correlate(a, b, 4, &c) != LOB_STATUS_OK) return 15;
    printf("r=%.3f sig=%d\n", c.r, (int)c.significant_99);
    return 0;
}
