/* Embarrassingly parallel tally: each iteration refills a per-thread random
 * buffer, accumulates scalar sums through reduction clauses and a tally
 * array through a per-thread copy combined with atomic updates.
 */

static double xr[128];
#pragma omp threadprivate(xr)

double q[8];
double sx;
double sy;

void vranlc(int n, int kn, double v[])
{
  int i;
  for (i = 0; i < n; i++) {
    v[i] = 0.001 * ((kn * 61 + i * 79) % 997) + 0.0005;
  }
}

int main(void)
{
  int i;
  int k;
  int l;
  double t1;
  double x1;
  double x2;

  sx = 0.0;
  sy = 0.0;
  for (l = 0; l < 8; l++) {
    q[l] = 0.0;
  }
  for (i = 0; i < 128; i++) {
    xr[i] = 0.5;
  }

  #pragma omp parallel default(shared) private(i, k, l, t1, x1, x2)
  {
    double qq[8];
    for (l = 0; l < 8; l++) {
      qq[l] = 0.0;
    }
    #pragma omp for reduction(+:sx, sy)
    for (k = 1; k <= 64; k++) {
      vranlc(128, k, xr);
      for (i = 0; i < 64; i++) {
        x1 = 2.0 * xr[2 * i] - 1.0;
        x2 = 2.0 * xr[2 * i + 1] - 1.0;
        t1 = x1 * x1 + x2 * x2;
        if (t1 <= 1.0) {
          for (l = 0; l < 8; l++) {
            qq[l] = qq[l] + t1 * 0.125;
          }
          sx = sx + x1;
          sy = sy + x2;
        }
      }
    }
    for (l = 0; l < 8; l++) {
      #pragma omp atomic
      q[l] = q[l] + qq[l];
    }
  }

  for (l = 0; l < 8; l++) {
    print_val(q[l]);
  }
  print_val(sx);
  print_val(sy);
  return 0;
}
