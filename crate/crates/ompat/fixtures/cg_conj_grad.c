/* One region drives five banded sweeps: each walks the blocks serially and
 * workshares the elements of a block. Every access is element-aligned on the
 * workshared index, so one barrier can be dropped.
 */

double x[64];
double z[64];
double r[64];
double p[64];
double q[64];
double w[64];
double d0[64];
double d1[64];
double alpha0;
double beta0;

static void conj_grad(void)
{
  int j;
  int blk;

  #pragma omp parallel default(shared) private(blk, j)
  {
    for (blk = 0; blk < 4; blk++) {
      #pragma omp for
      for (j = 0; j < 16; j++) {
        q[blk * 16 + j] = 0.0;
        z[blk * 16 + j] = 0.0;
        r[blk * 16 + j] = x[blk * 16 + j];
        p[blk * 16 + j] = x[blk * 16 + j];
      }
    }

    for (blk = 0; blk < 4; blk++) {
      #pragma omp for
      for (j = 0; j < 16; j++) {
        w[blk * 16 + j] = d0[blk * 16 + j] * p[blk * 16 + j] + d1[blk * 16 + j] * x[blk * 16 + j];
      }
    }

    for (blk = 0; blk < 4; blk++) {
      #pragma omp for nowait
      for (j = 0; j < 16; j++) {
        z[blk * 16 + j] = z[blk * 16 + j] + alpha0 * p[blk * 16 + j];
        r[blk * 16 + j] = r[blk * 16 + j] - alpha0 * w[blk * 16 + j];
      }
    }

    for (blk = 0; blk < 4; blk++) {
      #pragma omp for
      for (j = 0; j < 16; j++) {
        p[blk * 16 + j] = r[blk * 16 + j] + beta0 * p[blk * 16 + j];
      }
    }

    for (blk = 0; blk < 4; blk++) {
      #pragma omp for
      for (j = 0; j < 16; j++) {
        q[blk * 16 + j] = w[blk * 16 + j] - r[blk * 16 + j];
      }
    }
  }
}

int main(void)
{
  int i;
  double chk;

  alpha0 = 0.4;
  beta0 = 0.6;
  for (i = 0; i < 64; i++) {
    x[i] = 1.0 + 0.01 * i;
    d0[i] = 2.0 - 0.005 * i;
    d1[i] = 0.5 + 0.002 * i;
  }

  conj_grad();

  chk = 0.0;
  for (i = 0; i < 64; i++) {
    chk = chk + z[i] + r[i] * 2.0 + p[i] * 3.0 + q[i] * 4.0 + w[i] * 5.0;
  }
  print_val(chk);
  return 0;
}
