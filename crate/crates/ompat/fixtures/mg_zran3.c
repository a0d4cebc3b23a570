/* Pseudo-random field generation followed by two smoothing passes. The
 * field fill workshares its outermost plane loop and applies a per-point
 * evaluation routine; the smoothing passes workshare rows inside serial
 * sweeps.
 */

double z1[8][8][8];
double z2[8][8][8];
double zsum[8][8];

double bump(double v)
{
  double r;
  r = v * 0.5 + 0.25;
  return r;
}

void zran3(void)
{
  int i;
  int j;
  int k;
  int it;

  for (k = 0; k < 8; k++) {
    for (j = 0; j < 8; j++) {
      for (i = 0; i < 8; i++) {
        z1[k][j][i] = 0.001 * ((k * 64 + j * 8 + i) * 31 % 173);
      }
    }
  }

  #pragma omp parallel default(shared) private(i, j, k, it)
  {
    #pragma omp for
    for (k = 0; k < 8; k++) {
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          z2[k][j][i] = bump(z1[k][j][i]);
        }
      }
    }

    for (it = 0; it < 2; it++) {
      #pragma omp for
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          zsum[j][i] = zsum[j][i] * 0.25 + z2[0][j][i] + z2[7][j][i];
        }
      }
    }

    for (it = 0; it < 2; it++) {
      #pragma omp for
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          zsum[j][i] = zsum[j][i] + z1[it * 7][j][i] * 0.125;
        }
      }
    }
  }
}

int main(void)
{
  int i;
  int j;
  int k;
  double chk;

  zran3();

  chk = 0.0;
  for (j = 0; j < 8; j++) {
    for (i = 0; i < 8; i++) {
      chk = chk + zsum[j][i];
    }
  }
  print_val(chk);
  chk = 0.0;
  for (k = 0; k < 8; k++) {
    for (j = 0; j < 8; j++) {
      for (i = 0; i < 8; i++) {
        chk = chk + z2[k][j][i];
      }
    }
  }
  print_val(chk);
  return 0;
}
