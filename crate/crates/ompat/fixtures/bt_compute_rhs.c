/* Right-hand-side assembly over an 8x8x8 grid, five variables per point.
 * One parallel region; each sweep workshares its j loop inside a serial k
 * sweep. Barriers are dropped where every later consumer touches only
 * same-thread j chunks.
 */

double u[8][8][8][5];
double rhs[8][8][8][5];
double us[8][8][8];
double square[8][8][8];
double usum[8][8];
double dt;
double c1;
double c2;

void compute_rhs(void)
{
  int i;
  int j;
  int k;
  int m;

  #pragma omp parallel default(shared) private(i, j, k, m)
  {
    for (k = 0; k < 8; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          us[k][j][i] = u[k][j][i][1] * 0.5;
          square[k][j][i] = u[k][j][i][1] * u[k][j][i][1] + u[k][j][i][2];
        }
      }
    }

    for (k = 0; k < 8; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          for (m = 0; m < 5; m++) {
            rhs[k][j][i][m] = u[k][j][i][m] * 0.25;
          }
        }
      }
    }

    /* xi-direction fluxes: stencils run along i, which stays thread-local. */
    for (k = 0; k < 8; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        for (i = 1; i < 7; i++) {
          rhs[k][j][i][1] = rhs[k][j][i][1] + c1 * (us[k][j][i + 1] - us[k][j][i - 1]);
        }
      }
    }

    /* xi-direction dissipation; the construct barrier here covers the
     * eta-direction reads below. */
    for (k = 0; k < 8; k++) {
      #pragma omp for
      for (j = 0; j < 8; j++) {
        for (i = 1; i < 7; i++) {
          rhs[k][j][i][2] = rhs[k][j][i][2] - c2 * (square[k][j][i + 1] - 2.0 * square[k][j][i] + square[k][j][i - 1]);
        }
      }
    }

    /* eta-direction fluxes; every sweep shares the same j space so chunks
     * stay thread-aligned, with the interior selected inside. */
    for (k = 0; k < 8; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        if (j > 0 && j < 7) {
          for (i = 0; i < 8; i++) {
            rhs[k][j][i][3] = rhs[k][j][i][3] + c1 * (us[k][j + 1][i] - us[k][j - 1][i]);
          }
        }
      }
    }

    /* eta-direction dissipation. */
    for (k = 0; k < 8; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        if (j > 0 && j < 7) {
          for (i = 0; i < 8; i++) {
            rhs[k][j][i][4] = rhs[k][j][i][4] - c2 * (square[k][j + 1][i] - 2.0 * square[k][j][i] + square[k][j - 1][i]);
          }
        }
      }
    }

    /* zeta-direction fluxes; k neighbors were finalized before the last
     * barrier. */
    for (k = 1; k < 7; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          rhs[k][j][i][1] = rhs[k][j][i][1] + c1 * (us[k + 1][j][i] - us[k - 1][j][i]);
        }
      }
    }

    /* zeta-direction dissipation. */
    for (k = 1; k < 7; k++) {
      #pragma omp for nowait
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          rhs[k][j][i][2] = rhs[k][j][i][2] - c2 * (square[k + 1][j][i] - 2.0 * square[k][j][i] + square[k - 1][j][i]);
        }
      }
    }

    /* Scale by the time step; this barrier protects the update of u. */
    for (k = 0; k < 8; k++) {
      #pragma omp for
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          for (m = 0; m < 5; m++) {
            rhs[k][j][i][m] = rhs[k][j][i][m] * dt;
          }
        }
      }
    }

    for (k = 0; k < 8; k++) {
      #pragma omp for
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          for (m = 0; m < 5; m++) {
            u[k][j][i][m] = u[k][j][i][m] + rhs[k][j][i][m];
          }
        }
      }
    }

    for (k = 0; k < 8; k++) {
      #pragma omp for
      for (j = 0; j < 8; j++) {
        usum[k][j] = 0.0;
        for (i = 0; i < 8; i++) {
          for (m = 0; m < 5; m++) {
            usum[k][j] = usum[k][j] + rhs[k][j][i][m];
          }
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
  int m;
  double chk;

  dt = 0.015;
  c1 = 0.4;
  c2 = 0.3;
  for (k = 0; k < 8; k++) {
    for (j = 0; j < 8; j++) {
      for (i = 0; i < 8; i++) {
        for (m = 0; m < 5; m++) {
          u[k][j][i][m] = 1.0 + 0.01 * (k * 25 + j * 5 + i) + 0.003 * m;
        }
      }
    }
  }

  compute_rhs();

  chk = 0.0;
  for (k = 0; k < 8; k++) {
    for (j = 0; j < 8; j++) {
      for (i = 0; i < 8; i++) {
        for (m = 0; m < 5; m++) {
          chk = chk + rhs[k][j][i][m] + u[k][j][i][m] * 0.5;
        }
      }
    }
  }
  print_val(chk);
  chk = 0.0;
  for (k = 0; k < 8; k++) {
    for (j = 0; j < 8; j++) {
      chk = chk + usum[k][j];
    }
  }
  print_val(chk);
  return 0;
}
