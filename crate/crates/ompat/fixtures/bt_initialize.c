/* Field initialization over an 8x8x8 grid: defaults first, then the exact
 * solution in the interior and on each face. One parallel region; seven of
 * the eight sweeps call the evaluation routine. The two k-face sweeps
 * workshare j instead of k, so an explicit barrier separates them from the
 * k-chunked sweeps.
 */

double u[8][8][8][5];
double ce[5][5];
double dnxm1;
double dnym1;
double dnzm1;

void exact_solution(double xi, double eta, double zeta, double dtemp[5])
{
  int m;
  for (m = 0; m < 5; m++) {
    dtemp[m] = ce[m][0] + xi * (ce[m][1] + xi * ce[m][2]) + eta * ce[m][3] + zeta * ce[m][4];
  }
}

void initialize(void)
{
  int i;
  int j;
  int k;
  int m;
  double xi;
  double eta;
  double zeta;
  double temp[5];

  #pragma omp parallel default(shared) private(i, j, k, m, xi, eta, zeta, temp)
  {
    #pragma omp for nowait
    for (k = 0; k < 8; k++) {
      for (j = 0; j < 8; j++) {
        for (i = 0; i < 8; i++) {
          for (m = 0; m < 5; m++) {
            u[k][j][i][m] = 1.0 + 0.1 * m;
          }
        }
      }
    }

    #pragma omp for nowait
    for (k = 0; k < 8; k++) {
      zeta = k * dnzm1;
      for (j = 0; j < 8; j++) {
        eta = j * dnym1;
        for (i = 0; i < 8; i++) {
          xi = i * dnxm1;
          exact_solution(xi, eta, zeta, temp);
          for (m = 0; m < 5; m++) {
            u[k][j][i][m] = temp[m];
          }
        }
      }
    }

    /* west face, i = 0 */
    #pragma omp for nowait
    for (k = 0; k < 8; k++) {
      zeta = k * dnzm1;
      for (j = 0; j < 8; j++) {
        eta = j * dnym1;
        exact_solution(0.0, eta, zeta, temp);
        for (m = 0; m < 5; m++) {
          u[k][j][0][m] = temp[m];
        }
      }
    }

    /* east face, i = 7 */
    #pragma omp for nowait
    for (k = 0; k < 8; k++) {
      zeta = k * dnzm1;
      for (j = 0; j < 8; j++) {
        eta = j * dnym1;
        exact_solution(1.0, eta, zeta, temp);
        for (m = 0; m < 5; m++) {
          u[k][j][7][m] = temp[m];
        }
      }
    }

    /* south face, j = 0 */
    #pragma omp for nowait
    for (k = 0; k < 8; k++) {
      zeta = k * dnzm1;
      for (i = 0; i < 8; i++) {
        xi = i * dnxm1;
        exact_solution(xi, 0.0, zeta, temp);
        for (m = 0; m < 5; m++) {
          u[k][0][i][m] = temp[m];
        }
      }
    }

    /* north face, j = 7 */
    #pragma omp for nowait
    for (k = 0; k < 8; k++) {
      zeta = k * dnzm1;
      for (i = 0; i < 8; i++) {
        xi = i * dnxm1;
        exact_solution(xi, 1.0, zeta, temp);
        for (m = 0; m < 5; m++) {
          u[k][7][i][m] = temp[m];
        }
      }
    }

    #pragma omp barrier

    /* bottom face, k = 0: workshared over j once everything above settled */
    #pragma omp for
    for (j = 0; j < 8; j++) {
      eta = j * dnym1;
      for (i = 0; i < 8; i++) {
        xi = i * dnxm1;
        exact_solution(xi, eta, 0.0, temp);
        for (m = 0; m < 5; m++) {
          u[0][j][i][m] = temp[m];
        }
      }
    }

    /* top face, k = 7 */
    #pragma omp for
    for (j = 0; j < 8; j++) {
      eta = j * dnym1;
      for (i = 0; i < 8; i++) {
        xi = i * dnxm1;
        exact_solution(xi, eta, 1.0, temp);
        for (m = 0; m < 5; m++) {
          u[7][j][i][m] = temp[m];
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

  dnxm1 = 1.0 / 7.0;
  dnym1 = 1.0 / 7.0;
  dnzm1 = 1.0 / 7.0;
  for (i = 0; i < 5; i++) {
    for (j = 0; j < 5; j++) {
      ce[i][j] = 0.1 * (i + 1) + 0.02 * j;
    }
  }

  initialize();

  chk = 0.0;
  for (k = 0; k < 8; k++) {
    for (j = 0; j < 8; j++) {
      for (i = 0; i < 8; i++) {
        for (m = 0; m < 5; m++) {
          chk = chk + u[k][j][i][m] * (1.0 + 0.001 * m);
        }
      }
    }
  }
  print_val(chk);
  return 0;
}
