/* Serial residual norm: accumulates squared right-hand-side entries into a
 * five-element array indexed by the inner variable loop. The accumulation
 * array is the classic target for array-reduction lowering.
 */

double rhs[10][10][10][5];

void rhs_norm(double rms[5])
{
  int i;
  int j;
  int k;
  int m;
  double add;

  for (k = 1; k < 9; k++) {
    for (j = 1; j < 9; j++) {
      for (i = 1; i < 9; i++) {
        for (m = 0; m < 5; m++) {
          add = rhs[k][j][i][m];
          rms[m] = rms[m] + add * add;
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
  double rms[5];

  for (k = 0; k < 10; k++) {
    for (j = 0; j < 10; j++) {
      for (i = 0; i < 10; i++) {
        for (m = 0; m < 5; m++) {
          rhs[k][j][i][m] = 0.0001 * (k * 100 + j * 10 + i) + 0.00003 * m;
        }
      }
    }
  }
  for (m = 0; m < 5; m++) {
    rms[m] = 0.0;
  }

  rhs_norm(rms);

  for (m = 0; m < 5; m++) {
    print_val(rms[m]);
  }
  return 0;
}
