/* Ranking sweep over integer keys: a dynamically scheduled copy, then
 * gather passes driven by key values (subscripted subscripts), a bucketed
 * pass using per-thread scratch, and serial verification loops.
 */

int key_array[64];
int key_buff1[64];
int key_buff2[64];
double scale[8];
double work1[64];
double dense[64];
double x3[64];
int passed;
int failed;
int limit;

static double bucket[8];
#pragma omp threadprivate(bucket)

void rank(void)
{
  int i;
  int it;

  for (i = 0; i < 64; i++) {
    key_buff1[i] = key_array[i] % 8;
  }

  #pragma omp parallel for private(i) schedule(dynamic)
  for (i = 0; i < 64; i++) {
    key_buff2[i] = key_array[63 - i];
  }

  #pragma omp parallel default(shared) private(it, i)
  {
    for (it = 0; it < 2; it++) {
      #pragma omp for
      for (i = 0; i < 64; i++) {
        work1[i] = key_buff1[i] + it * 0.5;
      }
    }

    for (it = 0; it < 2; it++) {
      #pragma omp for
      for (i = 0; i < 64; i++) {
        dense[i] = scale[key_buff1[i]] + work1[i];
      }
    }

    for (it = 0; it < 2; it++) {
      #pragma omp for
      for (i = 0; i < 64; i++) {
        bucket[key_buff1[i]] = dense[i] + it;
        x3[i] = bucket[key_buff1[i]] * 0.5;
      }
    }
  }

  passed = 0;
  for (i = 0; i < 64; i++) {
    if (key_buff2[i] > limit) {
      passed = passed + 1;
    }
  }

  failed = 0;
  for (i = 0; i < 64; i++) {
    if (key_buff2[i] < 0) {
      failed = failed + 1;
    }
  }

  for (i = 1; i < 64; i++) {
    if (x3[i] < x3[i - 1] - 100.0) {
      failed = failed + 1;
    }
  }
}

int main(void)
{
  int i;
  double chk;

  limit = 3;
  for (i = 0; i < 64; i++) {
    key_array[i] = (i * 13 + 5) % 8;
  }
  for (i = 0; i < 8; i++) {
    scale[i] = 1.0 + i * 0.25;
  }

  rank();

  chk = 0.0;
  for (i = 0; i < 64; i++) {
    chk = chk + key_buff2[i] + work1[i] + dense[i] + x3[i];
  }
  print_val(chk);
  print_int(passed);
  print_int(failed);
  return 0;
}
