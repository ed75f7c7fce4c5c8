#include "bdfl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bdfl {

void apply_thread_cap_from_env() {
  const char* raw = std::getenv("BDFL_THREADS");
  if (raw == nullptr || *raw == '\0') return;
  int cap = 0;
  try {
    cap = std::stoi(raw);
  } catch (...) {
    return;
  }
#ifdef _OPENMP
  if (cap > 0) omp_set_num_threads(cap);
#else
  (void)cap;
#endif
}

}  // namespace bdfl
