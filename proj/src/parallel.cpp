#include "stokeswim/parallel.hpp"

#include <cstdlib>
#include <string>

namespace stokeswim {

int worker_count() {
  if (const char* env = std::getenv("STOKESWIM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
      // fall through to the default
    }
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace stokeswim
