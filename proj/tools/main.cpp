#include <malloc.h>

#include "cli.hpp"

int main(int argc, char** argv) {
  // Training allocates the same large temporaries every epoch; keep them in the heap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return fae::cli::run(std::vector<std::string>(argv, argv + argc));
}
