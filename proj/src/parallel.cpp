#include "sogpe/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace sogpe {

namespace {

int from_environment() {
  const char* env = std::getenv("SOGPE_THREADS");
  if (env == nullptr) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    return 1;
  }
}

std::atomic<int>& slot() {
  static std::atomic<int> n{from_environment()};
  return n;
}

}  // namespace

int thread_count() { return slot().load(); }

void set_thread_count(int n) { slot().store(std::max(1, n)); }

}  // namespace sogpe
