#include "modmix/parallel.hpp"

#include <cstdlib>
#include <string>

namespace modmix {

std::size_t default_parallelism() {
  if (const char* env = std::getenv("MODMIX_PARALLELISM")) {
    try {
      const long long v = std::stoll(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace modmix
