#include <cstdlib>
#include <string_view>

#include "cutscore/kernels.hpp"

namespace cutscore::kernels {
namespace {

const KernelTable& select() {
  const char* forced = std::getenv("CUTSCORE_SIMD");
  if (forced != nullptr) {
    const std::string_view want(forced);
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2" && avx2_kernels() != nullptr) return *avx2_kernels();
    if (want == "neon" && neon_kernels() != nullptr) return *neon_kernels();
    // Unknown or unsupported request: fall through to auto-selection.
  }
  if (const KernelTable* t = avx2_kernels()) return *t;
  if (const KernelTable* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace cutscore::kernels
