#include "slottta/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace slottta::kern {

namespace {
const Table* select() {
  const char* req = std::getenv("SLOTTTA_KERNELS");
  if (req && std::strcmp(req, "scalar") == 0) return &scalar_table();
  const Table* avx2 = avx2_table();
  if (req && std::strcmp(req, "avx2") == 0 && avx2) return avx2;
  return avx2 ? avx2 : &scalar_table();
}
}  // namespace

const Table& active() {
  static const Table* t = select();
  return *t;
}

}  // namespace slottta::kern
