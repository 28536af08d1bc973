// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string_view>

#include "npd/kernels.hpp"

namespace npd::kernels {
namespace {

const Table* initial_table() {
  const char* env = std::getenv("NPD_SIMD");
  const std::string_view choice = env != nullptr ? env : "";
  if (choice == "scalar") return &scalar_table();
  if (const Table* fast = avx2_table()) return fast;
  return &scalar_table();
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> current{initial_table()};
  return current;
}

}  // namespace

const Table& active() { return *slot().load(std::memory_order_acquire); }

void set_active(const Table& table) { slot().store(&table, std::memory_order_release); }

}  // namespace npd::kernels
