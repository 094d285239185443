/*
Copyright 2026 The Dolly Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "dolly/kernels.hpp"

namespace dolly::kernels {

#ifndef DOLLY_HAVE_AVX2_BUILD
const Kernels* avx2_table() { return nullptr; }
#endif

namespace {

std::atomic<const Kernels*> g_active{nullptr};

const Kernels* resolve_auto() {
  if (const char* env = std::getenv("DOLLY_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_table();
    if (std::strcmp(env, "avx2") == 0) {
      if (const Kernels* t = avx2_table()) return t;
    }
  }
  if (const Kernels* t = avx2_table()) return t;
  return &scalar_table();
}

}  // namespace

const Kernels& active() {
  const Kernels* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = resolve_auto();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool select(Backend b) {
  switch (b) {
    case Backend::auto_detect:
      g_active.store(resolve_auto(), std::memory_order_release);
      return true;
    case Backend::scalar:
      g_active.store(&scalar_table(), std::memory_order_release);
      return true;
    case Backend::avx2:
      if (const Kernels* t = avx2_table()) {
        g_active.store(t, std::memory_order_release);
        return true;
      }
      return false;
  }
  return false;
}

}  // namespace dolly::kernels
