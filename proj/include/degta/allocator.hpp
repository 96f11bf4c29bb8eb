// Copyright 2026 The degta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEGTA_ALLOCATOR_HPP
#define DEGTA_ALLOCATOR_HPP

#if defined(__linux__)
#include <malloc.h>
#endif

namespace degta {

/// Keeps freed heap memory mapped between tape evaluations (glibc only).
/// Meant to be called once from main.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

}  // namespace degta

#endif  // DEGTA_ALLOCATOR_HPP
