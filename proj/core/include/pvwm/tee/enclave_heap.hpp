// Copyright 2026 The pvwm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>

#include "pvwm/common/bytes.hpp"

// Simulated enclave memory.
//
// While an ArenaScope is active on a thread, every global operator new on
// that thread is served from the scope's Arena: a private anonymous mapping
// with a bump allocator. erase() cleanses everything the arena ever handed
// out, so buffers freed long before erase (temporary strings, vector growth)
// are wiped too.
namespace pvwm::tee {

class Arena {
 public:
  static constexpr std::size_t kDefaultSize = std::size_t{64} << 20;

  explicit Arena(std::size_t size = kDefaultSize);
  ~Arena();
  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;

  // Throws std::bad_alloc when the arena is exhausted.
  void* allocate(std::size_t n);
  void deallocate(void* p, std::size_t n) noexcept;

  // Zeroes every byte below the high-water mark and resets the allocator.
  // Idempotent.
  void erase() noexcept;

  std::size_t used() const noexcept { return top_; }
  std::size_t high_water() const noexcept { return high_; }
  // Largest extent ever touched, across erases.
  std::size_t peak() const noexcept { return peak_; }
  std::size_t capacity() const noexcept { return size_; }
  bool contains(const void* p) const noexcept;

  // Copy of every byte the arena has touched, for residue probes. Must be
  // called outside any ArenaScope for this arena.
  Bytes snapshot() const;

 private:
  std::uint8_t* base_ = nullptr;
  std::size_t size_ = 0;
  std::size_t top_ = 0;
  std::size_t high_ = 0;
  std::size_t peak_ = 0;
};

// Routes this thread's allocations into `arena` until destroyed. Scopes
// nest; HostScope temporarily returns to the process heap.
class ArenaScope {
 public:
  explicit ArenaScope(Arena& arena) noexcept;
  ~ArenaScope();
  ArenaScope(const ArenaScope&) = delete;
  ArenaScope& operator=(const ArenaScope&) = delete;

 private:
  Arena* previous_;
};

class HostScope {
 public:
  HostScope() noexcept;
  ~HostScope();
  HostScope(const HostScope&) = delete;
  HostScope& operator=(const HostScope&) = delete;

 private:
  Arena* previous_;
};

Arena* current_arena() noexcept;

}  // namespace pvwm::tee
