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

// Global operator new/delete live in this translation unit together with
// ArenaScope, so any binary that can open an arena also links the override.

#include "pvwm/tee/enclave_heap.hpp"

#include <sys/mman.h>

#include <cstdlib>
#include <cstring>
#include <new>

#include <openssl/crypto.h>

namespace pvwm::tee {

namespace {

thread_local Arena* t_current = nullptr;

constexpr std::uint64_t kHeapTag = 0x7076776d68656170ULL;   // "pvwmheap"
constexpr std::uint64_t kArenaTag = 0x7076776d6172656eULL;  // "pvwmaren"

// Prefix of every allocation; keeps user pointers 16-byte aligned.
struct Header {
  std::uint64_t tag;
  Arena* owner;
};
static_assert(sizeof(Header) == 16);

constexpr std::size_t kAlign = 16;

std::size_t round_up(std::size_t n) { return (n + kAlign - 1) & ~(kAlign - 1); }

void* allocate_tagged(std::size_t n) {
  if (Arena* a = t_current) {
    auto* h = static_cast<Header*>(a->allocate(sizeof(Header) + n));
    h->tag = kArenaTag;
    h->owner = a;
    return h + 1;
  }
  auto* h = static_cast<Header*>(std::malloc(sizeof(Header) + (n == 0 ? 1 : n)));
  if (h == nullptr) throw std::bad_alloc();
  h->tag = kHeapTag;
  h->owner = nullptr;
  return h + 1;
}

// `size` is the caller's allocation size when known (sized delete), else 0.
void free_tagged(void* p, std::size_t size = 0) noexcept {
  if (p == nullptr) return;
  Header* h = static_cast<Header*>(p) - 1;
  if (h->tag == kHeapTag) {
    h->tag = 0;
    std::free(h);
    return;
  }
  if (h->tag == kArenaTag && h->owner != nullptr && h->owner->contains(h)) {
    h->tag = 0;
    if (size != 0) h->owner->deallocate(h, sizeof(Header) + size);
    return;
  }
  // Freed after its arena was erased, or not ours at all.
  std::abort();
}

}  // namespace

Arena::Arena(std::size_t size) : size_(round_up(size)) {
  void* p = ::mmap(nullptr, size_, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
  if (p == MAP_FAILED) throw std::bad_alloc();
  base_ = static_cast<std::uint8_t*>(p);
}

Arena::~Arena() {
  erase();
  ::munmap(base_, size_);
}

void* Arena::allocate(std::size_t n) {
  const std::size_t need = round_up(n == 0 ? 1 : n);
  if (need > size_ - top_) throw std::bad_alloc();
  void* p = base_ + top_;
  top_ += need;
  if (top_ > high_) high_ = top_;
  if (high_ > peak_) peak_ = high_;
  return p;
}

void Arena::deallocate(void* p, std::size_t n) noexcept {
  // Rewind when the most recent block is released.
  auto* b = static_cast<std::uint8_t*>(p);
  if (b + round_up(n) == base_ + top_) top_ = static_cast<std::size_t>(b - base_);
}

void Arena::erase() noexcept {
  if (high_ > 0) OPENSSL_cleanse(base_, high_);
  // Hand the pages back so the next session starts from fresh zero pages.
  ::madvise(base_, high_, MADV_DONTNEED);
  top_ = 0;
  high_ = 0;
}

bool Arena::contains(const void* p) const noexcept {
  const auto* b = static_cast<const std::uint8_t*>(p);
  return b >= base_ && b < base_ + size_;
}

Bytes Arena::snapshot() const {
  HostScope host;
  return Bytes(base_, base_ + peak_);
}

ArenaScope::ArenaScope(Arena& arena) noexcept : previous_(t_current) { t_current = &arena; }
ArenaScope::~ArenaScope() { t_current = previous_; }

HostScope::HostScope() noexcept : previous_(t_current) { t_current = nullptr; }
HostScope::~HostScope() { t_current = previous_; }

Arena* current_arena() noexcept { return t_current; }

}  // namespace pvwm::tee

void* operator new(std::size_t n) { return pvwm::tee::allocate_tagged(n); }
void* operator new[](std::size_t n) { return pvwm::tee::allocate_tagged(n); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
  try {
    return pvwm::tee::allocate_tagged(n);
  } catch (...) {
    return nullptr;
  }
}
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept {
  try {
    return pvwm::tee::allocate_tagged(n);
  } catch (...) {
    return nullptr;
  }
}
void operator delete(void* p) noexcept { pvwm::tee::free_tagged(p); }
void operator delete[](void* p) noexcept { pvwm::tee::free_tagged(p); }
void operator delete(void* p, std::size_t n) noexcept { pvwm::tee::free_tagged(p, n); }
void operator delete[](void* p, std::size_t) noexcept { pvwm::tee::free_tagged(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { pvwm::tee::free_tagged(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { pvwm::tee::free_tagged(p); }
