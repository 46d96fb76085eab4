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

#include <memory>
#include <utility>
#include <vector>

#include "pvwm/gc/garble.hpp"
#include "pvwm/wire/wire.hpp"

// 1-out-of-2 oblivious transfer of 128-bit strings, Diffie-Hellman based
// ("simplest OT") over P-256 with compressed points.
//
//   S: a <- Z_n, A = aG                         -> A
//   R: b <- Z_n, B = bG + cA                    <- B
//   S: k0 = H(aB), k1 = H(a(B - A)),  e_i = x_i ^ k_i, tag_i -> (e0, e1)
//   R: k_c = H(bA), x_c = e_c ^ k_c
namespace pvwm::gc::ot {

using Scalar = FixedBytes<32>;

struct Group;

class Sender {
 public:
  Sender();
  // Test hook: fixed secret scalar.
  explicit Sender(const Scalar& a);
  ~Sender();
  Sender(Sender&&) noexcept;
  Sender& operator=(Sender&&) noexcept;

  wire::OtSetup setup() const;
  // Throws ProtocolError on malformed points or a count mismatch.
  wire::OtReply respond(const wire::OtChoices& choices,
                        const std::vector<std::pair<Block, Block>>& messages) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Receiver {
 public:
  // Throws ProtocolError when A is not a valid point.
  explicit Receiver(const wire::OtSetup& setup);
  ~Receiver();
  Receiver(Receiver&&) noexcept;
  Receiver& operator=(Receiver&&) noexcept;

  wire::OtChoices choose(const BitVector& bits);
  // Test hook: caller-provided per-transfer scalars.
  wire::OtChoices choose_with_scalars(const BitVector& bits, const std::vector<Scalar>& scalars);
  // Throws ProtocolError when a tag does not verify.
  std::vector<Block> finish(const wire::OtReply& reply);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// (a + b) mod n, for building equal transcripts in tests.
Scalar scalar_add(const Scalar& a, const Scalar& b);
Scalar random_scalar();

}  // namespace pvwm::gc::ot
