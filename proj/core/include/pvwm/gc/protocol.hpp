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

#include <functional>

#include "pvwm/crypto/crypto.hpp"
#include "pvwm/gc/circuit.hpp"
#include "pvwm/gc/garble.hpp"
#include "pvwm/gc/ot.hpp"
#include "pvwm/wire/wire.hpp"

// Two-party evaluation: the prover garbles, the holder evaluates.
//
//   H -> P  GC_HELLO   {id, circuit hash}
//   P -> H  GC_GARBLED {F, d, X_P}
//   P -> H  OT_SETUP   {A}
//   H -> P  OT_CHOICES {B_1..B_m}
//   P -> H  OT_REPLY   {(e0, e1)_1..m}
//
// The prover sends nothing that depends on the holder's input and receives
// no output.
namespace pvwm::gc {

// Garbler side after GC_HELLO has been accepted.
// Garbler side as explicit steps, for event-driven servers.
class GarblerSession {
 public:
  GarblerSession(const Circuit& circuit, const BitVector& garbler_bits);
  ~GarblerSession();
  GarblerSession(const GarblerSession&) = delete;
  GarblerSession& operator=(const GarblerSession&) = delete;

  // GC_GARBLED then OT_SETUP.
  std::vector<wire::Frame> start();
  // OT_CHOICES payload in, OT_REPLY out. Wipes the encoding afterwards.
  wire::Frame on_choices(ByteView payload);

 private:
  const Circuit& circuit_;
  Garbling g_;
  BitVector garbler_bits_;
  ot::Sender sender_;
  bool started_ = false;
  bool done_ = false;
};

void run_garbler(wire::Channel& ch, const Circuit& circuit, const BitVector& garbler_bits);

// Sends GC_HELLO and evaluates; returns the decoded output bits.
BitVector run_evaluator(wire::Channel& ch, const crypto::AssetId& id, const Circuit& circuit,
                        const BitVector& evaluator_bits);

// Both roles in one process over a socket pair.
BitVector run_local(const Circuit& circuit, const BitVector& garbler_bits,
                    const BitVector& evaluator_bits);

}  // namespace pvwm::gc
