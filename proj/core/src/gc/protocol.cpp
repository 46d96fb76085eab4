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

#include "pvwm/gc/protocol.hpp"

#include <exception>
#include <thread>

#include "pvwm/common/error.hpp"
#include "pvwm/gc/garble.hpp"
#include "pvwm/gc/ot.hpp"
#include "pvwm/net/net.hpp"

namespace pvwm::gc {

GarblerSession::GarblerSession(const Circuit& circuit, const BitVector& garbler_bits)
    : circuit_(circuit), garbler_bits_(garbler_bits) {
  if (garbler_bits.size() != circuit.garbler_inputs) throw InvalidArgument("garbler input width mismatch");
}

GarblerSession::~GarblerSession() {
  secure_zero(g_.e.zero_labels.data(), g_.e.zero_labels.size() * sizeof(Block));
  secure_zero(&g_.e.delta, sizeof g_.e.delta);
  secure_zero(garbler_bits_);
}

std::vector<wire::Frame> GarblerSession::start() {
  if (started_) throw ProtocolError("garbling already sent");
  started_ = true;
  g_ = garble(circuit_);
  wire::GcGarbled msg;
  msg.tables = blocks_to_bytes(g_.f.tables);
  msg.decoding = g_.d;
  msg.garbler_labels = blocks_to_bytes(encode(g_.e, garbler_bits_, 0));
  std::vector<wire::Frame> out;
  out.push_back({wire::MsgType::kGcGarbled, msg.encode()});
  out.push_back({wire::MsgType::kOtSetup, sender_.setup().encode()});
  return out;
}

wire::Frame GarblerSession::on_choices(ByteView payload) {
  if (!started_ || done_) throw ProtocolError("unexpected OT choices");
  const auto choices = wire::OtChoices::decode(payload);
  if (choices.b.size() != circuit_.evaluator_inputs) throw ProtocolError("OT choice count mismatch");
  std::vector<std::pair<Block, Block>> labels;
  labels.reserve(circuit_.evaluator_inputs);
  for (std::uint32_t i = 0; i < circuit_.evaluator_inputs; ++i) {
    const Block zero = g_.e.zero_labels[circuit_.garbler_inputs + i];
    labels.emplace_back(zero, zero ^ g_.e.delta);
  }
  wire::Frame reply{wire::MsgType::kOtReply, sender_.respond(choices, labels).encode()};
  secure_zero(labels.data(), labels.size() * sizeof(labels[0]));
  secure_zero(g_.e.zero_labels.data(), g_.e.zero_labels.size() * sizeof(Block));
  secure_zero(&g_.e.delta, sizeof g_.e.delta);
  done_ = true;
  return reply;
}

void run_garbler(wire::Channel& ch, const Circuit& circuit, const BitVector& garbler_bits) {
  GarblerSession session(circuit, garbler_bits);
  for (const auto& f : session.start()) ch.send(f);
  ch.send(session.on_choices(ch.expect(wire::MsgType::kOtChoices).payload));
}

BitVector run_evaluator(wire::Channel& ch, const crypto::AssetId& id, const Circuit& circuit,
                        const BitVector& evaluator_bits) {
  if (evaluator_bits.size() != circuit.evaluator_inputs) {
    throw InvalidArgument("evaluator input width mismatch");
  }
  ch.send(wire::MsgType::kGcHello, wire::GcHello{id, circuit_hash(circuit)}.encode());

  const auto garbled = wire::GcGarbled::decode(ch.expect(wire::MsgType::kGcGarbled).payload);
  GarbledCircuit f{blocks_from_bytes(garbled.tables)};
  if (f.tables.size() != 2 * circuit.and_count()) throw ProtocolError("garbled table count mismatch");
  if (garbled.decoding.size() != circuit.outputs.size()) throw ProtocolError("decoding width mismatch");
  std::vector<Block> labels = blocks_from_bytes(garbled.garbler_labels);
  if (labels.size() != circuit.garbler_inputs) throw ProtocolError("garbler label count mismatch");

  const auto setup = wire::OtSetup::decode(ch.expect(wire::MsgType::kOtSetup).payload);
  ot::Receiver receiver(setup);
  ch.send(wire::MsgType::kOtChoices, receiver.choose(evaluator_bits).encode());
  const auto reply = wire::OtReply::decode(ch.expect(wire::MsgType::kOtReply).payload);
  const std::vector<Block> mine = receiver.finish(reply);
  labels.insert(labels.end(), mine.begin(), mine.end());

  return decode(garbled.decoding, eval(circuit, f, labels));
}

BitVector run_local(const Circuit& circuit, const BitVector& garbler_bits,
                    const BitVector& evaluator_bits) {
  auto [a, b] = net::socket_pair();
  net::FramedChannel garbler_ch(std::move(a));
  net::FramedChannel evaluator_ch(std::move(b));
  std::exception_ptr garbler_error;
  std::thread garbler([&] {
    try {
      const auto hello = wire::GcHello::decode(garbler_ch.expect(wire::MsgType::kGcHello).payload);
      if (hello.circuit_hash != circuit_hash(circuit)) {
        garbler_ch.send(wire::MsgType::kAbort, wire::Abort{wire::AbortCode::kCircuitMismatch}.encode());
        return;
      }
      run_garbler(garbler_ch, circuit, garbler_bits);
    } catch (...) {
      garbler_error = std::current_exception();
      garbler_ch.socket().close();
    }
  });
  BitVector out;
  try {
    out = run_evaluator(evaluator_ch, crypto::AssetId{}, circuit, evaluator_bits);
  } catch (...) {
    evaluator_ch.socket().close();
    garbler.join();
    throw;
  }
  garbler.join();
  if (garbler_error) std::rethrow_exception(garbler_error);
  return out;
}

}  // namespace pvwm::gc
