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

#include <algorithm>
#include <string>
#include <string_view>

#include "pvwm/common/bytes.hpp"
#include "pvwm/common/error.hpp"

namespace pvwm {

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

std::string to_base64(ByteView data);
Bytes from_base64(std::string_view text);

template <std::size_t N>
FixedBytes<N> fixed_from_hex(std::string_view hex) {
  Bytes raw = from_hex(hex);
  FixedBytes<N> out{};
  if (raw.size() != N) throw ParseError("expected " + std::to_string(N) + " hex bytes");
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

// File helpers shared by tools and stores.
Bytes read_file(const std::string& path);
// `mode` applies to the new file before it becomes visible under `path`.
void write_file_atomic(const std::string& path, ByteView data, unsigned mode = 0644);

}  // namespace pvwm
