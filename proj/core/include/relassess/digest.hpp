// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relassess {

inline constexpr std::string_view kDigestAlgorithm = "sha256";

// Lowercase 64-hex-char SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

bool is_hex_digest(std::string_view text);

}  // namespace relassess
