#pragma once

#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

namespace evn::gateway {

/// First balanced `{...}` region of `text` that parses as a JSON object.
/// Fenced code blocks are searched before the surrounding prose. Total:
/// never throws, returns nullopt when nothing parses.
std::optional<nlohmann::json> extract_json(std::string_view text) noexcept;

/// Serializes with invalid UTF-8 replaced instead of throwing.
std::string safe_dump(const nlohmann::json& j, int indent = -1);

}  // namespace evn::gateway
