#include "evn/gateway/json_extract.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace evn::gateway {

namespace {

/// Index one past the brace closing the object opened at text[open], or npos.
std::size_t match_object(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::optional<nlohmann::json> scan(std::string_view text) {
    for (auto open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        const auto end = match_object(text, open);
        if (end == std::string_view::npos) continue;
        auto doc = nlohmann::json::parse(text.substr(open, end - open), nullptr, /*allow_exceptions=*/false);
        if (!doc.is_discarded() && doc.is_object()) return doc;
    }
    return std::nullopt;
}

std::vector<std::string_view> fenced_blocks(std::string_view text) {
    std::vector<std::string_view> blocks;
    std::size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string_view::npos) {
        auto body = pos + 3;
        // optional language tag such as ```json
        while (body < text.size() && (std::isalnum(static_cast<unsigned char>(text[body])) || text[body] == '_' ||
                                      text[body] == '-'))
            ++body;
        const auto close = text.find("```", body);
        if (close == std::string_view::npos) break;
        blocks.push_back(text.substr(body, close - body));
        pos = close + 3;
    }
    return blocks;
}

}  // namespace

std::optional<nlohmann::json> extract_json(std::string_view text) noexcept {
    try {
        for (auto block : fenced_blocks(text))
            if (auto doc = scan(block)) return doc;
        return scan(text);
    } catch (...) {
        return std::nullopt;
    }
}

std::string safe_dump(const nlohmann::json& j, int indent) {
    return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace evn::gateway
