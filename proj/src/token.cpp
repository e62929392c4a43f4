#include "pcpo/token.hpp"

#include <limits>
#include <stdexcept>

namespace pcpo {

TokenId TokenTable::intern(const Token& token) {
    if (ids_.size() >= std::numeric_limits<TokenId>::max()) {
        throw std::length_error("token table full");
    }
    const auto next = static_cast<TokenId>(ids_.size());
    return ids_.try_emplace(token, next).first->second;
}

std::vector<TokenId> TokenTable::intern(std::span<const Token> tokens) {
    std::vector<TokenId> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens) {
        out.push_back(intern(t));
    }
    return out;
}

std::uint64_t stable_hash(const Token& token) {
    constexpr std::uint64_t kOffset = 14695981039346656037ULL;
    constexpr std::uint64_t kPrime = 1099511628211ULL;
    std::uint64_t h = kOffset;
    auto feed = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= kPrime;
        }
    };
    if (const auto* s = std::get_if<std::string>(&token)) {
        feed("s:");
        feed(*s);
    } else {
        feed("i:");
        feed(std::to_string(std::get<std::int64_t>(token)));
    }
    return h;
}

}  // namespace pcpo
