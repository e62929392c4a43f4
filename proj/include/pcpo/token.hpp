#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace pcpo {

/// An opaque token as it appears in the input: either a string piece or an integer id.
/// Tokens are compared by equality only; `1` and `"1"` are different tokens.
using Token = std::variant<std::int64_t, std::string>;

/// Dense per-table identifier used by the matching and distance kernels.
using TokenId = std::uint32_t;

/// Maps opaque tokens to dense ids. Equal tokens always receive the same id.
class TokenTable {
public:
    TokenId intern(const Token& token);
    std::vector<TokenId> intern(std::span<const Token> tokens);

    std::size_t size() const noexcept { return ids_.size(); }

private:
    std::unordered_map<Token, TokenId> ids_;
};

/// Stable 64-bit FNV-1a hash of a token; independent of platform and std::hash.
std::uint64_t stable_hash(const Token& token);

}  // namespace pcpo
