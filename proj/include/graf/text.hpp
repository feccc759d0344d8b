#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace graf::text {

using TokenSeq = std::vector<std::string>;

/// Surface form -> lemma lookup. Keys and values are stored lowercased.
class LemmaTable {
public:
    LemmaTable() = default;
    explicit LemmaTable(std::unordered_map<std::string, std::string> entries);

    /// Reads "surface<TAB>lemma" lines (UTF-8). Blank lines and lines
    /// starting with '#' are ignored; anything else malformed throws with
    /// the line number.
    static LemmaTable load(const std::filesystem::path& path);

    const std::string& lookup(const std::string& token) const;
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::unordered_map<std::string, std::string> entries_;
};

/// Lowercase a UTF-8 string (ASCII, Latin-1, Latin Extended-A/B incl. the
/// Romanian comma-below letters, Greek and Cyrillic). Invalid bytes are
/// replaced by U+FFFD.
std::string to_lower(std::string_view utf8);

/// Lowercase and collapse whitespace runs into a single space, trimming
/// both ends. Used as the entity match key.
std::string canonical_key(std::string_view utf8);

/// Trim ASCII/Unicode whitespace from both ends.
std::string_view trim(std::string_view s) noexcept;

/// Lowercase, split on non-alphanumeric code points, then map each token
/// through the lemma table when one is given.
TokenSeq normalize(std::string_view utf8, const LemmaTable* lemmas = nullptr);

std::string join(const TokenSeq& tokens, char sep = ' ');

namespace utf8 {
// Decode one code point starting at s[i]; advances i. Returns U+FFFD on
// malformed input (consuming one byte).
char32_t decode(std::string_view s, std::size_t& i) noexcept;
void append(std::string& out, char32_t cp);
bool is_word_char(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
char32_t to_lower(char32_t cp) noexcept;
}  // namespace utf8

}  // namespace graf::text
