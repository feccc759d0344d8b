#include "graf/text.hpp"

#include <fstream>
#include <stdexcept>

namespace graf::text {

namespace utf8 {

char32_t decode(std::string_view s, std::size_t& i) noexcept {
    constexpr char32_t bad = 0xFFFD;
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return bad;
    }
    if (i + len > s.size()) {
        ++i;
        return bad;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return bad;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // overlong forms and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return bad;
    }
    i += len;
    return cp;
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char32_t cp) noexcept {
    return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
           cp == 0x3000;
}

bool is_word_char(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
    if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
    if (cp >= 0x250 && cp <= 0x2AF) return true;   // IPA
    if (cp >= 0x370 && cp <= 0x3FF) return cp != 0x37E && cp != 0x387;
    if (cp >= 0x400 && cp <= 0x52F) return !(cp >= 0x482 && cp <= 0x489);
    if (cp >= 0x1E00 && cp <= 0x1FFF) return true;  // Latin Extended Additional, Greek Extended
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp >= 0xFE30 && cp <= 0xFE6F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp == 0xFFFD) return false;
    return cp >= 0x530;  // remaining scripts treated as letters
}

char32_t to_lower(char32_t cp) noexcept {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x137) return cp | 1;  // even = upper
    if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return cp | 1;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
    if (cp >= 0x218 && cp <= 0x21B) return cp | 1;  // Ș ș Ț ț
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

}  // namespace utf8

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) utf8::append(out, utf8::to_lower(utf8::decode(s, i)));
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end) {
        std::size_t j = begin;
        if (!utf8::is_space(utf8::decode(s, j))) break;
        begin = j;
    }
    // walk back over trailing whitespace one code point at a time
    while (end > begin) {
        std::size_t start = end - 1;
        while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
        std::size_t j = start;
        if (!utf8::is_space(utf8::decode(s, j))) break;
        end = start;
    }
    return s.substr(begin, end - begin);
}

std::string canonical_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < s.size();) {
        char32_t cp = utf8::decode(s, i);
        if (utf8::is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        utf8::append(out, utf8::to_lower(cp));
    }
    return out;
}

TokenSeq normalize(std::string_view s, const LemmaTable* lemmas) {
    TokenSeq tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (lemmas != nullptr && !lemmas->empty()) {
            tokens.push_back(lemmas->lookup(current));
        } else {
            tokens.push_back(std::move(current));
        }
        current.clear();
    };
    for (std::size_t i = 0; i < s.size();) {
        char32_t cp = utf8::decode(s, i);
        if (utf8::is_word_char(cp)) {
            utf8::append(current, utf8::to_lower(cp));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string join(const TokenSeq& tokens, char sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(sep);
        out += tokens[i];
    }
    return out;
}

LemmaTable::LemmaTable(std::unordered_map<std::string, std::string> entries) {
    for (auto& [surface, lemma] : entries) entries_.emplace(to_lower(surface), to_lower(lemma));
}

const std::string& LemmaTable::lookup(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? token : it->second;
}

LemmaTable LemmaTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lemma table " + path.string());
    std::unordered_map<std::string, std::string> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        auto fail = [&](const char* why) {
            return std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        if (tab == std::string::npos) throw fail("expected 'surface<TAB>lemma'");
        std::string surface(trim(std::string_view(line).substr(0, tab)));
        std::string lemma(trim(std::string_view(line).substr(tab + 1)));
        if (surface.empty() || lemma.empty()) throw fail("empty surface or lemma");
        // lemmas become tokens, so they must be a single normalized token
        auto surface_tokens = normalize(surface);
        auto lemma_tokens = normalize(lemma);
        if (surface_tokens.size() != 1 || lemma_tokens.size() != 1) throw fail("surface and lemma must be single tokens");
        entries.emplace(std::move(surface_tokens.front()), std::move(lemma_tokens.front()));
    }
    return LemmaTable(std::move(entries));
}

}  // namespace graf::text
