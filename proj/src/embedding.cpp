#include "graf/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace graf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void l2_normalize(std::span<double> v) noexcept {
    double n = 0.0;
    for (double x : v) n += x * x;
    if (n == 0.0) return;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                                    std::to_string(v.size()) + ")");
    }
    const double uu = kernels::dot(u, u);
    const double vv = kernels::dot(v, v);
    if (uu == 0.0 || vv == 0.0) return 0.0;
    const double c = kernels::dot(u, v) / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(c, -1.0, 1.0);
}

HashEncoder::HashEncoder(std::size_t dim, std::uint64_t seed, const text::LemmaTable* lemmas)
    : dim_(dim), seed_(splitmix64(seed)), lemmas_(lemmas) {
    if (dim_ == 0) throw std::invalid_argument("embedding dimension must be at least 1");
}

std::pair<std::size_t, double> HashEncoder::slot(std::string_view token) const noexcept {
    const std::uint64_t h = splitmix64(fnv1a(token) ^ seed_);
    return {static_cast<std::size_t>(h % dim_), (h >> 63) != 0 ? -1.0 : 1.0};
}

Vector HashEncoder::embed(std::string_view s) const {
    Vector v(dim_, 0.0);
    for (const auto& token : text::normalize(s, lemmas_)) {
        auto [idx, sign] = slot(token);
        v[idx] += sign;
    }
    l2_normalize(v);
    return v;
}

TableEncoder::TableEncoder(std::unordered_map<std::string, Vector> table, std::size_t dim, std::uint64_t seed,
                           const text::LemmaTable* lemmas)
    : hash_(dim, seed, lemmas), lemmas_(lemmas) {
    for (auto& [token, vec] : table) {
        if (vec.size() != dim) throw std::invalid_argument("embedding table row for '" + token + "' has wrong dimension");
        table_.emplace(text::to_lower(token), std::move(vec));
    }
}

Vector TableEncoder::embed(std::string_view s) const {
    const auto tokens = text::normalize(s, lemmas_);
    Vector v(dim(), 0.0);
    if (tokens.empty()) return v;
    for (const auto& token : tokens) {
        if (auto it = table_.find(token); it != table_.end()) {
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += it->second[i];
        } else {
            auto [idx, sign] = hash_.slot(token);
            v[idx] += sign;
        }
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (double& x : v) x *= inv;
    l2_normalize(v);
    return v;
}

std::unique_ptr<TableEncoder> load_embedding_table(const std::filesystem::path& path, std::uint64_t seed,
                                                   std::size_t fallback_dim, const text::LemmaTable* lemmas) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding table " + path.string());
    std::unordered_map<std::string, Vector> table;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        auto fail = [&](const std::string& why) {
            return std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw fail("expected 'token<TAB>f1 f2 ...'");
        std::string token(text::trim(std::string_view(line).substr(0, tab)));
        if (token.empty()) throw fail("empty token");
        Vector values;
        const char* p = line.data() + tab + 1;
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p == end) break;
            double x = 0.0;
            auto [next, ec] = std::from_chars(p, end, x);
            if (ec != std::errc{} || !std::isfinite(x)) throw fail("bad number");
            values.push_back(x);
            p = next;
        }
        if (values.empty()) throw fail("no vector components");
        if (dim == 0) {
            dim = values.size();
        } else if (values.size() != dim) {
            throw fail("dimension " + std::to_string(values.size()) + " differs from " + std::to_string(dim));
        }
        table[text::to_lower(token)] = std::move(values);
    }
    if (dim == 0) dim = fallback_dim;
    return std::make_unique<TableEncoder>(std::move(table), dim, seed, lemmas);
}

}  // namespace graf
