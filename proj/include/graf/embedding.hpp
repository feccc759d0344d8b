#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "graf/matrix.hpp"
#include "graf/text.hpp"

namespace graf {

/// Text -> fixed-length vector. Implementations are immutable after
/// construction and safe to share across threads.
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual std::size_t dim() const noexcept = 0;
    virtual Vector embed(std::string_view text) const = 0;
};

/// Signed feature hashing: each normalized token picks one coordinate and a
/// sign from a seeded 64-bit hash; the sum is L2-normalized. Text without
/// tokens maps to the zero vector.
class HashEncoder final : public Encoder {
public:
    HashEncoder(std::size_t dim, std::uint64_t seed, const text::LemmaTable* lemmas = nullptr);

    std::size_t dim() const noexcept override { return dim_; }
    Vector embed(std::string_view text) const override;

    /// Coordinate and sign assigned to one token.
    std::pair<std::size_t, double> slot(std::string_view token) const noexcept;

private:
    std::size_t dim_;
    std::uint64_t seed_;
    const text::LemmaTable* lemmas_;
};

/// Token vectors from a table; tokens missing from it use the hash slot.
/// embed(text) is the L2-normalized mean of the per-token vectors.
class TableEncoder final : public Encoder {
public:
    TableEncoder(std::unordered_map<std::string, Vector> table, std::size_t dim, std::uint64_t seed,
                 const text::LemmaTable* lemmas = nullptr);

    std::size_t dim() const noexcept override { return hash_.dim(); }
    Vector embed(std::string_view text) const override;
    std::size_t size() const noexcept { return table_.size(); }

private:
    std::unordered_map<std::string, Vector> table_;
    HashEncoder hash_;
    const text::LemmaTable* lemmas_;
};

/// Reads "token<TAB>f1 f2 ... fd" lines. All rows must share d; an empty
/// file needs `fallback_dim` to fix the dimension.
std::unique_ptr<TableEncoder> load_embedding_table(const std::filesystem::path& path, std::uint64_t seed,
                                                   std::size_t fallback_dim, const text::LemmaTable* lemmas = nullptr);

/// dot(u, v) / (|u| |v|), 0 when either norm is 0, clamped to [-1, 1].
/// Throws std::invalid_argument on a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// In-place L2 normalization; leaves a zero vector untouched.
void l2_normalize(std::span<double> v) noexcept;

}  // namespace graf
