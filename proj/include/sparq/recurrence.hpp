#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "sparq/grid.hpp"

namespace sparq {

struct SymbolSeries {
    std::vector<std::int64_t> symbols;

    std::size_t size() const { return symbols.size(); }
};

// Parses whitespace-separated integer symbols; '#' starts a comment to end of
// line. Throws MalformedRecord / EmptyInput.
SymbolSeries parse_symbols(std::string_view text);

// N x N binary matrix, one bit per cell, rows packed into 64-bit words
// (bit j of row i = bit j%64 of word j/64). upper_triangle keeps only j >= i;
// bits below the diagonal are zero by construction.
class RecurrenceMatrix {
public:
    enum class Shape : std::uint8_t { full = 0, upper_triangle = 1 };

    RecurrenceMatrix(std::uint32_t n, Shape shape);

    std::uint32_t size() const { return n_; }
    Shape shape() const { return shape_; }
    std::size_t words_per_row() const { return words_per_row_; }

    bool at(std::uint32_t i, std::uint32_t j) const {
        return (words_[static_cast<std::size_t>(i) * words_per_row_ + (j >> 6)] >>
                (j & 63)) & 1u;
    }
    void set(std::uint32_t i, std::uint32_t j, bool value = true);

    std::span<const std::uint64_t> row_words(std::uint32_t i) const {
        return {words_.data() + static_cast<std::size_t>(i) * words_per_row_,
                words_per_row_};
    }
    std::span<std::uint64_t> row_words(std::uint32_t i) {
        return {words_.data() + static_cast<std::size_t>(i) * words_per_row_,
                words_per_row_};
    }

    // Popcount over all stored bits.
    std::uint64_t count_ones() const;
    std::size_t memory_bytes() const { return words_.size() * sizeof(std::uint64_t); }

    bool operator==(const RecurrenceMatrix&) const = default;

private:
    std::uint32_t n_;
    Shape shape_;
    std::size_t words_per_row_;
    std::vector<std::uint64_t> words_;
};

// R(i,j) = 1 iff s[i] == s[j]. Symmetric with unit diagonal.
RecurrenceMatrix self_recurrence(const SymbolSeries& s);

// R(i,j) = 1 iff a[i] == b[j]. Throws LengthMismatch.
RecurrenceMatrix cross_recurrence(const SymbolSeries& a, const SymbolSeries& b);

// Per-dimension spatial cross-recurrence. Row index i walks the contagious
// series, column index j the healthy series; gap windows never recur.
// Throws LengthMismatch or GridMisaligned.
struct DimensionMatrices {
    RecurrenceMatrix x;
    RecurrenceMatrix y;
};
DimensionMatrices spatial_cross_recurrence(const GridSeries& healthy,
                                           const GridSeries& contagious);

// Elementwise product of the two dimension matrices, upper triangle only
// (j >= i, central diagonal kept). Throws SizeMismatch.
RecurrenceMatrix combine_dimensions(const RecurrenceMatrix& rx,
                                    const RecurrenceMatrix& ry);

// Per-cell sum of upper-triangle matrices across contagious agents.
class ExposureAccumulator {
public:
    explicit ExposureAccumulator(std::uint32_t n);

    std::uint32_t size() const { return n_; }
    std::uint32_t contributor_count() const { return contributors_; }

    std::uint32_t at(std::uint32_t i, std::uint32_t j) const {
        return counts_[index(i, j)];
    }

    // Adds one upper-triangle matrix of the same size. Throws SizeMismatch.
    void add(const RecurrenceMatrix& m);
    // Associative merge of two accumulators. Throws SizeMismatch.
    void merge(const ExposureAccumulator& other);

    // Binary matrix of cells with count >= min_count.
    RecurrenceMatrix threshold(std::uint32_t min_count = 1) const;

    std::span<const std::uint32_t> raw_counts() const { return counts_; }
    std::uint32_t& count_slot(std::uint32_t i, std::uint32_t j) {
        return counts_[index(i, j)];
    }
    void set_contributor_count(std::uint32_t c) { contributors_ = c; }

    bool operator==(const ExposureAccumulator&) const = default;

private:
    std::size_t index(std::uint32_t i, std::uint32_t j) const {
        // Row-major upper triangle: row i holds n-i entries starting at j=i.
        const auto bi = static_cast<std::size_t>(i);
        return bi * n_ - bi * (bi - 1) / 2 + (j - i);
    }

    std::uint32_t n_;
    std::uint32_t contributors_ = 0;
    std::vector<std::uint32_t> counts_;
};

ExposureAccumulator accumulate(std::span<const RecurrenceMatrix> matrices);

// --- "SPRQ" binary container -------------------------------------------------
// magic "SPRQ", version u8 (=1), shape u8 (0 full, 1 upper_triangle,
// 2 accumulator), n u32 LE, payload. Matrices: n rows of ceil(n/8) bytes,
// LSB-first within each byte. Accumulator: contributor_count u32 LE followed
// by row-major upper-triangle counts as u32 LE.

void write_container(std::ostream& out, const RecurrenceMatrix& m);
void write_container(std::ostream& out, const ExposureAccumulator& acc);

enum class ContainerKind : std::uint8_t { matrix, accumulator };
ContainerKind peek_container_kind(std::istream& in);
RecurrenceMatrix read_matrix_container(std::istream& in);
ExposureAccumulator read_accumulator_container(std::istream& in);

}  // namespace sparq
