#include "sparq/recurrence.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "sparq/errors.hpp"

namespace sparq {
namespace {

constexpr std::uint32_t kMaxContainerN = 1u << 15;

void require_u32_size(std::size_t n) {
    if (n == 0) {
        throw EmptyInput("series is empty");
    }
    if (n > kMaxContainerN) {
        throw SizeMismatch("series of length " + std::to_string(n) +
                           " exceeds the supported maximum " +
                           std::to_string(kMaxContainerN));
    }
}

// Shared core of the equality-based constructions: one bitmask per distinct
// column symbol, then whole-word row copies.
RecurrenceMatrix equality_matrix(std::span<const std::int64_t> row_symbols,
                                 std::span<const std::uint8_t> row_gaps,
                                 std::span<const std::int64_t> col_symbols,
                                 std::span<const std::uint8_t> col_gaps) {
    const auto n = static_cast<std::uint32_t>(row_symbols.size());
    RecurrenceMatrix m(n, RecurrenceMatrix::Shape::full);
    const std::size_t words = m.words_per_row();

    std::unordered_map<std::int64_t, std::vector<std::uint64_t>> column_masks;
    for (std::uint32_t j = 0; j < n; ++j) {
        if (!col_gaps.empty() && col_gaps[j]) continue;
        auto [it, inserted] = column_masks.try_emplace(col_symbols[j]);
        if (inserted) it->second.assign(words, 0);
        it->second[j >> 6] |= std::uint64_t{1} << (j & 63);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!row_gaps.empty() && row_gaps[i]) continue;
        const auto it = column_masks.find(row_symbols[i]);
        if (it == column_masks.end()) continue;
        auto row = m.row_words(i);
        std::copy(it->second.begin(), it->second.end(), row.begin());
    }
    return m;
}

}  // namespace

SymbolSeries parse_symbols(std::string_view text) {
    SymbolSeries out;
    std::size_t line_no = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line_no;
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && text[end] != ' ' && text[end] != '\t' &&
               text[end] != '\r' && text[end] != '\n' && text[end] != '#') {
            ++end;
        }
        std::int64_t value = 0;
        const char* first = text.data() + i;
        const char* last = text.data() + end;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            throw MalformedRecord(line_no, "'" + std::string(text.substr(i, end - i)) +
                                               "' is not an integer symbol");
        }
        out.symbols.push_back(value);
        i = end;
    }
    if (out.symbols.empty()) {
        throw EmptyInput();
    }
    return out;
}

RecurrenceMatrix::RecurrenceMatrix(std::uint32_t n, Shape shape)
    : n_(n),
      shape_(shape),
      words_per_row_((static_cast<std::size_t>(n) + 63) / 64),
      words_(static_cast<std::size_t>(n) * words_per_row_, 0) {}

void RecurrenceMatrix::set(std::uint32_t i, std::uint32_t j, bool value) {
    if (i >= n_ || j >= n_) {
        throw SizeMismatch("matrix index out of range");
    }
    if (shape_ == Shape::upper_triangle && i > j) {
        throw SizeMismatch("cannot write below the diagonal of an upper-triangle matrix");
    }
    auto& word = words_[static_cast<std::size_t>(i) * words_per_row_ + (j >> 6)];
    const std::uint64_t bit = std::uint64_t{1} << (j & 63);
    if (value) {
        word |= bit;
    } else {
        word &= ~bit;
    }
}

std::uint64_t RecurrenceMatrix::count_ones() const {
    std::uint64_t total = 0;
    for (const std::uint64_t w : words_) total += std::popcount(w);
    return total;
}

RecurrenceMatrix self_recurrence(const SymbolSeries& s) {
    require_u32_size(s.size());
    return equality_matrix(s.symbols, {}, s.symbols, {});
}

RecurrenceMatrix cross_recurrence(const SymbolSeries& a, const SymbolSeries& b) {
    require_u32_size(a.size());
    if (a.size() != b.size()) {
        throw LengthMismatch("series lengths differ: " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
    }
    return equality_matrix(a.symbols, {}, b.symbols, {});
}

DimensionMatrices spatial_cross_recurrence(const GridSeries& healthy,
                                           const GridSeries& contagious) {
    require_u32_size(contagious.size());
    if (healthy.size() != contagious.size()) {
        throw LengthMismatch("grid series lengths differ: " +
                             std::to_string(contagious.size()) + " vs " +
                             std::to_string(healthy.size()));
    }
    if (healthy.start_index != contagious.start_index) {
        throw GridMisaligned("series start at window " +
                             std::to_string(contagious.start_index) + " vs " +
                             std::to_string(healthy.start_index));
    }
    return {equality_matrix(contagious.cells_x, contagious.gap_mask,
                            healthy.cells_x, healthy.gap_mask),
            equality_matrix(contagious.cells_y, contagious.gap_mask,
                            healthy.cells_y, healthy.gap_mask)};
}

RecurrenceMatrix combine_dimensions(const RecurrenceMatrix& rx,
                                    const RecurrenceMatrix& ry) {
    if (rx.size() != ry.size()) {
        throw SizeMismatch("dimension matrices differ in size: " +
                           std::to_string(rx.size()) + " vs " +
                           std::to_string(ry.size()));
    }
    const std::uint32_t n = rx.size();
    RecurrenceMatrix out(n, RecurrenceMatrix::Shape::upper_triangle);
    const std::size_t words = out.words_per_row();
    for (std::uint32_t i = 0; i < n; ++i) {
        auto dst = out.row_words(i);
        const auto x = rx.row_words(i);
        const auto y = ry.row_words(i);
        const std::size_t first_word = i >> 6;
        for (std::size_t w = first_word; w < words; ++w) {
            dst[w] = x[w] & y[w];
        }
        dst[first_word] &= ~std::uint64_t{0} << (i & 63);
    }
    return out;
}

ExposureAccumulator::ExposureAccumulator(std::uint32_t n)
    : n_(n),
      counts_(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2, 0) {
    if (n == 0) {
        throw SizeMismatch("accumulator size must be positive");
    }
}

void ExposureAccumulator::add(const RecurrenceMatrix& m) {
    if (m.size() != n_) {
        throw SizeMismatch("matrix of size " + std::to_string(m.size()) +
                           " does not fit accumulator of size " + std::to_string(n_));
    }
    if (m.shape() != RecurrenceMatrix::Shape::upper_triangle) {
        throw SizeMismatch("accumulator only accepts upper-triangle matrices");
    }
    for (std::uint32_t i = 0; i < n_; ++i) {
        const auto row = m.row_words(i);
        for (std::size_t w = 0; w < row.size(); ++w) {
            std::uint64_t bits = row[w];
            while (bits) {
                const auto j = static_cast<std::uint32_t>(w * 64 +
                                   static_cast<std::size_t>(std::countr_zero(bits)));
                ++counts_[index(i, j)];
                bits &= bits - 1;
            }
        }
    }
    ++contributors_;
}

void ExposureAccumulator::merge(const ExposureAccumulator& other) {
    if (other.n_ != n_) {
        throw SizeMismatch("cannot merge accumulators of sizes " + std::to_string(n_) +
                           " and " + std::to_string(other.n_));
    }
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    contributors_ += other.contributors_;
}

RecurrenceMatrix ExposureAccumulator::threshold(std::uint32_t min_count) const {
    RecurrenceMatrix out(n_, RecurrenceMatrix::Shape::upper_triangle);
    for (std::uint32_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = i; j < n_; ++j) {
            if (counts_[index(i, j)] >= min_count) {
                out.set(i, j);
            }
        }
    }
    return out;
}

ExposureAccumulator accumulate(std::span<const RecurrenceMatrix> matrices) {
    if (matrices.empty()) {
        throw EmptyList();
    }
    ExposureAccumulator acc(matrices.front().size());
    for (const auto& m : matrices) acc.add(m);
    return acc;
}

// --- container ---------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'P', 'R', 'Q'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kShapeAccumulator = 2;

void put_u32le(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xff),
                           static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff),
                           static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw MalformedContainer("container truncated");
    }
    return static_cast<std::uint32_t>(bytes[0]) |
           (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

struct ContainerHeader {
    std::uint8_t shape = 0;
    std::uint32_t n = 0;
};

void write_header(std::ostream& out, std::uint8_t shape, std::uint32_t n) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    out.put(static_cast<char>(shape));
    put_u32le(out, n);
}

ContainerHeader read_header(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw MalformedContainer("bad magic bytes");
    }
    const int version = in.get();
    if (version != kVersion) {
        throw MalformedContainer("unsupported container version " +
                                 std::to_string(version));
    }
    const int shape = in.get();
    if (shape < 0 || shape > kShapeAccumulator) {
        throw MalformedContainer("unknown shape byte " + std::to_string(shape));
    }
    ContainerHeader h;
    h.shape = static_cast<std::uint8_t>(shape);
    h.n = get_u32le(in);
    if (h.n == 0 || h.n > kMaxContainerN) {
        throw MalformedContainer("container size " + std::to_string(h.n) +
                                 " out of range");
    }
    return h;
}

}  // namespace

void write_container(std::ostream& out, const RecurrenceMatrix& m) {
    write_header(out, static_cast<std::uint8_t>(m.shape()), m.size());
    const std::size_t bytes_per_row = (m.size() + 7) / 8;
    for (std::uint32_t i = 0; i < m.size(); ++i) {
        const auto row = m.row_words(i);
        for (std::size_t b = 0; b < bytes_per_row; ++b) {
            out.put(static_cast<char>((row[b >> 3] >> ((b & 7) * 8)) & 0xff));
        }
    }
    if (!out) {
        throw Error("container write failed");
    }
}

void write_container(std::ostream& out, const ExposureAccumulator& acc) {
    write_header(out, kShapeAccumulator, acc.size());
    put_u32le(out, acc.contributor_count());
    for (const std::uint32_t c : acc.raw_counts()) put_u32le(out, c);
    if (!out) {
        throw Error("container write failed");
    }
}

ContainerKind peek_container_kind(std::istream& in) {
    const auto pos = in.tellg();
    const ContainerHeader h = read_header(in);
    in.seekg(pos);
    return h.shape == kShapeAccumulator ? ContainerKind::accumulator
                                        : ContainerKind::matrix;
}

RecurrenceMatrix read_matrix_container(std::istream& in) {
    const ContainerHeader h = read_header(in);
    if (h.shape == kShapeAccumulator) {
        throw MalformedContainer("container holds an accumulator, not a matrix");
    }
    RecurrenceMatrix m(h.n, static_cast<RecurrenceMatrix::Shape>(h.shape));
    const std::size_t bytes_per_row = (h.n + 7) / 8;
    std::vector<char> buf(bytes_per_row);
    for (std::uint32_t i = 0; i < h.n; ++i) {
        if (!in.read(buf.data(), static_cast<std::streamsize>(bytes_per_row))) {
            throw MalformedContainer("container truncated in row " + std::to_string(i));
        }
        auto row = m.row_words(i);
        for (std::size_t b = 0; b < bytes_per_row; ++b) {
            row[b >> 3] |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[b]))
                           << ((b & 7) * 8);
        }
        // Padding bits past n and, for upper-triangle shapes, bits below the
        // diagonal must be zero.
        if (h.n & 63) {
            const std::uint64_t tail_mask = ~std::uint64_t{0} << (h.n & 63);
            if (row[m.words_per_row() - 1] & tail_mask) {
                throw MalformedContainer("nonzero padding bits in row " +
                                         std::to_string(i));
            }
        }
        if (m.shape() == RecurrenceMatrix::Shape::upper_triangle && i > 0) {
            const std::size_t last_word = static_cast<std::size_t>(i) >> 6;
            for (std::size_t w = 0; w < last_word; ++w) {
                if (row[w]) throw MalformedContainer("bits below the diagonal");
            }
            const std::uint64_t below = ~(~std::uint64_t{0} << (i & 63));
            if ((i & 63) && (row[last_word] & below)) {
                throw MalformedContainer("bits below the diagonal");
            }
        }
    }
    return m;
}

ExposureAccumulator read_accumulator_container(std::istream& in) {
    const ContainerHeader h = read_header(in);
    if (h.shape != kShapeAccumulator) {
        throw MalformedContainer("container holds a matrix, not an accumulator");
    }
    ExposureAccumulator acc(h.n);
    acc.set_contributor_count(get_u32le(in));
    for (std::uint32_t i = 0; i < h.n; ++i) {
        for (std::uint32_t j = i; j < h.n; ++j) {
            const std::uint32_t c = get_u32le(in);
            if (c > acc.contributor_count()) {
                throw MalformedContainer("count exceeds contributor_count");
            }
            acc.count_slot(i, j) = c;
        }
    }
    return acc;
}

}  // namespace sparq
