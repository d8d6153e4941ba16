#include "sparq/plot.hpp"

#include <fstream>

#include "sparq/errors.hpp"

namespace sparq {
namespace {

void validate_spec(const PlotSpec& spec) {
    if (spec.scale < 1) {
        throw Error("plot scale must be >= 1");
    }
}

std::string pgm_header(std::uint32_t side) {
    return "P5\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
}

// Renders via a per-cell grey lookup, expanding each cell to scale x scale.
template <typename GreyAt>
std::string render(std::uint32_t n, const PlotSpec& spec, GreyAt grey_at) {
    validate_spec(spec);
    const std::uint64_t side = static_cast<std::uint64_t>(n) * spec.scale;
    std::string out = pgm_header(static_cast<std::uint32_t>(side));
    out.reserve(out.size() + side * side);
    std::string row_pixels(side, '\0');
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            const char grey = static_cast<char>(grey_at(i, j));
            for (std::uint32_t s = 0; s < spec.scale; ++s) {
                row_pixels[static_cast<std::size_t>(j) * spec.scale + s] = grey;
            }
        }
        for (std::uint32_t s = 0; s < spec.scale; ++s) out += row_pixels;
    }
    return out;
}

}  // namespace

std::string render_plot(const RecurrenceMatrix& m, const PlotSpec& spec) {
    // Both palettes coincide on a binary matrix (one contributor saturates).
    return render(m.size(), spec, [&](std::uint32_t i, std::uint32_t j) -> std::uint8_t {
        return m.at(i, j) ? 0 : 255;
    });
}

std::string render_plot(const ExposureAccumulator& acc, const PlotSpec& spec) {
    const std::uint32_t contributors = acc.contributor_count();
    return render(acc.size(), spec, [&](std::uint32_t i, std::uint32_t j) -> std::uint8_t {
        const std::uint32_t c = j >= i ? acc.at(i, j) : 0;
        if (spec.palette == Palette::binary) {
            return c > 0 ? 0 : 255;
        }
        if (contributors == 0) return 255;
        return static_cast<std::uint8_t>(
            255 - (255ull * c) / contributors);
    });
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write to " + path + " failed");
    }
}

}  // namespace sparq
