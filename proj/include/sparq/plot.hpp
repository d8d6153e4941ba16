#pragma once

#include <cstdint>
#include <string>

#include "sparq/recurrence.hpp"

namespace sparq {

enum class Palette : std::uint8_t { binary, heat };

struct PlotSpec {
    std::uint32_t scale = 1;  // pixels per cell, >= 1
    Palette palette = Palette::binary;
};

// Binary PGM ("P5", maxval 255). Matrix row i is image row i (contagious index
// top to bottom), column j left to right. Binary palette: 0 (black) where a
// point recurs, 255 (white) otherwise. Heat palette maps count c in
// [0, contributor_count] to 255 - floor(255*c / contributor_count).
// Identical inputs produce identical bytes on every platform.
std::string render_plot(const RecurrenceMatrix& m, const PlotSpec& spec);
std::string render_plot(const ExposureAccumulator& acc, const PlotSpec& spec);

void write_file(const std::string& path, std::string_view bytes);

}  // namespace sparq
