#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pod {

struct TileDef {
    std::string name;
    char ch;
};

// Ordered tile set for one game. Tile indices are 0..size()-1; the border
// sentinel (index size()) is a pseudo-tile used only in observation encoding
// and never appears inside a grid.
class TileAlphabet {
public:
    TileAlphabet(std::string game_id, std::vector<TileDef> tiles);

    const std::string& game_id() const { return game_id_; }
    int size() const { return static_cast<int>(tiles_.size()); }
    int border_sentinel() const { return size(); }

    const TileDef& tile(int index) const { return tiles_[static_cast<size_t>(index)]; }
    char char_of(int index) const { return tiles_[static_cast<size_t>(index)].ch; }
    // -1 when the char is not in the alphabet.
    int index_of(char c) const;

private:
    std::string game_id_;
    std::vector<TileDef> tiles_;
    int char_to_index_[256];
};

// Rectangular tile-index grid, row-major, (row, col) addressed from the
// top-left (0,0).
struct LevelGrid {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> cells;

    LevelGrid() = default;
    LevelGrid(int h, int w, uint8_t fill = 0)
        : height(h), width(w), cells(static_cast<size_t>(h) * static_cast<size_t>(w), fill) {}

    uint8_t at(int row, int col) const {
        return cells[static_cast<size_t>(row) * width + col];
    }
    void set(int row, int col, uint8_t v) {
        cells[static_cast<size_t>(row) * width + col] = v;
    }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }
    size_t cell_count() const { return cells.size(); }

    bool operator==(const LevelGrid&) const = default;
};

// Parses newline-separated rows of one char per tile. Throws
// std::invalid_argument on ragged rows or chars outside the alphabet,
// naming the offending row/col.
LevelGrid parse_level(const std::string& text, const TileAlphabet& alphabet);

// Inverse of parse_level: rows joined with '\n', no trailing newline.
std::string serialize_level(const LevelGrid& level, const TileAlphabet& alphabet);

// Number of differing cells. Grids must have identical dimensions.
int hamming_distance(const LevelGrid& a, const LevelGrid& b);

// hamming_distance / cell count, in [0, 1].
double normalized_hamming(const LevelGrid& a, const LevelGrid& b);

}  // namespace pod
