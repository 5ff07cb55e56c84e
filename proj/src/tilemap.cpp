#include "pod/tilemap.h"

#include <stdexcept>

namespace pod {

TileAlphabet::TileAlphabet(std::string game_id, std::vector<TileDef> tiles)
    : game_id_(std::move(game_id)), tiles_(std::move(tiles)) {
    if (tiles_.size() < 2) {
        throw std::invalid_argument("alphabet '" + game_id_ + "' needs at least 2 tiles");
    }
    for (int& x : char_to_index_) x = -1;
    for (size_t i = 0; i < tiles_.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(tiles_[i].ch);
        if (char_to_index_[c] != -1) {
            throw std::invalid_argument("alphabet '" + game_id_ + "' has duplicate char '" +
                                        std::string(1, tiles_[i].ch) + "'");
        }
        char_to_index_[c] = static_cast<int>(i);
    }
}

int TileAlphabet::index_of(char c) const {
    return char_to_index_[static_cast<unsigned char>(c)];
}

LevelGrid parse_level(const std::string& text, const TileAlphabet& alphabet) {
    std::vector<std::string> rows;
    std::string row;
    for (char c : text) {
        if (c == '\n') {
            rows.push_back(row);
            row.clear();
        } else {
            row.push_back(c);
        }
    }
    if (!row.empty()) rows.push_back(row);  // trailing newline optional
    if (rows.empty()) throw std::invalid_argument("empty level text");

    LevelGrid grid(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    if (grid.width == 0) throw std::invalid_argument("empty level row 0");
    for (int r = 0; r < grid.height; ++r) {
        if (static_cast<int>(rows[r].size()) != grid.width) {
            throw std::invalid_argument("ragged row " + std::to_string(r) + ": expected width " +
                                        std::to_string(grid.width) + ", got " +
                                        std::to_string(rows[r].size()));
        }
        for (int c = 0; c < grid.width; ++c) {
            int idx = alphabet.index_of(rows[r][c]);
            if (idx < 0) {
                throw std::invalid_argument("unknown char '" + std::string(1, rows[r][c]) +
                                            "' at (" + std::to_string(r) + "," +
                                            std::to_string(c) + ")");
            }
            grid.set(r, c, static_cast<uint8_t>(idx));
        }
    }
    return grid;
}

std::string serialize_level(const LevelGrid& level, const TileAlphabet& alphabet) {
    std::string out;
    out.reserve(level.cell_count() + level.height);
    for (int r = 0; r < level.height; ++r) {
        if (r > 0) out.push_back('\n');
        for (int c = 0; c < level.width; ++c) {
            out.push_back(alphabet.char_of(level.at(r, c)));
        }
    }
    return out;
}

int hamming_distance(const LevelGrid& a, const LevelGrid& b) {
    if (a.height != b.height || a.width != b.width) {
        throw std::invalid_argument("hamming_distance: dimension mismatch");
    }
    int d = 0;
    for (size_t i = 0; i < a.cells.size(); ++i) {
        d += a.cells[i] != b.cells[i];
    }
    return d;
}

double normalized_hamming(const LevelGrid& a, const LevelGrid& b) {
    return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.cell_count());
}

}  // namespace pod
