#pragma once

#include <filesystem>

#include "hector/domain.hpp"

namespace hector {

/// Writes the frame as an RGB PNG. Throws std::runtime_error on failure.
void write_png(const std::filesystem::path& path, const Frame& frame);

/// Loads any still image OpenCV understands, converted to RGB8.
Frame read_image(const std::filesystem::path& path, std::uint64_t index = 0,
                 std::int64_t timestamp_ms = 0);

}  // namespace hector
