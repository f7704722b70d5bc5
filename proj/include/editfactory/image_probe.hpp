#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace editfactory::corpus {

struct ImageInfo {
  std::string format;  // "png", "jpeg", "gif", "webp", "bmp"
  std::string mime;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

// Header-level decode: recognizes the container, walks to the chunk/segment
// holding the dimensions and rejects truncated or zero-sized images.
std::optional<ImageInfo> probe_image(std::span<const std::uint8_t> bytes);

}  // namespace editfactory::corpus
