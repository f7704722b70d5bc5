#include "editfactory/image_probe.hpp"

#include <zlib.h>

#include <cstring>

namespace editfactory::corpus {
namespace {

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}
std::uint32_t be16(const std::uint8_t* p) { return (std::uint32_t(p[0]) << 8) | p[1]; }
std::uint32_t le16(const std::uint8_t* p) { return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8); }
std::uint32_t le24(const std::uint8_t* p) { return le16(p) | (std::uint32_t(p[2]) << 16); }
std::uint32_t le32(const std::uint8_t* p) { return le16(p) | (le16(p + 2) << 16); }

std::optional<ImageInfo> probe_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (b.size() < 8 || std::memcmp(b.data(), kSig, 8) != 0) return std::nullopt;
  ImageInfo info{"png", "image/png"};
  std::size_t pos = 8;
  bool saw_ihdr = false, saw_idat = false;
  while (pos + 12 <= b.size()) {
    const std::uint32_t len = be32(&b[pos]);
    if (len > b.size() - pos - 12) return std::nullopt;
    const std::uint8_t* type = &b[pos + 4];
    const std::uint32_t crc = be32(&b[pos + 8 + len]);
    if (crc32(0, type, len + 4) != crc) return std::nullopt;
    if (!saw_ihdr) {
      if (std::memcmp(type, "IHDR", 4) != 0 || len != 13) return std::nullopt;
      info.width = be32(&b[pos + 8]);
      info.height = be32(&b[pos + 12]);
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      saw_idat = true;
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      if (!saw_idat || info.width == 0 || info.height == 0) return std::nullopt;
      return info;
    }
    pos += 12 + len;
  }
  return std::nullopt;
}

std::optional<ImageInfo> probe_jpeg(std::span<const std::uint8_t> b) {
  if (b.size() < 4 || b[0] != 0xFF || b[1] != 0xD8) return std::nullopt;
  ImageInfo info{"jpeg", "image/jpeg"};
  std::size_t pos = 2;
  while (pos + 4 <= b.size()) {
    if (b[pos] != 0xFF) return std::nullopt;
    const std::uint8_t marker = b[pos + 1];
    if (marker == 0xFF) {
      ++pos;
      continue;
    }
    const std::uint32_t len = be16(&b[pos + 2]);
    if (len < 2 || pos + 2 + len > b.size()) return std::nullopt;
    const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
    if (sof) {
      if (len < 7) return std::nullopt;
      info.height = be16(&b[pos + 5]);
      info.width = be16(&b[pos + 7]);
      if (info.width == 0 || info.height == 0) return std::nullopt;
      // The entropy-coded scan follows; require the end-of-image marker.
      if (b.size() >= 2 && b[b.size() - 2] == 0xFF && b[b.size() - 1] == 0xD9) return info;
      return std::nullopt;
    }
    pos += 2 + len;
  }
  return std::nullopt;
}

std::optional<ImageInfo> probe_gif(std::span<const std::uint8_t> b) {
  if (b.size() < 14) return std::nullopt;
  if (std::memcmp(b.data(), "GIF87a", 6) != 0 && std::memcmp(b.data(), "GIF89a", 6) != 0) return std::nullopt;
  ImageInfo info{"gif", "image/gif", le16(&b[6]), le16(&b[8])};
  if (info.width == 0 || info.height == 0 || b.back() != 0x3B) return std::nullopt;
  return info;
}

std::optional<ImageInfo> probe_bmp(std::span<const std::uint8_t> b) {
  if (b.size() < 26 || b[0] != 'B' || b[1] != 'M') return std::nullopt;
  if (le32(&b[2]) > b.size()) return std::nullopt;
  const auto w = static_cast<std::int32_t>(le32(&b[18]));
  const auto h = static_cast<std::int32_t>(le32(&b[22]));
  if (w <= 0 || h == 0) return std::nullopt;
  return ImageInfo{"bmp", "image/bmp", static_cast<std::uint32_t>(w),
                   static_cast<std::uint32_t>(h < 0 ? -h : h)};
}

std::optional<ImageInfo> probe_webp(std::span<const std::uint8_t> b) {
  if (b.size() < 30 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(&b[8], "WEBP", 4) != 0) {
    return std::nullopt;
  }
  if (le32(&b[4]) + 8 > b.size()) return std::nullopt;
  ImageInfo info{"webp", "image/webp"};
  if (std::memcmp(&b[12], "VP8X", 4) == 0) {
    info.width = le24(&b[24]) + 1;
    info.height = le24(&b[27]) + 1;
  } else if (std::memcmp(&b[12], "VP8L", 4) == 0) {
    if (b[20] != 0x2F) return std::nullopt;
    const std::uint32_t bits = le32(&b[21]);
    info.width = (bits & 0x3FFF) + 1;
    info.height = ((bits >> 14) & 0x3FFF) + 1;
  } else if (std::memcmp(&b[12], "VP8 ", 4) == 0) {
    if (b[23] != 0x9D || b[24] != 0x01 || b[25] != 0x2A) return std::nullopt;
    info.width = le16(&b[26]) & 0x3FFF;
    info.height = le16(&b[28]) & 0x3FFF;
  } else {
    return std::nullopt;
  }
  if (info.width == 0 || info.height == 0) return std::nullopt;
  return info;
}

}  // namespace

std::optional<ImageInfo> probe_image(std::span<const std::uint8_t> bytes) {
  for (auto probe : {probe_png, probe_jpeg, probe_gif, probe_webp, probe_bmp}) {
    if (auto info = probe(bytes)) return info;
  }
  return std::nullopt;
}

}  // namespace editfactory::corpus
