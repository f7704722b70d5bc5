#pragma once

#include <vector>

#include "editfactory/image_probe.hpp"
#include "editfactory/providers.hpp"
#include "editfactory/store.hpp"

namespace editfactory::detail {

// [source, target] inputs for a provider request, bytes read from the object
// store and the MIME type taken from the image header.
inline std::vector<providers::ImageInput> pair_images(const corpus::Store& store, const corpus::ImagePair& pair) {
  std::vector<providers::ImageInput> out;
  const std::pair<const char*, const std::string*> sides[] = {{"source", &pair.source_object},
                                                              {"target", &pair.target_object}};
  for (const auto& [role, object] : sides) {
    providers::ImageInput in;
    in.role = role;
    in.uri = role == std::string_view("source") ? pair.source_uri : pair.target_uri;
    if (auto bytes = store.read_object(*object)) in.bytes = std::move(*bytes);
    if (auto info = corpus::probe_image(in.bytes)) in.mime = info->mime;
    out.push_back(std::move(in));
  }
  return out;
}

}  // namespace editfactory::detail
