#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "editfactory/providers.hpp"
#include "editfactory/store.hpp"

namespace editfactory::synthesis {

// The shipped default instruction-generation prompt (configuration, not a
// fixed protocol).
std::string_view default_generation_prompt();

providers::ChatRequest build_generation_request(const corpus::Store& store, const corpus::ImagePair& pair,
                                                const std::string& prompt, std::optional<std::int64_t> seed);

struct SynthesisOptions {
  std::string prompt;  // empty: default_generation_prompt()
  std::optional<std::int64_t> seed = 0;
  // Also record outputs as rows of this evaluation dataset (model = provider model_id).
  std::string dataset;
  // When true, outputs for pairs that already have a triplet are stored as
  // extra model outputs (e.g. an SFT model's samples for preference work).
  bool as_model_outputs = false;
};

struct SynthesisReport {
  std::size_t drafted = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, std::string>> failed;
};

// Generates one instruction per pair lacking a triplet (or per pair, with
// as_model_outputs), under the provider's in-flight bound.
SynthesisReport synthesize(corpus::Store& store, const providers::Client& generator, const SynthesisOptions& options = {});

}  // namespace editfactory::synthesis
