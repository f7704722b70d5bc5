#include "editfactory/synthesis.hpp"

#include "core/assets.hpp"
#include "core/pair_images.hpp"
#include "editfactory/dataset.hpp"

namespace editfactory::synthesis {

std::string_view default_generation_prompt() { return assets::generation_prompt_v1; }

providers::ChatRequest build_generation_request(const corpus::Store& store, const corpus::ImagePair& pair,
                                                const std::string& prompt, std::optional<std::int64_t> seed) {
  providers::ChatRequest req;
  req.images = detail::pair_images(store, pair);
  req.prompt = prompt;
  req.temperature = 0.0;
  req.seed = seed;
  req.tag = "generate:" + pair.id;
  return req;
}

SynthesisReport synthesize(corpus::Store& store, const providers::Client& generator, const SynthesisOptions& options) {
  const std::string prompt = options.prompt.empty() ? std::string(default_generation_prompt()) : options.prompt;
  std::vector<corpus::ImagePair> todo;
  SynthesisReport report;
  for (auto& p : store.pairs()) {
    if (!options.as_model_outputs && store.triplet(p.id)) {
      ++report.skipped;
      continue;
    }
    todo.push_back(std::move(p));
  }
  std::vector<providers::ChatRequest> reqs;
  for (const auto& p : todo) reqs.push_back(build_generation_request(store, p, prompt, options.seed));

  std::vector<corpus::DatasetRow> rows;
  const corpus::Producer producer{corpus::ProducerKind::kModel, generator.config().model_id};
  for (const auto& item : generator.batch_complete(reqs)) {
    const auto& pair = todo[item.index];
    if (!item.ok()) {
      report.failed.emplace_back(pair.id, item.error().message);
      continue;
    }
    try {
      auto instr = corpus::make_instruction(item.completion().text, producer, store.now());
      if (options.as_model_outputs || store.triplet(pair.id)) {
        store.record_model_output(pair.id, instr);
      } else {
        store.create_triplet(pair.id, instr);
      }
      rows.push_back({pair.id, producer.id, instr.text});
      ++report.drafted;
    } catch (const Error& e) {
      report.failed.emplace_back(pair.id, e.what());
    }
  }
  if (!options.dataset.empty() && !rows.empty()) corpus::put_dataset_rows(store, options.dataset, rows);
  return report;
}

}  // namespace editfactory::synthesis
