#include "editfactory/editfactory.h"

#include <cstdlib>
#include <cstring>
#include <memory>

#include "editfactory/corpus.hpp"
#include "editfactory/dataset.hpp"
#include "editfactory/evaluation.hpp"
#include "editfactory/filtering.hpp"
#include "editfactory/human_eval.hpp"
#include "editfactory/preference.hpp"
#include "editfactory/providers.hpp"
#include "editfactory/reporting.hpp"
#include "editfactory/server.hpp"
#include "editfactory/synthesis.hpp"
#include "editfactory/tasks.hpp"
#include "editfactory/util.hpp"

using nlohmann::json;
using namespace editfactory;

struct ef_store {
  std::unique_ptr<corpus::Store> store;
};

struct ef_providers {
  providers::ProviderRegistry registry;
};

struct ef_server {
  std::unique_ptr<server::Server> server;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ef_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return EF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ef_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return EF_INVALID_ARGUMENT;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return EF_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EF_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (!out) raise(ErrorCode::kInvalidArgument, "output pointer is null");
  *out = dup(s);
}

void need(const void* p, const char* what) {
  if (!p) raise(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) raise(ErrorCode::kInvalidArgument, "options must be a JSON object");
  return j;
}

std::optional<corpus::Category> category_named(const std::string& name) {
  for (corpus::Category c : corpus::kAllCategories) {
    if (to_lower_ascii(corpus::to_string(c)) == to_lower_ascii(name)) return c;
  }
  return std::nullopt;
}

judge::Dimension dimension_named(const char* name) {
  need(name, "dimension");
  const auto d = judge::parse_dimension(name);
  if (!d) raise(ErrorCode::kInvalidArgument, std::string("unknown dimension ") + name);
  return *d;
}

std::span<const double> seq(const double* p, size_t n) {
  if (n > 0) need(p, "log-probability array");
  return {p, n};
}

json hits_to_json(const std::vector<judge::ForbiddenTermHit>& hits) {
  json out = json::array();
  for (const auto& h : hits) {
    out.push_back({{"term", h.term}, {"class", judge::to_string(h.term_class)}, {"begin", h.begin}, {"end", h.end}});
  }
  return out;
}

std::filesystem::path verdict_dir(const corpus::Store& store, const std::string& dataset, const char* explicit_dir) {
  if (explicit_dir && *explicit_dir) return explicit_dir;
  return store.data_dir() / "verdicts" / sanitize_filename(dataset);
}

}  // namespace

extern "C" {

const char* ef_version(void) { return "1.0.0"; }

const char* ef_status_name(ef_status status) {
  if (status == EF_INTERNAL) return "Internal";
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

const char* ef_last_error(void) { return g_last_error.c_str(); }

void ef_free(char* p) { std::free(p); }

ef_status ef_store_open(const char* data_dir, const char* fixed_timestamp, ef_store** out) {
  return guard([&] {
    need(data_dir, "data_dir");
    need(out, "out");
    auto h = std::make_unique<ef_store>();
    h->store = std::make_unique<corpus::Store>(
        data_dir, fixed_timestamp && *fixed_timestamp ? fixed_clock(fixed_timestamp) : system_clock_utc());
    *out = h.release();
  });
}

void ef_store_close(ef_store* store) { delete store; }

ef_status ef_providers_load(const char* config_path, ef_providers** out) {
  return guard([&] {
    need(config_path, "config_path");
    need(out, "out");
    *out = new ef_providers{providers::ProviderRegistry::load(config_path)};
  });
}

ef_status ef_providers_from_json(const char* config_json, const char* base_dir, ef_providers** out) {
  return guard([&] {
    need(config_json, "config_json");
    need(out, "out");
    *out = new ef_providers{providers::ProviderRegistry::from_json(json::parse(config_json), base_dir ? base_dir : "")};
  });
}

void ef_providers_close(ef_providers* providers) { delete providers; }

ef_status ef_ingest(ef_store* store, const char* manifest_path, char** report_json) {
  return guard([&] {
    need(store, "store");
    need(manifest_path, "manifest_path");
    put(report_json, json(corpus::ingest_pairs(*store->store, manifest_path)).dump());
  });
}

ef_status ef_sample(ef_store* store, const char* options_json, char** pair_ids_json) {
  return guard([&] {
    need(store, "store");
    const json o = parse_options(options_json);
    const auto n = o.at("n").get<std::size_t>();
    std::map<corpus::Category, double> targets;
    for (const auto& [name, frac] : o.value("targets", json::object()).items()) {
      const auto c = category_named(name);
      if (!c) raise(ErrorCode::kIllegalTaxonomy, "unknown category " + name);
      targets[*c] = frac.get<double>();
    }
    corpus::SampleOptions opts;
    opts.seed = o.value("seed", std::uint64_t{0});
    opts.allow_substitution = o.value("allow_substitution", false);
    json ids = json::array();
    for (const auto& p : corpus::sample_balanced(*store->store, n, targets, opts)) ids.push_back(p.id);
    if (o.contains("dataset")) store->store->put("samples", o.at("dataset").get<std::string>(), ids);
    put(pair_ids_json, ids.dump());
  });
}

ef_status ef_synthesize(ef_store* store, ef_providers* providers, const char* generator, const char* options_json,
                        char** report_json) {
  return guard([&] {
    need(store, "store");
    need(providers, "providers");
    need(generator, "generator");
    const json o = parse_options(options_json);
    synthesis::SynthesisOptions opts;
    if (o.contains("prompt_file")) opts.prompt = read_file_text(o.at("prompt_file").get<std::string>());
    opts.prompt = o.value("prompt", opts.prompt);
    if (o.contains("seed")) {
      if (o.at("seed").is_null()) opts.seed.reset();
      else opts.seed = o.at("seed").get<std::int64_t>();
    }
    opts.dataset = o.value("dataset", "");
    opts.as_model_outputs = o.value("as_model_outputs", false);
    providers::Client client(providers->registry.get(generator));
    const auto r = synthesis::synthesize(*store->store, client, opts);
    json failed = json::array();
    for (const auto& [id, msg] : r.failed) failed.push_back({{"pair_id", id}, {"error", msg}});
    put(report_json, json{{"drafted", r.drafted}, {"skipped", r.skipped}, {"failed", failed}}.dump());
  });
}

ef_status ef_filter(ef_store* store, ef_providers* providers, const char* scorer, const char* options_json,
                    char** report_json) {
  return guard([&] {
    need(store, "store");
    const json o = parse_options(options_json);
    const auto combiner = filtering::Combiner::parse(o.value("combiner", "product"));
    json report = json::object();
    if (scorer && *scorer) {
      need(providers, "providers");
      providers::Client client(providers->registry.get(scorer));
      const auto s = filtering::score_pending(*store->store, client, combiner);
      json failed = json::array();
      for (const auto& [id, msg] : s.failed) failed.push_back({{"pair_id", id}, {"error", msg}});
      report["scored"] = s.scored;
      report["score_failures"] = failed;
    }
    std::vector<corpus::TripletRecord> pending;
    for (auto& t : store->store->triplets()) {
      if (t.status == corpus::TripletStatus::kDrafted) pending.push_back(std::move(t));
    }
    if (!pending.empty() && (o.contains("threshold") || o.contains("retention") || o.contains("min_success") ||
                             o.contains("max_overedit"))) {
      filtering::PartitionResult part;
      if (o.contains("min_success") || o.contains("max_overedit")) {
        part = filtering::partition_by_facets(pending, {o.value("min_success", 0.0), o.value("max_overedit", 1.0)});
      } else {
        const double threshold = o.contains("threshold")
                                     ? o.at("threshold").get<double>()
                                     : filtering::threshold_for_retention(pending, o.at("retention").get<double>());
        part = filtering::partition(pending, threshold);
      }
      if (o.value("apply", true)) filtering::apply_partition(*store->store, part);
      report["partition"] = filtering::retention_report_json(part);
      report["markdown"] = filtering::retention_report_markdown(part);
    }
    put(report_json, report.dump());
  });
}

ef_status ef_gt_load(ef_store* store, const char* jsonl_path, char** report_json) {
  return guard([&] {
    need(store, "store");
    need(jsonl_path, "jsonl_path");
    put(report_json, json{{"loaded", corpus::load_ground_truth(*store->store, jsonl_path)}}.dump());
  });
}

ef_status ef_dataset_import(ef_store* store, const char* name, const char* jsonl_path, char** report_json) {
  return guard([&] {
    need(store, "store");
    need(name, "name");
    need(jsonl_path, "jsonl_path");
    const auto rows = corpus::read_dataset_jsonl(jsonl_path);
    corpus::put_dataset_rows(*store->store, name, rows);
    put(report_json, json{{"dataset", name}, {"rows", rows.size()}}.dump());
  });
}

ef_status ef_judge(ef_store* store, ef_providers* providers, const char* judge_name, const char* dataset,
                   const char* out_dir, char** summary_json) {
  return guard([&] {
    need(store, "store");
    need(providers, "providers");
    need(judge_name, "judge");
    need(dataset, "dataset");
    const auto rows = corpus::load_dataset(*store->store, dataset);
    providers::Client client(providers->registry.get(judge_name));
    const auto samples = judge::evaluate_rows(*store->store, rows, client);
    const auto dir = verdict_dir(*store->store, dataset, out_dir);
    judge::write_verdict_archive(dir, samples);
    std::size_t evaluated = 0, clamped = 0, inconsistent = 0;
    json unevaluated = json::array();
    for (const auto& s : samples) {
      if (s.evaluated()) ++evaluated;
      else unevaluated.push_back({{"pair_id", s.pair_id}, {"model", s.model}});
      for (const auto& d : s.dimensions) {
        if (!d.validated) continue;
        for (const auto& c : d.validated->log) {
          ++clamped;
          if (c.inconsistency) ++inconsistent;
        }
      }
    }
    put(summary_json, json{{"dataset", dataset},
                           {"out_dir", dir.string()},
                           {"samples", samples.size()},
                           {"evaluated", evaluated},
                           {"unevaluated", unevaluated},
                           {"clamp_events", clamped},
                           {"judge_inconsistencies", inconsistent}}
                          .dump());
  });
}

ef_status ef_export(ef_store* store, const char* kind, const char* out_path, char** manifest_json) {
  return guard([&] {
    need(store, "store");
    need(kind, "kind");
    need(out_path, "out_path");
    const std::string k = kind;
    preference::ExportManifest m;
    if (k == "sft") m = preference::export_sft(*store->store, out_path);
    else if (k == "dpo") m = preference::export_dpo(*store->store, out_path);
    else raise(ErrorCode::kInvalidArgument, "export kind must be sft or dpo");
    put(manifest_json, preference::to_json(m).dump());
  });
}

ef_status ef_report(ef_store* store, const char* kind, const char* dataset, const char* format,
                    const char* verdicts_dir, char** text) {
  return guard([&] {
    need(store, "store");
    need(kind, "kind");
    need(dataset, "dataset");
    const auto fmt = reporting::parse_format(format ? format : "md");
    if (!fmt) raise(ErrorCode::kInvalidArgument, "format must be md, csv or json");
    const std::string k = kind;
    if (k == "objective") {
      const auto samples = judge::read_verdict_archive(verdict_dir(*store->store, dataset, verdicts_dir));
      put(text, reporting::render(reporting::benchmark_report(dataset, samples), *fmt));
    } else if (k == "human") {
      put(text, reporting::render(reporting::human_report(*store->store, dataset), *fmt));
    } else {
      raise(ErrorCode::kInvalidArgument, "report kind must be objective or human");
    }
  });
}

ef_status ef_tasks_create(ef_store* store, const char* kind, const char* dataset, char** report_json) {
  return guard([&] {
    need(store, "store");
    need(kind, "kind");
    const auto k = tasks::parse_task_kind(kind);
    if (!k) raise(ErrorCode::kInvalidArgument, std::string("unknown task kind ") + kind);
    std::size_t created = 0;
    switch (*k) {
      case tasks::TaskKind::kRefine: created = tasks::create_refine_tasks(*store->store); break;
      case tasks::TaskKind::kPreference: created = tasks::create_preference_tasks(*store->store); break;
      case tasks::TaskKind::kHumanEval: {
        if (!dataset || !*dataset) raise(ErrorCode::kInvalidArgument, "human_eval tasks need a dataset");
        const auto rows = corpus::load_dataset(*store->store, dataset);
        created = human_eval::create_tasks(*store->store, dataset, rows);
        break;
      }
    }
    put(report_json, json{{"kind", kind}, {"created", created}}.dump());
  });
}

ef_status ef_tasks_list(ef_store* store, const char* kind, char** tasks_json) {
  return guard([&] {
    need(store, "store");
    std::optional<tasks::TaskKind> k;
    if (kind && *kind) {
      k = tasks::parse_task_kind(kind);
      if (!k) raise(ErrorCode::kInvalidArgument, std::string("unknown task kind ") + kind);
    }
    put(tasks_json, json(tasks::list_tasks(*store->store, k)).dump());
  });
}

ef_status ef_server_create(ef_store* store, const char* config_json, ef_server** out) {
  return guard([&] {
    need(store, "store");
    need(out, "out");
    const auto config = server::server_config_from_json(parse_options(config_json));
    auto h = std::make_unique<ef_server>();
    h->server = std::make_unique<server::Server>(*store->store, config);
    *out = h.release();
  });
}

ef_status ef_server_start(ef_server* server, int* port) {
  return guard([&] {
    need(server, "server");
    const int p = server->server->start();
    if (port) *port = p;
  });
}

ef_status ef_server_run(ef_server* server) {
  return guard([&] {
    need(server, "server");
    server->server->run();
  });
}

void ef_server_stop(ef_server* server) {
  if (server) server->server->stop();
}

void ef_server_destroy(ef_server* server) { delete server; }

ef_status ef_composite(const char* accuracy, const char* completeness, const char* clarity, char** weighted) {
  return guard([&] {
    need(accuracy, "accuracy");
    need(completeness, "completeness");
    need(clarity, "clarity");
    const auto c = judge::composite(Decimal::parse(accuracy), Decimal::parse(completeness), Decimal::parse(clarity));
    put(weighted, c.weighted.to_string(3));
  });
}

ef_status ef_completeness_lookup(double coverage, int all_secondary_covered, double* score) {
  return guard([&] {
    need(score, "score");
    *score = judge::completeness_lookup(coverage, all_secondary_covered != 0).to_double();
  });
}

ef_status ef_sft_loss(const double* log_probs, size_t n, int sum, double* loss) {
  return guard([&] {
    need(loss, "loss");
    *loss = preference::sft_loss(seq(log_probs, n), sum != 0);
  });
}

ef_status ef_dpo_loss(const double* policy_chosen, size_t n_pc, const double* policy_rejected, size_t n_pr,
                      const double* ref_chosen, size_t n_rc, const double* ref_rejected, size_t n_rr, double beta,
                      int length_normalized, double* loss) {
  return guard([&] {
    need(loss, "loss");
    *loss = preference::dpo_loss(seq(policy_chosen, n_pc), seq(policy_rejected, n_pr), seq(ref_chosen, n_rc),
                                 seq(ref_rejected, n_rr), {beta, length_normalized != 0});
  });
}

ef_status ef_scan_forbidden_terms(const char* instruction, char** hits_json) {
  return guard([&] {
    need(instruction, "instruction");
    put(hits_json, hits_to_json(judge::scan_forbidden_terms(instruction)).dump());
  });
}

ef_status ef_render_prompt(const char* dimension, const char* gt_json, const char* instruction, const char* model_name,
                           char** prompt) {
  return guard([&] {
    need(gt_json, "gt_json");
    need(instruction, "instruction");
    need(model_name, "model_name");
    const auto gt = json::parse(gt_json).get<corpus::GroundTruth>();
    put(prompt, judge::render_prompt(dimension_named(dimension), gt, instruction, model_name));
  });
}

ef_status ef_parse_verdict(const char* dimension, const char* raw, char** verdict_json) {
  return guard([&] {
    need(raw, "raw");
    const auto v = judge::parse_verdict(dimension_named(dimension), raw);
    json j = {{"dimension", judge::to_string(v.dimension)},
              {"score", v.score.to_canonical()},
              {"reasoning", v.reasoning},
              {"lenient", v.lenient}};
    if (v.hits) j["hits"] = {{"hits", v.hits->hits.to_canonical()}, {"total", v.hits->total}};
    if (v.hallucination) j["hallucination"] = *v.hallucination;
    put(verdict_json, j.dump());
  });
}

}  // extern "C"
