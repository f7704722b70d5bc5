// Command-line front end. Talks to the core only through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "editfactory/editfactory.h"

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

struct Failure {
  ef_status status;
  std::string message;
};

void check(ef_status s) {
  if (s != EF_OK) throw Failure{s, ef_last_error()};
}

std::string take(char* p) {
  std::string s = p ? p : "";
  ef_free(p);
  return s;
}

struct StoreHandle {
  ef_store* h = nullptr;
  StoreHandle(const std::string& dir, const std::string& fixed_time) {
    check(ef_store_open(dir.c_str(), fixed_time.empty() ? nullptr : fixed_time.c_str(), &h));
  }
  ~StoreHandle() { ef_store_close(h); }
};

struct ProvidersHandle {
  ef_providers* h = nullptr;
  explicit ProvidersHandle(const std::string& path) { check(ef_providers_load(path.c_str(), &h)); }
  ~ProvidersHandle() { ef_providers_close(h); }
};

void print_json(const std::string& text) { std::cout << json::parse(text).dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"editfactory: instruction data factory and evaluation harness for image editing"};
  app.require_subcommand(1);

  std::string data_dir = std::getenv("EDITFACTORY_DATA_DIR") ? std::getenv("EDITFACTORY_DATA_DIR") : "data";
  std::string fixed_time;
  std::string providers_path = "providers.json";
  app.add_option("--data-dir", data_dir, "Store directory (env EDITFACTORY_DATA_DIR)");
  app.add_option("--fixed-time", fixed_time, "Stamp every record with this ISO-8601 time (reproducible runs)");
  app.add_option("--providers", providers_path, "Provider registry JSON")->capture_default_str();

  std::string manifest;
  auto* ingest = app.add_subcommand("ingest", "Register image pairs from a JSONL manifest");
  ingest->add_option("--manifest", manifest, "JSONL manifest")->required();

  std::size_t sample_n = 0;
  std::vector<std::string> sample_targets;
  std::uint64_t sample_seed = 0;
  bool sample_subst = false;
  std::string sample_dataset;
  auto* sample = app.add_subcommand("sample", "Draw a category-balanced benchmark sample");
  sample->add_option("--n", sample_n, "Sample size")->required();
  sample->add_option("--target", sample_targets, "Category fraction, e.g. semantic=0.5")->required();
  sample->add_option("--seed", sample_seed);
  sample->add_flag("--allow-substitution", sample_subst);
  sample->add_option("--name", sample_dataset, "Record the sample under this name");

  std::string generator, prompt_file, synth_dataset;
  std::int64_t synth_seed = 0;
  bool as_outputs = false;
  auto* synth = app.add_subcommand("synthesize", "Draft instructions with a generator model");
  synth->add_option("--generator", generator, "Provider name")->required();
  synth->add_option("--prompt-file", prompt_file, "Override the default generation prompt");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--dataset", synth_dataset, "Also record outputs as rows of this dataset");
  synth->add_flag("--as-model-outputs", as_outputs, "Store outputs for pairs that already have a draft");

  std::string scorer, combiner = "product";
  double threshold = -1, retention = -1, min_success = -1, max_overedit = -1;
  bool no_apply = false;
  auto* filter = app.add_subcommand("filter", "Score drafts and gate them into Filtered / Rejected");
  filter->add_option("--scorer", scorer, "Provider name; omit to only partition existing scores");
  filter->add_option("--combiner", combiner, "product | weighted:<w>")->capture_default_str();
  auto* thr = filter->add_option("--threshold", threshold, "Keep aggregate >= threshold");
  auto* ret = filter->add_option("--retention", retention, "Pick the threshold keeping this fraction");
  filter->add_option("--min-success", min_success, "Facet gate on editing success");
  filter->add_option("--max-overedit", max_overedit, "Facet gate on over-editing");
  filter->add_flag("--dry-run", no_apply, "Report without changing statuses");
  thr->excludes(ret);

  std::string gt_path;
  auto* gt = app.add_subcommand("gt", "Load ground-truth change lists");
  gt->add_option("--load", gt_path, "JSONL of ground-truth records")->required();

  std::string ds_name, ds_path;
  auto* dataset = app.add_subcommand("dataset", "Import an evaluation dataset (pair_id, model, instruction)");
  dataset->add_option("--name", ds_name)->required();
  dataset->add_option("--path", ds_path, "JSONL rows")->required();

  std::string judge_dataset, judge_name, judge_gt, judge_out;
  auto* judge = app.add_subcommand("judge", "Score a dataset on accuracy, completeness and clarity");
  judge->add_option("--dataset", judge_dataset, "Stored dataset name or JSONL path")->required();
  judge->add_option("--judge", judge_name, "Provider name")->required();
  judge->add_option("--gt", judge_gt, "Ground-truth JSONL to load first");
  judge->add_option("--out", judge_out, "Verdict archive directory (default <data-dir>/verdicts/<dataset>)");

  std::string export_kind, export_out;
  auto* exp = app.add_subcommand("export", "Write SFT or DPO training files");
  exp->add_option("--kind", export_kind)->required()->check(CLI::IsMember({"sft", "dpo"}));
  exp->add_option("--out", export_out)->required();

  std::string report_kind, report_dataset, report_format = "md", report_verdicts;
  auto* report = app.add_subcommand("report", "Render an objective or human evaluation report");
  report->add_option("--kind", report_kind)->required()->check(CLI::IsMember({"objective", "human"}));
  report->add_option("--dataset", report_dataset)->required();
  report->add_option("--format", report_format)->check(CLI::IsMember({"md", "csv", "json"}))->capture_default_str();
  report->add_option("--verdicts", report_verdicts, "Verdict archive directory");

  std::string tasks_kind, tasks_dataset;
  auto* tasks = app.add_subcommand("tasks", "Create or list annotation tasks");
  tasks->require_subcommand(1);
  auto* tasks_create = tasks->add_subcommand("create", "Create tasks of a kind");
  tasks_create->add_option("--kind", tasks_kind)->required()->check(CLI::IsMember({"refine", "preference", "human_eval"}));
  tasks_create->add_option("--dataset", tasks_dataset, "Dataset for human_eval tasks");
  auto* tasks_list = tasks->add_subcommand("list", "List tasks");
  tasks_list->add_option("--kind", tasks_kind);

  std::string serve_config, serve_bind = "127.0.0.1", cors_origin;
  int serve_port = 8080;
  std::vector<std::string> tokens;
  long lease_seconds = 1800;
  auto* serve = app.add_subcommand("serve", "Run the annotation REST API");
  serve->add_option("--config", serve_config, "Server config JSON (tokens, cors_origin, lease_seconds)");
  serve->add_option("--bind", serve_bind)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--cors-origin", cors_origin, "Allowed browser origin");
  serve->add_option("--token", tokens, "TOKEN=ANNOTATOR bearer credential");
  serve->add_option("--lease-seconds", lease_seconds)->capture_default_str();

  std::vector<std::string> composite_args;
  auto* composite = app.add_subcommand("composite", "Weighted composite of accuracy, completeness, clarity");
  composite->add_option("scores", composite_args)->expected(3)->required();

  std::string scan_text;
  auto* scan = app.add_subcommand("scan", "List forbidden vague terms in an instruction");
  scan->add_option("instruction", scan_text)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    char* out = nullptr;
    if (*composite) {
      check(ef_composite(composite_args[0].c_str(), composite_args[1].c_str(), composite_args[2].c_str(), &out));
      std::cout << take(out) << "\n";
      return 0;
    }
    if (*scan) {
      check(ef_scan_forbidden_terms(scan_text.c_str(), &out));
      print_json(take(out));
      return 0;
    }

    StoreHandle store(data_dir, fixed_time);
    if (*ingest) {
      check(ef_ingest(store.h, manifest.c_str(), &out));
      print_json(take(out));
    } else if (*sample) {
      json o = {{"n", sample_n}, {"seed", sample_seed}, {"allow_substitution", sample_subst}};
      for (const auto& t : sample_targets) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--target", "expected name=fraction");
        o["targets"][t.substr(0, eq)] = std::stod(t.substr(eq + 1));
      }
      if (!sample_dataset.empty()) o["dataset"] = sample_dataset;
      check(ef_sample(store.h, o.dump().c_str(), &out));
      print_json(take(out));
    } else if (*synth) {
      ProvidersHandle prov(providers_path);
      json o = {{"seed", synth_seed}, {"as_model_outputs", as_outputs}};
      if (!prompt_file.empty()) o["prompt_file"] = prompt_file;
      if (!synth_dataset.empty()) o["dataset"] = synth_dataset;
      check(ef_synthesize(store.h, prov.h, generator.c_str(), o.dump().c_str(), &out));
      print_json(take(out));
    } else if (*filter) {
      json o = {{"combiner", combiner}, {"apply", !no_apply}};
      if (threshold >= 0) o["threshold"] = threshold;
      if (retention >= 0) o["retention"] = retention;
      if (min_success >= 0) o["min_success"] = min_success;
      if (max_overedit >= 0) o["max_overedit"] = max_overedit;
      std::unique_ptr<ProvidersHandle> prov;
      if (!scorer.empty()) prov = std::make_unique<ProvidersHandle>(providers_path);
      check(ef_filter(store.h, prov ? prov->h : nullptr, scorer.c_str(), o.dump().c_str(), &out));
      const json r = json::parse(take(out));
      if (r.contains("markdown")) std::cout << r.at("markdown").get<std::string>();
      json rest = r;
      rest.erase("markdown");
      std::cout << rest.dump(2) << "\n";
    } else if (*gt) {
      check(ef_gt_load(store.h, gt_path.c_str(), &out));
      print_json(take(out));
    } else if (*dataset) {
      check(ef_dataset_import(store.h, ds_name.c_str(), ds_path.c_str(), &out));
      print_json(take(out));
    } else if (*judge) {
      if (!judge_gt.empty()) {
        check(ef_gt_load(store.h, judge_gt.c_str(), &out));
        take(out);
      }
      ProvidersHandle prov(providers_path);
      check(ef_judge(store.h, prov.h, judge_name.c_str(), judge_dataset.c_str(),
                     judge_out.empty() ? nullptr : judge_out.c_str(), &out));
      print_json(take(out));
    } else if (*exp) {
      check(ef_export(store.h, export_kind.c_str(), export_out.c_str(), &out));
      print_json(take(out));
    } else if (*report) {
      check(ef_report(store.h, report_kind.c_str(), report_dataset.c_str(), report_format.c_str(),
                      report_verdicts.empty() ? nullptr : report_verdicts.c_str(), &out));
      std::cout << take(out);
    } else if (*tasks_create) {
      check(ef_tasks_create(store.h, tasks_kind.c_str(), tasks_dataset.c_str(), &out));
      print_json(take(out));
    } else if (*tasks_list) {
      check(ef_tasks_list(store.h, tasks_kind.c_str(), &out));
      print_json(take(out));
    } else if (*serve) {
      json config = json::object();
      if (!serve_config.empty()) {
        std::ifstream in(serve_config);
        if (!in) throw Failure{EF_NOT_FOUND, "cannot open " + serve_config};
        config = json::parse(in);
      }
      config["bind"] = serve_bind;
      config["port"] = serve_port;
      if (!cors_origin.empty()) config["cors_origin"] = cors_origin;
      if (!config.contains("lease_seconds")) config["lease_seconds"] = lease_seconds;
      for (const auto& t : tokens) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--token", "expected TOKEN=ANNOTATOR");
        config["tokens"][t.substr(0, eq)] = t.substr(eq + 1);
      }
      ef_server* srv = nullptr;
      check(ef_server_create(store.h, config.dump().c_str(), &srv));
      int port = 0;
      const ef_status st = ef_server_start(srv, &port);
      if (st != EF_OK) {
        ef_server_destroy(srv);
        check(st);
      }
      std::cerr << "listening on " << serve_bind << ":" << port << "\n";
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      ef_server_stop(srv);
      ef_server_destroy(srv);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << ef_status_name(f.status) << ": " << f.message << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
