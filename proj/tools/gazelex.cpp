// Copyright 2026 The gazelex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: synthetic export, dataset building, training,
// evaluation, threshold search, serving, latency and replay.

#include <pthread.h>

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gazelex/data/dataset.hpp"
#include "gazelex/eval/metrics.hpp"
#include "gazelex/eval/suite.hpp"
#include "gazelex/eval/train.hpp"
#include "gazelex/gaze/io.hpp"
#include "gazelex/service/engine.hpp"
#include "gazelex/service/server.hpp"
#include "gazelex/synth/synth.hpp"
#include "gazelex/text/knowledge.hpp"
#include "gazelex/text/layout.hpp"
#include "gazelex/text/vocabulary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gazelex;

namespace {

bool g_json = false;

/// Prints `j` in JSON mode, else `text`.
void emit(const json& j, const std::string& text) {
  if (g_json) {
    std::cout << j.dump() << '\n';
  } else {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Dataset directory as written by build-dataset.
struct Bundle {
  data::Dataset dataset;
  text::Vocabulary vocab;
  text::FrequencyTable freq;
  data::BuildConfig build;
  std::vector<text::DocumentLayout> docs;
};

Bundle read_bundle(const fs::path& dir) {
  Bundle b;
  b.dataset = data::read_dataset(dir);
  const json manifest = read_json(dir / "manifest.json");
  if (!manifest.contains("build_config")) {
    throw std::runtime_error(dir.string() + " was not written by build-dataset");
  }
  b.build = data::BuildConfig::from_json(manifest.at("build_config"));
  b.vocab = text::Vocabulary::load(dir / "vocab.json");
  b.freq = text::FrequencyTable::from_json(read_json(dir / "freq.json"));
  b.docs = service::Library::read_layouts(dir / "layouts");
  return b;
}

struct ModelOptions {
  model::ModelConfig model;
  eval::TrainConfig train;
  std::string embeddings;

  void add(CLI::App* app) {
    app->add_option("--d-model", model.d_model, "Hidden width")->capture_default_str();
    app->add_option("--enc-layers", model.n_enc_layers, "Gaze encoder layers")
        ->capture_default_str();
    app->add_option("--dec-layers", model.n_dec_layers, "Token decoder layers")
        ->capture_default_str();
    app->add_option("--text-layers", model.n_text_layers, "Text encoder layers")
        ->capture_default_str();
    app->add_option("--heads", model.n_heads, "Attention heads")->capture_default_str();
    app->add_option("--ffn-mult", model.ffn_mult, "Feed-forward width multiplier")
        ->capture_default_str();
    app->add_option("--knowledge-dim", model.knowledge_dim, "Knowledge embedding width")
        ->capture_default_str();
    app->add_option("--alpha", model.alpha, "Focal loss alpha")->capture_default_str();
    app->add_option("--gamma", model.gamma, "Focal loss gamma")->capture_default_str();
    app->add_option("--model-seed", model.seed, "Parameter init seed")->capture_default_str();
    app->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch-size", train.batch_size, "Rows per step")->capture_default_str();
    app->add_option("--lr-encoder-decoder", train.lr_encoder_decoder,
                    "Learning rate of the gaze encoder-decoder, knowledge and classifier")
        ->capture_default_str();
    app->add_option("--lr-backbone", train.lr_backbone, "Learning rate of the text encoder")
        ->capture_default_str();
    app->add_option("--patience", train.patience, "Early-stop patience in epochs")
        ->capture_default_str();
    app->add_option("--seed", train.seed, "Shuffle seed")->capture_default_str();
    app->add_option("--embeddings", embeddings, "Pretrained token table (text)")
        ->check(CLI::ExistingFile);
  }

  /// Fills the dataset-dependent fields.
  model::ModelConfig resolved(const Bundle& b) const {
    auto m = model;
    m.vocab_size = b.vocab.size();
    m.max_gaze_len = b.build.max_gaze_len;
    m.max_tokens = b.build.max_tokens;
    m.screen_width = b.build.screen_width;
    m.screen_height = b.build.screen_height;
    return m;
  }
};

int cmd_synth(const fs::path& out, synth::SynthConfig config) {
  const json manifest = synth::export_dataset(config, out);
  const auto hash = model::hash_hex(synth::file_hash(out / "manifest.json"));
  std::ostringstream text;
  text << "wrote " << out.string() << " (manifest " << hash << ")\n";
  emit({{"out", out.string()}, {"manifest_hash", hash}, {"manifest", manifest}}, text.str());
  return 0;
}

int cmd_build(const fs::path& input, const fs::path& out, const std::string& source,
              const data::BuildConfig& build, std::size_t vocab_size) {
  const auto src = data::load_export(input);
  text::VocabularyConfig vc;
  vc.max_size = vocab_size;
  const auto vocab = text::build_vocabulary(src.docs, vc);
  const auto freq = text::FrequencyTable::from_corpus(src.docs);
  const auto kind = gaze::source_from_string(source);
  const auto ds = data::build_dataset(src, kind, {vocab, freq}, build);
  const auto imbalance = data::class_imbalance(ds);
  fs::create_directories(out / "layouts");
  data::write_dataset(out, ds,
                      {{"build_config", build.to_json()},
                       {"source", source},
                       {"input", fs::absolute(input).string()},
                       {"vocab_size", vocab.size()}});
  vocab.save(out / "vocab.json");
  write_json(out / "freq.json", freq.to_json());
  for (const auto& doc : src.docs) text::write_layout(out / "layouts" / (doc.doc_id + ".json"), doc);
  std::ostringstream text;
  text << "wrote " << out.string() << ": " << ds.windows.size() << " rows, " << ds.samples.size()
       << " samples, token imbalance " << imbalance.ratio << '\n';
  emit({{"out", out.string()},
        {"rows", ds.windows.size()},
        {"samples", ds.samples.size()},
        {"vocab_size", vocab.size()},
        {"imbalance",
         {{"negative_tokens", imbalance.negative_tokens},
          {"positive_tokens", imbalance.positive_tokens},
          {"ratio", imbalance.ratio}}}},
       text.str());
  return 0;
}

int cmd_train(const fs::path& data_dir, const fs::path& out, const std::string& mode_name,
              const std::string& method_name, std::uint64_t split_seed, const ModelOptions& opts,
              const std::string& log_path) {
  const auto b = read_bundle(data_dir);
  const auto method = eval::method_from_string(method_name);
  if (!eval::is_neural(method)) throw std::invalid_argument("train takes a neural method");
  const auto mode = data::split_mode_from_string(mode_name);
  const auto sp = data::split(b.dataset, data::default_split_spec(b.dataset, mode, split_seed));
  model::DetectorModel model(eval::method_config(method, opts.resolved(b)));
  if (!opts.embeddings.empty() && method != eval::Method::kRandomText &&
      model.config().use_text_encoder) {
    model.load_embeddings(opts.embeddings, b.vocab.units());
  }
  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw std::runtime_error("cannot write " + log_path);
  }
  const auto result = eval::train(model, b.dataset, sp.train, sp.dev, opts.train,
                                  log_path.empty() ? nullptr : &log_file);
  const auto test = eval::score_metrics(eval::predict(model, b.dataset, sp.test),
                                        eval::labels_of(b.dataset, sp.test), result.threshold);
  const json extra = {{"method", method_name},
                      {"mode", mode_name},
                      {"split", sp.manifest()},
                      {"train", result.to_json()},
                      {"test", test.to_json()}};
  service::save_engine(out, model, b.vocab, b.freq, b.build, result.threshold, extra);
  std::ostringstream text;
  text << "saved " << out.string() << ": best epoch " << result.best_epoch << ", dev F1 "
       << result.best_dev_f1 << ", threshold " << result.threshold << ", test F1 " << test.f1
       << '\n';
  emit({{"out", out.string()}, {"train", result.to_json()}, {"test", test.to_json()}}, text.str());
  return 0;
}

int cmd_eval(const fs::path& data_dir, const std::vector<std::string>& modes,
             const std::vector<std::string>& methods, std::uint64_t split_seed,
             std::size_t jobs, const ModelOptions& opts, const std::string& out,
             const std::string& log_path) {
  const auto b = read_bundle(data_dir);
  eval::SuiteConfig config;
  config.modes.clear();
  for (const auto& m : modes) config.modes.push_back(data::split_mode_from_string(m));
  if (methods.empty()) {
    config.methods = eval::all_methods();
  } else {
    for (const auto& m : methods) config.methods.push_back(eval::method_from_string(m));
  }
  config.model = opts.resolved(b);
  config.train = opts.train;
  config.logistic.seed = opts.train.seed;
  config.split_seed = split_seed;
  config.jobs = jobs;
  config.vocab = &b.vocab;
  if (!opts.embeddings.empty()) config.embeddings = opts.embeddings;
  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw std::runtime_error("cannot write " + log_path);
  }
  const auto report = eval::run_suite(b.dataset, b.docs, config,
                                      log_path.empty() ? nullptr : &log_file);
  const json j = report.to_json();
  if (!out.empty()) write_json(out, j);
  emit(j, report.table());
  for (const auto& row : report.rows) {
    if (row.status == "failed") return 3;
  }
  return 0;
}

int cmd_threshold(const fs::path& scores_path) {
  std::ifstream in(scores_path);
  if (!in) throw std::runtime_error("cannot read " + scores_path.string());
  std::vector<double> scores;
  std::vector<bool> labels;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line);
    scores.push_back(j.at("p").get<double>());
    const auto& l = j.at("label");
    labels.push_back(l.is_boolean() ? l.get<bool>() : l.get<int>() != 0);
  }
  if (scores.empty()) throw std::runtime_error(scores_path.string() + " holds no scores");
  const double theta = eval::search_threshold(scores, labels);
  const auto m = eval::score_metrics(scores, labels, theta);
  std::ostringstream text;
  text << "threshold " << theta << ": F1 " << m.f1 << ", precision " << m.precision
       << ", recall " << m.recall << '\n';
  emit(m.to_json(), text.str());
  return 0;
}

service::Dictionary load_dictionary(const std::string& path) {
  return path.empty() ? service::Dictionary{} : service::Dictionary::load(path);
}

int cmd_serve(const fs::path& model_path, const fs::path& layouts, const std::string& dict,
              const service::ServerConfig& config) {
  auto engine = std::make_shared<const service::Engine>(
      service::load_engine(model_path, load_dictionary(dict)));
  auto library =
      std::make_shared<service::Library>(engine, service::Library::read_layouts(layouts));
  // Signals go to a waiting thread; the server threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  service::Server server(library, config);
  std::thread([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  }).detach();
  std::ostringstream text;
  text << "listening on " << config.host << ':' << server.port() << " ("
       << library->doc_ids().size() << " documents)\n";
  emit({{"host", config.host}, {"port", server.port()}, {"documents", library->doc_ids()}},
       text.str());
  std::cout.flush();
  server.run();
  return 0;
}

int cmd_latency(const fs::path& model_path, const fs::path& data_dir, std::size_t trials,
                std::size_t warmup) {
  const auto engine = service::load_engine(model_path);
  const auto ds = data::read_dataset(data_dir);
  const auto report = service::measure_latency(engine.model, ds, trials, warmup);
  std::ostringstream text;
  text << "batch-1 latency over " << report.trials << " trials: mean " << report.mean_ms
       << " ms, p50 " << report.p50_ms << " ms, p95 " << report.p95_ms << " ms, max "
       << report.max_ms << " ms; peak RSS " << report.peak_rss_mb << " MB\n";
  emit(report.to_json(), text.str());
  return 0;
}

int cmd_replay(const fs::path& model_path, const fs::path& layout_path, const fs::path& gaze_path,
               const std::string& source, const std::string& dict, const std::string& events_out,
               bool check_offline) {
  auto engine = std::make_shared<const service::Engine>(
      service::load_engine(model_path, load_dictionary(dict)));
  const auto layout = text::read_layout(layout_path);
  const auto stream = gaze::read_gaze_jsonl(gaze_path);
  service::Session session("replay", engine, layout, gaze::source_from_string(source));
  std::vector<json> events;
  for (const auto& s : stream) {
    for (const auto& d : session.push(s)) events.push_back(d.to_json());
  }
  for (const auto& d : session.finish()) events.push_back(d.to_json());

  const auto& lat = session.latencies_ms();
  double max_ms = 0.0;
  double sum_ms = 0.0;
  for (double v : lat) {
    max_ms = std::max(max_ms, v);
    sum_ms += v;
  }
  json summary = {{"windows", session.predictions().size()},
                  {"events", events.size()},
                  {"window_close_to_event_ms",
                   {{"mean", lat.empty() ? 0.0 : sum_ms / double(lat.size())}, {"max", max_ms}}}};
  if (check_offline) {
    const auto offline = service::predict_stream(*engine, layout, stream);
    summary["offline_parity"] = offline == session.predictions();
  }
  if (!events_out.empty()) {
    std::ofstream out(events_out);
    if (!out) throw std::runtime_error("cannot write " + events_out);
    for (const auto& e : events) out << e.dump() << '\n';
  }
  std::ostringstream text;
  for (const auto& e : events) {
    text << "window " << e.at("window").get<std::size_t>() << ": "
         << e.at("word").get<std::string>() << " (p " << e.at("p").get<double>() << ")\n";
  }
  text << summary.dump() << '\n';
  json j = summary;
  j["detections"] = events;
  emit(j, text.str());
  if (check_offline && !summary["offline_parity"].get<bool>()) return 4;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-based unknown word detection"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  app.set_config("--config", "", "TOML or INI file with option values; sections name subcommands")
      ->envname("GAZELEX_CONFIG");
  app.add_flag("--json", g_json, "Machine-readable JSON output");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Export a synthetic dataset");
  synth::SynthConfig synth_cfg;
  fs::path synth_out;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_cfg.corpus.seed, "Master seed")->capture_default_str();
  synth_cmd->add_option("--users", synth_cfg.n_users, "Simulated readers")->capture_default_str();
  synth_cmd->add_option("--docs", synth_cfg.corpus.n_docs, "Documents")->capture_default_str();
  synth_cmd->add_option("--words-per-doc", synth_cfg.corpus.words_per_doc, "Words per document")
      ->capture_default_str();
  synth_cmd->add_option("--groups", synth_cfg.n_groups, "Reading groups")->capture_default_str();
  synth_cmd->add_option("--dwell-gain", synth_cfg.dwell_gain, "Fixation gain on unknown words")
      ->capture_default_str();
  synth_cmd->add_option("--label-noise", synth_cfg.label_noise, "Label flip rate")
      ->capture_default_str();
  synth_cmd->add_option("--proficiency-min", synth_cfg.proficiency_min)->capture_default_str();
  synth_cmd->add_option("--proficiency-max", synth_cfg.proficiency_max)->capture_default_str();
  bool no_webcam = false;
  synth_cmd->add_flag("--no-webcam", no_webcam, "Skip webcam-noise streams");

  // build-dataset
  auto* build_cmd = app.add_subcommand("build-dataset", "Window and label a synthetic export");
  fs::path build_in, build_out;
  std::string build_source = "tracker";
  data::BuildConfig build_cfg;
  std::size_t vocab_size = text::VocabularyConfig{}.max_size;
  build_cmd->add_option("--input", build_in, "Export directory")->required()->check(
      CLI::ExistingDirectory);
  build_cmd->add_option("--out", build_out, "Dataset directory")->required();
  build_cmd->add_option("--source", build_source, "tracker or webcam")
      ->check(CLI::IsMember({"tracker", "webcam"}))
      ->capture_default_str();
  build_cmd->add_option("--max-gaze-len", build_cfg.max_gaze_len, "Gaze samples per row")
      ->capture_default_str();
  build_cmd->add_option("--max-tokens", build_cfg.max_tokens, "Tokens per row")
      ->capture_default_str();
  build_cmd->add_option("--context-words", build_cfg.context_words, "Context words per side")
      ->capture_default_str();
  build_cmd->add_option("--smoothing", build_cfg.smoothing, "Moving-average width (samples)")
      ->capture_default_str();
  build_cmd->add_option("--vocab-size", vocab_size, "Vocabulary budget")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one neural method and save a checkpoint");
  fs::path train_data, train_out;
  std::string train_mode = "mixed", train_method = "full", train_log;
  std::uint64_t train_split_seed = 0;
  ModelOptions train_opts;
  train_cmd->add_option("--data", train_data, "Dataset directory")->required()->check(
      CLI::ExistingDirectory);
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--mode", train_mode, "mixed, cross_user or cross_document")
      ->capture_default_str();
  train_cmd->add_option("--method", train_method, "full, no_text, no_gaze, no_knowledge, random_text")
      ->capture_default_str();
  train_cmd->add_option("--split-seed", train_split_seed)->capture_default_str();
  train_cmd->add_option("--log", train_log, "Epoch log (JSON Lines)");
  train_opts.add(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Train and score methods per split mode");
  fs::path eval_data;
  std::vector<std::string> eval_modes, eval_methods;
  std::string eval_out, eval_log;
  std::uint64_t eval_split_seed = 0;
  std::size_t eval_jobs = 1;
  ModelOptions eval_opts;
  eval_cmd->add_option("--data", eval_data, "Dataset directory")->required()->check(
      CLI::ExistingDirectory);
  eval_cmd->add_option("--mode", eval_modes, "Split mode (repeatable; default mixed)");
  eval_cmd->add_option("--method", eval_methods, "Method (repeatable; default all)");
  eval_cmd->add_option("--split-seed", eval_split_seed)->capture_default_str();
  eval_cmd->add_option("--jobs", eval_jobs, "Concurrent runs")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Report JSON path");
  eval_cmd->add_option("--log", eval_log, "Run log (JSON Lines)");
  eval_opts.add(eval_cmd);

  // threshold
  auto* thr_cmd = app.add_subcommand("threshold", "Search the decision threshold");
  fs::path thr_scores;
  thr_cmd->add_option("--scores", thr_scores, "JSON Lines of {\"p\", \"label\"}")
      ->required()
      ->check(CLI::ExistingFile);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the streaming detection service");
  fs::path serve_model, serve_layouts;
  std::string serve_dict;
  service::ServerConfig serve_cfg;
  serve_cmd->add_option("--model", serve_model, "Checkpoint")->required()->check(
      CLI::ExistingFile);
  serve_cmd->add_option("--layouts", serve_layouts, "Directory of layout JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--dictionary", serve_dict, "JSON object word -> definition")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve_cfg.host)->capture_default_str();
  serve_cmd->add_option("--port", serve_cfg.port, "0 picks a free port")->capture_default_str();

  // latency
  auto* lat_cmd = app.add_subcommand("latency", "Batch-1 inference latency");
  fs::path lat_model, lat_data;
  std::size_t lat_trials = 200, lat_warmup = 5;
  lat_cmd->add_option("--model", lat_model, "Checkpoint")->required()->check(CLI::ExistingFile);
  lat_cmd->add_option("--data", lat_data, "Dataset directory")->required()->check(
      CLI::ExistingDirectory);
  lat_cmd->add_option("--trials", lat_trials)->capture_default_str();
  lat_cmd->add_option("--warmup", lat_warmup)->capture_default_str();

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Feed a recorded stream through a live session");
  fs::path replay_model, replay_layout, replay_gaze;
  std::string replay_source = "tracker", replay_dict, replay_events;
  bool replay_check = false;
  replay_cmd->add_option("--model", replay_model, "Checkpoint")->required()->check(
      CLI::ExistingFile);
  replay_cmd->add_option("--layout", replay_layout, "Layout JSON")->required()->check(
      CLI::ExistingFile);
  replay_cmd->add_option("--gaze", replay_gaze, "Gaze JSON Lines")->required()->check(
      CLI::ExistingFile);
  replay_cmd->add_option("--source", replay_source, "tracker or webcam")
      ->check(CLI::IsMember({"tracker", "webcam"}))
      ->capture_default_str();
  replay_cmd->add_option("--dictionary", replay_dict)->check(CLI::ExistingFile);
  replay_cmd->add_option("--events", replay_events, "Write detections as JSON Lines");
  replay_cmd->add_flag("--check-offline", replay_check,
                       "Compare with the offline pipeline (exit 4 on mismatch)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      synth_cfg.emit_webcam = !no_webcam;
      return cmd_synth(synth_out, synth_cfg);
    }
    if (*build_cmd) return cmd_build(build_in, build_out, build_source, build_cfg, vocab_size);
    if (*train_cmd) {
      return cmd_train(train_data, train_out, train_mode, train_method, train_split_seed,
                       train_opts, train_log);
    }
    if (*eval_cmd) {
      if (eval_modes.empty()) eval_modes.push_back("mixed");
      return cmd_eval(eval_data, eval_modes, eval_methods, eval_split_seed, eval_jobs, eval_opts,
                      eval_out, eval_log);
    }
    if (*thr_cmd) return cmd_threshold(thr_scores);
    if (*serve_cmd) return cmd_serve(serve_model, serve_layouts, serve_dict, serve_cfg);
    if (*lat_cmd) return cmd_latency(lat_model, lat_data, lat_trials, lat_warmup);
    if (*replay_cmd) {
      return cmd_replay(replay_model, replay_layout, replay_gaze, replay_source, replay_dict,
                        replay_events, replay_check);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
